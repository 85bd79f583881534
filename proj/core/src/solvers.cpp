#include "strongreg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "strongreg/error.hpp"
#include "strongreg/linalg.hpp"
#include "strongreg/prox.hpp"
#include "active_set.hpp"

namespace strongreg {

std::string to_string(RegKind kind) {
  switch (kind) {
    case RegKind::L2Squared: return "l2";
    case RegKind::L1: return "l1";
    case RegKind::LInf: return "linf";
  }
  return "unknown";
}

RegKind parse_reg_kind(const std::string& name) {
  if (name == "l2" || name == "ridge") return RegKind::L2Squared;
  if (name == "l1" || name == "lasso") return RegKind::L1;
  if (name == "linf") return RegKind::LInf;
  throw Error(ErrorCode::ConfigError, "unknown regularizer '" + name + "'");
}

double regularizer_value(RegKind kind, const Eigen::VectorXd& w) {
  switch (kind) {
    case RegKind::L2Squared: return w.squaredNorm();
    case RegKind::L1: return w.lpNorm<1>();
    case RegKind::LInf: return w.size() ? w.lpNorm<Eigen::Infinity>() : 0.0;
  }
  return 0.0;
}

double objective_value(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                       const RegularizerSpec& reg) {
  return (X * w - y).squaredNorm() + reg.lambda * regularizer_value(reg.kind, w);
}

// ---------------------------------------------------------------------------------------------

namespace {
constexpr Eigen::Index kMaxGramDim = 6000;
}

Design::Design(const Eigen::MatrixXd& X) : X_(&X), use_gram_(X.cols() <= kMaxGramDim) {}

const Eigen::MatrixXd& Design::gram() const {
  std::call_once(gram_once_, [&] {
    gram_.resize(d(), d());
    gram_.setZero();
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(X_->transpose());
    gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
  });
  return gram_;
}

const Eigen::MatrixXd& Design::kernel() const {
  std::call_once(kernel_once_, [&] {
    kernel_.resize(n(), n());
    kernel_.setZero();
    kernel_.selfadjointView<Eigen::Lower>().rankUpdate(*X_);
    kernel_.triangularView<Eigen::StrictlyUpper>() = kernel_.transpose();
  });
  return kernel_;
}

double Design::lipschitz() const {
  std::call_once(lip_once_, [&] {
    const Eigen::MatrixXd& small = d() <= n() ? gram() : kernel();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(small, Eigen::EigenvaluesOnly);
    lipschitz_ = 2.0 * std::max(eig.eigenvalues().maxCoeff(), 0.0);
  });
  return lipschitz_;
}

bool Design::has_gram() const { return use_gram_; }

void Design::gram_apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  std::vector<Eigen::Index> support;
  support.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (x(j) != 0.0) support.push_back(j);
  const auto nnz = static_cast<Eigen::Index>(support.size());

  out.setZero(d());
  if (nnz == 0) return;
  if (use_gram_ && d() * nnz <= n() * nnz + n() * d()) {
    const Eigen::MatrixXd& G = gram();
    if (nnz == d()) {
      out.noalias() = G.selfadjointView<Eigen::Lower>() * x;
    } else {
      for (auto j : support) out += G.col(j) * x(j);
    }
    return;
  }
  Eigen::VectorXd u;
  if (nnz == d()) {
    u.noalias() = (*X_) * x;
  } else {
    u.setZero(n());
    for (auto j : support) u += X_->col(j) * x(j);
  }
  out.noalias() = X_->transpose() * u;
}

// ---------------------------------------------------------------------------------------------

Solution solve_ridge(const Design& design, const Eigen::VectorXd& y, double lambda) {
  if (y.size() != design.n()) throw Error(ErrorCode::DimensionMismatch, "solve_ridge: y size");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
  const Eigen::MatrixXd& X = design.X();
  const Eigen::VectorXd b = X.transpose() * y;

  Solution sol;
  if (design.d() <= design.n()) {
    Eigen::MatrixXd A = design.gram();
    A.diagonal().array() += lambda;
    sol.w = solve_spd(A, b);
  } else {
    Eigen::MatrixXd K = design.kernel();
    K.diagonal().array() += lambda;
    sol.w = X.transpose() * solve_spd(K, y);
  }

  const Eigen::VectorXd r = X.transpose() * (X * sol.w) + lambda * sol.w - b;
  sol.report.iterations = 1;
  sol.report.kkt_residual = r.norm();
  sol.report.kkt_tolerance = 1e-8 * b.norm();
  sol.report.converged = sol.report.kkt_residual <= sol.report.kkt_tolerance;
  sol.report.final_objective = (X * sol.w - y).squaredNorm() + lambda * sol.w.squaredNorm();
  return sol;
}

Solution solve_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  return solve_ridge(Design(X), y, lambda);
}

// ---------------------------------------------------------------------------------------------

using detail::Problem;
using detail::kkt_residual;
using detail::refine;

Eigen::VectorXd regularizer_prox(RegKind kind, const Eigen::VectorXd& v, double c) {
  switch (kind) {
    case RegKind::L2Squared: return v / (1.0 + 2.0 * c);
    case RegKind::L1: return soft_threshold(v, c);
    case RegKind::LInf: return prox_linf(v, c);
  }
  return v;
}

Solution solve_proximal(const Design& design, const Eigen::VectorXd& y, const RegularizerSpec& reg,
                        const SolverOptions& opts, const Eigen::VectorXd* warm_start) {
  if (y.size() != design.n()) throw Error(ErrorCode::DimensionMismatch, "y size differs from n");
  if (!(reg.lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  const Eigen::Index d = design.d();

  const Eigen::VectorXd b = design.X().transpose() * y;
  const Problem prob{design, b, y.squaredNorm(), reg};
  const double L = design.lipschitz();

  Solution sol;
  auto finish = [&](const Eigen::VectorXd& w, const Eigen::VectorXd& hw, int iters,
                    bool converged) {
    sol.w = w;
    sol.report.iterations = iters;
    sol.report.final_objective = prob.objective(w, hw);
    sol.report.kkt_residual = kkt_residual(reg.kind, w, prob.gradient(hw), reg.lambda);
    sol.report.kkt_tolerance = 2.0 * opts.tol * (1.0 + w.norm());
    sol.report.converged = converged;
    return sol;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  if (warm_start) {
    if (warm_start->size() != d) throw Error(ErrorCode::DimensionMismatch, "warm start size");
    x = *warm_start;
  }
  Eigen::VectorXd hx;
  design.gram_apply(x, hx);
  if (L == 0.0) {
    // X = 0: every w has the same loss, the regularizer alone decides
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    return finish(zero, zero, 0, true);
  }
  double fx = prob.objective(x, hx);
  {
    // never start worse than w = 0
    const double f0 = prob.yy;
    if (f0 < fx) {
      x.setZero();
      hx.setZero(d);
      fx = f0;
    }
  }

  auto accept = [&](const Eigen::VectorXd& cand, Eigen::VectorXd& hc) {
    if (cand.size() != d) return false;
    design.gram_apply(cand, hc);
    const double kkt = kkt_residual(reg.kind, cand, prob.gradient(hc), reg.lambda);
    return kkt <= 2.0 * opts.tol * (1.0 + cand.norm());
  };
  if (opts.polish) {
    Eigen::VectorXd hc;
    // the previous solution's active set is usually a few moves from the new one
    if (warm_start) {
      const Eigen::VectorXd cand = refine(prob, x, opts.polish_rounds);
      if (accept(cand, hc)) return finish(cand, hc, 0, true);
    }
    if (reg.kind == RegKind::LInf) {
      const Eigen::VectorXd cand =
          detail::linf_homotopy(prob, nullptr, static_cast<int>(std::min<Eigen::Index>(10 * d, 1 << 20)));
      if (accept(cand, hc)) return finish(cand, hc, 0, true);
    }
  }

  Eigen::VectorXd yv = x, hy = hx, xn, hxn;
  double t = 1.0;
  bool fresh = true;  // yv == x, so the next step is a plain proximal-gradient step
  int next_polish = 1;
  int polish_gap = std::max(1, opts.polish_every);
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    const Eigen::VectorXd g = prob.gradient(hy);
    xn = regularizer_prox(reg.kind, yv - g / L, reg.lambda / L);
    const double gm = L * (yv - xn).norm();
    design.gram_apply(xn, hxn);
    const double fn = prob.objective(xn, hxn);

    if (fn > fx && !fresh) {
      yv = x;
      hy = hx;
      t = 1.0;
      fresh = true;
      continue;
    }

    const double scale = opts.tol * (1.0 + xn.norm());
    if (gm <= scale) {
      const double kkt = kkt_residual(reg.kind, xn, prob.gradient(hxn), reg.lambda);
      if (kkt <= 2.0 * scale) return finish(xn, hxn, iter, true);
    }

    if (opts.polish && iter >= next_polish) {
      Eigen::VectorXd hc;
      const Eigen::VectorXd cand = refine(prob, xn, opts.polish_rounds);
      if (accept(cand, hc)) return finish(cand, hc, iter, true);
      next_polish = iter + polish_gap;
      polish_gap = std::min(2 * polish_gap, 50 * opts.polish_every);
    }

    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / tn;
    yv = xn + beta * (xn - x);
    hy = hxn + beta * (hxn - hx);
    x.swap(xn);
    hx.swap(hxn);
    fx = fn;
    t = tn;
    fresh = beta == 0.0;
  }
  throw Error(ErrorCode::NonConvergence,
              to_string(reg.kind) + " solver hit max_iter at lambda " + std::to_string(reg.lambda));
}

Solution solve_lasso(const Design& design, const Eigen::VectorXd& y, double lambda,
                     const SolverOptions& opts, const Eigen::VectorXd* warm_start) {
  return solve_proximal(design, y, {RegKind::L1, lambda}, opts, warm_start);
}

Solution solve_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, double tol,
                     int max_iter) {
  SolverOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  return solve_lasso(Design(X), y, lambda, opts);
}

Solution solve_linf(const Design& design, const Eigen::VectorXd& y, double lambda,
                    const SolverOptions& opts, const Eigen::VectorXd* warm_start) {
  return solve_proximal(design, y, {RegKind::LInf, lambda}, opts, warm_start);
}

Solution solve_linf(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, double tol,
                    int max_iter) {
  SolverOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  return solve_linf(Design(X), y, lambda, opts);
}

// ---------------------------------------------------------------------------------------------

TrainResult train_all(const Design& design, const Eigen::MatrixXd& Y, const RegularizerSpec& reg,
                      const TrainOptions& opts) {
  if (Y.rows() != design.n()) throw Error(ErrorCode::DimensionMismatch, "Y rows differ from n");
  const Eigen::Index k = Y.cols();
  if (opts.warm_start && (opts.warm_start->rows() != design.d() || opts.warm_start->cols() != k)) {
    throw Error(ErrorCode::DimensionMismatch, "warm start shape");
  }
  TrainResult out;
  out.W.resize(design.d(), k);
  out.reports.resize(static_cast<std::size_t>(k));

  // products shared by all classes are built before any worker starts
  if (reg.kind == RegKind::L2Squared) {
    design.d() <= design.n() ? (void)design.gram() : (void)design.kernel();
  } else {
    design.lipschitz();
    if (design.has_gram()) design.gram();
  }

  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(k));
  auto solve_class = [&](Eigen::Index l) {
    try {
      const Eigen::VectorXd y = Y.col(l);
      Solution sol;
      if (reg.kind == RegKind::L2Squared) {
        sol = solve_ridge(design, y, reg.lambda);
      } else {
        Eigen::VectorXd warm;
        if (opts.warm_start) warm = opts.warm_start->col(l);
        sol = solve_proximal(design, y, reg, opts.solver, opts.warm_start ? &warm : nullptr);
      }
      out.W.col(l) = sol.w;
      out.reports[static_cast<std::size_t>(l)] = sol.report;
    } catch (const Error& e) {
      failures[static_cast<std::size_t>(l)] =
          std::make_exception_ptr(Error(e.code(), "class " + std::to_string(l) + ": " + e.what()));
    }
  };

  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(k)));
  if (workers == 1) {
    for (Eigen::Index l = 0; l < k; ++l) solve_class(l);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (Eigen::Index l = w; l < k; l += workers) solve_class(l);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
  return out;
}

TrainResult train_all(const Dataset& dataset, const RegularizerSpec& reg, const TrainOptions& opts) {
  const Design design(dataset.X);
  return train_all(design, one_hot(dataset.labels, dataset.k()), reg, opts);
}

// ---------------------------------------------------------------------------------------------

void write_weights_csv(const WeightMatrix& W, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
  for (Eigen::Index l = 0; l < W.cols(); ++l) out << (l ? "," : "") << 'w' << l;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index l = 0; l < W.cols(); ++l) out << (l ? "," : "") << W(i, l);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

WeightMatrix read_weights_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "empty weight file");
  const auto k = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    Eigen::Index cols = 0;
    while (std::getline(ss, field, ',')) {
      try {
        values.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw Error(ErrorCode::IoError, "malformed weight '" + field + "'");
      }
      ++cols;
    }
    if (cols != k) throw Error(ErrorCode::IoError, "ragged weight row");
    ++rows;
  }
  WeightMatrix W(rows, k);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index l = 0; l < k; ++l) W(i, l) = values[static_cast<std::size_t>(i * k + l)];
  return W;
}

}  // namespace strongreg
