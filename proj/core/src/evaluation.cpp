#include "strongreg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "strongreg/error.hpp"
#include "strongreg/linalg.hpp"
#include "strongreg/theory.hpp"

namespace strongreg {

namespace {

int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  int best = 0;
  for (int l = 1; l < scores.size(); ++l)
    if (scores(l) > scores(best)) best = l;
  return best;
}

ErrorEstimate bernoulli(double p, std::int64_t m) {
  return {p, m > 0 ? std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(m)) : 0.0, m};
}

}  // namespace

int predict(const WeightMatrix& W, const Eigen::VectorXd& x) {
  if (W.rows() != x.size()) throw Error(ErrorCode::DimensionMismatch, "predict: x size differs from d");
  if (W.cols() == 0) throw Error(ErrorCode::DimensionMismatch, "predict: no classes");
  return argmax_lowest(W.transpose() * x);
}

Labels predict_all(const WeightMatrix& W, const Eigen::MatrixXd& X) {
  if (W.rows() != X.cols()) throw Error(ErrorCode::DimensionMismatch, "predict: X width differs from d");
  if (W.cols() == 0) throw Error(ErrorCode::DimensionMismatch, "predict: no classes");
  const Eigen::MatrixXd scores = X * W;
  Labels out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_lowest(scores.row(i).transpose());
  return out;
}

ErrorEstimate empirical_error(const WeightMatrix& W, const Dataset& test) {
  if (test.X.rows() == 0) throw Error(ErrorCode::EmptyTestSet, "empirical_error: empty test set");
  const Labels pred = predict_all(W, test.X);
  std::int64_t wrong = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) wrong += pred[i] != test.true_labels[i];
  const auto m = static_cast<std::int64_t>(pred.size());
  return bernoulli(static_cast<double>(wrong) / static_cast<double>(m), m);
}

QkEstimator::QkEstimator(int k, std::int64_t samples, RngStream& rng) : k_(k) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "Q_k needs k >= 2");
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "Q_k needs at least one sample");
  const double shift = 1.0 / (1.0 + std::sqrt(static_cast<double>(k)));
  minima_.resize(static_cast<std::size_t>(samples));
  std::vector<double> z(static_cast<std::size_t>(k - 1));
  for (auto& m : minima_) {
    double sum = 0.0;
    for (auto& v : z) {
      v = rng.normal();
      sum += v;
    }
    m = *std::min_element(z.begin(), z.end()) + shift * sum;
  }
  std::sort(minima_.begin(), minima_.end());
}

ErrorEstimate QkEstimator::operator()(double a) const {
  const double threshold = -std::sqrt(2.0) * a;
  const auto below = std::lower_bound(minima_.begin(), minima_.end(), threshold) - minima_.begin();
  const auto m = samples();
  return bernoulli(static_cast<double>(below) / static_cast<double>(m), m);
}

ErrorEstimate qk(double a, int k, std::int64_t mc_samples, RngStream& rng) {
  return QkEstimator(k, mc_samples, rng)(a);
}

const QkEstimator& default_qk(int k) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QkEstimator>> cache;
  const std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[k];
  if (!slot) {
    RngStream rng(0x5eed0f0c, static_cast<std::uint64_t>(k));
    slot = std::make_unique<QkEstimator>(k, 200000, rng);
  }
  return *slot;
}

double mean_pair_margin(const WeightMatrix& W, const Eigen::MatrixXd& M, double sigma) {
  if (M.rows() != W.cols() || M.cols() != W.rows()) throw Error(ErrorCode::DimensionMismatch, "means shape differs from W");
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  const Eigen::Index k = W.cols();
  double sum = 0.0;
  int pairs = 0;
  for (Eigen::Index l = 0; l < k; ++l) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == l) continue;
      const Eigen::VectorXd diff = W.col(l) - W.col(j);
      const double norm = diff.norm();
      if (norm == 0.0) continue;
      sum += M.row(l).dot(diff) / (sigma * norm);
      ++pairs;
    }
  }
  if (pairs == 0) throw Error(ErrorCode::DegenerateWeights, "all weight columns are equal");
  return sum / pairs;
}

ErrorEstimate exact_error(const WeightMatrix& W, const Eigen::MatrixXd& M, double sigma,
                          std::int64_t mc_samples, RngStream& rng) {
  if (M.rows() != W.cols() || M.cols() != W.rows()) throw Error(ErrorCode::DimensionMismatch, "means shape differs from W");
  if (mc_samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  const Eigen::Index k = W.cols();
  // Wᵀg ~ N(0, WᵀW); a symmetric square root also covers rank-deficient W
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W.transpose() * W);
  const Eigen::MatrixXd root =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::MatrixXd centers = M * W;  // row l: μ_lᵀW

  double total = 0.0, var = 0.0;
  Eigen::VectorXd z(k), scores(k);
  for (Eigen::Index l = 0; l < k; ++l) {
    std::int64_t wrong = 0;
    for (std::int64_t s = 0; s < mc_samples; ++s) {
      for (Eigen::Index j = 0; j < k; ++j) z(j) = rng.normal();
      scores.noalias() = centers.row(l).transpose() + sigma * (root * z);
      wrong += argmax_lowest(scores) != l;
    }
    const double p = static_cast<double>(wrong) / static_cast<double>(mc_samples);
    total += p;
    var += p * (1.0 - p) / static_cast<double>(mc_samples);
  }
  const double kk = static_cast<double>(k);
  return {total / kk, std::sqrt(var) / kk, mc_samples * k};
}

AnalyticError analytic_error(const WeightMatrix& W, const Eigen::MatrixXd& M, double sigma, int k,
                             std::int64_t mc_samples, RngStream& rng) {
  if (W.cols() != k) throw Error(ErrorCode::DimensionMismatch, "W has the wrong number of classes");
  AnalyticError out;
  out.margin = mean_pair_margin(W, M, sigma);
  const QkEstimator est(k, mc_samples, rng);
  out.pairwise = est(out.margin);
  out.exact = exact_error(W, M, sigma, mc_samples, rng);
  return out;
}

namespace {

// Restarted FISTA for smooth(w) + λ f(w) with a known gradient Lipschitz bound.
template <class Smooth>
Eigen::VectorXd minimize_composite(const Smooth& smooth, const RegularizerSpec& reg, double lip,
                                   Eigen::VectorXd x, double tol, int max_iter) {
  auto total = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd unused;
    return smooth(w, unused, false) + reg.lambda * regularizer_value(reg.kind, w);
  };
  Eigen::VectorXd y = x, grad, xn;
  double fx = total(x);
  double t = 1.0;
  bool fresh = true;
  for (int iter = 0; iter < max_iter; ++iter) {
    smooth(y, grad, true);
    xn = regularizer_prox(reg.kind, y - grad / lip, reg.lambda / lip);
    const double fn = total(xn);
    if (fn > fx && !fresh) {
      y = x;
      t = 1.0;
      fresh = true;
      continue;
    }
    fresh = false;
    const double step = (xn - y).norm();
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = xn + ((t - 1.0) / tn) * (xn - x);
    x.swap(xn);
    fx = fn;
    t = tn;
    if (lip * step <= tol * (1.0 + x.norm())) return x;
  }
  throw Error(ErrorCode::NonConvergence, "sandwich: minimization hit max_iter");
}

}  // namespace

SandwichResult sandwich_check(const Dataset& dataset, double c, const RegularizerSpec& reg,
                              double rho, RngStream& rng, int label) {
  const int k = dataset.k(), n = dataset.n(), d = dataset.d();
  if (n < k + 2) throw Error(ErrorCode::InvalidArgument, "sandwich needs n >= k + 2");
  if (label < 0 || label >= k) throw Error(ErrorCode::LabelOutOfRange, "sandwich label");
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
  const StConstants st = st_constants(c, k);

  // noise rows A = X - ỸM
  const Eigen::MatrixXd A = dataset.X - one_hot(dataset.true_labels, k) * dataset.M;
  const double nk = static_cast<double>(n) / k;
  const double scale = std::sqrt(static_cast<double>(k) / n);
  Eigen::MatrixXd B(k + 2, d);
  Eigen::VectorXd v(k + 2);
  for (int i = 0; i < k; ++i) {
    B.row(i) = dataset.M.row(i) + scale * A.row(i);
    v(i) = i == label ? 1.0 - c : c / (k - 1);
  }
  B.row(k) = scale * A.row(k);
  B.row(k + 1) = scale * A.row(k + 1);
  v(k) = st.s;
  v(k + 1) = st.t;

  // lower and upper are least squares plus regularizer: ||X'w - y'||² + λ f(w)
  const double root_nk = std::sqrt(nk);
  const Eigen::MatrixXd Xl = root_nk * B;
  const Eigen::VectorXd yl = root_nk * v;
  Eigen::MatrixXd Xu(k + 2 + d, d);
  Xu << Xl, std::sqrt(rho) * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd yu = Eigen::VectorXd::Zero(k + 2 + d);
  yu.head(k + 2) = yl;

  SolverOptions opts;
  opts.tol = 1e-11;
  opts.max_iter = 200000;
  const Design dl(Xl), du(Xu);
  const Solution lo = solve_proximal(dl, yl, reg, opts);
  const Solution up = solve_proximal(du, yu, reg, opts);

  Eigen::VectorXd g(d);
  const double sd = std::sqrt(rho / n);
  for (int i = 0; i < d; ++i) g(i) = sd * rng.normal();
  const double root_rho = std::sqrt(rho);
  const Eigen::MatrixXd H = 2.0 * Xl.transpose() * Xl;
  const Eigen::VectorXd hb = 2.0 * Xl.transpose() * yl;
  const double yy = yl.squaredNorm();
  auto smooth = [&](const Eigen::VectorXd& w, Eigen::VectorXd& grad, bool want_grad) {
    const double norm = w.norm();
    const double h = std::max(w.dot(g) + root_rho * norm, 0.0);
    const Eigen::VectorXd Hw = H * w;
    if (want_grad) {
      grad = Hw - hb;
      // h > 0 implies w != 0
      if (h > 0.0) grad += 2.0 * h * (g + (root_rho / norm) * w);
    }
    return h * h + 0.5 * w.dot(Hw) - hb.dot(w) + yy;
  };
  const double gn = g.norm() + root_rho;
  const double lip = max_gram_eigenvalue(Xl) * 2.0 + 2.0 * gn * gn + 2.0 * gn * root_rho;

  auto mid_total = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd unused;
    return smooth(w, unused, false) + reg.lambda * regularizer_value(reg.kind, w);
  };
  const Eigen::VectorXd start = mid_total(lo.w) < mid_total(up.w) ? lo.w : up.w;
  const Eigen::VectorXd wm = minimize_composite(smooth, reg, lip, start, 1e-11, 500000);

  SandwichResult out;
  out.lower = lo.report.final_objective;
  out.upper = up.report.final_objective;
  out.mid = std::min({mid_total(wm), mid_total(lo.w), mid_total(up.w)});
  out.f_zero = yy;
  return out;
}

}  // namespace strongreg
