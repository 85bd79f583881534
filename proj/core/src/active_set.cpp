#include "active_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Cholesky>

#include "strongreg/prox.hpp"

namespace strongreg::detail {

// Distance from -g to lambda * subdifferential of f at w (gradient g of the smooth part).
double kkt_residual(RegKind kind, const Eigen::VectorXd& w, const Eigen::VectorXd& g,
                    double lambda) {
  switch (kind) {
    case RegKind::L2Squared: return (g + 2.0 * lambda * w).norm();
    case RegKind::L1: {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double r = w(i) != 0.0 ? g(i) + lambda * (w(i) > 0.0 ? 1.0 : -1.0)
                                     : std::max(std::abs(g(i)) - lambda, 0.0);
        acc += r * r;
      }
      return std::sqrt(acc);
    }
    case RegKind::LInf: {
      const double tau = w.size() ? w.lpNorm<Eigen::Infinity>() : 0.0;
      if (tau == 0.0) return (g - project_l1_ball(g, lambda)).norm();
      double acc = 0.0;
      std::vector<Eigen::Index> boundary;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (std::abs(w(i)) == tau) {
          boundary.push_back(i);
        } else {
          acc += g(i) * g(i);
        }
      }
      Eigen::VectorXd z(static_cast<Eigen::Index>(boundary.size()));
      for (std::size_t j = 0; j < boundary.size(); ++j) {
        const auto i = boundary[j];
        z(static_cast<Eigen::Index>(j)) = w(i) > 0.0 ? -g(i) : g(i);
      }
      acc += (z - project_simplex(z, lambda)).squaredNorm();
      return std::sqrt(acc);
    }
  }
  return 0.0;
}

Eigen::MatrixXd gram_block(const Design& design, const std::vector<Eigen::Index>& idx) {
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd A(m, m);
  if (design.has_gram()) {
    const Eigen::MatrixXd& G = design.gram();
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index c = 0; c < m; ++c) A(a, c) = G(idx[a], idx[c]);
  } else {
    Eigen::MatrixXd XS(design.n(), m);
    for (Eigen::Index a = 0; a < m; ++a) XS.col(a) = design.X().col(idx[a]);
    A.noalias() = XS.transpose() * XS;
  }
  return A;
}

// Active-set refinement: solve the stationarity system on the active set guessed from x, move
// every violating coordinate across and repeat. Empty result when it gives up.
static Eigen::VectorXd refine_l1(const Problem& p, const Eigen::VectorXd& x, int max_rounds) {
  const Eigen::Index d = x.size();
  const double half = 0.5 * p.reg.lambda;
  Eigen::VectorXd sign = x.cwiseSign();
  for (int round = 0; round < max_rounds; ++round) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < d; ++i)
      if (sign(i) != 0.0) support.push_back(i);
    const auto m = static_cast<Eigen::Index>(support.size());
    if (m > p.design.n()) return {};

    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    if (m > 0) {
      Eigen::VectorXd rhs(m);
      for (Eigen::Index a = 0; a < m; ++a) rhs(a) = p.b(support[a]) - half * sign(support[a]);
      Eigen::LLT<Eigen::MatrixXd> llt(gram_block(p.design, support));
      if (llt.info() != Eigen::Success) return {};
      const Eigen::VectorXd ws = llt.solve(rhs);
      for (Eigen::Index a = 0; a < m; ++a) w(support[a]) = ws(a);
    }
    Eigen::VectorXd hw;
    p.design.gram_apply(w, hw);
    const Eigen::VectorXd corr = p.b - hw;

    bool changed = false;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (sign(i) != 0.0 && w(i) * sign(i) <= 0.0) {
        sign(i) = 0.0;
        changed = true;
      } else if (sign(i) == 0.0 && std::abs(corr(i)) > half) {
        sign(i) = corr(i) > 0.0 ? 1.0 : -1.0;
        changed = true;
      }
    }
    if (!changed) return w;
  }
  return {};
}

static Eigen::VectorXd refine_linf(const Problem& p, const Eigen::VectorXd& x, int max_rounds) {
  const Eigen::Index d = x.size();
  const double half = 0.5 * p.reg.lambda;
  const double tau0 = x.lpNorm<Eigen::Infinity>();
  if (tau0 == 0.0) return {};
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < d; ++i)
    if (std::abs(x(i)) == tau0) sigma(i) = x(i) > 0.0 ? 1.0 : -1.0;

  for (int round = 0; round < max_rounds; ++round) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < d; ++i)
      if (sigma(i) == 0.0) free.push_back(i);
    const auto m = static_cast<Eigen::Index>(free.size());
    if (m == d || m + 1 > p.design.n()) return {};

    // unknowns: free weights and the common boundary magnitude
    Eigen::VectorXd hs;
    p.design.gram_apply(sigma, hs);
    Eigen::MatrixXd A(m + 1, m + 1);
    A.topLeftCorner(m, m) = gram_block(p.design, free);
    Eigen::VectorXd rhs(m + 1);
    for (Eigen::Index a = 0; a < m; ++a) {
      A(a, m) = A(m, a) = hs(free[a]);
      rhs(a) = p.b(free[a]);
    }
    A(m, m) = sigma.dot(hs);
    rhs(m) = sigma.dot(p.b) - half;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) return {};
    const Eigen::VectorXd z = llt.solve(rhs);
    const double t = z(m);
    if (!(t > 0.0)) return {};

    Eigen::VectorXd w = t * sigma;
    for (Eigen::Index a = 0; a < m; ++a) w(free[a]) = z(a);
    Eigen::VectorXd hw;
    p.design.gram_apply(w, hw);
    const Eigen::VectorXd corr = p.b - hw;

    // free entries past the bound join the boundary
    bool changed = false;
    Eigen::Index free_after = m;
    for (Eigen::Index a = 0; a < m; ++a) {
      if (std::abs(z(a)) > t) {
        sigma(free[a]) = z(a) > 0.0 ? 1.0 : -1.0;
        --free_after;
        changed = true;
      }
    }
    // boundary entries with a wrong-signed multiplier leave, worst first, while the system
    // stays square or overdetermined
    std::vector<std::pair<double, Eigen::Index>> leaving;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (sigma(i) != 0.0 && std::abs(w(i)) == t && sigma(i) * corr(i) < 0.0) {
        leaving.emplace_back(sigma(i) * corr(i), i);
      }
    }
    std::sort(leaving.begin(), leaving.end());
    const Eigen::Index capacity = p.design.n() - 1;
    for (const auto& [violation, i] : leaving) {
      if (free_after >= capacity) break;
      sigma(i) = 0.0;
      ++free_after;
      changed = true;
    }
    if (!changed && !leaving.empty()) {
      // full: swap the worst boundary violator with the free entry nearest the bound
      Eigen::Index nearest = -1;
      double best = -1.0;
      for (Eigen::Index a = 0; a < m; ++a) {
        const double ratio = std::abs(z(a)) / t;
        if (ratio > best) {
          best = ratio;
          nearest = a;
        }
      }
      if (nearest < 0) return {};
      sigma(leaving.front().second) = 0.0;
      sigma(free[nearest]) = z(nearest) > 0.0 ? 1.0 : -1.0;
      changed = true;
    }
    if (!changed) {
      // boundary entries must equal the maximum exactly for the optimality test
      for (Eigen::Index i = 0; i < d; ++i)
        if (sigma(i) != 0.0) w(i) = t * sigma(i);
      return w;
    }
  }
  return {};
}

UpdatableCholesky::UpdatableCholesky(Eigen::Index capacity) : L_(capacity, capacity) {}

bool UpdatableCholesky::append(const Eigen::VectorXd& col, double diag) {
  if (m_ >= L_.rows()) return false;
  Eigen::VectorXd l = col;
  if (m_ > 0) L_.topLeftCorner(m_, m_).triangularView<Eigen::Lower>().solveInPlace(l);
  const double rest = diag - l.squaredNorm();
  if (!(rest > 1e-12 * std::max(diag, 1e-300))) return false;
  L_.row(m_).head(m_) = l.transpose();
  L_(m_, m_) = std::sqrt(rest);
  ++m_;
  return true;
}

void UpdatableCholesky::remove(Eigen::Index k) {
  for (Eigen::Index i = k; i + 1 < m_; ++i) L_.row(i).head(i + 2) = L_.row(i + 1).head(i + 2);
  // rows k.. now carry one entry above the diagonal, rotate it away column pair by column pair
  for (Eigen::Index j = k; j + 1 < m_; ++j) {
    const double a = L_(j, j), b = L_(j, j + 1);
    const double r = std::hypot(a, b);
    const double c = a / r, s = b / r;
    for (Eigen::Index i = j; i + 1 < m_; ++i) {
      const double x = L_(i, j), y = L_(i, j + 1);
      L_(i, j) = c * x + s * y;
      L_(i, j + 1) = -s * x + c * y;
    }
    L_(j, j + 1) = 0.0;
  }
  --m_;
}

Eigen::VectorXd UpdatableCholesky::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = rhs;
  if (m_ == 0) return x;
  const auto L = L_.topLeftCorner(m_, m_);
  L.triangularView<Eigen::Lower>().solveInPlace(x);
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

namespace {

Eigen::VectorXd gram_column(const Design& design, const std::vector<Eigen::Index>& idx,
                            Eigen::Index j) {
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd col(m);
  if (design.has_gram()) {
    const Eigen::MatrixXd& G = design.gram();
    for (Eigen::Index a = 0; a < m; ++a) col(a) = G(idx[a], j);
  } else {
    const auto xj = design.X().col(j);
    for (Eigen::Index a = 0; a < m; ++a) col(a) = design.X().col(idx[a]).dot(xj);
  }
  return col;
}

double gram_diag(const Design& design, Eigen::Index j) {
  return design.has_gram() ? design.gram()(j, j) : design.X().col(j).squaredNorm();
}

}  // namespace

// Along a segment with fixed free set F and boundary signs s the solution is
//   w_F = p - t q,  w_B = t s,  with  G_FF p = b_F,  G_FF q = (G s)_F,
// and the half-penalty  mu = sᵀb - uᵀp - t kappa  falls linearly in the common magnitude t.
// Segments end when a free entry reaches the bound or a boundary multiplier s_i corr_i vanishes.
Eigen::VectorXd linf_homotopy(const Problem& p, const Eigen::VectorXd* x, int max_events) {
  const Design& design = p.design;
  const Eigen::Index d = design.d();
  const Eigen::Index n = design.n();
  const double mu_target = 0.5 * p.reg.lambda;
  const double bscale = 1.0 + p.b.lpNorm<Eigen::Infinity>();
  if (d == 0) return {};

  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(d);
  std::vector<Eigen::Index> free;
  double tau = 0.0;
  if (x && x->lpNorm<Eigen::Infinity>() > 0.0) {
    if (x->size() != d) return {};
    tau = x->lpNorm<Eigen::Infinity>();
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs((*x)(i)) >= tau * (1.0 - 1e-9)) {
        sigma(i) = (*x)(i) > 0.0 ? 1.0 : -1.0;
      } else {
        free.push_back(i);
      }
    }
  } else {
    if (p.b.lpNorm<1>() <= mu_target) return Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < d; ++i) sigma(i) = p.b(i) >= 0.0 ? 1.0 : -1.0;
  }
  if (static_cast<Eigen::Index>(free.size()) + 1 > n) return {};

  UpdatableCholesky chol(std::min(n, d));
  auto rebuild = [&]() {
    chol.clear();
    std::vector<Eigen::Index> seen;
    for (const Eigen::Index i : free) {
      if (!chol.append(gram_column(design, seen, i), gram_diag(design, i))) return false;
      seen.push_back(i);
    }
    return true;
  };
  if (!rebuild()) return {};

  const bool from_solution = !free.empty() || tau > 0.0;
  int dir = 0;  // +1: t grows (lambda falls)
  Eigen::Index last_moved = -1;
  Eigen::VectorXd gs, wp, wd, c0, c1;
  for (int event = 0; event <= max_events; ++event) {
    if (event > 0 && event % 100 == 0 && !rebuild()) return {};
    const auto m = static_cast<Eigen::Index>(free.size());
    design.gram_apply(sigma, gs);
    Eigen::VectorXd bF(m), u(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      bF(a) = p.b(free[a]);
      u(a) = gs(free[a]);
    }
    const Eigen::VectorXd pv = chol.solve(bF);
    const Eigen::VectorXd qv = chol.solve(u);
    const double kappa = sigma.dot(gs) - u.dot(qv);
    if (!(kappa > 0.0)) return {};
    const double offset = sigma.dot(p.b) - u.dot(pv);
    const double tau_target = (offset - mu_target) / kappa;

    if (dir == 0) {
      if (from_solution) {
        // the starting point must satisfy the optimality conditions of its own structure
        const double mu0 = offset - tau * kappa;
        if (!(mu0 > 0.0)) return {};
        for (Eigen::Index a = 0; a < m; ++a) {
          if (std::abs(pv(a) - tau * qv(a)) > tau * (1.0 + 1e-9)) return {};
        }
      }
      dir = tau_target >= tau ? 1 : -1;
    }

    wp = Eigen::VectorXd::Zero(d);
    wd = sigma;
    for (Eigen::Index a = 0; a < m; ++a) {
      wp(free[a]) = pv(a);
      wd(free[a]) = -qv(a);
    }
    design.gram_apply(wp, c0);
    c0 = p.b - c0;
    design.gram_apply(wd, c1);
    if (from_solution && event == 0) {
      for (Eigen::Index i = 0; i < d; ++i)
        if (sigma(i) != 0.0 && sigma(i) * (c0(i) - tau * c1(i)) < -1e-7 * bscale) return {};
    }

    // nearest event in the direction of travel
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index hit = -1;
    double hit_sign = 0.0;
    auto consider = [&](double root, double slope, Eigen::Index i, double s) {
      // slack decreasing along dir and reached at root
      if (!(slope * dir < 0.0)) return;
      const double step = (root - tau) * dir;
      if (!(step >= 0.0)) return;
      if (i == last_moved && step <= 1e-12 * std::max(1.0, tau)) return;
      if (step < best) {
        best = step;
        hit = i;
        hit_sign = s;
      }
    };
    for (Eigen::Index a = 0; a < m; ++a) {
      // tau - w_a = tau (1 + q_a) - p_a  and  tau + w_a = tau (1 - q_a) + p_a
      const double up = 1.0 + qv(a), dn = 1.0 - qv(a);
      if (up != 0.0) consider(pv(a) / up, up, free[a], 1.0);
      if (dn != 0.0) consider(-pv(a) / dn, dn, free[a], -1.0);
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      if (sigma(i) == 0.0 || c1(i) == 0.0) continue;
      consider(c0(i) / c1(i), -sigma(i) * c1(i), i, 0.0);
    }

    const double to_target = (tau_target - tau) * dir;
    if (to_target <= best) {
      tau = std::max(tau_target, 0.0);
      Eigen::VectorXd w = wp + tau * wd;
      for (Eigen::Index i = 0; i < d; ++i)
        if (sigma(i) != 0.0) w(i) = tau * sigma(i);
      return w;
    }
    if (hit < 0) return {};
    tau += dir * best;
    if (tau <= 0.0) return Eigen::VectorXd::Zero(d);
    last_moved = hit;

    if (hit_sign != 0.0) {
      // free entry reaches the bound
      const auto pos = std::find(free.begin(), free.end(), hit) - free.begin();
      chol.remove(pos);
      free.erase(free.begin() + pos);
      sigma(hit) = hit_sign;
    } else {
      // boundary entry released
      if (m + 2 > n) return {};
      if (!chol.append(gram_column(design, free, hit), gram_diag(design, hit))) return {};
      free.push_back(hit);
      sigma(hit) = 0.0;
    }
  }
  return {};
}

Eigen::VectorXd refine(const Problem& p, const Eigen::VectorXd& x, int max_rounds) {
  switch (p.reg.kind) {
    case RegKind::L1: return refine_l1(p, x, max_rounds);
    case RegKind::LInf: {
      const Eigen::VectorXd h = linf_homotopy(p, &x, 100 * max_rounds);
      if (h.size() > 0) {
        // one active-set pass re-solves the final structure from scratch
        const Eigen::VectorXd exact = refine_linf(p, h, 2);
        return exact.size() > 0 ? exact : h;
      }
      return refine_linf(p, x, max_rounds);
    }
    case RegKind::L2Squared: return {};
  }
  return {};
}

}  // namespace strongreg::detail
