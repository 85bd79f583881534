#include "strongreg/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "strongreg/error.hpp"
#include "strongreg/gaussian.hpp"
#include "strongreg/nelder_mead.hpp"

namespace strongreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rho_of(const GmmConfig& cfg) { return cfg.n * cfg.sigma * cfg.sigma; }

Gammas to_gammas(const Eigen::VectorXd& v) { return {v(0), v(1), v(2), v(3)}; }

double fill_error(TheoryPrediction& p, const GmmConfig& cfg, const QkEstimator& qk) {
  if (qk.k() != cfg.k) throw Error(ErrorCode::InvalidArgument, "Q_k estimator built for another k");
  p.margin_arg = p.margin_arg_raw / cfg.sigma;
  const ErrorEstimate e = qk(p.margin_arg);
  p.error = e.value;
  p.error_stderr = e.std_error;
  return p.error;
}

// Nelder-Mead from (0.1, 0.1, 0.1, 0.1); jittered restarts when the result is degenerate (Ξ = 0).
template <class Obj>
NelderMeadResult maximize_gammas(const Obj& obj, const GmmConfig& cfg) {
  static const double kStarts[4][4] = {{0.1, 0.1, 0.1, 0.1},
                                       {-0.2, -0.5, -0.3, 0.2},
                                       {0.3, -0.2, 0.2, -0.1},
                                       {-0.1, 0.4, -0.4, 0.3}};
  NelderMeadResult best;
  best.value = -kInf;
  for (const auto& start : kStarts) {
    const Eigen::VectorXd x0 = Eigen::Map<const Eigen::Vector4d>(start);
    const NelderMeadResult r = nelder_mead_max(obj, x0, 1e-9, 20000);
    if (r.value > best.value || best.argmax.size() == 0) best = r;
    double xi = 0.0;
    try {
      xi = xi_value(to_gammas(r.argmax), cfg);
    } catch (const Error&) {
      xi = 0.0;
    }
    if (xi > 0.0 && std::isfinite(r.value)) break;
  }
  if (!std::isfinite(best.value)) throw Error(ErrorCode::NonConvergence, "saddle search found no finite point");
  return best;
}

void finish_saddle(SaddlePoint& sp, const GmmConfig& cfg) {
  sp.xi = xi_value(sp.gamma, cfg);
  if (!(sp.xi > 0.0)) throw Error(ErrorCode::NonConvergence, "saddle point has Xi = 0");
  sp.omega = omega_value(sp.gamma, cfg, sp.xi);
}

}  // namespace

StConstants st_constants(double c, int k) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be at least 2");
  const double kk = k;
  if (!(c >= 0.0 && c < (kk - 1.0) / kk)) {
    throw Error(ErrorCode::InvalidCorruption, "corruption rate outside [0, (k-1)/k)");
  }
  const double q = std::max(2.0 * c - kk * c * c / (kk - 1.0), 0.0);
  const double a = std::sqrt((kk - 2.0) * q / (kk - 1.0));
  const double b = std::sqrt(kk * q / (kk - 1.0));
  return {0.5 * (a + b), 0.5 * (a - b)};
}

RidgeClosedForm ridge_closed_form(const GmmConfig& cfg, double lambda) {
  cfg.validate();
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "ridge prediction needs lambda > 0");
  const double d = cfg.d, n = cfg.n, k = cfg.k, r = cfg.r, c = cfg.c, s2 = cfg.sigma * cfg.sigma;
  const StConstants st = st_constants(c, cfg.k);
  RidgeClosedForm out;
  out.lambda_tilde = lambda * k / n + s2 * k;
  const double v = 1.0 + k * s2 / n;
  const double a11 = ((k - 2.0) * r + v) * d + out.lambda_tilde;
  const double a22 = d * v + out.lambda_tilde;
  out.delta = a11 * a22 - (k - 1.0) * (r * d) * (r * d);
  if (out.delta == 0.0) throw Error(ErrorCode::SingularDelta, "ridge system is singular");
  out.gamma = (a22 * c / (k - 1.0) - r * d * (1.0 - c)) / out.delta;
  out.zeta = (-c * r * d + (1.0 - c) * a11) / out.delta;
  const double denom = n * out.lambda_tilde + s2 * d * k;
  out.alpha = st.s * std::sqrt(n * k) / denom;
  out.beta = st.t * std::sqrt(n * k) / denom;
  return out;
}

double xi_value(const Gammas& g, const GmmConfig& cfg) {
  const double n = cfg.n, k = cfg.k, r = cfg.r, s2 = cfg.sigma * cfg.sigma;
  const double v = 1.0 + k * s2 / n;
  const double rad = (k - 1.0) * g[0] * g[0] * (v + (k - 2.0) * r) + g[1] * g[1] * v +
                     2.0 * g[0] * g[1] * (k - 1.0) * r + (k / n) * s2 * (g[2] * g[2] + g[3] * g[3]);
  if (rad < 0.0) {
    // tiny negative values are rounding on a zero radicand
    const double scale = (k - 1.0) * g[0] * g[0] * (v + (k - 2.0) * std::abs(r)) + g[1] * g[1] * v +
                         2.0 * std::abs(g[0] * g[1]) * (k - 1.0) * std::abs(r) +
                         (k / n) * s2 * (g[2] * g[2] + g[3] * g[3]);
    if (rad < -1e-13 * scale) throw Error(ErrorCode::NegativeRadicand, "Xi radicand is negative");
    return 0.0;
  }
  return (n / k) * std::sqrt(rad);
}

double omega_value(const Gammas& g, const GmmConfig& cfg, double xi) {
  if (!(xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "Omega needs Xi > 0");
  const double n = cfg.n, k = cfg.k, r = cfg.r, s2 = cfg.sigma * cfg.sigma;
  const double v = 1.0 + k * s2 / n;
  const double inner = g[0] * g[0] * (k - 2.0) * (v + (k - 1.0) * r) + (g[0] * g[0] + g[1] * g[1]) * r +
                       2.0 * g[0] * g[1] * (v + (k - 2.0) * r) + 2.0 * (k / n) * g[2] * g[3] * s2;
  const double omega = (n * n) / (k * k * xi * xi) * inner;
  if (!(std::abs(omega) < 1.0)) throw Error(ErrorCode::CorrelationOutOfRange, "|Omega| >= 1");
  return omega;
}

double saddle_linear_part(const Gammas& g, const GmmConfig& cfg) {
  const double n = cfg.n, k = cfg.k, c = cfg.c;
  const StConstants st = st_constants(c, cfg.k);
  return (n / k) * (-c * g[0] - (k - 1.0) * g[0] * g[0] / 4.0 - (1.0 - c) * g[1] - g[1] * g[1] / 4.0 -
                    st.s * g[2] - g[2] * g[2] / 4.0 - st.t * g[3] - g[3] * g[3] / 4.0);
}

double lasso_objective(const Gammas& g, const GmmConfig& cfg, double lambda) {
  double xi = 0.0;
  try {
    xi = xi_value(g, cfg);
  } catch (const Error&) {
    return -kInf;
  }
  const double lin = saddle_linear_part(g, cfg);
  if (xi == 0.0) return lin;
  const double d = cfg.d, rho = rho_of(cfg);
  const double a = lambda / xi;
  const double R = 2.0 * q_tail(a);
  return -d * (xi * xi + lambda * lambda) * R / (4.0 * rho) +
         d * xi * lambda / (2.0 * rho * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * a * a) + lin;
}

double linf_objective(const Gammas& g, double delta, const GmmConfig& cfg, double lambda) {
  double xi = 0.0;
  try {
    xi = xi_value(g, cfg);
  } catch (const Error&) {
    return -kInf;
  }
  const double lin = saddle_linear_part(g, cfg);
  const double d = cfg.d, rho = rho_of(cfg);
  if (xi == 0.0) return delta + lin;
  const double a = 2.0 * rho * delta / (xi * lambda);
  const double R = 2.0 * q_tail(a);
  return delta + R * d * delta * delta * rho / (lambda * lambda) - (1.0 - R) * d * xi * xi / (4.0 * rho) -
         d * delta * xi / (lambda * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * a * a) + lin;
}

SaddlePoint lasso_saddle(const GmmConfig& cfg, double lambda) {
  cfg.validate();
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lasso prediction needs lambda > 0");
  auto obj = [&](const Eigen::VectorXd& x) { return lasso_objective(to_gammas(x), cfg, lambda); };
  const NelderMeadResult r = maximize_gammas(obj, cfg);
  SaddlePoint sp;
  sp.gamma = to_gammas(r.argmax);
  sp.objective = r.value;
  finish_saddle(sp, cfg);
  sp.big_r = 2.0 * q_tail(lambda / sp.xi);
  return sp;
}

SaddlePoint linf_saddle(const GmmConfig& cfg, double lambda) {
  cfg.validate();
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "linf prediction needs lambda > 0");
  const double rho = rho_of(cfg);
  struct Inner {
    double value;
    NelderMeadResult nm;
  };
  auto inner = [&](double delta) {
    auto obj = [&](const Eigen::VectorXd& x) { return linf_objective(to_gammas(x), delta, cfg, lambda); };
    NelderMeadResult nm = maximize_gammas(obj, cfg);
    return Inner{nm.value, nm};
  };

  // pilot: at δ = 0 only the linear part remains
  const Inner pilot = inner(0.0);
  const double xi0 = xi_value(to_gammas(pilot.nm.argmax), cfg);
  if (!(xi0 > 0.0)) throw Error(ErrorCode::NonConvergence, "linf pilot solve has Xi = 0");
  const double hi = 10.0 * lambda * xi0 / (2.0 * rho);

  // geometric scan from the top locates the bracket, golden section refines it
  std::vector<double> grid{0.0};
  for (int j = 40; j >= 0; --j) grid.push_back(hi * std::ldexp(1.0, -j));
  std::vector<double> vals;
  vals.reserve(grid.size());
  vals.push_back(pilot.value);
  for (std::size_t i = 1; i < grid.size(); ++i) vals.push_back(inner(grid[i]).value);
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];

  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = inner(x1).value, f2 = inner(x2).value;
  for (int it = 0; it < 200 && (b - a) > 1e-6 * std::max(std::abs(x1), 1e-12); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = inner(x1).value;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = inner(x2).value;
    }
  }
  double delta = f1 <= f2 ? x1 : x2;
  Inner sol = inner(delta);
  if (vals[best] < sol.value) {
    delta = grid[best];
    sol = inner(delta);
  }

  SaddlePoint sp;
  sp.gamma = to_gammas(sol.nm.argmax);
  sp.objective = sol.value;
  sp.delta_opt = delta;
  finish_saddle(sp, cfg);
  sp.big_r = 2.0 * q_tail(2.0 * rho * delta / (sp.xi * lambda));
  return sp;
}

double lasso_delta(double xi, double omega, double lambda) {
  if (!(xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "Delta needs Xi > 0");
  const double a = lambda / xi;
  // both above, one above with the other in the dead zone, opposite signs; mirror images doubled
  const double both = bivariate_gauss_expect([](double g, double h) { return (g - h) * (g - h); },
                                             {{a, kInf}, {a, kInf}}, omega);
  const double mixed = bivariate_gauss_expect([a](double g, double) { return (g - a) * (g - a); },
                                              {{a, kInf}, {-a, a}}, omega);
  const double opposite = bivariate_gauss_expect(
      [a](double g, double h) { return (g - h - 2.0 * a) * (g - h - 2.0 * a); }, {{a, kInf}, {-kInf, -a}},
      omega);
  const double total = xi * xi * (2.0 * both + 4.0 * mixed + 2.0 * opposite);
  return std::sqrt(std::max(total, 0.0));
}

double linf_delta(double xi, double omega, double lambda, double delta, double rho) {
  if (!(xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "Delta needs Xi > 0");
  if (!(delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "Delta needs delta >= 0");
  const double b = 2.0 * rho * delta / (xi * lambda);
  if (b == 0.0) return 0.0;
  const double scale = xi / (2.0 * rho);
  const double center = bivariate_gauss_expect([](double g, double h) { return (g - h) * (g - h); },
                                               {{-b, b}, {-b, b}}, omega);
  const double corners = bivariate_gauss_expect([](double, double) { return 1.0; }, {{-kInf, -b}, {b, kInf}}, omega);
  const double low = bivariate_gauss_expect([b](double g, double) { return (g + b) * (g + b); },
                                            {{-b, b}, {-kInf, -b}}, omega);
  const double high = bivariate_gauss_expect([b](double g, double) { return (g - b) * (g - b); },
                                             {{-b, b}, {b, kInf}}, omega);
  const double edge = delta / lambda;
  const double total = scale * scale * center + 2.0 * (2.0 * edge) * (2.0 * edge) * corners +
                       2.0 * scale * scale * (low + high);
  return std::sqrt(std::max(total, 0.0));
}

TheoryPrediction ridge_prediction(const GmmConfig& cfg, double lambda, const QkEstimator& qk) {
  TheoryPrediction p;
  p.kind = RegKind::L2Squared;
  p.lambda = lambda;
  p.ridge = ridge_closed_form(cfg, lambda);
  const double d = cfg.d, n = cfg.n, k = cfg.k, r = cfg.r, s2 = cfg.sigma * cfg.sigma;
  const double gap = p.ridge.zeta - p.ridge.gamma;
  const double ab = p.ridge.alpha - p.ridge.beta;
  const double norm2 = 2.0 * d * gap * gap * (1.0 + s2 * k / n - r) + 2.0 * ab * ab * s2 * d;
  // with σ = 1 the raw and scaled margins coincide; raw keeps σ out of the divisor
  p.margin_arg_raw = norm2 > 0.0 ? d * gap * (1.0 - r) / std::sqrt(norm2) : 0.0;
  fill_error(p, cfg, qk);
  return p;
}

TheoryPrediction lasso_prediction(const GmmConfig& cfg, double lambda, const QkEstimator& qk) {
  TheoryPrediction p;
  p.kind = RegKind::L1;
  p.lambda = lambda;
  p.saddle = lasso_saddle(cfg, lambda);
  SaddlePoint& sp = p.saddle;
  sp.big_delta = lasso_delta(sp.xi, sp.omega, lambda);
  const double d = cfg.d, n = cfg.n, k = cfg.k, r = cfg.r;
  const double num = n * std::sqrt(d) * (1.0 - r) * (sp.gamma[0] - sp.gamma[1]) * sp.big_r;
  // no active coordinates: both weights vanish and the classifier guesses
  p.margin_arg_raw = sp.big_delta > 0.0 ? num / (k * sp.big_delta) : 0.0;
  p.sparsity_fraction = sp.big_r;
  fill_error(p, cfg, qk);
  return p;
}

TheoryPrediction linf_prediction(const GmmConfig& cfg, double lambda, const QkEstimator& qk) {
  TheoryPrediction p;
  p.kind = RegKind::LInf;
  p.lambda = lambda;
  p.saddle = linf_saddle(cfg, lambda);
  SaddlePoint& sp = p.saddle;
  const double rho = rho_of(cfg);
  sp.big_delta = linf_delta(sp.xi, sp.omega, lambda, sp.delta_opt, rho);
  const double d = cfg.d, n = cfg.n, k = cfg.k, r = cfg.r;
  const double b = 2.0 * rho * sp.delta_opt / (sp.xi * lambda);
  if (b < 1e-6) {
    // δ → 0: 1 - R and Δ both vanish linearly and the weights tend to sign(Ψ); use the limit ratio
    const double opposite = 0.25 - std::asin(sp.omega) / (2.0 * std::numbers::pi);
    p.margin_arg_raw = n * std::sqrt(d) * (1.0 - r) * (sp.gamma[0] - sp.gamma[1]) /
                       (k * sp.xi * std::sqrt(2.0 * std::numbers::pi) * std::sqrt(2.0 * opposite));
  } else {
    const double num = n * std::sqrt(d) * (1.0 - r) * (sp.gamma[0] - sp.gamma[1]) * (1.0 - sp.big_r);
    p.margin_arg_raw = sp.big_delta > 0.0 ? num / (2.0 * k * rho * sp.big_delta) : 0.0;
  }
  p.boundary_fraction = sp.big_r;
  fill_error(p, cfg, qk);
  return p;
}

TheoryPrediction predict(const GmmConfig& cfg, const RegularizerSpec& reg, const QkEstimator& qk) {
  switch (reg.kind) {
    case RegKind::L2Squared: return ridge_prediction(cfg, reg.lambda, qk);
    case RegKind::L1: return lasso_prediction(cfg, reg.lambda, qk);
    case RegKind::LInf: return linf_prediction(cfg, reg.lambda, qk);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown regularizer");
}

TheoryPrediction predict(const GmmConfig& cfg, const RegularizerSpec& reg) {
  return predict(cfg, reg, default_qk(cfg.k));
}

}  // namespace strongreg
