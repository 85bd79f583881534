#include "strongreg/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "strongreg/error.hpp"

namespace strongreg {

namespace {

using Rule = boost::math::quadrature::gauss<double, 20>;

// Gauss-Legendre over [a, b] split into `panels` equal pieces.
template <class F>
double panel_sum(F&& f, double a, double b, int panels) {
  const auto& nodes = Rule::abscissa();
  const auto& weights = Rule::weights();
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      // boost stores the non-negative half of a symmetric rule
      if (nodes[i] == 0.0) {
        acc += weights[i] * f(mid);
      } else {
        acc += weights[i] * (f(mid - half * nodes[i]) + f(mid + half * nodes[i]));
      }
    }
    total += acc * half;
  }
  return total;
}

Interval truncate(Interval in, double t) {
  Interval out = in;
  if (std::isinf(in.lo) && std::isinf(in.hi)) return {-t, t};
  if (std::isinf(in.lo)) out.lo = std::min(-t, in.hi - t);
  if (std::isinf(in.hi)) out.hi = std::max(t, in.lo + t);
  return out;
}

}  // namespace

double q_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double bivariate_gauss_expect(const BivariateIntegrand& f, const BivariateRegion& region,
                              double omega, const QuadratureOptions& opts) {
  if (!(std::abs(omega) < 1.0 - 1e-12)) {
    throw Error(ErrorCode::DegenerateCorrelation, "|omega| too close to 1");
  }
  if (!(region.x.lo < region.x.hi) || !(region.y.lo < region.y.hi)) return 0.0;

  const double t = opts.truncation;
  const double s = std::sqrt(1.0 - omega * omega);
  const Interval outer = truncate(region.x, t);

  // G = z1, G' = omega z1 + s z2 with z1, z2 independent
  auto estimate = [&](int panels) {
    auto outer_fn = [&](double z1) {
      const Interval zy{(region.y.lo - omega * z1) / s, (region.y.hi - omega * z1) / s};
      const Interval inner = truncate(zy, t);
      if (!(inner.lo < inner.hi)) return 0.0;
      auto inner_fn = [&](double z2) { return normal_pdf(z2) * f(z1, omega * z1 + s * z2); };
      return normal_pdf(z1) * panel_sum(inner_fn, inner.lo, inner.hi, panels);
    };
    return panel_sum(outer_fn, outer.lo, outer.hi, panels);
  };

  int panels = opts.initial_panels;
  double previous = estimate(panels);
  while (panels < opts.max_panels) {
    panels *= 2;
    const double current = estimate(panels);
    const double scale = std::max(std::abs(current), 1e-300);
    if (std::abs(current - previous) <= opts.rel_tol * scale || current == previous) {
      return current;
    }
    previous = current;
  }
  throw Error(ErrorCode::NonConvergence, "bivariate quadrature exceeded panel budget");
}

}  // namespace strongreg
