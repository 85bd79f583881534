#pragma once

#include <functional>
#include <limits>

namespace strongreg {

// P(G > x) for standard normal G
double q_tail(double x);
double normal_pdf(double x);

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

// Rectangle in (g, g') coordinates; infinite bounds are truncated during integration.
struct BivariateRegion {
  Interval x;
  Interval y;
};

struct QuadratureOptions {
  double truncation = 8.0;
  double rel_tol = 1e-8;
  int initial_panels = 2;
  int max_panels = 512;
};

using BivariateIntegrand = std::function<double(double g, double gp)>;

// E[f(G, G') 1{(G, G') in region}] for standard normals with correlation omega.
double bivariate_gauss_expect(const BivariateIntegrand& f, const BivariateRegion& region,
                              double omega, const QuadratureOptions& opts = {});

}  // namespace strongreg
