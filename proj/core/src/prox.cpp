#include "strongreg/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace strongreg {

namespace {

// theta with sum_i max(values_i - theta, 0) = total, assuming that sum at theta = 0 exceeds total.
double simplex_threshold(const Eigen::VectorXd& values, double total) {
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumsum += sorted[j];
    const double candidate = (cumsum - total) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  return theta;
}

}  // namespace

double soft_threshold(double x, double c) {
  if (x > c) return x - c;
  if (x < -c) return x + c;
  return 0.0;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double c) {
  return v.unaryExpr([c](double x) { return soft_threshold(x, c); });
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& z, double total) {
  const double theta = simplex_threshold(z, total);
  return (z.array() - theta).max(0.0).matrix();
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  if (radius <= 0.0) return Eigen::VectorXd::Zero(v.size());
  const double theta = simplex_threshold(v.cwiseAbs(), radius);
  return soft_threshold(v, theta);
}

Eigen::VectorXd prox_linf(const Eigen::VectorXd& v, double c) {
  if (c <= 0.0) return v;
  const Eigen::VectorXd a = v.cwiseAbs();
  if (a.sum() <= c) return Eigen::VectorXd::Zero(v.size());
  // v - proj_{||.||_1 <= c}(v) clips every |v_i| at the projection threshold
  const double theta = simplex_threshold(a, c);
  Eigen::VectorXd u(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::min(a(i), theta);
    u(i) = v(i) > 0.0 ? m : (v(i) < 0.0 ? -m : 0.0);
  }
  return u;
}

}  // namespace strongreg
