#include "strongreg/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "strongreg/error.hpp"

namespace strongreg {

NelderMeadResult nelder_mead_max(const Objective& obj, const Eigen::VectorXd& x0, double tol,
                                 int max_iter) {
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  const auto n = x0.size();
  NelderMeadResult result;

  // internally minimize the negated objective
  auto cost = [&](const Eigen::VectorXd& x) {
    ++result.evaluations;
    const double v = obj(x);
    return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
  };

  std::vector<Eigen::VectorXd> simplex(n + 1, x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    simplex[i + 1](i) = x0(i) != 0.0 ? 1.05 * x0(i) : 0.00025;
  }
  std::vector<double> f(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) f[i] = cost(simplex[i]);
  if (!std::isfinite(f[0])) {
    throw Error(ErrorCode::InvalidArgument, "objective not finite at the initial point");
  }

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return f[a] < f[b]; });
    std::vector<Eigen::VectorXd> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i < order.size(); ++i) {
      s2[i] = std::move(simplex[order[i]]);
      f2[i] = f[order[i]];
    }
    simplex = std::move(s2);
    f = std::move(f2);
  };

  auto diameter = [&] {
    double m = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i) {
      m = std::max(m, (simplex[i] - simplex[0]).lpNorm<Eigen::Infinity>());
    }
    return m;
  };

  sort_simplex();
  for (int iter = 0; iter < max_iter; ++iter) {
    if (diameter() < tol) {
      result.argmax = simplex[0];
      result.value = -f[0];
      result.iterations = iter;
      return result;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= static_cast<double>(n);
    const Eigen::VectorXd& worst = simplex[n];

    const Eigen::VectorXd xr = (1 + kReflect) * centroid - kReflect * worst;
    const double fr = cost(xr);
    bool shrink = false;
    if (fr < f[0]) {
      const Eigen::VectorXd xe = (1 + kReflect * kExpand) * centroid - kReflect * kExpand * worst;
      const double fe = cost(xe);
      if (fe < fr) {
        simplex[n] = xe;
        f[n] = fe;
      } else {
        simplex[n] = xr;
        f[n] = fr;
      }
    } else if (fr < f[n - 1]) {
      simplex[n] = xr;
      f[n] = fr;
    } else if (fr < f[n]) {
      const Eigen::VectorXd xc = (1 + kContract * kReflect) * centroid - kContract * kReflect * worst;
      const double fc = cost(xc);
      if (fc <= fr) {
        simplex[n] = xc;
        f[n] = fc;
      } else {
        shrink = true;
      }
    } else {
      const Eigen::VectorXd xcc = (1 - kContract) * centroid + kContract * worst;
      const double fcc = cost(xcc);
      if (fcc < f[n]) {
        simplex[n] = xcc;
        f[n] = fcc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (Eigen::Index i = 1; i <= n; ++i) {
        simplex[i] = simplex[0] + kShrink * (simplex[i] - simplex[0]);
        f[i] = cost(simplex[i]);
      }
    }
    sort_simplex();
  }
  throw Error(ErrorCode::NonConvergence, "Nelder-Mead exceeded max_iter");
}

}  // namespace strongreg
