#include "strongreg/compress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strongreg/error.hpp"

namespace strongreg {

WeightMatrix sparsify(const WeightMatrix& W, double keep_fraction) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "keep fraction must lie in [0, 1]");
  }
  const Eigen::Index d = W.rows();
  // the small slack keeps d * 0.5 from rounding up to an extra entry
  const auto keep = std::min<Eigen::Index>(
      d, static_cast<Eigen::Index>(std::ceil(static_cast<double>(d) * keep_fraction - 1e-9)));
  WeightMatrix out = WeightMatrix::Zero(d, W.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  for (Eigen::Index l = 0; l < W.cols(); ++l) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(W(a, l)) > std::abs(W(b, l));
    });
    for (Eigen::Index j = 0; j < keep; ++j) out(order[j], l) = W(order[j], l);
  }
  return out;
}

WeightMatrix one_bit(const WeightMatrix& W) { return W.cwiseSign(); }

std::vector<double> boundary_fraction(const WeightMatrix& W, double rel_tol) {
  if (!(rel_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rel_tol must be non-negative");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(W.cols()));
  for (Eigen::Index l = 0; l < W.cols(); ++l) {
    const double top = W.col(l).lpNorm<Eigen::Infinity>();
    if (top == 0.0) throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(l) + " is zero");
    const auto count = (W.col(l).array().abs() >= (1.0 - rel_tol) * top).count();
    out.push_back(static_cast<double>(count) / static_cast<double>(W.rows()));
  }
  return out;
}

std::vector<double> nonzero_fraction(const WeightMatrix& W) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(W.cols()));
  for (Eigen::Index l = 0; l < W.cols(); ++l) {
    out.push_back(static_cast<double>((W.col(l).array() != 0.0).count()) / static_cast<double>(W.rows()));
  }
  return out;
}

}  // namespace strongreg
