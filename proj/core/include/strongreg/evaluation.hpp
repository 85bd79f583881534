#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "strongreg/gmm.hpp"
#include "strongreg/rng.hpp"
#include "strongreg/solvers.hpp"

namespace strongreg {

struct ErrorEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

// argmax_l w_lᵀx, lowest index on ties
int predict(const WeightMatrix& W, const Eigen::VectorXd& x);
Labels predict_all(const WeightMatrix& W, const Eigen::MatrixXd& X);

// Misclassification rate against the true labels of a test set.
ErrorEstimate empirical_error(const WeightMatrix& W, const Dataset& test);

// Monte Carlo Q_k(a) = 1 - P(min_j (T z)_j >= -√2 a), T = I + 11ᵀ/(1+√k), z ~ N(0, I_{k-1}).
// The minima are drawn once, so every a is evaluated on the same samples.
class QkEstimator {
 public:
  QkEstimator(int k, std::int64_t samples, RngStream& rng);

  int k() const { return k_; }
  std::int64_t samples() const { return static_cast<std::int64_t>(minima_.size()); }
  ErrorEstimate operator()(double a) const;

 private:
  int k_;
  std::vector<double> minima_;  // ascending
};

ErrorEstimate qk(double a, int k, std::int64_t mc_samples, RngStream& rng);

// Shared estimator with 2·10⁵ samples and a fixed stream, built on first use per k.
const QkEstimator& default_qk(int k);

// Average over ordered pairs l != l' of μ_lᵀ(w_l - w_l') / (σ ||w_l - w_l'||).
// Throws DegenerateWeights when every column is equal.
double mean_pair_margin(const WeightMatrix& W, const Eigen::MatrixXd& M, double sigma);

// Error of the argmax rule for x = μ_l + σ g, estimated by sampling the k scores jointly.
// Works for any W, including ties (lowest index wins).
ErrorEstimate exact_error(const WeightMatrix& W, const Eigen::MatrixXd& M, double sigma,
                          std::int64_t mc_samples, RngStream& rng);

struct AnalyticError {
  double margin = 0.0;
  ErrorEstimate pairwise;  // Q_k at the pair-averaged margin
  ErrorEstimate exact;     // per-class Gaussian orthant probability
};

AnalyticError analytic_error(const WeightMatrix& W, const Eigen::MatrixXd& M, double sigma, int k,
                             std::int64_t mc_samples, RngStream& rng);

// Minima of the lower, exact and upper scalarized objectives for one class:
//   lower = F(w) + λf(w)
//   mid   = (wᵀg + √ρ ||w||)₊² + F(w) + λf(w),  g ~ N(0, (ρ/n) I)
//   upper = ρ ||w||² + F(w) + λf(w)
struct SandwichResult {
  double lower = 0.0;
  double mid = 0.0;
  double upper = 0.0;
  double f_zero = 0.0;  // F(0)
};

// F is built from the dataset's means and noise rows; needs n >= k + 2.
SandwichResult sandwich_check(const Dataset& dataset, double c, const RegularizerSpec& reg,
                              double rho, RngStream& rng, int label = 0);

}  // namespace strongreg
