#pragma once

#include <vector>

#include <Eigen/Core>

#include "strongreg/solvers.hpp"

namespace strongreg::detail {

// ||Xw - y||² + λ f(w) written through b = Xᵀy so every product goes through the Design.
struct Problem {
  const Design& design;
  const Eigen::VectorXd& b;
  double yy;
  RegularizerSpec reg;

  double objective(const Eigen::VectorXd& x, const Eigen::VectorXd& hx) const {
    return x.dot(hx) - 2.0 * b.dot(x) + yy + reg.lambda * regularizer_value(reg.kind, x);
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& hx) const { return 2.0 * (hx - b); }
};

// Distance from -g to λ ∂f(w), g the gradient of the smooth part.
double kkt_residual(RegKind kind, const Eigen::VectorXd& w, const Eigen::VectorXd& g,
                    double lambda);

Eigen::MatrixXd gram_block(const Design& design, const std::vector<Eigen::Index>& idx);

// Candidate exact minimizer built from the active set of x; empty when nothing usable was found.
// Callers must still verify optimality.
Eigen::VectorXd refine(const Problem& p, const Eigen::VectorXd& x, int max_rounds);

// Follows the piecewise-linear ℓ∞ solution path from an exact solution x (or from w = 0) to
// p.reg.lambda. Empty on failure.
Eigen::VectorXd linf_homotopy(const Problem& p, const Eigen::VectorXd* x, int max_events);

// Cholesky factor of a symmetric positive-definite matrix under row/column insertion and deletion.
class UpdatableCholesky {
 public:
  explicit UpdatableCholesky(Eigen::Index capacity);

  Eigen::Index size() const { return m_; }
  void clear() { m_ = 0; }
  // appends a row/column with off-diagonal part `col` and diagonal `diag`; false if singular
  bool append(const Eigen::VectorXd& col, double diag);
  void remove(Eigen::Index k);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::MatrixXd L_;
  Eigen::Index m_ = 0;
};

}  // namespace strongreg::detail
