#pragma once

#include <Eigen/Core>

namespace strongreg {

// Cholesky solve of A X = B with one step of iterative refinement.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Largest eigenvalue of XᵀX, computed on the smaller of XᵀX and XXᵀ.
double max_gram_eigenvalue(const Eigen::MatrixXd& X);

}  // namespace strongreg
