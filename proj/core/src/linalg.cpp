#include "strongreg/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "strongreg/error.hpp"

namespace strongreg {

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != A.cols() || A.rows() != B.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "solve_spd: shapes do not conform");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
  }
  Eigen::MatrixXd X = llt.solve(B);
  X += llt.solve(B - A * X);
  if (!X.allFinite()) {
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky solve produced non-finite values");
  }
  return X;
}

double max_gram_eigenvalue(const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd G =
      X.rows() < X.cols() ? Eigen::MatrixXd(X * X.transpose()) : Eigen::MatrixXd(X.transpose() * X);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

}  // namespace strongreg
