#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "strongreg/gmm.hpp"

namespace strongreg {

enum class RegKind { L2Squared, L1, LInf };

std::string to_string(RegKind kind);
// accepts "l2", "l1", "linf"
RegKind parse_reg_kind(const std::string& name);

struct RegularizerSpec {
  RegKind kind = RegKind::L2Squared;
  double lambda = 1.0;
};

double regularizer_value(RegKind kind, const Eigen::VectorXd& w);
// argmin_u ½||u - v||² + c f(u)
Eigen::VectorXd regularizer_prox(RegKind kind, const Eigen::VectorXd& v, double c);

// d x k, column l holds the weights of class l
using WeightMatrix = Eigen::MatrixXd;

struct SolverReport {
  int iterations = 0;
  double final_objective = 0.0;
  double kkt_residual = 0.0;
  double kkt_tolerance = 0.0;
  bool converged = false;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 50000;
  // exact active-set refinement, first tried after one step and then at growing intervals
  bool polish = true;
  int polish_every = 20;
  int polish_rounds = 30;
};

struct Solution {
  Eigen::VectorXd w;
  SolverReport report;
};

// Design matrix with lazily computed products shared by every class and every lambda.
// Holds a reference: X must outlive the Design.
class Design {
 public:
  explicit Design(const Eigen::MatrixXd& X);

  const Eigen::MatrixXd& X() const { return *X_; }
  Eigen::Index n() const { return X_->rows(); }
  Eigen::Index d() const { return X_->cols(); }

  const Eigen::MatrixXd& gram() const;    // XᵀX
  const Eigen::MatrixXd& kernel() const;  // XXᵀ
  // 2 λ_max(XᵀX), the gradient Lipschitz constant of ||Xw - y||²
  double lipschitz() const;
  bool has_gram() const;

  // out = XᵀX x, exploiting zeros in x
  void gram_apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;

 private:
  const Eigen::MatrixXd* X_;
  mutable std::once_flag gram_once_, kernel_once_, lip_once_;
  mutable Eigen::MatrixXd gram_, kernel_;
  mutable double lipschitz_ = 0.0;
  bool use_gram_;
};

Solution solve_ridge(const Design& design, const Eigen::VectorXd& y, double lambda);
Solution solve_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);

// FISTA with restart on objective increase. L2Squared is supported so the closed form can be
// cross-checked through the same code path.
Solution solve_proximal(const Design& design, const Eigen::VectorXd& y, const RegularizerSpec& reg,
                        const SolverOptions& opts = {}, const Eigen::VectorXd* warm_start = nullptr);

Solution solve_lasso(const Design& design, const Eigen::VectorXd& y, double lambda,
                     const SolverOptions& opts = {}, const Eigen::VectorXd* warm_start = nullptr);
Solution solve_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                     double tol = 1e-8, int max_iter = 50000);

Solution solve_linf(const Design& design, const Eigen::VectorXd& y, double lambda,
                    const SolverOptions& opts = {}, const Eigen::VectorXd* warm_start = nullptr);
Solution solve_linf(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                    double tol = 1e-8, int max_iter = 50000);

// Objective ||Xw - y||² + λ f(w).
double objective_value(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                       const RegularizerSpec& reg);

struct TrainResult {
  WeightMatrix W;
  std::vector<SolverReport> reports;
};

struct TrainOptions {
  SolverOptions solver;
  int workers = 1;
  const WeightMatrix* warm_start = nullptr;
};

TrainResult train_all(const Design& design, const Eigen::MatrixXd& Y, const RegularizerSpec& reg,
                      const TrainOptions& opts = {});
TrainResult train_all(const Dataset& dataset, const RegularizerSpec& reg,
                      const TrainOptions& opts = {});

// d rows, header w0..w{k-1}
void write_weights_csv(const WeightMatrix& W, const std::string& path);
WeightMatrix read_weights_csv(const std::string& path);

}  // namespace strongreg
