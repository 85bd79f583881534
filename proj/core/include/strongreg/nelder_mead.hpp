#pragma once

#include <functional>

#include <Eigen/Core>

namespace strongreg {

struct NelderMeadResult {
  Eigen::VectorXd argmax;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

// Maximizes obj; non-finite objective values rank below every finite one.
// Stops when every vertex lies within tol (max-norm) of the best vertex.
NelderMeadResult nelder_mead_max(const Objective& obj, const Eigen::VectorXd& x0,
                                 double tol = 1e-8, int max_iter = 20000);

}  // namespace strongreg
