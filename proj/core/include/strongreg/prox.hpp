#pragma once

#include <Eigen/Core>

namespace strongreg {

double soft_threshold(double x, double c);
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double c);

// Euclidean projection onto {z >= 0, sum z = total}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& z, double total);
// Euclidean projection onto {u : ||u||_1 <= radius}.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius);

// argmin_u 0.5 ||u - v||^2 + c ||u||_inf. Clipped entries equal the threshold exactly.
Eigen::VectorXd prox_linf(const Eigen::VectorXd& v, double c);

}  // namespace strongreg
