#pragma once

#include <Eigen/Dense>
#include <functional>

namespace nlayers {

using VectorMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using Feasibility = std::function<bool(const Eigen::VectorXd&)>;

struct NewtonOptions {
  double tolerance = 1e-12;
  double fd_step = 1e-7;
  int max_iterations = 60;
  int max_halvings = 30;
};

struct NewtonResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residual;
  double norm = 0.0;  // ||residual||_inf
  int iterations = 0;
  bool converged = false;
};

// Damped Newton with a finite-difference Jacobian (central when both sides are feasible).
// Steps are halved until the trial point is feasible and the residual norm decreases.
NewtonResult damped_newton(const VectorMap& f, const Eigen::VectorXd& x0, const Feasibility& feasible,
                           const NewtonOptions& opts);

Eigen::MatrixXd finite_difference_jacobian(const VectorMap& f, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& fx, const Feasibility& feasible,
                                           double step);

}  // namespace nlayers
