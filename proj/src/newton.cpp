#include "neumann_layers/newton.hpp"

#include <cmath>

namespace nlayers {

Eigen::MatrixXd finite_difference_jacobian(const VectorMap& f, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& fx, const Feasibility& feasible,
                                           double step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac(fx.size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = step * std::max(1.0, std::abs(x(j)));
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const bool up = feasible(xp), down = feasible(xm);
    if (up && down) {
      jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    } else if (up) {
      jac.col(j) = (f(xp) - fx) / h;
    } else {
      jac.col(j) = (fx - f(xm)) / h;
    }
  }
  return jac;
}

NewtonResult damped_newton(const VectorMap& f, const Eigen::VectorXd& x0, const Feasibility& feasible,
                           const NewtonOptions& opts) {
  NewtonResult out;
  out.x = x0;
  out.residual = f(x0);
  out.norm = out.residual.lpNorm<Eigen::Infinity>();
  if (!std::isfinite(out.norm)) return out;
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (out.norm <= opts.tolerance) {
      out.converged = true;
      return out;
    }
    const Eigen::MatrixXd jac = finite_difference_jacobian(f, out.x, out.residual, feasible, opts.fd_step);
    const Eigen::VectorXd dx = jac.fullPivLu().solve(-out.residual);
    if (!dx.allFinite()) return out;
    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half <= opts.max_halvings; ++half, lambda *= 0.5) {
      Eigen::VectorXd trial = out.x + lambda * dx;
      if (!feasible(trial)) continue;
      Eigen::VectorXd ft = f(trial);
      double norm = ft.lpNorm<Eigen::Infinity>();
      if (std::isfinite(norm) && norm < out.norm) {
        out.x = trial;
        out.residual = ft;
        out.norm = norm;
        accepted = true;
        break;
      }
    }
    out.iterations = it + 1;
    if (!accepted) break;
  }
  out.converged = out.norm <= opts.tolerance;
  return out;
}

}  // namespace nlayers
