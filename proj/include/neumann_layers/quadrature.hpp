#pragma once

#include <functional>
#include <vector>

#include "neumann_layers/radial_ode.hpp"

namespace nlayers {

// Gauss-Lobatto rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_lobatto(int points);

using StateIntegrand = std::function<double(const RadialState&)>;

// Composite Gauss-Lobatto over the steps of `traj`, each step split into
// `subdivisions` panels. Returns the integral oriented by increasing r.
double integrate_trajectory(const Trajectory& traj, const StateIntegrand& f, int points = 7,
                            int subdivisions = 1);

// Composite Gauss-Lobatto of a scalar function on [lo, hi] with `panels` uniform panels.
double integrate_function(const std::function<double(double)>& f, double lo, double hi,
                          int panels, int points = 7);

// |∂B_1| = 2 π^{N/2} / Γ(N/2).
double unit_sphere_area(int N);

}  // namespace nlayers
