#pragma once

// Independent reference computations used only by the tests.

#include <functional>
#include <vector>

namespace oracle {

struct State {
  double u, du;
};

// Classical fixed-step RK4 for u'' = -(N-1)/r u' + u - u^p (p <= 0 drops the power term).
State rk4_radial(int N, double p, double r0, double r1, State init, int steps);

// First positive root of tan x = x.
double tan_equals_identity_root();

// Root of coth s + 1 - 2/s on (0, 1): reflection point of the unit ball for N = 3.
double ball_reflection_root_n3();

// Eigenvalues (ascending) of v -> -v'' - (N-1)/r v' + V(r) v on (a,b) with Neumann ends,
// vertex-centered flux discretization on n+1 nodes, dense tridiagonal eigensolve.
std::vector<double> neumann_eigenvalues(int N, double a, double b, int n,
                                        const std::function<double(double)>& potential);

struct BesselBasis {
  double xi, dxi, zeta, dzeta;
};

// Fundamental pair from modified Bessel functions of order (N-2)/2.
BesselBasis bessel_basis(int N, double r);

// Second-order finite differences for -u'' - (N-1)/r u' + u = u^p on [a,b], Neumann ends,
// Newton from `seed`. Returns nodal values on the uniform grid of `intervals` steps.
std::vector<double> fd_neumann_solve(int N, double p, double a, double b, int intervals,
                                     const std::function<double(double)>& seed);

// Richardson extrapolation of fd_neumann_solve with `intervals` and 2*`intervals`,
// sampled on the coarse grid.
std::vector<double> fd_neumann_extrapolated(int N, double p, double a, double b, int intervals,
                                            const std::function<double(double)>& seed);

}  // namespace oracle
