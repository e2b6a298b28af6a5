#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "neumann_layers/green_basis.hpp"

namespace nlayers {

// Unique root of xi_ab'/xi_ab + zeta_ab'/zeta_ab in (a, b), by bisection to 1e-13 width.
double reflection_point(const AnnulusBasis& ab);

// Normalized one-layer limit profile G(r, alpha) / G(alpha, alpha).
double limit_1layer_value(const AnnulusBasis& ab, double alpha, double r);
double limit_1layer_slope(const AnnulusBasis& ab, double alpha, double r, bool left_side);

struct LimitOneLayer {
  double alpha = 0.0;
  std::vector<double> grid;
  std::vector<double> values;
};

LimitOneLayer limit_1layer(const AnnulusBasis& ab, const std::vector<double>& grid);

// Junction mismatch at interior junctions, explicit xi/zeta form.
std::vector<double> m_infty(const GreenBasis& basis, const std::vector<double>& interior_beta);
// Same map written as quotients of interval-adapted functions.
std::vector<double> m_infty_quotient(const GreenBasis& basis, const std::vector<double>& interior_beta);

// Layer locations alpha_j = reflection points of (beta_{j-1}, beta_j), beta including 0 and 1.
std::vector<double> layer_locations(const GreenBasis& basis, const std::vector<double>& beta);

// max_j |xi'(b_j)/zeta'(b_j) - (xi(a_{j+1})-xi(a_j))/(zeta(a_{j+1})-zeta(a_j))|
double junction_condition_residual(const GreenBasis& basis, const std::vector<double>& beta,
                                   const std::vector<double>& alpha);

struct AmplitudeSolve {
  std::vector<double> amplitude;
  double residual = 0.0;   // ||G A - 1||_inf
  double condition = 0.0;  // reciprocal condition estimate inverted
};

Eigen::MatrixXd green_matrix(const GreenBasis& basis, const std::vector<double>& alpha);
AmplitudeSolve solve_amplitude_system(const Eigen::MatrixXd& green);
AmplitudeSolve amplitudes(const GreenBasis& basis, const std::vector<double>& alpha);

// Minimal H^1 energy of radial functions equal to 1 at the radii s (amplitude-system form).
double phi_direct(const GreenBasis& basis, const std::vector<double>& s);

// Left-hand sides of the layer criticality equations (first, middle and last layer forms).
std::vector<double> phi_criticality_residual(const GreenBasis& basis, const std::vector<double>& alpha);

struct LimitSolveOptions {
  double tolerance = 1e-12;
  double fd_step = 1e-7;
  int max_newton = 60;
  int max_halvings = 30;
  int homotopy_steps = 50;
  bool force_homotopy = false;
  // Coarse lattice points per junction for a search of further roots (0 disables).
  int lattice = 0;
};

struct LimitLayerConfig {
  int N = 3;
  int k = 1;
  std::vector<double> beta;  // beta_0 = 0, ..., beta_k = 1
  std::vector<double> alpha;
  std::vector<double> amplitude;
  double residual_M = 0.0;
  double residual_phi = 0.0;
  double residual_junction = 0.0;
  double residual_amplitude = 0.0;
  std::string method;  // "reflection", "newton" or "homotopy"
  int iterations = 0;
  std::vector<std::vector<double>> other_roots;  // interior beta of further roots, if scanned
};

LimitLayerConfig solve_limit_config(const GreenBasis& basis, int k, const LimitSolveOptions& opts = {});

struct LimitProfile {
  std::vector<double> grid;
  std::vector<double> values;         // piecewise normalized Green quotients
  std::vector<double> global_values;  // sum_j A_j G(r, alpha_j)
  std::vector<int> piece;             // 0-based interval index
  double max_gap = 0.0;
};

LimitProfile assemble_limit_profile(const GreenBasis& basis, const LimitLayerConfig& config,
                                    const std::vector<double>& grid);

std::vector<double> uniform_grid(double lo, double hi, int points);

}  // namespace nlayers
