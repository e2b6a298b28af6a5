#pragma once

#include <optional>
#include <string>
#include <vector>

#include "neumann_layers/radial_ode.hpp"

namespace nlayers {

enum class Direction { Increasing, Decreasing };

const char* to_string(Direction d);

struct ShootOptions {
  // Start the bracket search around this boundary value instead of a full scan.
  std::optional<double> c_hint;
  // Compare p with the second radial Neumann eigenvalue of the interval first.
  bool check_threshold = true;
  int scan_points = 64;
  // Upper end of the decreasing scan is 1 + ceiling_factor*(((p+1)/2)^(1/(p-1)) - 1).
  double ceiling_factor = 4.0;
};

// Radial Neumann solution on [a,b] that is strictly monotone, launched with u(a)=c, u'(a)=0.
struct MonotoneSolution {
  int N = 3;
  double p = 2.0;
  double a = 0.0, b = 1.0;
  Direction direction = Direction::Increasing;
  double c = 1.0;
  Trajectory profile;  // starts at origin_offset when a = 0
  double umax = 1.0;
  double boundary_residual = 0.0;  // |u'(b)|
  double q_value = 0.0;            // ||u||_{H^1}^2 / ||u||_{p+1}^2
  int multiplicity = 1;            // monotone shooting roots found in the scan

  RadialState at(double r) const;  // dense evaluation on [a,b], series below the hand-off radius
  double end_value() const { return profile.back().u; }
};

MonotoneSolution shoot_increasing(int N, double p, double a, double b, const IntegratorParams& params = {},
                                  const ShootOptions& opts = {});
MonotoneSolution shoot_decreasing(int N, double p, double a, double b, const IntegratorParams& params = {},
                                  const ShootOptions& opts = {});

struct ConeInvariants {
  bool sign_pattern = false;  // u(a) < 1 < u(b) (increasing) or u(a) > 1 > u(b) (decreasing)
  bool value_bound = false;   // umax <= ((p+1)/2)^(1/(p-1))
  bool slope_bound = false;   // sup |u'| < 1
  bool monotone = false;
  double umax = 0.0, bound = 0.0, max_slope = 0.0;
  bool all() const { return sign_pattern && value_bound && slope_bound && monotone; }
};

ConeInvariants check_cone_invariants(const MonotoneSolution& sol);

// Largest increase of the Lyapunov quantity between consecutive samples (<= 0 when monotone).
double lyapunov_max_increase(const Trajectory& traj, double p);

struct MatchEval {
  double value = 0.0;  // [u_+(alpha)^p - u_-(alpha)^p] / p
  MonotoneSolution increasing, decreasing;
};

MatchEval evaluate_matching(int N, double p, double alpha, double beta_left, double beta_right,
                            const IntegratorParams& params = {}, bool check_threshold = true);
double matching_L(int N, double p, double alpha, double beta_left, double beta_right,
                  const IntegratorParams& params = {});

// (e^x - e^y)/p evaluated as e^y expm1(x-y)/p.
double scaled_power_difference(double log_first, double log_second, double p);

struct ProfileSample {
  double r, u, du;
  int piece;
};

struct KLayerSolution {
  int N = 3;
  double p = 2.0;
  int k = 1;
  std::vector<double> beta;   // outer ends included
  std::vector<double> alpha;  // maximum points
  std::vector<MonotoneSolution> pieces;  // increasing, decreasing per layer
  std::vector<ProfileSample> profile;
  double junction_jump = 0.0;   // max value mismatch over all junctions
  double junction_slope = 0.0;  // max |u'| at junctions from either side
  double residual_M = 0.0;      // ||M_p||_inf, 0 for one layer
  int interior_maxima = 0;
  int newton_iterations = 0;

  RadialState at(double r) const;
  int piece_at(double r) const;
};

struct OneLayerOptions {
  int alpha_grid = 40;
  // Seed for the maximum point; the limit reflection point (or the midpoint when N < 3) otherwise.
  std::optional<double> alpha_seed;
};

KLayerSolution solve_1layer(int N, double p, double a, double b, const IntegratorParams& params = {},
                            const OneLayerOptions& opts = {});

std::vector<double> m_p(int N, double p, const std::vector<double>& interior_beta,
                        const IntegratorParams& params = {});

struct KLayerOptions {
  double tolerance = 1e-9;
  double fd_step = 1e-6;
  int max_newton = 20;
  // Interior junction seed; the limit configuration (or equispaced when N < 3) otherwise.
  std::optional<std::vector<double>> beta_seed;
};

KLayerSolution solve_klayer(int N, double p, int k, const IntegratorParams& params = {},
                            const KLayerOptions& opts = {});

// Glue one-layer solutions over consecutive intervals into a k-layer solution.
KLayerSolution assemble_layers(const std::vector<KLayerSolution>& layers);

}  // namespace nlayers
