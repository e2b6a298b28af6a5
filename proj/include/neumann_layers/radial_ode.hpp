#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace nlayers {

struct RadialState {
  double r = 0.0;
  double u = 0.0;
  double du = 0.0;
};

struct IntegratorParams {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  double h_init = 1e-4;
  double h_min = 1e-14;
  long max_steps = 2'000'000;
  double origin_offset = 1e-6;

  // Throws InvalidArgument when a field is out of range.
  void validate() const;
  // Same parameters with both tolerances multiplied by `factor`.
  IntegratorParams scaled_tolerances(double factor) const;
};

// u'' = -(drift/r) u' + linear*u - u^exponent  (power term only when exponent > 0).
struct RadialField {
  double drift = 2.0;
  double linear = 1.0;
  double exponent = 0.0;

  static RadialField linear_operator(int N, double eigen_shift = 0.0);
  static RadialField nonlinear(int N, double p);

  bool has_power() const { return exponent > 0.0; }
  double power(double u) const;        // u^exponent, 0 for u <= 0
  double power_deriv(double u) const;  // exponent*u^(exponent-1)
  double second(double r, double u, double du) const;
  double third(double r, double u, double du, double ddu) const;
};

struct TrajectoryNode {
  double r, u, du, ddu, dddu;
};

// Accepted integrator steps with quintic Hermite dense output for u and u'.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TrajectoryNode> nodes);

  const std::vector<TrajectoryNode>& nodes() const { return nodes_; }
  std::vector<RadialState> samples() const;
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  double r_begin() const { return nodes_.front().r; }
  double r_end() const { return nodes_.back().r; }
  bool forward() const { return nodes_.size() < 2 || nodes_.back().r > nodes_.front().r; }
  RadialState front() const;
  RadialState back() const;

  bool contains(double r, double slack = 0.0) const;
  // Dense evaluation; throws OutOfInterval outside the covered range.
  RadialState eval(double r) const;
  // Dense evaluation inside step [nodes[i], nodes[i+1]].
  RadialState eval_in_step(std::size_t i, double r) const;
  // Index i with r in the closed step [nodes[i], nodes[i+1]].
  std::size_t locate(double r) const;

 private:
  std::vector<TrajectoryNode> nodes_;
};

enum class TerminationTag { ReachedEnd, ValueExceededBound, DerivativeSignFlip, ValueNonPositive };

const char* to_string(TerminationTag tag);

struct BlowupGuard {
  double upper = std::numeric_limits<double>::infinity();
  // +1: stop when u' < 0 (increasing branch); -1: stop when u' > 0; 0: ignore.
  int monotone_sign = 0;
  bool stop_at_nonpositive = true;

  // Default guard: ((p+1)/2)^(1/(p-1)) + 0.5.
  static BlowupGuard for_exponent(double p, int monotone_sign = 0);
};

struct NonlinearRun {
  Trajectory trajectory;
  TerminationTag tag = TerminationTag::ReachedEnd;
  // Radius where the guard fired (located root of u' for a sign flip); r1 when ReachedEnd.
  double event_r = 0.0;
};

double energy_bound(double p);  // ((p+1)/2)^(1/(p-1))

Trajectory integrate_field(const RadialField& field, double r0, double r1, const RadialState& init,
                           const IntegratorParams& params);
NonlinearRun integrate_field_guarded(const RadialField& field, double r0, double r1,
                                     const RadialState& init, const IntegratorParams& params,
                                     const BlowupGuard& guard);

Trajectory integrate_linear(int N, double r0, double r1, const RadialState& init,
                            const IntegratorParams& params);
NonlinearRun integrate_nonlinear(int N, double p, double r0, double r1, const RadialState& init,
                                 const IntegratorParams& params, const BlowupGuard& guard);

// Taylor start (r=h0) for a solution regular at the origin with u(0)=u0.
RadialState origin_series_start(const RadialField& field, double u0, double h0);
RadialState origin_series_start_linear(int N, double u0, double h0);
RadialState origin_series_start_nonlinear(int N, double p, double u0, double h0);

// Second radial Neumann eigenvalue of -Δ+1 on (a,b) (ball when a=0).
double neumann_lambda2(int N, double a, double b, const IntegratorParams& params = {});

// L(r) = u'^2/2 - u^2/2 + u^(p+1)/(p+1)
double lyapunov(double p, double u, double du);

}  // namespace nlayers
