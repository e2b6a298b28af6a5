#include "neumann_layers/radial_ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "neumann_layers/errors.hpp"

namespace nlayers {

void IntegratorParams::validate() const {
  auto fail = [](const char* what) { raise(ErrorKind::InvalidArgument, what); };
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) fail("tolerances must be positive");
  if (!(h_min > 0.0) || !(h_min <= h_init)) fail("require 0 < h_min <= h_init");
  if (max_steps <= 0) fail("max_steps must be positive");
  if (!(origin_offset > 0.0) || origin_offset > 1e-3) fail("origin_offset must lie in (0, 1e-3]");
}

IntegratorParams IntegratorParams::scaled_tolerances(double factor) const {
  IntegratorParams out = *this;
  out.rel_tol *= factor;
  out.abs_tol *= factor;
  return out;
}

RadialField RadialField::linear_operator(int N, double eigen_shift) {
  return RadialField{static_cast<double>(N - 1), 1.0 - eigen_shift, 0.0};
}

RadialField RadialField::nonlinear(int N, double p) {
  return RadialField{static_cast<double>(N - 1), 1.0, p};
}

double RadialField::power(double u) const {
  if (!has_power() || u <= 0.0) return 0.0;
  return std::exp(exponent * std::log(u));
}

double RadialField::power_deriv(double u) const {
  if (!has_power() || u <= 0.0) return 0.0;
  return exponent * std::exp((exponent - 1.0) * std::log(u));
}

double RadialField::second(double r, double u, double du) const {
  double out = linear * u - power(u);
  if (drift != 0.0) out -= drift / r * du;
  return out;
}

double RadialField::third(double r, double u, double du, double ddu) const {
  double out = linear * du - power_deriv(u) * du;
  if (drift != 0.0) out += drift / (r * r) * du - drift / r * ddu;
  return out;
}

double energy_bound(double p) { return std::exp(std::log((p + 1.0) / 2.0) / (p - 1.0)); }

double lyapunov(double p, double u, double du) {
  double up1 = u > 0.0 ? std::exp((p + 1.0) * std::log(u)) : 0.0;
  return 0.5 * du * du - 0.5 * u * u + up1 / (p + 1.0);
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::vector<TrajectoryNode> nodes) : nodes_(std::move(nodes)) {}

std::vector<RadialState> Trajectory::samples() const {
  std::vector<RadialState> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back({n.r, n.u, n.du});
  return out;
}

RadialState Trajectory::front() const { return {nodes_.front().r, nodes_.front().u, nodes_.front().du}; }
RadialState Trajectory::back() const { return {nodes_.back().r, nodes_.back().u, nodes_.back().du}; }

bool Trajectory::contains(double r, double slack) const {
  if (nodes_.empty()) return false;
  double lo = std::min(r_begin(), r_end()) - slack;
  double hi = std::max(r_begin(), r_end()) + slack;
  return r >= lo && r <= hi;
}

std::size_t Trajectory::locate(double r) const {
  const std::size_t n = nodes_.size();
  if (n < 2) return 0;
  std::size_t lo = 0, hi = n - 1;
  const bool fwd = forward();
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    bool before = fwd ? (nodes_[mid].r <= r) : (nodes_[mid].r >= r);
    if (before) lo = mid; else hi = mid;
  }
  return lo;
}

namespace {

double hermite5(double t, double h, double f0, double d0, double s0, double f1, double d1, double s1) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
  const double h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
  const double h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
  const double h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
  const double h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double h21 = 0.5 * t3 - t4 + 0.5 * t5;
  return h00 * f0 + h01 * f1 + h * (h10 * d0 + h11 * d1) + h * h * (h20 * s0 + h21 * s1);
}

}  // namespace

RadialState Trajectory::eval_in_step(std::size_t i, double r) const {
  const TrajectoryNode& a = nodes_[i];
  if (r == a.r || i + 1 >= nodes_.size()) return {a.r, a.u, a.du};
  const TrajectoryNode& b = nodes_[i + 1];
  if (r == b.r) return {b.r, b.u, b.du};
  const double h = b.r - a.r;
  const double t = (r - a.r) / h;
  return {r, hermite5(t, h, a.u, a.du, a.ddu, b.u, b.du, b.ddu),
          hermite5(t, h, a.du, a.ddu, a.dddu, b.du, b.ddu, b.dddu)};
}

RadialState Trajectory::eval(double r) const {
  if (nodes_.empty()) raise(ErrorKind::OutOfInterval, "empty trajectory");
  const double span = std::abs(r_end() - r_begin());
  if (!contains(r, 1e-13 * std::max(1.0, span))) {
    std::ostringstream msg;
    msg << "radius " << r << " outside trajectory [" << std::min(r_begin(), r_end()) << ", "
        << std::max(r_begin(), r_end()) << "]";
    raise(ErrorKind::OutOfInterval, msg.str());
  }
  return eval_in_step(locate(r), r);
}

const char* to_string(TerminationTag tag) {
  switch (tag) {
    case TerminationTag::ReachedEnd: return "ReachedEnd";
    case TerminationTag::ValueExceededBound: return "ValueExceededBound";
    case TerminationTag::DerivativeSignFlip: return "DerivativeSignFlip";
    case TerminationTag::ValueNonPositive: return "ValueNonPositive";
  }
  return "Unknown";
}

BlowupGuard BlowupGuard::for_exponent(double p, int monotone_sign) {
  BlowupGuard g;
  g.upper = energy_bound(p) + 0.5;
  g.monotone_sign = monotone_sign;
  return g;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

using Vec2 = std::array<double, 2>;

struct Stepper {
  const RadialField& field;
  Vec2 f(double r, const Vec2& y) const { return {y[1], field.second(r, y[0], y[1])}; }
};

// Root of the dense u' (or u when `value` is set) inside step i by bisection.
double locate_in_step(const Trajectory& traj, std::size_t i, bool value) {
  double lo = traj.nodes()[i].r, hi = traj.nodes()[i + 1].r;
  auto g = [&](double r) {
    RadialState s = traj.eval_in_step(i, r);
    return value ? s.u : s.du;
  };
  double glo = g(lo);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

NonlinearRun integrate_field_guarded(const RadialField& field, double r0, double r1,
                                     const RadialState& init, const IntegratorParams& params,
                                     const BlowupGuard& guard) {
  params.validate();
  if (r0 == r1) raise(ErrorKind::InvalidArgument, "empty integration interval");
  if (std::abs(init.r - r0) > 1e-14 * std::max(1.0, std::abs(r0)))
    raise(ErrorKind::InvalidArgument, "initial state radius differs from r0");
  if (field.drift != 0.0 && std::min(r0, r1) < params.origin_offset * (1.0 - 1e-12))
    raise(ErrorKind::InvalidArgument, "integration interval reaches below origin_offset");
  if (!std::isfinite(init.u) || !std::isfinite(init.du))
    raise(ErrorKind::NonFiniteState, "non-finite initial state");

  const Stepper st{field};
  const double dir = r1 > r0 ? 1.0 : -1.0;
  const double span = std::abs(r1 - r0);
  double h = dir * std::min(params.h_init, span);

  std::vector<TrajectoryNode> nodes;
  nodes.reserve(256);
  double r = r0;
  Vec2 y{init.u, init.du};
  Vec2 k1 = st.f(r, y);
  nodes.push_back({r, y[0], y[1], k1[1], field.third(r, y[0], y[1], k1[1])});

  NonlinearRun out;
  out.event_r = r1;
  const double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9;
  const double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
  double facold = 1e-4;
  bool rejected_last = false;
  long steps = 0;

  while (true) {
    if (++steps > params.max_steps) {
      std::ostringstream msg;
      msg << "step budget " << params.max_steps << " exhausted at r=" << r;
      raise(ErrorKind::StepBudgetExceeded, msg.str());
    }
    bool last = false;
    const double remaining = r1 - r;
    if ((r + h - r1) * dir >= 0.0 || std::abs(remaining - h) <= 1e-12 * span) {
      h = remaining;
      last = true;
    }

    Vec2 y2, y3, y4, y5, y6, y7;
    for (int i = 0; i < 2; ++i) y2[i] = y[i] + h * a21 * k1[i];
    Vec2 k2 = st.f(r + c2 * h, y2);
    for (int i = 0; i < 2; ++i) y3[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    Vec2 k3 = st.f(r + c3 * h, y3);
    for (int i = 0; i < 2; ++i) y4[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    Vec2 k4 = st.f(r + c4 * h, y4);
    for (int i = 0; i < 2; ++i)
      y5[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    Vec2 k5 = st.f(r + c5 * h, y5);
    for (int i = 0; i < 2; ++i)
      y6[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double r_new = last ? r1 : r + h;
    Vec2 k6 = st.f(r_new, y6);
    for (int i = 0; i < 2; ++i)
      y7[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    Vec2 k7 = st.f(r_new, y7);

    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sc = params.abs_tol + params.rel_tol * std::max(std::abs(y[i]), std::abs(y7[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / 2.0);
    if (!std::isfinite(err)) err = 1e10;

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      if (!std::isfinite(y7[0]) || !std::isfinite(y7[1])) {
        std::ostringstream msg;
        msg << "non-finite state at r=" << r_new;
        raise(ErrorKind::NonFiniteState, msg.str());
      }
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double h_new = h / fac;
      if (rejected_last) h_new = dir * std::min(std::abs(h_new), std::abs(h));
      facold = std::max(err, 1e-4);
      rejected_last = false;

      r = r_new;
      y = y7;
      k1 = k7;
      nodes.push_back({r, y[0], y[1], k1[1], field.third(r, y[0], y[1], k1[1])});
      h = h_new;

      const std::size_t step = nodes.size() - 2;
      if (guard.monotone_sign != 0 && guard.monotone_sign * y[1] < 0.0) {
        out.trajectory = Trajectory(std::move(nodes));
        out.tag = TerminationTag::DerivativeSignFlip;
        out.event_r = locate_in_step(out.trajectory, step, false);
        return out;
      }
      if (guard.stop_at_nonpositive && y[0] <= 0.0) {
        out.trajectory = Trajectory(std::move(nodes));
        out.tag = TerminationTag::ValueNonPositive;
        out.event_r = locate_in_step(out.trajectory, step, true);
        return out;
      }
      if (y[0] > guard.upper) {
        out.trajectory = Trajectory(std::move(nodes));
        out.tag = TerminationTag::ValueExceededBound;
        out.event_r = r;
        return out;
      }
      if (last) break;
    } else {
      h = h / std::min(facc1, fac11 / safe);
      rejected_last = true;
      if (std::abs(h) < params.h_min) {
        std::ostringstream msg;
        msg << "step size fell below h_min at r=" << r;
        raise(ErrorKind::StepUnderflow, msg.str());
      }
    }
  }
  out.trajectory = Trajectory(std::move(nodes));
  return out;
}

Trajectory integrate_field(const RadialField& field, double r0, double r1, const RadialState& init,
                           const IntegratorParams& params) {
  BlowupGuard none;
  none.stop_at_nonpositive = false;
  return integrate_field_guarded(field, r0, r1, init, params, none).trajectory;
}

Trajectory integrate_linear(int N, double r0, double r1, const RadialState& init,
                            const IntegratorParams& params) {
  return integrate_field(RadialField::linear_operator(N), r0, r1, init, params);
}

NonlinearRun integrate_nonlinear(int N, double p, double r0, double r1, const RadialState& init,
                                 const IntegratorParams& params, const BlowupGuard& guard) {
  if (!(p > 1.0)) raise(ErrorKind::InvalidArgument, "exponent must exceed 1");
  if (init.u < 0.0) raise(ErrorKind::InvalidArgument, "initial value must be non-negative");
  return integrate_field_guarded(RadialField::nonlinear(N, p), r0, r1, init, params, guard);
}

// ---------------------------------------------------------------------------
// Origin series

RadialState origin_series_start(const RadialField& field, double u0, double h0) {
  if (u0 < 0.0) raise(ErrorKind::InvalidArgument, "u0 must be non-negative");
  if (!(h0 > 0.0) || h0 > 1e-3) raise(ErrorKind::InvalidArgument, "h0 must lie in (0, 1e-3]");
  const double N = field.drift + 1.0;
  // u = u0 + A r^2 + B r^4 with Δ(r^{2k}) = 2k(2k+N-2) r^{2k-2}.
  const double f0 = field.linear * u0 - field.power(u0);
  const double df0 = field.linear - field.power_deriv(u0);
  const double A = f0 / (2.0 * N);
  const double B = df0 * A / (4.0 * (N + 2.0));
  const double h2 = h0 * h0;
  return {h0, u0 + A * h2 + B * h2 * h2, 2.0 * A * h0 + 4.0 * B * h2 * h0};
}

RadialState origin_series_start_linear(int N, double u0, double h0) {
  return origin_series_start(RadialField::linear_operator(N), u0, h0);
}

RadialState origin_series_start_nonlinear(int N, double p, double u0, double h0) {
  return origin_series_start(RadialField::nonlinear(N, p), u0, h0);
}

// ---------------------------------------------------------------------------
// Second radial Neumann eigenvalue

namespace {

double eigen_end_slope(int N, double a, double b, double lambda, const IntegratorParams& params) {
  const RadialField field = RadialField::linear_operator(N, lambda);
  RadialState init;
  double r0 = a;
  if (a == 0.0) {
    init = origin_series_start(field, 1.0, params.origin_offset);
    r0 = init.r;
  } else {
    init = {a, 1.0, 0.0};
  }
  return integrate_field(field, r0, b, init, params).back().du;
}

}  // namespace

double neumann_lambda2(int N, double a, double b, const IntegratorParams& params) {
  if (!(a >= 0.0 && a < b && b <= 1.0)) raise(ErrorKind::InvalidArgument, "require 0 <= a < b <= 1");
  // Scan x = sqrt(λ-1); v'(b) < 0 just above λ = 1.
  const double dx = M_PI / (8.0 * (b - a));
  const int max_scan = 400;
  double x_lo = 0.0;
  double x_hi = 0.0;
  bool found = false;
  for (int k = 1; k <= max_scan; ++k) {
    double x = k * dx;
    double slope = eigen_end_slope(N, a, b, 1.0 + x * x, params);
    if (slope == 0.0) return 1.0 + x * x;
    if (slope > 0.0) {
      x_lo = (k - 1) * dx;
      x_hi = x;
      found = true;
      break;
    }
  }
  if (!found) {
    std::ostringstream msg;
    msg << "no sign change of v'(b) below lambda=" << 1.0 + std::pow(max_scan * dx, 2);
    raise(ErrorKind::BracketNotFound, msg.str());
  }
  if (x_lo == 0.0) x_lo = 1e-3 * dx;
  while (x_hi - x_lo > 1e-14 * x_hi) {
    double mid = 0.5 * (x_lo + x_hi);
    if (mid == x_lo || mid == x_hi) break;
    double slope = eigen_end_slope(N, a, b, 1.0 + mid * mid, params);
    if (slope == 0.0) return 1.0 + mid * mid;
    if (slope < 0.0) x_lo = mid; else x_hi = mid;
  }
  const double x = 0.5 * (x_lo + x_hi);
  return 1.0 + x * x;
}

}  // namespace nlayers
