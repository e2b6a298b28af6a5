#include "neumann_layers/finite_p_solver.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <map>
#include <sstream>

#include "neumann_layers/errors.hpp"
#include "neumann_layers/green_basis.hpp"
#include "neumann_layers/limit_solver.hpp"
#include "neumann_layers/newton.hpp"
#include "neumann_layers/parallel.hpp"
#include "neumann_layers/quadrature.hpp"

namespace nlayers {

const char* to_string(Direction d) { return d == Direction::Increasing ? "increasing" : "decreasing"; }

RadialState MonotoneSolution::at(double r) const {
  if (a == 0.0 && r < profile.r_begin()) {
    if (r <= 0.0) return {0.0, c, 0.0};
    return origin_series_start(RadialField::nonlinear(N, p), c, r);
  }
  return profile.eval(r);
}

double scaled_power_difference(double log_first, double log_second, double p) {
  return std::exp(log_second) * std::expm1(log_first - log_second) / p;
}

namespace {

double sphere_area_any(int N) { return unit_sphere_area(N); }

// ||u||_{H^1}^2 / ||u||_{p+1}^2 with the |∂B_1| r^{N-1} weight.
double rayleigh_quotient(const Trajectory& traj, int N, double p) {
  const double area = sphere_area_any(N);
  const double h1 = area * integrate_trajectory(traj, [N](const RadialState& s) {
    return (s.du * s.du + s.u * s.u) * std::pow(s.r, N - 1);
  });
  const double lp = area * integrate_trajectory(traj, [N, p](const RadialState& s) {
    return s.u > 0.0 ? std::exp((p + 1.0) * std::log(s.u)) * std::pow(s.r, N - 1) : 0.0;
  });
  return h1 / std::pow(lp, 2.0 / (p + 1.0));
}

class Shooter {
 public:
  Shooter(int N, double p, double a, double b, Direction dir, const IntegratorParams& params)
      : N_(N), p_(p), a_(a), b_(b), dir_(dir), params_(params), field_(RadialField::nonlinear(N, p)) {
    guard_ = BlowupGuard::for_exponent(p, dir == Direction::Increasing ? +1 : -1);
    r_cap_ = b + std::max(b - a, 0.1);
  }

  double c_of(double x) const { return dir_ == Direction::Increasing ? 1.0 - std::exp(x) : 1.0 + std::exp(x); }
  double x_of(double c) const { return std::log(std::abs(c - 1.0)); }

  RadialState start(double c) const {
    if (a_ == 0.0) return origin_series_start(field_, c, params_.origin_offset);
    return {a_, c, 0.0};
  }

  // Signed distance from b to the first stationary point of u (capped).
  double mismatch(double x) const {
    const double c = c_of(x);
    const RadialState s0 = start(c);
    NonlinearRun run = integrate_field_guarded(field_, s0.r, r_cap_, s0, params_, guard_);
    switch (run.tag) {
      case TerminationTag::DerivativeSignFlip: return run.event_r - b_;
      case TerminationTag::ValueExceededBound: return a_ - b_;
      case TerminationTag::ValueNonPositive:
      case TerminationTag::ReachedEnd: return r_cap_ - b_;
    }
    return r_cap_ - b_;
  }

  std::optional<MonotoneSolution> finalize(double x) const {
    MonotoneSolution sol;
    sol.N = N_;
    sol.p = p_;
    sol.a = a_;
    sol.b = b_;
    sol.direction = dir_;
    sol.c = c_of(x);
    const RadialState s0 = start(sol.c);
    BlowupGuard guard;
    guard.stop_at_nonpositive = true;
    NonlinearRun run = integrate_field_guarded(field_, s0.r, b_, s0, params_, guard);
    if (run.tag != TerminationTag::ReachedEnd) return std::nullopt;
    sol.profile = std::move(run.trajectory);
    const double sign = dir_ == Direction::Increasing ? 1.0 : -1.0;
    const auto& nodes = sol.profile.nodes();
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i)
      if (!(sign * nodes[i].du > 0.0)) return std::nullopt;
    sol.umax = dir_ == Direction::Increasing ? sol.profile.back().u : sol.c;
    sol.boundary_residual = std::abs(sol.profile.back().du);
    sol.q_value = rayleigh_quotient(sol.profile, N_, p_);
    return sol;
  }

  double x_low() const { return std::log(1e-6); }
  double x_high(double ceiling_factor) const {
    if (dir_ == Direction::Increasing) return std::log(1.0 - 1e-6);
    return std::log(ceiling_factor * (energy_bound(p_) - 1.0));
  }

 private:
  int N_;
  double p_, a_, b_;
  Direction dir_;
  IntegratorParams params_;
  RadialField field_;
  BlowupGuard guard_;
  double r_cap_;
};

double refine_root(const Shooter& sh, double lo, double hi, double flo, double fhi) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  boost::uintmax_t max_iter = 200;
  auto tol = [](double l, double h) { return std::abs(h - l) <= 4e-16 * std::max(1.0, std::abs(l)); };
  auto f = [&](double x) { return sh.mismatch(x); };
  std::pair<double, double> r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
  return 0.5 * (r.first + r.second);
}

MonotoneSolution shoot(int N, double p, double a, double b, Direction dir, const IntegratorParams& params,
                       const ShootOptions& opts) {
  params.validate();
  if (!(p > 1.0)) raise(ErrorKind::InvalidArgument, "exponent must exceed 1");
  if (!(a >= 0.0 && a < b && b <= 1.0)) {
    std::ostringstream msg;
    msg << "require 0 <= a < b <= 1, got [" << a << ", " << b << "]";
    raise(ErrorKind::InvalidArgument, msg.str());
  }
  if (dir == Direction::Decreasing && a == 0.0)
    raise(ErrorKind::BallNotAllowed, "decreasing radial Neumann solutions need an annulus (a > 0)");
  if (opts.check_threshold) {
    const double lambda2 = neumann_lambda2(N, a, b, params);
    if (!(p > lambda2)) {
      std::ostringstream msg;
      msg << "p=" << p << " does not exceed the second radial Neumann eigenvalue " << lambda2 << " of [" << a
          << ", " << b << "]";
      raise(ErrorKind::BelowEigenvalueThreshold, msg.str());
    }
  }
  const Shooter sh(N, p, a, b, dir, params);
  const double x_lo = sh.x_low(), x_hi = sh.x_high(opts.ceiling_factor);

  if (opts.c_hint && std::abs(*opts.c_hint - 1.0) > 0.0) {
    const double xh = std::clamp(sh.x_of(*opts.c_hint), x_lo, x_hi);
    const double sh0 = sh.mismatch(xh);
    for (double delta = 2e-3; delta < 1.0; delta *= 2.0) {
      for (double side : {-1.0, 1.0}) {
        const double xt = std::clamp(xh + side * delta, x_lo, x_hi);
        if (xt == xh) continue;
        const double st = sh.mismatch(xt);
        if ((st > 0.0) != (sh0 > 0.0) || st == 0.0 || sh0 == 0.0) {
          const double lo = std::min(xh, xt), hi = std::max(xh, xt);
          const double flo = xt < xh ? st : sh0, fhi = xt < xh ? sh0 : st;
          if (auto sol = sh.finalize(refine_root(sh, lo, hi, flo, fhi))) return *sol;
        }
      }
    }
  }

  const int n = opts.scan_points;
  std::vector<double> xs(n), ss(n);
  for (int i = 0; i < n; ++i) xs[i] = x_lo + (x_hi - x_lo) * i / (n - 1);
  parallel_for(n, [&](std::size_t i) { ss[i] = sh.mismatch(xs[i]); });

  std::vector<std::pair<double, double>> brackets;
  for (int i = 0; i + 1 < n; ++i) {
    if (ss[i] == 0.0 || (ss[i] > 0.0) != (ss[i + 1] > 0.0)) brackets.push_back({xs[i], xs[i + 1]});
  }
  // Two roots can hide between neighbouring samples near a fold. Minimize
  // |offset| around every local extremum that points toward zero.
  for (int i = 1; i + 1 < n; ++i) {
    const bool dip = ss[i] > 0.0 && ss[i] <= ss[i - 1] && ss[i] <= ss[i + 1];
    const bool bump = ss[i] < 0.0 && ss[i] >= ss[i - 1] && ss[i] >= ss[i + 1];
    if (!dip && !bump) continue;
    const double sgn = dip ? 1.0 : -1.0;
    const double rise = std::max(sgn * (ss[i - 1] - ss[i]), sgn * (ss[i + 1] - ss[i]));
    if (!(rise > 0.0) || sgn * ss[i] > rise) continue;  // plateau, or too far from zero
    boost::uintmax_t max_iter = 200;
    const auto [xm, fm] = boost::math::tools::brent_find_minima(
        [&](double x) { return sgn * sh.mismatch(x); }, xs[i - 1], xs[i + 1], 52, max_iter);
    if (fm < 0.0) {
      brackets.push_back({xs[i - 1], xm});
      brackets.push_back({xm, xs[i + 1]});
    }
  }
  if (brackets.empty()) {
    std::ostringstream msg;
    msg << to_string(dir) << " shooting on [" << a << ", " << b << "] at p=" << p
        << " found no sign change; stationary-point offsets range over [" << *std::min_element(ss.begin(), ss.end())
        << ", " << *std::max_element(ss.begin(), ss.end()) << "]";
    raise(ErrorKind::NoBracket, msg.str());
  }
  std::vector<std::optional<MonotoneSolution>> roots(brackets.size());
  parallel_for(brackets.size(), [&](std::size_t i) {
    const auto [lo, hi] = brackets[i];
    const double flo = sh.mismatch(lo), fhi = sh.mismatch(hi);
    roots[i] = sh.finalize(refine_root(sh, lo, hi, flo, fhi));
  });
  std::optional<MonotoneSolution> best;
  int count = 0;
  for (auto& r : roots) {
    if (!r) continue;
    ++count;
    if (!best || r->q_value < best->q_value) best = std::move(r);
  }
  if (!best) {
    std::ostringstream msg;
    msg << brackets.size() << " shooting root(s) on [" << a << ", " << b << "] at p=" << p
        << " all fail strict monotonicity";
    raise(ErrorKind::NonMonotoneOnly, msg.str());
  }
  best->multiplicity = count;
  return *best;
}

}  // namespace

MonotoneSolution shoot_increasing(int N, double p, double a, double b, const IntegratorParams& params,
                                  const ShootOptions& opts) {
  return shoot(N, p, a, b, Direction::Increasing, params, opts);
}

MonotoneSolution shoot_decreasing(int N, double p, double a, double b, const IntegratorParams& params,
                                  const ShootOptions& opts) {
  return shoot(N, p, a, b, Direction::Decreasing, params, opts);
}

ConeInvariants check_cone_invariants(const MonotoneSolution& sol) {
  ConeInvariants inv;
  const double start = sol.c, end = sol.end_value();
  inv.sign_pattern = sol.direction == Direction::Increasing ? (start < 1.0 && 1.0 < end) : (start > 1.0 && 1.0 > end);
  inv.bound = energy_bound(sol.p);
  inv.umax = sol.umax;
  inv.value_bound = sol.umax <= inv.bound;
  const double sign = sol.direction == Direction::Increasing ? 1.0 : -1.0;
  inv.monotone = true;
  const auto& nodes = sol.profile.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    inv.max_slope = std::max(inv.max_slope, std::abs(nodes[i].du));
    if (i > 0 && i + 1 < nodes.size() && !(sign * nodes[i].du > 0.0)) inv.monotone = false;
  }
  inv.slope_bound = inv.max_slope < 1.0;
  return inv;
}

double lyapunov_max_increase(const Trajectory& traj, double p) {
  double worst = -INFINITY;
  const auto& nodes = traj.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double change = lyapunov(p, nodes[i].u, nodes[i].du) - lyapunov(p, nodes[i - 1].u, nodes[i - 1].du);
    worst = std::max(worst, traj.forward() ? change : -change);
  }
  return worst;
}

MatchEval evaluate_matching(int N, double p, double alpha, double beta_left, double beta_right,
                            const IntegratorParams& params, bool check_threshold) {
  if (!(beta_left < alpha && alpha < beta_right)) raise(ErrorKind::InvalidArgument, "require beta_left < alpha < beta_right");
  ShootOptions opts;
  opts.check_threshold = check_threshold;
  MatchEval out;
  out.increasing = shoot_increasing(N, p, beta_left, alpha, params, opts);
  out.decreasing = shoot_decreasing(N, p, alpha, beta_right, params, opts);
  out.value = scaled_power_difference(p * std::log(out.increasing.end_value()), p * std::log(out.decreasing.c), p);
  return out;
}

double matching_L(int N, double p, double alpha, double beta_left, double beta_right, const IntegratorParams& params) {
  return evaluate_matching(N, p, alpha, beta_left, beta_right, params).value;
}

// ---------------------------------------------------------------------------
// Glued solutions

int KLayerSolution::piece_at(double r) const {
  int idx = 0;
  for (int j = 0; j < static_cast<int>(pieces.size()); ++j) {
    if (r >= pieces[j].a) idx = j;
  }
  return idx;
}

RadialState KLayerSolution::at(double r) const { return pieces[piece_at(r)].at(r); }

namespace {

void fill_profile(KLayerSolution& sol) {
  sol.profile.clear();
  for (int j = 0; j < static_cast<int>(sol.pieces.size()); ++j) {
    const MonotoneSolution& piece = sol.pieces[j];
    if (piece.a == 0.0) sol.profile.push_back({0.0, piece.c, 0.0, j});
    const auto& nodes = piece.profile.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (j > 0 && i == 0) continue;  // shared junction radius
      sol.profile.push_back({nodes[i].r, nodes[i].u, nodes[i].du, j});
    }
  }
}

void junction_diagnostics(KLayerSolution& sol) {
  sol.junction_jump = 0.0;
  sol.junction_slope = 0.0;
  for (std::size_t j = 0; j + 1 < sol.pieces.size(); ++j) {
    const MonotoneSolution& left = sol.pieces[j];
    const MonotoneSolution& right = sol.pieces[j + 1];
    const RadialState l = left.profile.back();
    const RadialState r = right.at(right.a);
    sol.junction_jump = std::max(sol.junction_jump, std::abs(l.u - r.u));
    sol.junction_slope = std::max({sol.junction_slope, std::abs(l.du), std::abs(r.du)});
  }
  for (const auto& piece : sol.pieces) sol.junction_slope = std::max(sol.junction_slope, piece.boundary_residual);
}

int count_interior_maxima(const KLayerSolution& sol) {
  std::vector<double> grid = uniform_grid(sol.beta.front(), sol.beta.back(), 4001);
  grid.insert(grid.end(), sol.alpha.begin(), sol.alpha.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> u(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) u[i] = sol.at(grid[i]).u;
  int count = 0;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i)
    if (u[i] > u[i - 1] && u[i] >= u[i + 1]) ++count;
  return count;
}

double seed_alpha(int N, double a, double b) {
  if (N < 3) return 0.5 * (a + b);
  return reflection_point(annulus_basis(build_basis(N), a, b));
}

}  // namespace

KLayerSolution solve_1layer(int N, double p, double a, double b, const IntegratorParams& params,
                            const OneLayerOptions& opts) {
  if (!(a >= 0.0 && a < b && b <= 1.0)) raise(ErrorKind::InvalidArgument, "require 0 <= a < b <= 1");
  const double whole = neumann_lambda2(N, a, b, params);
  if (!(p > whole)) {
    std::ostringstream msg;
    msg << "p=" << p << " does not exceed the second radial Neumann eigenvalue " << whole << " of [" << a << ", "
        << b << "]";
    raise(ErrorKind::BelowEigenvalueThreshold, msg.str());
  }
  const double seed = opts.alpha_seed ? *opts.alpha_seed : seed_alpha(N, a, b);

  // Pieces are shot without the per-piece eigenvalue check: monotone pieces
  // persist a little below their own threshold before the branch folds.
  std::map<double, std::optional<double>> samples;
  auto probe = [&](double alpha) -> std::optional<double> {
    auto it = samples.find(alpha);
    if (it != samples.end()) return it->second;
    std::optional<double> v;
    try {
      v = evaluate_matching(N, p, alpha, a, b, params, false).value;
    } catch (const SolverError& e) {
      if (e.kind() != ErrorKind::NoBracket && e.kind() != ErrorKind::NonMonotoneOnly) throw;
    }
    samples[alpha] = v;
    return v;
  };
  auto find_bracket = [&]() -> std::optional<std::pair<double, double>> {
    for (auto it = samples.begin(); it != samples.end(); ++it) {
      auto next = std::next(it);
      if (next == samples.end()) break;
      if (!it->second || !next->second) continue;
      if (*it->second == 0.0 || (*it->second > 0.0) != (*next->second > 0.0)) return std::make_pair(it->first, next->first);
    }
    return std::nullopt;
  };

  const int n = opts.alpha_grid;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = a + (b - a) * (i + 1.0) / (n + 1.0);
  const int start = std::clamp(static_cast<int>(std::lround((seed - a) / (b - a) * (n + 1.0) - 1.0)), 0, n - 1);
  std::optional<std::pair<double, double>> bracket;
  for (int dist = 0; dist < n && !bracket; ++dist) {
    for (int i : {start - dist, start + dist}) {
      if (i < 0 || i >= n || (dist == 0 && i != start)) continue;
      probe(grid[i]);
      if ((bracket = find_bracket())) break;
    }
  }
  if (!bracket) {
    // The root can sit between the last feasible grid point and a fold of the
    // piece family; resolve each feasible/infeasible boundary.
    std::vector<std::pair<double, double>> edges;
    for (auto it = samples.begin(); std::next(it) != samples.end(); ++it) {
      auto next = std::next(it);
      if (it->second.has_value() != next->second.has_value()) edges.push_back({it->first, next->first});
    }
    for (auto [lo, hi] : edges) {
      bool lo_ok = samples[lo].has_value();
      for (int iter = 0; iter < 40 && !bracket; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const bool ok = probe(mid).has_value();
        (ok == lo_ok ? lo : hi) = mid;
        bracket = find_bracket();
      }
      if (bracket) break;
    }
  }
  if (!bracket) {
    std::ostringstream msg;
    msg << "matching function has no sign change on [" << a << ", " << b << "] at p=" << p << "; samples:";
    for (const auto& [alpha, v] : samples) {
      msg << " (" << alpha << ", ";
      if (v) msg << *v; else msg << "infeasible";
      msg << ")";
    }
    raise(ErrorKind::NoBracket, msg.str());
  }

  auto L = [&](double alpha) { return evaluate_matching(N, p, alpha, a, b, params, false).value; };
  double alpha_p;
  {
    const auto [lo, hi] = *bracket;
    const double flo = *samples[lo], fhi = *samples[hi];
    if (flo == 0.0) {
      alpha_p = lo;
    } else {
      boost::uintmax_t max_iter = 100;
      auto tol = [](double l, double h) { return std::abs(h - l) <= 1e-13; };
      auto r = boost::math::tools::toms748_solve(L, lo, hi, flo, fhi, tol, max_iter);
      alpha_p = 0.5 * (r.first + r.second);
    }
  }
  MatchEval fin = evaluate_matching(N, p, alpha_p, a, b, params, false);

  KLayerSolution sol;
  sol.N = N;
  sol.p = p;
  sol.k = 1;
  sol.beta = {a, b};
  sol.alpha = {alpha_p};
  sol.pieces = {std::move(fin.increasing), std::move(fin.decreasing)};
  fill_profile(sol);
  junction_diagnostics(sol);
  sol.interior_maxima = count_interior_maxima(sol);
  return sol;
}

KLayerSolution assemble_layers(const std::vector<KLayerSolution>& layers) {
  KLayerSolution sol;
  sol.N = layers.front().N;
  sol.p = layers.front().p;
  sol.k = static_cast<int>(layers.size());
  sol.beta.push_back(layers.front().beta.front());
  for (const auto& layer : layers) {
    sol.beta.push_back(layer.beta.back());
    sol.alpha.push_back(layer.alpha.front());
    sol.pieces.push_back(layer.pieces[0]);
    sol.pieces.push_back(layer.pieces[1]);
  }
  fill_profile(sol);
  junction_diagnostics(sol);
  sol.interior_maxima = count_interior_maxima(sol);
  return sol;
}

namespace {

std::vector<KLayerSolution> solve_layers(int N, double p, const std::vector<double>& beta,
                                         const IntegratorParams& params) {
  const std::size_t k = beta.size() - 1;
  std::vector<std::optional<KLayerSolution>> layers(k);
  parallel_for(k, [&](std::size_t j) { layers[j] = solve_1layer(N, p, beta[j], beta[j + 1], params); });
  std::vector<KLayerSolution> out;
  for (auto& l : layers) out.push_back(std::move(*l));
  return out;
}

std::vector<double> mismatch_of(const std::vector<KLayerSolution>& layers) {
  std::vector<double> out;
  for (std::size_t j = 0; j + 1 < layers.size(); ++j)
    out.push_back(layers[j + 1].pieces[0].c - layers[j].pieces[1].end_value());
  return out;
}

std::vector<double> with_ends(const std::vector<double>& interior) {
  std::vector<double> beta{0.0};
  beta.insert(beta.end(), interior.begin(), interior.end());
  beta.push_back(1.0);
  return beta;
}

}  // namespace

std::vector<double> m_p(int N, double p, const std::vector<double>& interior_beta, const IntegratorParams& params) {
  double prev = 0.0;
  for (double b : interior_beta) {
    if (!(b > prev && b < 1.0)) raise(ErrorKind::InvalidArgument, "junctions must satisfy 0 < b_1 < ... < 1");
    prev = b;
  }
  return mismatch_of(solve_layers(N, p, with_ends(interior_beta), params));
}

KLayerSolution solve_klayer(int N, double p, int k, const IntegratorParams& params, const KLayerOptions& opts) {
  if (k < 1) raise(ErrorKind::InvalidArgument, "layer count must be at least 1");
  if (k == 1) return solve_1layer(N, p, 0.0, 1.0, params);

  std::vector<double> seed;
  if (opts.beta_seed) {
    seed = *opts.beta_seed;
  } else if (N >= 3) {
    const LimitLayerConfig cfg = solve_limit_config(build_basis(N), k);
    seed.assign(cfg.beta.begin() + 1, cfg.beta.end() - 1);
  } else {
    for (int j = 1; j < k; ++j) seed.push_back(static_cast<double>(j) / k);
  }

  std::string first_failure;
  const VectorMap F = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    try {
      const std::vector<double> v = m_p(N, p, std::vector<double>(x.data(), x.data() + x.size()), params);
      return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    } catch (const SolverError& e) {
      if (first_failure.empty()) first_failure = e.what();
      return Eigen::VectorXd::Constant(x.size(), NAN);
    }
  };
  const Feasibility ordered = [](const Eigen::VectorXd& x) {
    double prev = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!(x(i) > prev + 1e-6)) return false;
      prev = x(i);
    }
    return prev < 1.0 - 1e-6;
  };
  NewtonOptions nopts;
  nopts.tolerance = opts.tolerance;
  nopts.fd_step = opts.fd_step;
  nopts.max_iterations = opts.max_newton;
  const Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(seed.data(), static_cast<Eigen::Index>(seed.size()));
  NewtonResult res = damped_newton(F, x0, ordered, nopts);
  if (!res.converged) {
    std::ostringstream msg;
    msg << "k=" << k << " junction mismatch not solved at p=" << p << "; best residual " << res.norm
        << " at beta = [";
    for (Eigen::Index i = 0; i < res.x.size(); ++i) msg << (i ? ", " : "") << res.x(i);
    msg << "]";
    if (!first_failure.empty()) msg << "; first sub-solve failure: " << first_failure;
    raise(ErrorKind::NoConvergence, msg.str());
  }
  const std::vector<double> beta = with_ends(std::vector<double>(res.x.data(), res.x.data() + res.x.size()));
  KLayerSolution sol = assemble_layers(solve_layers(N, p, beta, params));
  sol.residual_M = res.norm;
  sol.newton_iterations = res.iterations;
  return sol;
}

}  // namespace nlayers
