#include "neumann_layers/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "neumann_layers/errors.hpp"
#include "neumann_layers/limit_solver.hpp"
#include "neumann_layers/parallel.hpp"
#include "neumann_layers/quadrature.hpp"

namespace nlayers {

double limit_increasing_slope(const GreenBasis& basis, double a, double b) {
  const ValueSlope x = annulus_basis(basis, a, b).xi(b);
  return x.slope / x.value;
}

PowerRatio boundary_power_ratio(const MonotoneSolution& s, const GreenBasis& basis) {
  if (s.direction != Direction::Increasing) raise(ErrorKind::InvalidArgument, "ratio needs an increasing solution");
  PowerRatio out;
  out.scaled_power = std::exp(s.p * std::log(s.end_value())) / s.p;
  const double slope = limit_increasing_slope(basis, s.a, s.b);
  out.reference = 0.5 * slope * slope;
  out.ratio = out.scaled_power / out.reference;
  return out;
}

PowerRatio boundary_power_ratio(int N, double p, double a, double b, const IntegratorParams& params) {
  return boundary_power_ratio(shoot_increasing(N, p, a, b, params), build_basis(N, params));
}

double z_infinity(double r) {
  const double t = std::sqrt(2.0) * r;
  // log 4 + t - 2 log(1 + e^t), written to avoid overflow for large |t|.
  return std::log(4.0) - std::abs(t) - 2.0 * std::log1p(std::exp(-std::abs(t)));
}

BlowupProfile blowup_profile(const MonotoneSolution& s, const GreenBasis& basis, double window, int samples) {
  if (s.direction != Direction::Increasing)
    raise(ErrorKind::InvalidArgument, "blow-up profile needs an increasing solution (maximum at b)");
  if (!(window > 0.0) || samples < 2) raise(ErrorKind::InvalidArgument, "window must be positive, samples >= 2");
  BlowupProfile out;
  out.umax = s.end_value();
  out.eps = std::sqrt(std::exp(-(s.p - 1.0) * std::log(out.umax)) / s.p);
  out.scaled_slope = s.p * out.eps * limit_increasing_slope(basis, s.a, s.b) / std::sqrt(2.0);
  if (window * out.eps > s.b - s.a) {
    std::ostringstream msg;
    msg << "window " << window << " times eps_p=" << out.eps << " exceeds the interval length " << s.b - s.a;
    raise(ErrorKind::WindowExceedsDomain, msg.str());
  }
  for (int i = 0; i < samples; ++i) {
    const double r = -window + window * i / (samples - 1);
    const double z = i == samples - 1 ? 0.0 : s.p / out.umax * (s.at(s.b + out.eps * r).u - out.umax);
    out.r.push_back(r);
    out.z.push_back(z);
    out.z_limit.push_back(z_infinity(r));
    out.sup_error = std::max(out.sup_error, std::abs(z - out.z_limit.back()));
  }
  return out;
}

EnergyLevel energy_level(const MonotoneSolution& s, const GreenBasis& basis, int points, int subdivisions) {
  if (s.direction != Direction::Increasing) raise(ErrorKind::InvalidArgument, "energy level needs an increasing solution");
  const int N = s.N;
  const double p = s.p, area = unit_sphere_area(N);
  EnergyLevel out;
  out.h1_squared = area * integrate_trajectory(s.profile, [N](const RadialState& st) {
    return (st.du * st.du + st.u * st.u) * std::pow(st.r, N - 1);
  }, points, subdivisions);
  out.lp_integral = area * integrate_trajectory(s.profile, [N, p](const RadialState& st) {
    return st.u > 0.0 ? std::exp((p + 1.0) * std::log(st.u)) * std::pow(st.r, N - 1) : 0.0;
  }, points, subdivisions);
  out.c_p = out.h1_squared / std::pow(out.lp_integral, 2.0 / (p + 1.0));
  out.norm_power = std::pow(out.lp_integral, (p - 1.0) / (p + 1.0));
  out.reference = area * std::pow(s.b, N - 1) * limit_increasing_slope(basis, s.a, s.b);
  return out;
}

namespace {

PohozaevBalance balance(double lhs, double rhs) {
  return {lhs, rhs, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1.0})};
}

}  // namespace

PohozaevBalance pohozaev_residual(const MonotoneSolution& s) {
  const int N = s.N;
  const double p = s.p;
  const double grad = integrate_trajectory(s.profile, [N](const RadialState& st) {
    return st.du * st.du * std::pow(st.r, N - 1);
  });
  const double mass = integrate_trajectory(s.profile, [N](const RadialState& st) {
    return st.u * st.u * std::pow(st.r, N - 1);
  });
  // ∫ r^{N-1} u^{p+1} = grad + mass for a Neumann solution.
  const double lhs = 0.5 * (N - 2.0) * grad + N * (0.5 * mass - (grad + mass) / (p + 1.0));
  auto edge = [p, N](const RadialState& st) {
    const double F = std::exp((p + 1.0) * std::log(st.u)) / (p + 1.0);
    return std::pow(st.r, N) * (0.5 * st.u * st.u - F - 0.5 * st.du * st.du);
  };
  const RadialState left = s.a == 0.0 ? RadialState{0.0, s.c, 0.0} : s.profile.front();
  return balance(lhs, edge(s.profile.back()) - edge(left));
}

PohozaevBalance pohozaev_constant(int N, double p, double a, double b) {
  const double mass = (std::pow(b, N) - std::pow(a, N)) / N;  // ∫ r^{N-1}
  const double lhs = N * (0.5 * mass - mass / (p + 1.0));
  const double bracket = 0.5 - 1.0 / (p + 1.0);
  return balance(lhs, (std::pow(b, N) - std::pow(a, N)) * bracket);
}

PohozaevBalance pohozaev_limit(const AnnulusBasis& ab, int panels) {
  const int N = ab.base().dimension();
  const double alpha = reflection_point(ab);
  double lhs = 0.0, rhs = 0.0;
  for (bool left : {true, false}) {
    const double lo = left ? ab.a() : alpha, hi = left ? alpha : ab.b();
    auto value = [&](double r) { return limit_1layer_value(ab, alpha, r); };
    auto slope = [&](double r) { return limit_1layer_slope(ab, alpha, r, left); };
    const double grad = integrate_function([&](double r) { return std::pow(slope(r), 2) * std::pow(r, N - 1); },
                                           lo, hi, panels);
    const double mass = integrate_function([&](double r) { return std::pow(value(r), 2) * std::pow(r, N - 1); },
                                           lo, hi, panels);
    lhs += 0.5 * (N - 2.0) * grad + 0.5 * N * mass;
    auto edge = [&](double r) { return std::pow(r, N) * 0.5 * (value(r) * value(r) - slope(r) * slope(r)); };
    rhs += edge(hi) - (lo > 0.0 ? edge(lo) : 0.0);
  }
  return balance(lhs, rhs);
}

// ---------------------------------------------------------------------------
// Spectrum

namespace {

struct Tridiagonal {
  std::vector<double> diag, off;  // off[i] couples i and i+1
};

int negative_count(const Tridiagonal& t, double shift) {
  int count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < t.diag.size(); ++i) {
    const double e2 = i == 0 ? 0.0 : t.off[i - 1] * t.off[i - 1];
    q = t.diag[i] - shift - (i == 0 ? 0.0 : e2 / q);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

// k-th smallest eigenvalue (0-based) by Sturm bisection.
double kth_eigenvalue(const Tridiagonal& t, int k, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (negative_count(t, mid) > k) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

// A few steps of inverse iteration at a fixed shift, finished with a Rayleigh quotient.
double inverse_iteration(const Tridiagonal& t, double shift) {
  const std::size_t n = t.diag.size();
  std::vector<double> x(n, 1.0), c(n), d(n);
  for (int step = 0; step < 3; ++step) {
    // Thomas solve (T - shift) y = x.
    double m = t.diag[0] - shift;
    c[0] = n > 1 ? t.off[0] / m : 0.0;
    d[0] = x[0] / m;
    for (std::size_t i = 1; i < n; ++i) {
      m = t.diag[i] - shift - t.off[i - 1] * c[i - 1];
      if (m == 0.0) m = 1e-300;
      c[i] = i + 1 < n ? t.off[i] / m : 0.0;
      d[i] = (x[i] - t.off[i - 1] * d[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    double norm = 0.0;
    for (double v : d) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) return shift;
    for (std::size_t i = 0; i < n; ++i) x[i] = d[i] / norm;
  }
  double num = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double tx = t.diag[i] * x[i];
    if (i > 0) tx += t.off[i - 1] * x[i - 1];
    if (i + 1 < n) tx += t.off[i] * x[i + 1];
    num += x[i] * tx;
  }
  return num;
}

}  // namespace

SpectrumResult linearized_spectrum(int N, double a, double b, const std::function<double(double)>& potential,
                                   int nodes) {
  if (nodes < 3) raise(ErrorKind::InvalidArgument, "need at least 3 nodes");
  if (!(a >= 0.0 && a < b)) raise(ErrorKind::InvalidArgument, "require 0 <= a < b");
  const int n = nodes - 1;
  const double h = (b - a) / n;
  auto r_at = [&](double i) { return a + h * i; };
  std::vector<double> weight(nodes), flux(n), A_diag(nodes, 0.0);
  for (int i = 0; i < nodes; ++i) {
    const double lo = std::max(a, r_at(i - 0.5)), hi = std::min(b, r_at(i + 0.5));
    weight[i] = (std::pow(hi, N) - std::pow(lo, N)) / N;
  }
  for (int i = 0; i < n; ++i) flux[i] = std::pow(r_at(i + 0.5), N - 1) / h;
  Tridiagonal t;
  t.diag.resize(nodes);
  t.off.resize(n);
  for (int i = 0; i < nodes; ++i) {
    double a_ii = weight[i] * potential(r_at(i));
    if (i > 0) a_ii += flux[i - 1];
    if (i < n) a_ii += flux[i];
    t.diag[i] = a_ii / weight[i];
  }
  for (int i = 0; i < n; ++i) t.off[i] = -flux[i] / std::sqrt(weight[i] * weight[i + 1]);

  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i < nodes; ++i) {
    const double radius = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) + (i < n ? std::abs(t.off[i]) : 0.0);
    lo = std::min(lo, t.diag[i] - radius);
    hi = std::max(hi, t.diag[i] + radius);
  }
  SpectrumResult out;
  out.nodes = nodes;
  out.negative_count = negative_count(t, 0.0);
  std::vector<double> candidates;
  if (out.negative_count > 0) candidates.push_back(kth_eigenvalue(t, out.negative_count - 1, lo, 0.0));
  if (out.negative_count < nodes) candidates.push_back(kth_eigenvalue(t, out.negative_count, 0.0, hi));
  double best = INFINITY;
  for (double c : candidates) {
    const double refined = inverse_iteration(t, c);
    const double pick = std::abs(refined - c) <= 1e-6 * std::max(1.0, std::abs(c)) ? refined : c;
    if (std::abs(pick) < std::abs(best)) best = pick;
  }
  out.nearest = best;
  out.min_abs_eig = std::abs(best);
  return out;
}

SpectrumResult nondegeneracy_spectrum(const MonotoneSolution& s, int nodes) {
  const double p = s.p;
  return linearized_spectrum(s.N, s.a, s.b, [&](double r) {
    const double u = s.at(r).u;
    return 1.0 - p * std::exp((p - 1.0) * std::log(u));
  }, nodes);
}

ConstantSpectrumCheck constant_spectrum_check(int N, double a, double b, int nodes, const IntegratorParams& params) {
  ConstantSpectrumCheck out;
  out.lambda2_shooting = neumann_lambda2(N, a, b, params);
  out.p = out.lambda2_shooting + 0.25;
  const SpectrumResult s = linearized_spectrum(N, a, b, [&](double) { return 1.0 - out.p; }, nodes);
  out.lambda2_spectrum = out.p + s.nearest;
  out.relative_error = std::abs(out.lambda2_spectrum - out.lambda2_shooting) / out.lambda2_shooting;
  return out;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const std::vector<std::string>& validation_groups() {
  static const std::vector<std::string> groups{"ratio", "energy", "blowup", "pohozaev", "nondegeneracy"};
  return groups;
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// One check per consecutive pair: value must drop strictly.
void add_trend(ValidationReport& rep, const std::string& name, const std::vector<double>& values,
               const std::string& provenance) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    CheckResult c;
    c.name = name + " p=" + fmt(rep.trend[i - 1].p) + "->" + fmt(rep.trend[i].p);
    c.value = values[i];
    c.reference = values[i - 1];
    c.passed = values[i] < values[i - 1];
    c.provenance = provenance;
    rep.checks.push_back(c);
  }
}

void add_bound(ValidationReport& rep, const std::string& name, double value, double tolerance,
               const std::string& provenance, double reference = 0.0) {
  CheckResult c;
  c.name = name;
  c.value = value;
  c.reference = reference;
  c.tolerance = tolerance;
  c.passed = std::abs(value - reference) < tolerance;
  c.provenance = provenance;
  rep.checks.push_back(c);
}

}  // namespace

ValidationReport run_validation(int N, double a, double b, const ValidationOptions& opts,
                                const IntegratorParams& params) {
  if (opts.sweep.empty()) raise(ErrorKind::InvalidArgument, "empty p sweep");
  for (std::size_t i = 1; i < opts.sweep.size(); ++i)
    if (!(opts.sweep[i] > opts.sweep[i - 1])) raise(ErrorKind::InvalidArgument, "p sweep must be strictly ascending");
  const auto& groups = validation_groups();
  if (!opts.only.empty() && std::find(groups.begin(), groups.end(), opts.only) == groups.end())
    raise(ErrorKind::InvalidArgument, "unknown check '" + opts.only + "'");
  auto wanted = [&](const std::string& g) { return opts.only.empty() || opts.only == g; };

  const GreenBasis basis = build_basis(N, params);
  ValidationReport rep;
  rep.N = N;
  rep.a = a;
  rep.b = b;
  rep.trend.resize(opts.sweep.size());
  std::vector<MonotoneSolution> sols(opts.sweep.size());
  std::vector<EnergyLevel> energy(opts.sweep.size());
  std::vector<SpectrumResult> coarse(opts.sweep.size()), fine(opts.sweep.size());
  std::vector<BlowupProfile> blowup(opts.sweep.size());
  parallel_for(opts.sweep.size(), [&](std::size_t i) {
    const double p = opts.sweep[i];
    sols[i] = shoot_increasing(N, p, a, b, params);
    TrendRow& row = rep.trend[i];
    row.p = p;
    if (wanted("ratio")) row.ratio_error = std::abs(boundary_power_ratio(sols[i], basis).ratio - 1.0);
    if (wanted("energy")) {
      energy[i] = energy_level(sols[i], basis);
      row.energy_error = std::abs(energy[i].c_p - energy[i].reference);
    }
    if (wanted("blowup")) {
      blowup[i] = blowup_profile(sols[i], basis, opts.window);
      row.blowup_error = blowup[i].sup_error;
    }
    if (wanted("pohozaev")) row.pohozaev = pohozaev_residual(sols[i]).residual;
    if (wanted("nondegeneracy")) {
      coarse[i] = nondegeneracy_spectrum(sols[i], opts.coarse_nodes);
      fine[i] = nondegeneracy_spectrum(sols[i], opts.fine_nodes);
      row.eig_coarse = coarse[i].min_abs_eig;
      row.eig_fine = fine[i].min_abs_eig;
    }
  });

  auto column = [&](double TrendRow::*field) {
    std::vector<double> v;
    for (const auto& row : rep.trend) v.push_back(row.*field);
    return v;
  };
  if (wanted("ratio")) {
    add_trend(rep, "ratio trend", column(&TrendRow::ratio_error), "limit of u(b)^p/p; trend derived");
    for (const auto& row : rep.trend)
      if (row.p == 200.0) add_bound(rep, "ratio band p=200", 1.0 + row.ratio_error, 0.2, "band derived from O(1/p) correction", 1.0);
  }
  if (wanted("energy")) {
    add_trend(rep, "energy trend", column(&TrendRow::energy_error), "energy level limit; trend derived");
    for (std::size_t i = 0; i < energy.size(); ++i)
      add_bound(rep, "energy self-consistency p=" + fmt(rep.trend[i].p),
                std::abs(energy[i].c_p - energy[i].norm_power) / energy[i].c_p, 1e-8, "solution identity");
  }
  if (wanted("blowup")) {
    add_trend(rep, "blow-up trend", column(&TrendRow::blowup_error), "C^1_loc convergence of the zoom; trend derived");
    for (std::size_t i = 0; i < blowup.size(); ++i) add_bound(rep, "zoom origin p=" + fmt(rep.trend[i].p), blowup[i].z.back(), 1e-15, "boundary rows");
  }
  if (wanted("pohozaev")) {
    for (const auto& row : rep.trend) add_bound(rep, "pohozaev p=" + fmt(row.p), row.pohozaev, 1e-7, "quadrature of the converged profile");
    add_bound(rep, "pohozaev constant", pohozaev_constant(N, opts.sweep.front(), a, b).residual, 1e-12, "constant solution");
    add_bound(rep, "pohozaev limit", pohozaev_limit(annulus_basis(basis, a, b)).residual, 1e-7, "Green-basis quadrature");
  }
  if (wanted("nondegeneracy")) {
    for (const auto& row : rep.trend) {
      const double variation = std::abs(row.eig_fine - row.eig_coarse);
      add_bound(rep, "spectrum refinement p=" + fmt(row.p), variation / row.eig_fine, 0.1, "discretization convergence");
      CheckResult c;
      c.name = "spectrum away from 0 p=" + fmt(row.p);
      c.value = row.eig_fine;
      c.reference = 10.0 * variation;
      c.passed = row.eig_fine > 10.0 * variation;
      c.provenance = "nondegeneracy; bound derived";
      rep.checks.push_back(c);
    }
    const ConstantSpectrumCheck cc = constant_spectrum_check(N, a, b, opts.fine_nodes, params);
    add_bound(rep, "constant-solution spectrum", cc.relative_error, 1e-4, "eigenvalue shift identity");
  }
  return rep;
}

}  // namespace nlayers
