#include "neumann_layers/limit_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "neumann_layers/errors.hpp"
#include "neumann_layers/newton.hpp"
#include "neumann_layers/parallel.hpp"

namespace nlayers {

double reflection_point(const AnnulusBasis& ab) {
  auto F = [&](double s) {
    const ValueSlope x = ab.xi(s), z = ab.zeta(s);
    return x.slope / x.value + z.slope / z.value;
  };
  double lo = ab.a() > 0.0 ? ab.a() : 1e-9 * ab.b();
  double hi = ab.b();
  const double flo = F(lo), fhi = F(hi);
  if (!(flo < 0.0 && fhi > 0.0)) {
    std::ostringstream msg;
    msg << "reflection function has no sign change on [" << ab.a() << ", " << ab.b()
        << "]: F(lo)=" << flo << ", F(hi)=" << fhi;
    raise(ErrorKind::BracketFailure, msg.str());
  }
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (F(mid) < 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double limit_1layer_value(const AnnulusBasis& ab, double alpha, double r) {
  if (r <= alpha) return ab.xi(r).value / ab.xi(alpha).value;
  return ab.zeta(r).value / ab.zeta(alpha).value;
}

double limit_1layer_slope(const AnnulusBasis& ab, double alpha, double r, bool left_side) {
  if (left_side ? r <= alpha : r < alpha) return ab.xi(r).slope / ab.xi(alpha).value;
  return ab.zeta(r).slope / ab.zeta(alpha).value;
}

LimitOneLayer limit_1layer(const AnnulusBasis& ab, const std::vector<double>& grid) {
  LimitOneLayer out;
  out.alpha = reflection_point(ab);
  out.grid = grid;
  out.values.reserve(grid.size());
  for (double r : grid) out.values.push_back(limit_1layer_value(ab, out.alpha, r));
  return out;
}

namespace {

std::vector<double> full_junctions(const std::vector<double>& interior) {
  std::vector<double> beta;
  beta.reserve(interior.size() + 2);
  beta.push_back(0.0);
  beta.insert(beta.end(), interior.begin(), interior.end());
  beta.push_back(1.0);
  return beta;
}

void check_interior(const std::vector<double>& interior) {
  double prev = 0.0;
  for (double b : interior) {
    if (!(b > prev && b < 1.0)) raise(ErrorKind::InvalidArgument, "junctions must satisfy 0 < b_1 < ... < 1");
    prev = b;
  }
}

}  // namespace

std::vector<double> layer_locations(const GreenBasis& basis, const std::vector<double>& beta) {
  std::vector<double> alpha;
  alpha.reserve(beta.size() - 1);
  for (std::size_t j = 1; j < beta.size(); ++j)
    alpha.push_back(reflection_point(annulus_basis(basis, beta[j - 1], beta[j])));
  return alpha;
}

std::vector<double> m_infty(const GreenBasis& basis, const std::vector<double>& interior_beta) {
  check_interior(interior_beta);
  const std::vector<double> beta = full_junctions(interior_beta);
  const std::vector<double> alpha = layer_locations(basis, beta);
  const int N = basis.dimension();
  std::vector<double> out;
  for (std::size_t j = 1; j + 1 < beta.size(); ++j) {
    const double b = beta[j];
    const ValueSlope xb = basis.xi(b), zb = basis.zeta(b);
    const ValueSlope xr = basis.xi(alpha[j]), zr = basis.zeta(alpha[j]);
    const ValueSlope xl = basis.xi(alpha[j - 1]), zl = basis.zeta(alpha[j - 1]);
    const double right = 1.0 / (xb.slope * zr.value - xr.value * zb.slope);
    const double left = 1.0 / (xb.slope * zl.value - xl.value * zb.slope);
    out.push_back(std::pow(b, 1 - N) * (right - left));
  }
  return out;
}

std::vector<double> m_infty_quotient(const GreenBasis& basis, const std::vector<double>& interior_beta) {
  check_interior(interior_beta);
  const std::vector<double> beta = full_junctions(interior_beta);
  const std::vector<double> alpha = layer_locations(basis, beta);
  std::vector<double> out;
  for (std::size_t j = 1; j + 1 < beta.size(); ++j) {
    const AnnulusBasis right = annulus_basis(basis, beta[j], beta[j + 1]);
    const AnnulusBasis left = annulus_basis(basis, beta[j - 1], beta[j]);
    out.push_back(right.xi(beta[j]).value / right.xi(alpha[j]).value -
                  left.zeta(beta[j]).value / left.zeta(alpha[j - 1]).value);
  }
  return out;
}

double junction_condition_residual(const GreenBasis& basis, const std::vector<double>& beta,
                                   const std::vector<double>& alpha) {
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < beta.size(); ++j) {
    const ValueSlope xb = basis.xi(beta[j]), zb = basis.zeta(beta[j]);
    const ValueSlope x1 = basis.xi(alpha[j - 1]), x2 = basis.xi(alpha[j]);
    const ValueSlope z1 = basis.zeta(alpha[j - 1]), z2 = basis.zeta(alpha[j]);
    const double lhs = xb.slope / zb.slope;
    const double rhs = (x2.value - x1.value) / (z2.value - z1.value);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

Eigen::MatrixXd green_matrix(const GreenBasis& basis, const std::vector<double>& alpha) {
  const AnnulusBasis unit = annulus_basis(basis, 0.0, 1.0);
  const Eigen::Index k = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd G(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) G(i, j) = green_eval(unit, alpha[i], alpha[j]);
  return G;
}

AmplitudeSolve solve_amplitude_system(const Eigen::MatrixXd& green) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(green);
  const double rcond = lu.rcond();
  AmplitudeSolve out;
  out.condition = rcond > 0.0 ? 1.0 / rcond : INFINITY;
  if (!(out.condition <= 1e12)) {
    std::ostringstream msg;
    msg << "amplitude system condition estimate " << out.condition << " exceeds 1e12";
    raise(ErrorKind::SingularSystem, msg.str());
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(green.rows());
  const Eigen::VectorXd A = lu.solve(ones);
  out.amplitude.assign(A.data(), A.data() + A.size());
  out.residual = (green * A - ones).lpNorm<Eigen::Infinity>();
  return out;
}

AmplitudeSolve amplitudes(const GreenBasis& basis, const std::vector<double>& alpha) {
  double prev = 0.0;
  for (double a : alpha) {
    if (!(a > prev && a < 1.0)) raise(ErrorKind::InvalidArgument, "layer locations must be ordered in (0,1)");
    prev = a;
  }
  return solve_amplitude_system(green_matrix(basis, alpha));
}

double phi_direct(const GreenBasis& basis, const std::vector<double>& s) {
  const AmplitudeSolve sol = amplitudes(basis, s);
  double sum = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) sum += sol.amplitude[j] * std::pow(s[j], basis.dimension() - 1);
  return basis.sphere_area() * sum;
}

std::vector<double> phi_criticality_residual(const GreenBasis& basis, const std::vector<double>& alpha) {
  const std::size_t k = alpha.size();
  std::vector<ValueSlope> x(k), z(k);
  for (std::size_t j = 0; j < k; ++j) {
    x[j] = basis.xi(alpha[j]);
    z[j] = basis.zeta(alpha[j]);
  }
  // Slope at alpha_i of the solution of L w = 0 equal to 1 at alpha_i and alpha_j.
  auto pair = [&](std::size_t i, std::size_t j) {
    const double num = z[i].slope * (x[j].value - x[i].value) - x[i].slope * (z[j].value - z[i].value);
    const double den = x[j].value * z[i].value - z[j].value * x[i].value;
    return num / den;
  };
  std::vector<double> out(k);
  if (k == 1) {
    out[0] = x[0].slope / x[0].value + z[0].slope / z[0].value;
    return out;
  }
  out[0] = x[0].slope / x[0].value + pair(0, 1);
  for (std::size_t j = 1; j + 1 < k; ++j) out[j] = pair(j, j - 1) + pair(j, j + 1);
  out[k - 1] = pair(k - 1, k - 2) + z[k - 1].slope / z[k - 1].value;
  return out;
}

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

bool ordered_interior(const Eigen::VectorXd& x) {
  double prev = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) > prev + 1e-9)) return false;
    prev = x(i);
  }
  return prev < 1.0 - 1e-9;
}

void finalize(const GreenBasis& basis, LimitLayerConfig& cfg) {
  cfg.alpha = layer_locations(basis, cfg.beta);
  const AmplitudeSolve amp = amplitudes(basis, cfg.alpha);
  cfg.amplitude = amp.amplitude;
  cfg.residual_amplitude = amp.residual;
  cfg.residual_phi = inf_norm(phi_criticality_residual(basis, cfg.alpha));
  cfg.residual_junction = junction_condition_residual(basis, cfg.beta, cfg.alpha);
  const std::vector<double> interior(cfg.beta.begin() + 1, cfg.beta.end() - 1);
  cfg.residual_M = interior.empty() ? 0.0 : inf_norm(m_infty(basis, interior));
}

}  // namespace

LimitLayerConfig solve_limit_config(const GreenBasis& basis, int k, const LimitSolveOptions& opts) {
  if (k < 1) raise(ErrorKind::InvalidArgument, "layer count must be at least 1");
  LimitLayerConfig cfg;
  cfg.N = basis.dimension();
  cfg.k = k;
  if (k == 1) {
    cfg.beta = {0.0, 1.0};
    cfg.method = "reflection";
    finalize(basis, cfg);
    return cfg;
  }

  const VectorMap M = [&](const Eigen::VectorXd& x) { return to_eigen(m_infty(basis, to_std(x))); };
  Eigen::VectorXd seed(k - 1);
  for (int j = 1; j < k; ++j) seed(j - 1) = static_cast<double>(j) / k;
  NewtonOptions nopts;
  nopts.tolerance = opts.tolerance;
  nopts.fd_step = opts.fd_step;
  nopts.max_iterations = opts.max_newton;
  nopts.max_halvings = opts.max_halvings;

  NewtonResult result;
  if (!opts.force_homotopy) result = damped_newton(M, seed, ordered_interior, nopts);
  if (opts.force_homotopy || !result.converged) {
    Eigen::VectorXd x = seed;
    int total = 0;
    bool path_ok = true;
    for (int step = 1; step <= opts.homotopy_steps; ++step) {
      const double t = static_cast<double>(step) / opts.homotopy_steps;
      const VectorMap H = [&, t](const Eigen::VectorXd& y) { return (t * M(y) + (1.0 - t) * (y - seed)).eval(); };
      NewtonOptions stage = nopts;
      if (step < opts.homotopy_steps) stage.tolerance = std::max(opts.tolerance, 1e-10);
      NewtonResult r = damped_newton(H, x, ordered_interior, stage);
      total += r.iterations;
      x = r.x;
      if (!r.converged) {
        path_ok = false;
        result = r;
        break;
      }
      result = r;
    }
    result.iterations = total;
    if (!path_ok || !result.converged) {
      std::ostringstream msg;
      msg << "junction map not solved for k=" << k << "; best residual " << result.norm << " at beta = [";
      for (Eigen::Index i = 0; i < result.x.size(); ++i) msg << (i ? ", " : "") << result.x(i);
      msg << "]";
      raise(ErrorKind::NoConvergence, msg.str());
    }
    cfg.method = "homotopy";
  } else {
    cfg.method = "newton";
  }
  cfg.iterations = result.iterations;
  cfg.beta = full_junctions(to_std(result.x));
  finalize(basis, cfg);

  if (opts.lattice > 0) {
    const int m = opts.lattice;
    std::vector<std::vector<double>> seeds;
    std::vector<int> idx(k - 1);
    for (int i = 0; i < k - 1; ++i) idx[i] = i;
    while (true) {
      std::vector<double> s(k - 1);
      for (int i = 0; i < k - 1; ++i) s[i] = (idx[i] + 1.0) / (m + 1.0);
      seeds.push_back(s);
      int pos = k - 2;
      while (pos >= 0 && idx[pos] == m - (k - 1) + pos) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int i = pos + 1; i < k - 1; ++i) idx[i] = idx[i - 1] + 1;
    }
    std::vector<NewtonResult> found(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
      found[i] = damped_newton(M, to_eigen(seeds[i]), ordered_interior, nopts);
    });
    std::vector<Eigen::VectorXd> roots{result.x};
    for (const auto& f : found) {
      if (!f.converged) continue;
      bool fresh = true;
      for (const auto& r : roots) fresh = fresh && (r - f.x).lpNorm<Eigen::Infinity>() > 1e-6;
      if (fresh) {
        roots.push_back(f.x);
        cfg.other_roots.push_back(to_std(f.x));
      }
    }
  }
  return cfg;
}

LimitProfile assemble_limit_profile(const GreenBasis& basis, const LimitLayerConfig& config,
                                    const std::vector<double>& grid) {
  LimitProfile out;
  out.grid = grid;
  const AnnulusBasis unit = annulus_basis(basis, 0.0, 1.0);
  std::vector<AnnulusBasis> pieces;
  for (int j = 0; j < config.k; ++j) pieces.push_back(annulus_basis(basis, config.beta[j], config.beta[j + 1]));
  for (double r : grid) {
    int j = 0;
    while (j + 1 < config.k && r >= config.beta[j + 1]) ++j;
    const double piecewise = limit_1layer_value(pieces[j], config.alpha[j], r);
    double global = 0.0;
    for (int i = 0; i < config.k; ++i) global += config.amplitude[i] * green_eval(unit, r, config.alpha[i]);
    out.values.push_back(piecewise);
    out.global_values.push_back(global);
    out.piece.push_back(j);
    out.max_gap = std::max(out.max_gap, std::abs(piecewise - global));
  }
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = lo + (hi - lo) * i / (points - 1);
  grid.back() = hi;
  return grid;
}

}  // namespace nlayers
