#pragma once

#include <functional>
#include <string>
#include <vector>

#include "neumann_layers/finite_p_solver.hpp"
#include "neumann_layers/green_basis.hpp"

namespace nlayers {

// Slope at b of the limit increasing profile xi_ab(r)/xi_ab(b) on [a,b].
double limit_increasing_slope(const GreenBasis& basis, double a, double b);

struct PowerRatio {
  double scaled_power = 0.0;  // u(b)^p / p
  double reference = 0.0;     // (limit slope at b)^2 / 2
  double ratio = 0.0;
};

PowerRatio boundary_power_ratio(const MonotoneSolution& increasing, const GreenBasis& basis);
PowerRatio boundary_power_ratio(int N, double p, double a, double b, const IntegratorParams& params = {});

// log(4 e^{√2 r} / (1 + e^{√2 r})^2)
double z_infinity(double r);

struct BlowupProfile {
  double umax = 0.0;
  double eps = 0.0;          // p eps^2 = umax^{-(p-1)}
  double scaled_slope = 0.0; // p eps u'_lim(b) / √2
  std::vector<double> r, z, z_limit;
  double sup_error = 0.0;
};

// Zoom into the maximum of an increasing solution on r ∈ [-window, 0].
BlowupProfile blowup_profile(const MonotoneSolution& increasing, const GreenBasis& basis, double window = 5.0,
                             int samples = 201);

struct EnergyLevel {
  double c_p = 0.0;         // ||u||_{H^1}^2 / ||u||_{p+1}^2
  double reference = 0.0;   // |∂B_b| u'_lim(b)
  double norm_power = 0.0;  // ||u||_{p+1}^{p-1}, equal to c_p for a solution
  double h1_squared = 0.0;
  double lp_integral = 0.0; // ∫ u^{p+1}
};

EnergyLevel energy_level(const MonotoneSolution& increasing, const GreenBasis& basis, int quadrature_points = 7,
                         int subdivisions = 1);

// Radial Pohozaev balance:
//   (N-2)/2 ∫ r^{N-1} u'^2 + N ∫ r^{N-1} (u^2/2 - F(u)) = [r^N (u^2/2 - F(u) - u'^2/2)]_a^b.
// Finite p uses F(u) = u^{p+1}/(p+1) with ∫ r^{N-1} u^{p+1} replaced by ∫ r^{N-1}(u'^2 + u^2);
// the limit profile uses F = 0 on each side of the maximum.
struct PohozaevBalance {
  double lhs = 0.0, rhs = 0.0, residual = 0.0;
};

PohozaevBalance pohozaev_residual(const MonotoneSolution& sol);
PohozaevBalance pohozaev_constant(int N, double p, double a, double b);
PohozaevBalance pohozaev_limit(const AnnulusBasis& ab, int panels = 200);

struct SpectrumResult {
  double min_abs_eig = 0.0;
  double nearest = 0.0;    // signed eigenvalue closest to 0
  int negative_count = 0;  // eigenvalues below 0
  int nodes = 0;
};

// Smallest-magnitude eigenvalue of v -> -v'' - (N-1)/r v' + potential(r) v with Neumann ends,
// flux-form finite differences on `nodes` uniform nodes.
SpectrumResult linearized_spectrum(int N, double a, double b, const std::function<double(double)>& potential,
                                   int nodes);
// Linearization 1 - p u^{p-1} around a computed solution.
SpectrumResult nondegeneracy_spectrum(const MonotoneSolution& sol, int nodes);

struct ConstantSpectrumCheck {
  double p = 0.0;
  double lambda2_shooting = 0.0;
  double lambda2_spectrum = 0.0;  // p - |nearest eigenvalue| of -Δ + 1 - p
  double relative_error = 0.0;
};

// Linearization around u ≡ 1 at p slightly above λ₂, compared with neumann_lambda2.
ConstantSpectrumCheck constant_spectrum_check(int N, double a, double b, int nodes,
                                              const IntegratorParams& params = {});

// ---------------------------------------------------------------------------
// Validation report

struct CheckResult {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string provenance;
};

struct TrendRow {
  double p = 0.0;
  double ratio_error = 0.0;   // |u(b)^p/p ÷ (u'^2/2) - 1|
  double energy_error = 0.0;  // |c_p - reference|
  double blowup_error = 0.0;
  double pohozaev = 0.0;
  double eig_coarse = 0.0, eig_fine = 0.0;
};

struct ValidationReport {
  int N = 3;
  double a = 0.0, b = 1.0;
  std::vector<TrendRow> trend;
  std::vector<CheckResult> checks;
  bool passed() const;
};

struct ValidationOptions {
  std::vector<double> sweep{50.0, 100.0, 200.0, 400.0};
  std::string only;  // run a single named check group when set
  double window = 5.0;
  int coarse_nodes = 2000, fine_nodes = 4000;
};

// Check groups: ratio, energy, blowup, pohozaev, nondegeneracy.
const std::vector<std::string>& validation_groups();

ValidationReport run_validation(int N, double a, double b, const ValidationOptions& opts,
                                const IntegratorParams& params = {});

}  // namespace nlayers
