#include <cmath>

#include "doctest.h"
#include "neumann_layers/asymptotics.hpp"
#include "neumann_layers/errors.hpp"
#include "oracles.hpp"

using namespace nlayers;

namespace {

// N = 3 slope ratio at b of the combination of sinh r/r and e^r/r with zero slope at a.
double closed_slope_ratio(double a, double b) {
  auto x = [](double r) { return std::sinh(r) / r; };
  auto dx = [](double r) { return (std::cosh(r) * r - std::sinh(r)) / (r * r); };
  auto z = [](double r) { return std::exp(r) / r; };
  auto dz = [](double r) { return std::exp(r) * (r - 1.0) / (r * r); };
  if (a == 0.0) return dx(b) / x(b);
  const double value = dx(a) * z(b) - x(b) * dz(a);
  const double slope = dx(a) * dz(b) - dx(b) * dz(a);
  return slope / value;
}

}  // namespace

TEST_CASE("limit profile z_infinity") {
  CHECK(std::abs(z_infinity(0.0)) < 1e-15);
  for (double r : {-5.0, -2.0, -0.3, 0.7, 3.0}) {
    const double e = std::exp(std::sqrt(2.0) * r);
    CHECK(z_infinity(r) == doctest::Approx(std::log(4.0 * e / ((1.0 + e) * (1.0 + e)))).epsilon(1e-13));
    CHECK(z_infinity(r) == doctest::Approx(z_infinity(-r)).epsilon(1e-15));
  }
  // Liouville equation z'' + e^z = 0.
  const double h = 1e-4;
  for (double r : {-3.0, -1.0, -0.2}) {
    const double d2 = (z_infinity(r + h) - 2 * z_infinity(r) + z_infinity(r - h)) / (h * h);
    CHECK(std::abs(d2 + std::exp(z_infinity(r))) < 1e-6);
  }
  CHECK(z_infinity(-400.0) < -500.0);
}

TEST_CASE("limit increasing slope against closed forms") {
  const GreenBasis basis = build_basis(3);
  CHECK(limit_increasing_slope(basis, 0.0, 1.0) == doctest::Approx(1.0 / std::tanh(1.0) - 1.0).epsilon(1e-12));
  for (auto [a, b] : {std::pair{0.4, 1.0}, std::pair{0.1, 0.6}, std::pair{0.0, 0.5}})
    CHECK(limit_increasing_slope(basis, a, b) == doctest::Approx(closed_slope_ratio(a, b)).epsilon(1e-10));
}

TEST_CASE("power ratio at p=200 sits in its band and improves with p") {
  const PowerRatio r200 = boundary_power_ratio(3, 200.0, 0.0, 1.0);
  CHECK(r200.ratio > 0.8);
  CHECK(r200.ratio < 1.2);
  CHECK(r200.reference == doctest::Approx(0.5 * std::pow(1.0 / std::tanh(1.0) - 1.0, 2)).epsilon(1e-12));
  double last = INFINITY;
  for (double p : {100.0, 200.0, 400.0, 800.0}) {
    const double err = std::abs(boundary_power_ratio(3, p, 0.0, 1.0).ratio - 1.0);
    CHECK(err < last);
    last = err;
  }
  CHECK_THROWS_AS(boundary_power_ratio(shoot_decreasing(3, 100.0, 0.4, 1.0), build_basis(3)), SolverError);
}

TEST_CASE("blow-up zoom") {
  const GreenBasis basis = build_basis(3);
  double last = INFINITY;
  for (double p : {50.0, 100.0, 200.0, 400.0}) {
    CAPTURE(p);
    const MonotoneSolution s = shoot_increasing(3, p, 0.0, 1.0);
    const BlowupProfile z = blowup_profile(s, basis, 5.0, 201);
    CHECK(z.z.back() == 0.0);
    CHECK(z.r.front() == -5.0);
    CHECK(z.eps > 0.0);
    CHECK(s.p * z.eps * z.eps == doctest::Approx(std::pow(z.umax, -(s.p - 1.0))).epsilon(1e-12));
    // z_p'(0) = (p/umax) eps u'(b).
    CHECK(std::abs(s.p / z.umax * z.eps * s.profile.back().du) < 1e-10);
    for (std::size_t i = 0; i < z.z.size(); ++i) CHECK(z.z[i] <= 1e-12);
    CHECK(z.sup_error < last);
    last = z.sup_error;
  }
  const MonotoneSolution s = shoot_increasing(3, 100.0, 0.0, 1.0);
  try {
    blowup_profile(s, basis, 1e4);
    FAIL("expected WindowExceedsDomain");
  } catch (const SolverError& e) {
    CHECK(e.kind() == ErrorKind::WindowExceedsDomain);
  }
}

TEST_CASE("energy level") {
  const GreenBasis basis = build_basis(3);
  const MonotoneSolution s = shoot_increasing(3, 100.0, 0.0, 1.0);
  const EnergyLevel e = energy_level(s, basis);
  CHECK(std::abs(e.c_p - e.norm_power) / e.c_p < 1e-8);
  CHECK(e.c_p == doctest::Approx(s.q_value).epsilon(1e-12));
  CHECK(e.reference == doctest::Approx(4.0 * M_PI * (1.0 / std::tanh(1.0) - 1.0)).epsilon(1e-12));

  // Refining the quadrature alone barely moves the norms.
  const EnergyLevel fine = energy_level(s, basis, 7, 4);
  CHECK(std::abs(fine.h1_squared - e.h1_squared) < 1e-9 * e.h1_squared);
  CHECK(std::abs(fine.lp_integral - e.lp_integral) < 1e-9 * e.lp_integral);
  // Low-order rules converge: splitting the panels at least halves the error.
  const double err1 = std::abs(energy_level(s, basis, 3, 1).h1_squared - fine.h1_squared);
  const double err2 = std::abs(energy_level(s, basis, 3, 2).h1_squared - fine.h1_squared);
  CHECK(err2 < 0.5 * err1);

  double last = INFINITY;
  for (double p : {200.0, 400.0, 800.0}) {
    const EnergyLevel ep = energy_level(shoot_increasing(3, p, 0.0, 1.0), basis);
    const double err = std::abs(ep.c_p - ep.reference);
    CHECK(err < last);
    last = err;
  }
}

TEST_CASE("Pohozaev balances") {
  for (int N : {3, 4, 5})
    for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{0.3, 1.0}, std::pair{0.5, 0.8}})
      CHECK(pohozaev_constant(N, 37.0, a, b).residual < 1e-12);
  CHECK(pohozaev_residual(shoot_increasing(3, 100.0, 0.0, 1.0)).residual < 1e-7);
  CHECK(pohozaev_residual(shoot_increasing(3, 100.0, 0.4, 1.0)).residual < 1e-7);
  CHECK(pohozaev_residual(shoot_decreasing(3, 100.0, 0.4, 1.0)).residual < 1e-7);
  CHECK(pohozaev_residual(shoot_increasing(4, 150.0, 0.0, 1.0)).residual < 1e-7);
  const GreenBasis basis = build_basis(3);
  CHECK(pohozaev_limit(annulus_basis(basis, 0.0, 1.0)).residual < 1e-7);
  CHECK(pohozaev_limit(annulus_basis(basis, 0.4, 1.0)).residual < 1e-7);
  CHECK(pohozaev_limit(annulus_basis(build_basis(5), 0.2, 0.9)).residual < 1e-7);

  // The balance is not automatic: the wrong exponent breaks it.
  MonotoneSolution fake = shoot_increasing(3, 100.0, 0.0, 1.0);
  const PohozaevBalance real = pohozaev_residual(fake);
  fake.p = 90.0;
  CHECK(pohozaev_residual(fake).residual > 1e3 * real.residual);
}

TEST_CASE("Sturm-bisection spectrum matches a dense eigensolve") {
  const MonotoneSolution s = shoot_increasing(3, 100.0, 0.0, 1.0);
  auto potential = [&](double r) { return 1.0 - 100.0 * std::pow(s.at(r).u, 99.0); };
  for (int n : {60, 200}) {
    const SpectrumResult ours = linearized_spectrum(3, 0.0, 1.0, potential, n + 1);
    const std::vector<double> ev = oracle::neumann_eigenvalues(3, 0.0, 1.0, n, potential);
    double nearest = ev[0];
    int negatives = 0;
    for (double v : ev) {
      if (std::abs(v) < std::abs(nearest)) nearest = v;
      if (v < 0.0) ++negatives;
    }
    CHECK(ours.nearest == doctest::Approx(nearest).epsilon(1e-9));
    CHECK(ours.negative_count == negatives);
  }
  const SpectrumResult ann =
      linearized_spectrum(4, 0.3, 1.0, [](double r) { return 5.0 - 40.0 * r; }, 151);
  const std::vector<double> ev = oracle::neumann_eigenvalues(4, 0.3, 1.0, 150, [](double r) { return 5.0 - 40.0 * r; });
  double nearest = ev[0];
  for (double v : ev)
    if (std::abs(v) < std::abs(nearest)) nearest = v;
  CHECK(ann.nearest == doctest::Approx(nearest).epsilon(1e-9));
}

TEST_CASE("constant-solution spectrum reproduces the second Neumann eigenvalue") {
  for (int N : {3, 4})
    for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{0.4, 1.0}}) {
      const ConstantSpectrumCheck c = constant_spectrum_check(N, a, b, 4000);
      CHECK(c.relative_error < 1e-4);
      CHECK(c.p > c.lambda2_shooting);
    }
}

TEST_CASE("nondegeneracy at p=100") {
  for (auto [a, dir] : {std::pair{0.0, Direction::Increasing}, std::pair{0.4, Direction::Increasing},
                        std::pair{0.4, Direction::Decreasing}}) {
    const MonotoneSolution s =
        dir == Direction::Increasing ? shoot_increasing(3, 100.0, a, 1.0) : shoot_decreasing(3, 100.0, a, 1.0);
    const double e1 = nondegeneracy_spectrum(s, 1000).min_abs_eig;
    const double e2 = nondegeneracy_spectrum(s, 2000).min_abs_eig;
    const double e4 = nondegeneracy_spectrum(s, 4000).min_abs_eig;
    CHECK(std::abs(e2 - e1) < 0.1 * e2);
    CHECK(std::abs(e4 - e2) < 0.1 * e4);
    CHECK(e4 > 10.0 * std::abs(e4 - e2));
    // Second-order discretization: the change shrinks about four times per doubling.
    CHECK(std::abs(e4 - e2) < 0.5 * std::abs(e2 - e1));
  }
}

TEST_CASE("validation report plumbing") {
  ValidationOptions single;
  single.sweep = {200.0};
  const ValidationReport one = run_validation(3, 0.0, 1.0, single);
  for (const auto& c : one.checks) CHECK(c.name.find("trend") == std::string::npos);
  CHECK(one.passed());

  ValidationOptions only;
  only.sweep = {100.0, 200.0};
  only.only = "pohozaev";
  const ValidationReport poh = run_validation(3, 0.0, 1.0, only);
  CHECK(poh.checks.size() == 4);
  for (const auto& c : poh.checks) CHECK(c.name.find("pohozaev") == 0);

  ValidationOptions bad;
  bad.sweep = {200.0, 100.0};
  CHECK_THROWS_AS(run_validation(3, 0.0, 1.0, bad), SolverError);
  bad.sweep = {100.0};
  bad.only = "nonsense";
  CHECK_THROWS_AS(run_validation(3, 0.0, 1.0, bad), SolverError);
}

TEST_CASE("property: trends on a feasible sweep above the crossover") {
  ValidationOptions opts;
  opts.sweep = {200.0, 400.0, 800.0};
  const ValidationReport rep = run_validation(3, 0.0, 1.0, opts);
  for (const auto& c : rep.checks) {
    CAPTURE(c.name);
    CHECK(c.passed);
  }
}
