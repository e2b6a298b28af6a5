#include <cmath>
#include <random>

#include "doctest.h"
#include "neumann_layers/errors.hpp"
#include "neumann_layers/radial_ode.hpp"
#include "oracles.hpp"

using namespace nlayers;

TEST_CASE("backward linear integration reproduces e^r/r") {
  IntegratorParams params;
  Trajectory traj = integrate_linear(3, 1.0, 0.01, {1.0, std::exp(1.0), 0.0}, params);
  CHECK_FALSE(traj.forward());
  for (double r = 0.01; r <= 1.0; r += 0.0137) {
    RadialState s = traj.eval(r);
    double exact = std::exp(r) / r;
    CHECK(std::abs(s.u - exact) / exact < 1e-10);
    double dexact = std::exp(r) * (r - 1.0) / (r * r);
    CHECK(std::abs(s.du - dexact) / std::max(std::abs(dexact), exact) < 1e-10);
  }
}

TEST_CASE("forward linear integration from the origin series reaches sinh(1)") {
  IntegratorParams params;
  RadialState start = origin_series_start_linear(3, 1.0, params.origin_offset);
  Trajectory traj = integrate_linear(3, start.r, 1.0, start, params);
  CHECK(std::abs(traj.back().u - std::sinh(1.0)) < 1e-10);
  CHECK(std::abs(traj.back().du - (std::cosh(1.0) - std::sinh(1.0))) < 1e-10);
}

TEST_CASE("zero data stays zero") {
  for (int N : {3, 4, 7}) {
    Trajectory traj = integrate_linear(N, 0.2, 0.9, {0.2, 0.0, 0.0}, IntegratorParams{});
    for (const auto& s : traj.samples()) {
      CHECK(s.u == 0.0);
      CHECK(s.du == 0.0);
    }
  }
}

TEST_CASE("constant one is a nonlinear solution") {
  BlowupGuard guard = BlowupGuard::for_exponent(7.0);
  NonlinearRun run = integrate_nonlinear(3, 7.0, 0.25, 0.95, {0.25, 1.0, 0.0}, IntegratorParams{}, guard);
  CHECK(run.tag == TerminationTag::ReachedEnd);
  for (const auto& s : run.trajectory.samples()) {
    CHECK(s.u == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(s.du) < 1e-15);
  }
}

TEST_CASE("trajectory from below one keeps |u'| < 1 while 0 < u < sqrt(e)") {
  const double p = 50.0;
  for (double c : {0.5, 0.9, 0.99}) {
    BlowupGuard guard;
    NonlinearRun run = integrate_nonlinear(3, p, 0.3, 1.0, {0.3, c, 0.0}, IntegratorParams{}, guard);
    for (const auto& s : run.trajectory.samples()) {
      if (s.u > 0.0 && s.u < std::exp(0.5)) CHECK(std::abs(s.du) < 1.0);
    }
  }
}

TEST_CASE("nonlinear step matches a refined fixed-step RK4 oracle") {
  IntegratorParams params;
  NonlinearRun run = integrate_nonlinear(3, 10.0, 0.5, 0.6, {0.5, 0.9, 0.0}, params, BlowupGuard{});
  oracle::State coarse = oracle::rk4_radial(3, 10.0, 0.5, 0.6, {0.9, 0.0}, 1000);
  oracle::State fine = oracle::rk4_radial(3, 10.0, 0.5, 0.6, {0.9, 0.0}, 10000);
  CHECK(std::abs(coarse.u - fine.u) < 1e-12);
  CHECK(std::abs(run.trajectory.back().u - fine.u) < 1e-8);
  CHECK(std::abs(run.trajectory.back().du - fine.du) < 1e-8);
}

TEST_CASE("origin series coefficients") {
  SUBCASE("linear, u0 = 1") {
    const double h = 1e-3;
    RadialState s = origin_series_start_linear(3, 1.0, h);
    CHECK(s.r == h);
    CHECK(std::abs(s.u - (1.0 + h * h / 6.0)) < 1e-13);
    CHECK(std::abs(s.du - h / 3.0) < 1e-10);
  }
  SUBCASE("nonlinear, u0 = 1 is stationary") {
    RadialState s = origin_series_start_nonlinear(5, 30.0, 1.0, 1e-4);
    CHECK(s.u == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(s.du) < 1e-15);
  }
  SUBCASE("N = 3 regular solution sinh(r)/r") {
    const double h = 1e-4;
    RadialState s = origin_series_start_linear(3, 1.0, h);
    CHECK(std::abs(s.u - std::sinh(h) / h) < 1e-12);
  }
  SUBCASE("invalid hand-off radius") {
    CHECK_THROWS_AS(origin_series_start_linear(3, 1.0, 2e-3), SolverError);
    CHECK_THROWS_AS(origin_series_start_linear(3, -1.0, 1e-4), SolverError);
  }
}

TEST_CASE("dense output reproduces samples and stays monotone in r") {
  RadialState start = origin_series_start_nonlinear(3, 20.0, 0.7, 1e-6);
  NonlinearRun run = integrate_nonlinear(3, 20.0, start.r, 1.0, start, IntegratorParams{}, BlowupGuard{});
  const auto& nodes = run.trajectory.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    RadialState s = run.trajectory.eval(nodes[i].r);
    CHECK(s.u == nodes[i].u);
    CHECK(s.du == nodes[i].du);
    if (i > 0) CHECK(nodes[i].r > nodes[i - 1].r);
  }
  CHECK_THROWS_AS(run.trajectory.eval(1.5), SolverError);
}

TEST_CASE("derivative sign flip is located on the dense output") {
  BlowupGuard guard = BlowupGuard::for_exponent(50.0, +1);
  NonlinearRun run = integrate_nonlinear(3, 50.0, 0.3, 3.0, {0.3, 0.95, 0.0}, IntegratorParams{}, guard);
  REQUIRE(run.tag == TerminationTag::DerivativeSignFlip);
  RadialState s = run.trajectory.eval(run.event_r);
  CHECK(std::abs(s.du) < 1e-12);
  CHECK(s.u > 1.0);
}

TEST_CASE("value exceeding the guard bound and non-positive values are tagged") {
  BlowupGuard tight;
  tight.upper = 1.01;
  NonlinearRun up = integrate_nonlinear(3, 5.0, 0.3, 1.0, {0.3, 1.0, 0.2}, IntegratorParams{}, tight);
  CHECK(up.tag == TerminationTag::ValueExceededBound);
  NonlinearRun down =
      integrate_nonlinear(3, 5.0, 0.3, 3.0, {0.3, 0.1, -0.5}, IntegratorParams{}, BlowupGuard{});
  CHECK(down.tag == TerminationTag::ValueNonPositive);
  CHECK(std::abs(down.trajectory.eval(down.event_r).u) < 1e-12);
}

TEST_CASE("integrator errors") {
  IntegratorParams params;
  params.max_steps = 3;
  CHECK_THROWS_AS(integrate_linear(3, 0.1, 1.0, {0.1, 1.0, 0.0}, params), SolverError);
  try {
    integrate_linear(3, 0.1, 1.0, {0.1, 1.0, 0.0}, params);
  } catch (const SolverError& e) {
    CHECK(e.kind() == ErrorKind::StepBudgetExceeded);
  }
  CHECK_THROWS_AS(integrate_linear(3, 1e-8, 1.0, {1e-8, 1.0, 0.0}, IntegratorParams{}), SolverError);
  IntegratorParams bad;
  bad.h_min = 1.0;
  CHECK_THROWS_AS(bad.validate(), SolverError);
}

TEST_CASE("second radial Neumann eigenvalue") {
  SUBCASE("unit ball, N = 3") {
    const double x = oracle::tan_equals_identity_root();
    CHECK(std::abs(neumann_lambda2(3, 0.0, 1.0) - (1.0 + x * x)) < 1e-9);
  }
  SUBCASE("annulus against a discrete eigensolve") {
    std::vector<double> ev = oracle::neumann_eigenvalues(3, 0.5, 1.0, 2000, [](double) { return 1.0; });
    CHECK(std::abs(ev[0] - 1.0) < 1e-8);
    double lambda2 = neumann_lambda2(3, 0.5, 1.0);
    CHECK(std::abs(lambda2 - ev[1]) / ev[1] < 1e-4);
  }
  SUBCASE("higher dimension ball") {
    std::vector<double> ev = oracle::neumann_eigenvalues(5, 0.0, 1.0, 2000, [](double) { return 1.0; });
    CHECK(std::abs(neumann_lambda2(5, 0.0, 1.0) - ev[1]) / ev[1] < 1e-4);
  }
}

TEST_CASE("property: halving tolerances barely moves endpoints") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> c_dist(0.3, 0.99), r_dist(0.05, 0.6);
  for (int trial = 0; trial < 10; ++trial) {
    const double r0 = r_dist(rng), c = c_dist(rng);
    IntegratorParams base;
    IntegratorParams tight = base.scaled_tolerances(0.5);
    NonlinearRun a = integrate_nonlinear(4, 30.0, r0, 1.0, {r0, c, 0.0}, base, BlowupGuard{});
    NonlinearRun b = integrate_nonlinear(4, 30.0, r0, 1.0, {r0, c, 0.0}, tight, BlowupGuard{});
    if (a.tag != TerminationTag::ReachedEnd || b.tag != TerminationTag::ReachedEnd) continue;
    const double scale = std::max(1.0, std::abs(a.trajectory.back().u));
    CHECK(std::abs(a.trajectory.back().u - b.trajectory.back().u) < 10 * tight.rel_tol * scale);
  }
}

TEST_CASE("property: linear integration is linear") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    RadialState s1{0.3, d(rng), d(rng)}, s2{0.3, d(rng), d(rng)};
    const double c1 = d(rng), c2 = d(rng);
    RadialState comb{0.3, c1 * s1.u + c2 * s2.u, c1 * s1.du + c2 * s2.du};
    Trajectory t1 = integrate_linear(4, 0.3, 1.0, s1, {});
    Trajectory t2 = integrate_linear(4, 0.3, 1.0, s2, {});
    Trajectory tc = integrate_linear(4, 0.3, 1.0, comb, {});
    for (double r : {0.4, 0.7, 1.0}) {
      double expect = c1 * t1.eval(r).u + c2 * t2.eval(r).u;
      CHECK(std::abs(tc.eval(r).u - expect) < 1e-9 * (1.0 + std::abs(expect)));
    }
  }
}

TEST_CASE("property: Lyapunov quantity is non-increasing") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> c_dist(0.05, 0.999), r_dist(0.01, 0.8);
  for (int trial = 0; trial < 20; ++trial) {
    const double p = 5.0 + 100.0 * trial / 20.0;
    const double r0 = r_dist(rng), c = c_dist(rng);
    NonlinearRun run = integrate_nonlinear(3, p, r0, 1.0, {r0, c, 0.0}, {}, BlowupGuard{});
    double prev = INFINITY;
    for (const auto& s : run.trajectory.samples()) {
      double L = lyapunov(p, s.u, s.du);
      CHECK(L <= prev + 1e-12);
      prev = L;
    }
  }
}
