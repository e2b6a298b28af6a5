#include <cmath>
#include <random>

#include "doctest.h"
#include "neumann_layers/errors.hpp"
#include "neumann_layers/limit_solver.hpp"
#include "oracles.hpp"

using namespace nlayers;

namespace {

// Independent N = 3 closed-form junction map for the dense-scan oracle.
struct ClosedPair {
  double x, dx, z, dz;
};
ClosedPair closed(double r) {
  return {std::sinh(r) / r, (std::cosh(r) * r - std::sinh(r)) / (r * r), std::exp(r) / r,
          std::exp(r) * (r - 1.0) / (r * r)};
}

double closed_reflection(double a, double b) {
  // Interval-adapted combinations via the Neumann rows at a and b (unnormalized).
  auto F = [&](double s) {
    ClosedPair P = closed(s);
    double lx, ldx;
    if (a == 0.0) {
      lx = P.x;
      ldx = P.dx;
    } else {
      ClosedPair A = closed(a);
      lx = A.dx * P.z - P.x * A.dz;
      ldx = A.dx * P.dz - P.dx * A.dz;
    }
    ClosedPair B = closed(b);
    double rz = B.dx * P.z - P.x * B.dz, rdz = B.dx * P.dz - P.dx * B.dz;
    return ldx / lx + rdz / rz;
  };
  double lo = a > 0 ? a : 1e-9, hi = b;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    double mid = 0.5 * (lo + hi);
    if (F(mid) < 0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double closed_m1(double beta) {
  const double a1 = closed_reflection(0.0, beta), a2 = closed_reflection(beta, 1.0);
  ClosedPair B = closed(beta), P1 = closed(a1), P2 = closed(a2);
  double right = 1.0 / (B.dx * P2.z - P2.x * B.dz);
  double left = 1.0 / (B.dx * P1.z - P1.x * B.dz);
  return (right - left) / (beta * beta);
}

double one_sided_slope(const std::function<double(double)>& f, double x, double h, int side) {
  // Fourth-order one-sided difference (side = -1 left, +1 right).
  return side * (-25 * f(x) + 48 * f(x + side * h) - 36 * f(x + 2 * side * h) + 16 * f(x + 3 * side * h) -
                 3 * f(x + 4 * side * h)) / (12 * h);
}

double inf_norm(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("reflection point of the N = 3 ball") {
  GreenBasis g = build_basis(3);
  AnnulusBasis ab = annulus_basis(g, 0.0, 1.0);
  const double alpha = reflection_point(ab);
  CHECK(std::abs(alpha - oracle::ball_reflection_root_n3()) < 1e-12);
  CHECK(std::abs(alpha - 0.79681213002002) < 1e-12);
  CHECK(std::abs(phi_eval(ab, alpha).slope) < 1e-9);
}

TEST_CASE("small-interval reflection law") {
  for (int N : {3, 4, 5}) {
    GreenBasis g = build_basis(N);
    const double target = std::pow(2.0, -1.0 / N);
    double prev_gap = INFINITY;
    for (double b : {0.2, 0.1, 0.05, 0.02, 0.01}) {
      const double ratio = reflection_point(annulus_basis(g, 0.0, b)) / b;
      const double gap = std::abs(ratio - target);
      CHECK(gap < prev_gap);
      prev_gap = gap;
    }
    CHECK(prev_gap < 2e-2);
  }
}

TEST_CASE("one-layer limit profile") {
  GreenBasis g = build_basis(3);
  AnnulusBasis ab = annulus_basis(g, 0.0, 1.0);
  LimitOneLayer layer = limit_1layer(ab, uniform_grid(0.0, 1.0, 101));
  CHECK(limit_1layer_value(ab, layer.alpha, layer.alpha) == 1.0);
  for (double v : layer.values) CHECK(v <= 1.0 + 1e-15);
  auto f = [&](double r) { return limit_1layer_value(ab, layer.alpha, r); };
  const double left = one_sided_slope(f, layer.alpha, 1e-3, -1);
  const double right = one_sided_slope(f, layer.alpha, 1e-3, +1);
  CHECK(std::abs(left + right) < 1e-8);
  CHECK(left > 0.0);
  const double at0 = layer.values.front();
  CHECK(std::abs(at0 - 1.0 / g.xi(layer.alpha).value) < 1e-14);
  CHECK(at0 > 0.0);
  CHECK(at0 < 1.0);
}

TEST_CASE("junction map") {
  GreenBasis g = build_basis(3);
  SUBCASE("explicit and quotient forms agree") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> beta{u(rng), u(rng)};
      std::sort(beta.begin(), beta.end());
      if (beta[1] - beta[0] < 0.02) continue;
      std::vector<double> a = m_infty(g, beta), b = m_infty_quotient(g, beta);
      for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(a[j] - b[j]) < 1e-10);
    }
  }
  SUBCASE("limit as the first junction approaches the origin") {
    const double alpha2 = reflection_point(annulus_basis(g, 0.0, 1.0));
    const double expected = 1.0 / ((3 - 2) * g.xi(alpha2).value) - 1.0;
    const double near = m_infty(g, {1e-5})[0];
    CHECK(expected < 0.0);
    CHECK(std::abs(near - expected) < 1e-3);
    CHECK(std::abs(m_infty(g, {1e-6})[0] - expected) < std::abs(near - expected));
  }
  SUBCASE("ordering is enforced") {
    CHECK_THROWS_AS(m_infty(g, {0.6, 0.4}), SolverError);
  }
}

TEST_CASE("k-layer limit configuration") {
  GreenBasis g = build_basis(3);
  SUBCASE("k = 1") {
    LimitLayerConfig c = solve_limit_config(g, 1);
    CHECK(c.beta.size() == 2);
    CHECK(std::abs(c.alpha[0] - oracle::ball_reflection_root_n3()) < 1e-12);
    CHECK(c.method == "reflection");
  }
  SUBCASE("k = 2 against a dense scan of the scalar map") {
    LimitLayerConfig c = solve_limit_config(g, 2);
    CHECK(c.residual_M < 1e-11);
    CHECK(c.residual_junction < 1e-8);
    CHECK(std::abs(m_infty(g, {c.beta[1]})[0]) < 1e-11);
    // Scan oracle: 10^4 points then bisection on the closed-form map.
    double lo = 0, hi = 0;
    double prev_b = 0.01, prev_v = closed_m1(prev_b);
    for (int i = 1; i <= 10000; ++i) {
      double b = 0.01 + 0.98 * i / 10000.0;
      double v = closed_m1(b);
      if ((v > 0) != (prev_v > 0)) {
        lo = prev_b;
        hi = b;
        break;
      }
      prev_b = b;
      prev_v = v;
    }
    REQUIRE(hi > 0);
    double flo = closed_m1(lo);
    for (int i = 0; i < 100 && hi - lo > 1e-14; ++i) {
      double mid = 0.5 * (lo + hi), fm = closed_m1(mid);
      if ((fm > 0) == (flo > 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    CHECK(std::abs(c.beta[1] - 0.5 * (lo + hi)) < 1e-9);
    CHECK(std::abs(c.beta[1] - 0.7107126881700201) < 1e-9);
    CHECK(std::abs(c.alpha[0] - 0.5652229267865139) < 1e-9);
    CHECK(std::abs(c.alpha[1] - 0.8792956179271517) < 1e-9);
  }
  SUBCASE("homotopy path reaches the same configuration") {
    LimitSolveOptions opts;
    opts.force_homotopy = true;
    LimitLayerConfig h = solve_limit_config(g, 3, opts);
    LimitLayerConfig n = solve_limit_config(g, 3);
    CHECK(h.method == "homotopy");
    for (int j = 0; j <= 3; ++j) CHECK(std::abs(h.beta[j] - n.beta[j]) < 1e-9);
  }
  SUBCASE("lattice scan reports no further k = 2 roots") {
    LimitSolveOptions opts;
    opts.lattice = 12;
    LimitLayerConfig c = solve_limit_config(g, 2, opts);
    CHECK(c.other_roots.empty());
  }
  SUBCASE("k = 0 is rejected") { CHECK_THROWS_AS(solve_limit_config(g, 0), SolverError); }
}

TEST_CASE("amplitude system") {
  GreenBasis g = build_basis(3);
  AnnulusBasis unit = annulus_basis(g, 0.0, 1.0);
  SUBCASE("k = 1") {
    AmplitudeSolve s = amplitudes(g, {0.6});
    CHECK(std::abs(s.amplitude[0] - 1.0 / green_eval(unit, 0.6, 0.6)) < 1e-15);
  }
  SUBCASE("k = 2 at the solved configuration") {
    LimitLayerConfig c = solve_limit_config(g, 2);
    AmplitudeSolve s = amplitudes(g, c.alpha);
    CHECK(s.residual < 1e-12);
    for (double A : s.amplitude) CHECK(A > 0.0);
  }
  SUBCASE("scaling the kernel scales the amplitudes inversely") {
    Eigen::MatrixXd G = green_matrix(g, {0.3, 0.6, 0.9});
    AmplitudeSolve base = solve_amplitude_system(G);
    AmplitudeSolve scaled = solve_amplitude_system(3.5 * G);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(scaled.amplitude[j] * 3.5 - base.amplitude[j]) < 1e-12);
  }
  SUBCASE("singular system") {
    Eigen::MatrixXd G(2, 2);
    G << 1.0, 2.0, 2.0, 4.0;
    CHECK_THROWS_AS(solve_amplitude_system(G), SolverError);
  }
}

TEST_CASE("criticality residuals") {
  GreenBasis g = build_basis(3);
  const double abar = reflection_point(annulus_basis(g, 0.0, 1.0));
  CHECK(std::abs(phi_criticality_residual(g, {abar})[0]) < 1e-9);
  LimitLayerConfig c = solve_limit_config(g, 2);
  std::vector<double> res = phi_criticality_residual(g, c.alpha);
  CHECK(std::abs(res[0]) < 1e-8);
  CHECK(std::abs(res[1]) < 1e-8);
  std::vector<double> shifted = c.alpha;
  shifted[0] += 1e-3;
  const double moved = phi_criticality_residual(g, shifted)[0];
  std::vector<double> plus = c.alpha, minus = c.alpha;
  plus[0] += 1e-6;
  minus[0] -= 1e-6;
  const double slope = (phi_criticality_residual(g, plus)[0] - phi_criticality_residual(g, minus)[0]) / 2e-6;
  CHECK(std::abs(moved) > 1e-6);
  CHECK(std::abs(moved - slope * 1e-3) < 0.1 * std::abs(slope * 1e-3));
}

TEST_CASE("limit profile representations") {
  GreenBasis g = build_basis(3);
  for (int k : {1, 2}) {
    LimitLayerConfig c = solve_limit_config(g, k);
    LimitProfile at_alpha = assemble_limit_profile(g, c, c.alpha);
    for (int j = 0; j < k; ++j) {
      CHECK(std::abs(at_alpha.values[j] - 1.0) < 1e-8);
      CHECK(std::abs(at_alpha.global_values[j] - 1.0) < 1e-8);
    }
    LimitProfile prof = assemble_limit_profile(g, c, uniform_grid(0.0, 1.0, 2000));
    CHECK(prof.max_gap < (k == 1 ? 1e-14 : 1e-7));
  }
}

TEST_CASE("property: reflection point stays away from the interval ends") {
  GreenBasis g = build_basis(3);
  double delta = INFINITY;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const double a = 0.9 * i / 19.0, b = 0.1 + 0.9 * j / 19.0;
      if (b - a <= 0.1) continue;
      const double alpha = reflection_point(annulus_basis(g, a, b));
      delta = std::min(delta, std::min(alpha - a, b - alpha));
    }
  }
  MESSAGE("empirical separation delta = " << delta);
  CHECK(delta > 0.02);
}

TEST_CASE("property: k-layer configurations for N = 3, 4") {
  for (int N : {3, 4}) {
    GreenBasis g = build_basis(N);
    for (int k = 1; k <= 4; ++k) {
      LimitLayerConfig c = solve_limit_config(g, k);
      CHECK(c.residual_M < 1e-8);
      CHECK(c.residual_junction < 1e-8);
      CHECK(c.residual_amplitude < 1e-12);
      CHECK(c.residual_phi < 1e-8);
      for (int j = 0; j < k; ++j) {
        CHECK(c.beta[j] < c.alpha[j]);
        CHECK(c.alpha[j] < c.beta[j + 1]);
        CHECK(c.amplitude[j] > 0.0);
      }
      // Gradient of the minimal energy vanishes at the layer locations.
      for (int j = 0; j < k; ++j) {
        std::vector<double> plus = c.alpha, minus = c.alpha;
        const double h = 1e-5;
        plus[j] += h;
        minus[j] -= h;
        const double grad = (phi_direct(g, plus) - phi_direct(g, minus)) / (2 * h);
        CHECK(std::abs(grad) < 1e-6);
      }
      if (k == 1) CHECK(std::abs(phi_direct(g, c.alpha) - phi_eval(annulus_basis(g, 0, 1), c.alpha[0]).value) < 1e-12);
      LimitProfile prof = assemble_limit_profile(g, c, uniform_grid(0.0, 1.0, 2000));
      CHECK(prof.max_gap < 1e-7);
      CHECK(inf_norm(phi_criticality_residual(g, c.alpha)) < 1e-8);
    }
  }
}
