#include "neumann_layers/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "neumann_layers/errors.hpp"

namespace nlayers {

QuadratureRule gauss_lobatto(int points) {
  if (points < 2) raise(ErrorKind::InvalidArgument, "Gauss-Lobatto needs at least 2 points");
  static std::mutex cache_mutex;
  static std::map<int, QuadratureRule> cache;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(points);
    if (it != cache.end()) return it->second;
  }
  const int n = points - 1;  // polynomial degree
  std::vector<double> x(points), w(points);
  for (int i = 0; i < points; ++i) x[i] = -std::cos(M_PI * i / n);
  // Newton on (1-x^2) P_n'(x) through the Legendre recurrence.
  std::vector<double> pn(points), pn1(points);
  for (int iter = 0; iter < 100; ++iter) {
    double change = 0.0;
    for (int i = 0; i < points; ++i) {
      double p0 = 1.0, p1 = x[i];
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x[i] * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pn[i] = p1;
      pn1[i] = p0;
      double dx = (x[i] * pn[i] - pn1[i]) / (points * pn[i]);
      x[i] -= dx;
      change = std::max(change, std::abs(dx));
    }
    if (change < 1e-16) break;
  }
  for (int i = 0; i < points; ++i) {
    double p0 = 1.0, p1 = x[i];
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x[i] * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    w[i] = 2.0 / (n * points * p1 * p1);
  }
  x.front() = -1.0;
  x.back() = 1.0;
  QuadratureRule rule{x, w};
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(points, rule);
  return rule;
}

double integrate_trajectory(const Trajectory& traj, const StateIntegrand& f, int points,
                            int subdivisions) {
  const QuadratureRule rule = gauss_lobatto(points);
  const auto& nodes = traj.nodes();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double ra = nodes[i].r, rb = nodes[i + 1].r;
    const double panel = (rb - ra) / subdivisions;
    for (int s = 0; s < subdivisions; ++s) {
      const double lo = ra + s * panel;
      const double half = 0.5 * panel, mid = lo + half;
      double sum = 0.0;
      for (int q = 0; q < points; ++q) {
        double r = mid + half * rule.nodes[q];
        if (s == 0 && q == 0) r = ra;
        if (s == subdivisions - 1 && q == points - 1) r = rb;
        sum += rule.weights[q] * f(traj.eval_in_step(i, r));
      }
      total += half * sum;
    }
  }
  return traj.forward() ? total : -total;
}

double integrate_function(const std::function<double(double)>& f, double lo, double hi,
                          int panels, int points) {
  const QuadratureRule rule = gauss_lobatto(points);
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int s = 0; s < panels; ++s) {
    const double a = lo + s * width;
    const double half = 0.5 * width, mid = a + half;
    double sum = 0.0;
    for (int q = 0; q < points; ++q) sum += rule.weights[q] * f(mid + half * rule.nodes[q]);
    total += half * sum;
  }
  return total;
}

double unit_sphere_area(int N) {
  return 2.0 * std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N);
}

}  // namespace nlayers
