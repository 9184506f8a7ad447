#include "support/sphere_quadrature.hpp"

#include <cmath>
#include <numbers>

namespace odeco::testing {

namespace {

// Golub-Welsch would be overkill; Newton on P_n from Chebyshev guesses.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1 - x * x) * dp * dp);
  }
}

}  // namespace

std::vector<SpherePoint> sphere_rule(int n) {
  std::vector<double> z, w;
  gauss_legendre(n, z, w);
  const int nphi = 2 * n;
  std::vector<SpherePoint> pts;
  for (int i = 0; i < n; ++i) {
    const double r = std::sqrt(1 - z[i] * z[i]);
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2 * std::numbers::pi * j / nphi;
      pts.push_back({Vec3(r * std::cos(phi), r * std::sin(phi), z[i]), w[i] * 2 * std::numbers::pi / nphi});
    }
  }
  return pts;
}

}  // namespace odeco::testing
