#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace polyfield {

// Gauss-Legendre nodes/weights on [-1,1], computed once by Newton iteration
// on the Legendre polynomial.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  // Nodes are stored in ascending order.
  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    for (int i = 0; i < n; ++i) {
      double x = std::cos(M_PI * (n - 1 - i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  static const GaussLegendre& get(int n);

  // Integrates f on [a,b].
  template <class F>
  double integrate(double a, double b, F&& f) const {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a), s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      s += weights[i] * f(mid + half * nodes[i]);
    return s * half;
  }
};

inline const GaussLegendre& GaussLegendre::get(int n) {
  static const GaussLegendre g4(4), g8(8), g12(12), g16(16), g24(24), g32(32), g64(64);
  switch (n) {
    case 4: return g4;
    case 8: return g8;
    case 12: return g12;
    case 16: return g16;
    case 24: return g24;
    case 32: return g32;
    default: return g64;
  }
}

// Composite Gauss-Legendre: [a,b] split into `panels` equal panels.
template <class F>
double integrate_composite(double a, double b, int panels, const GaussLegendre& gl, F&& f) {
  double s = 0.0, h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) s += gl.integrate(a + p * h, a + (p + 1) * h, f);
  return s;
}

template <class F>
double integrate_composite(double a, double b, int panels, int order, F&& f) {
  return integrate_composite(a, b, panels, GaussLegendre::get(order), std::forward<F>(f));
}

}  // namespace polyfield
