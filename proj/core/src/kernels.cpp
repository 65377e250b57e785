#include "polyfield/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "polyfield/quadrature.hpp"

namespace polyfield {

long kernel_truncation_radius(double t) {
  return static_cast<long>(std::ceil(t + 8.0 * std::sqrt(t + 1.0) + 16.0));
}

std::vector<double> rw_kernel_row(double t, long xmax) {
  if (t < 0.0) throw std::domain_error("rw_kernel: negative time");
  if (xmax < 0) throw std::invalid_argument("rw_kernel_row: negative xmax");
  std::vector<double> row(xmax + 1, 0.0);
  if (t == 0.0) {
    row[0] = 1.0;
    return row;
  }
  // Miller backward recurrence for I_k(t): start far above the largest
  // order that carries mass, recur down, then normalize with the exact
  // identity e^{-t}(I_0 + 2 sum_{k>=1} I_k) = 1.
  long start = std::max<long>(xmax, kernel_truncation_radius(t)) + 40;
  std::vector<double> f(start + 2, 0.0);
  f[start + 1] = 0.0;
  f[start] = 1e-290;
  double sum = 0.0;  // accumulates f0 + 2*sum(fk) at the end
  for (long k = start; k >= 1; --k) {
    f[k - 1] = f[k + 1] + (2.0 * k / t) * f[k];
    if (f[k - 1] > 1e280) {
      for (long j = k - 1; j <= start + 1; ++j) f[j] *= 1e-280;
    }
  }
  sum = f[0];
  for (long k = 1; k <= start; ++k) sum += 2.0 * f[k];
  for (long k = 0; k <= xmax; ++k) row[k] = f[k] / sum;
  return row;
}

double rw_kernel(double t, long x) {
  if (t < 0.0) throw std::domain_error("rw_kernel: negative time");
  long ax = std::labs(x);
  if (t == 0.0) return ax == 0 ? 1.0 : 0.0;
  if (ax > kernel_truncation_radius(t) + 20) return 0.0;
  return rw_kernel_row(t, ax)[ax];
}

double rw_kernel_fourier(double t, long x) {
  if (t < 0.0) throw std::domain_error("rw_kernel_fourier: negative time");
  long ax = std::labs(x);
  if (t == 0.0) return ax == 0 ? 1.0 : 0.0;
  // P_t(x) = (1/pi) int_0^pi exp(-t(1-cos u)) cos(x u) du.
  int panels = static_cast<int>(8 + ax + std::ceil(std::sqrt(t)));
  double v = integrate_composite(0.0, M_PI, panels, 16, [&](double u) {
    return std::exp(-t * (1.0 - std::cos(u))) * std::cos(ax * u);
  });
  return v / M_PI;
}

double cont_kernel(double t, double x) {
  if (t <= 0.0) throw std::domain_error("cont_kernel: nonpositive time");
  return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * M_PI * t);
}

namespace {

// n-th spatial derivative of p_t at x: (-1)^n t^{-n/2} He_n(x/sqrt(t)) p_t(x)
// with probabilists' Hermite polynomials.
double heat_kernel_dx(int n, double t, double x) {
  double z = x / std::sqrt(t);
  double h0 = 1.0, h1 = z;
  double h = (n == 0) ? h0 : h1;
  for (int m = 1; m < n; ++m) {
    double h2 = z * h1 - m * h0;
    h0 = h1;
    h1 = h2;
    h = h2;
  }
  double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return sign * std::pow(t, -0.5 * n) * h * cont_kernel(t, x);
}

}  // namespace

double cont_kernel_gradient(GradientIndex k, double t, double x) {
  if (k.weight() > 4 || k.k0 < 0 || k.k1 < 0)
    throw std::invalid_argument("cont_kernel_gradient: unsupported index");
  // d/dt p = (1/2) d^2/dx^2 p, so D^{(k0,k1)} = 2^{-k0} d_x^{2k0+k1}.
  return std::ldexp(heat_kernel_dx(2 * k.k0 + k.k1, t, x), -k.k0);
}

double rw_kernel_gradient(GradientIndex k, double t, long x) {
  if (k.weight() > 4 || k.k0 < 0 || k.k1 < 0)
    throw std::invalid_argument("rw_kernel_gradient: unsupported index");
  if (t < 0.0) throw std::domain_error("rw_kernel_gradient: negative time");
  // Stencil span: k0 Laplacians reach +-k0, k1 forward differences reach +k1.
  long span = 2 * k.k0 + k.k1;
  long ax_hi = std::labs(x) + span;
  std::vector<double> row = rw_kernel_row(t, ax_hi);
  auto P = [&](long y) { return row[std::labs(y)]; };
  // Values on the needed window, then difference in place.
  std::vector<double> v;
  long lo = x - span, hi = x + span;
  for (long y = lo; y <= hi; ++y) v.push_back(P(y));
  auto at = [&](long y) -> double& { return v[y - lo]; };
  for (int a = 0; a < k.k1; ++a)
    for (long y = lo; y < hi; ++y) at(y) = at(y + 1) - at(y);
  for (int a = 0; a < k.k0; ++a) {
    std::vector<double> w(v.size(), 0.0);
    for (long y = lo + 1; y < hi; ++y)
      w[y - lo] = 0.5 * (at(y + 1) + at(y - 1) - 2.0 * at(y));
    v = w;
  }
  return at(x);
}

double rescaled_rw_kernel(RescaleParam eps, double t, double x) {
  if (!(eps.eps > 0.0)) throw std::domain_error("rescaled_rw_kernel: eps must be positive");
  if (t < 0.0) return 0.0;
  double site = x / eps.eps;
  double rounded = std::round(site);
  if (std::abs(site - rounded) > 1e-9 * (1.0 + std::abs(site)))
    throw std::domain_error("rescaled_rw_kernel: x off the eps-lattice");
  return rw_kernel(t / (eps.eps * eps.eps), static_cast<long>(rounded)) / eps.eps;
}

double discrete_gradient(const std::function<double(double, double)>& field,
                         GradientIndex k, RescaleParam eps, double t, double x) {
  if (k.weight() > 4 || k.k0 < 0 || k.k1 < 0)
    throw std::invalid_argument("discrete_gradient: unsupported index");
  const double e = eps.eps;
  // Spatial forward differences at fixed time s.
  auto dspace = [&](double s) {
    int n = k.k1;
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = field(s, x + i * e);
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n - a; ++i) v[i] = (v[i + 1] - v[i]) / e;
    return v[0];
  };
  if (k.k0 == 0) return dspace(t);
  double h = std::cbrt(2.2e-16) * (1.0 + std::abs(t));
  if (k.k0 == 1) return (dspace(t + h) - dspace(t - h)) / (2.0 * h);
  if (k.k0 == 2) {
    h = std::pow(2.2e-16, 0.25) * (1.0 + std::abs(t));
    return (dspace(t + h) - 2.0 * dspace(t) + dspace(t - h)) / (h * h);
  }
  throw std::invalid_argument("discrete_gradient: k0 > 2 not supported");
}

double llt_scaled_error(double t, long x, GradientIndex k) {
  if (t < 1.0) throw std::domain_error("llt_scaled_error: requires t >= 1");
  double diff = std::abs(rw_kernel_gradient(k, t, x) - cont_kernel_gradient(k, t, x));
  double scale = std::pow(std::sqrt(t) + std::abs(static_cast<double>(x)), k.weight() + 1);
  return scale * diff;
}

}  // namespace polyfield
