#pragma once

#include <functional>
#include <vector>

namespace polyfield {

// Mixed space-time derivative order; parabolic weight |k| = 2*k0 + k1.
struct GradientIndex {
  int k0 = 0;  // time-derivative order
  int k1 = 0;  // space-difference order
  int weight() const { return 2 * k0 + k1; }
};

struct RescaleParam {
  double eps = 1.0;
};

// Truncation radius for lattice sums at horizon t: jump counts are
// Poisson(t), so mass beyond t + 8*sqrt(t+1) + 16 is far below 1e-12.
long kernel_truncation_radius(double t);

// Transition kernel P_t(x) of the rate-1 continuous-time simple symmetric
// random walk on Z, evaluated as e^{-t} I_x(t) by a normalized backward
// Bessel recurrence.
double rw_kernel(double t, long x);

// Full row P_t(0..xmax) from one recurrence pass.
std::vector<double> rw_kernel_row(double t, long xmax);

// Independent evaluation of P_t(x) through its Fourier integral over
// [-pi, pi], composite Gauss-Legendre with node count adaptive in t and x.
double rw_kernel_fourier(double t, long x);

// Continuum heat kernel p_t(x) = (2*pi*t)^{-1/2} exp(-x^2/2t), t > 0.
double cont_kernel(double t, double x);

// D^k p_t(x): time derivatives replaced by (1/2)Laplacian, spatial
// derivatives in closed form via Hermite polynomials.
double cont_kernel_gradient(GradientIndex k, double t, double x);

// D_1^k P_t(x): time derivative applied as the exact lattice identity
// d/dt P = (1/2)(P(x+1) + P(x-1) - 2P(x)), space as forward differences.
double rw_kernel_gradient(GradientIndex k, double t, long x);

// P^eps_t(x) = eps^{-1} P_{t/eps^2}(x/eps) for x on the eps-lattice;
// 0 for t < 0.
double rescaled_rw_kernel(RescaleParam eps, double t, double x);

// Mixed discrete gradient D_eps^k of a generic field on time x eps-lattice.
// Space: forward differences at scale eps. Time: centered differences.
double discrete_gradient(const std::function<double(double, double)>& field,
                         GradientIndex k, RescaleParam eps, double t, double x);

// (sqrt(t) + |x|)^{|k|+1} * |D_1^k P_t(x) - D^k p_t(x)|, d = 1.
double llt_scaled_error(double t, long x, GradientIndex k);

}  // namespace polyfield
