#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "polyfield/correlations.hpp"
#include "polyfield/rng.hpp"

namespace polyfield {

struct GridSpec {
  double t_max = 1.0;
  int nt = 64;
  double x_min = -4.0;
  double x_max = 4.0;
  int nx = 128;

  double dt() const { return t_max / nt; }
  double dx() const { return (x_max - x_min) / nx; }
  int cells() const { return nt * nx; }
  int cell(int it, int ix) const { return it * nx + ix; }
  double t_center(int it) const { return (it + 0.5) * dt(); }
  double x_center(int ix) const { return x_min + (ix + 0.5) * dx(); }
  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

// Covariance of the cell averages of the noise:
// (1/|c_a||c_b|) int_{c_a} int_{c_b} p_{|t-s|}(x-y); depends only on the
// cell offsets.
double cell_covariance(const GridSpec& spec, int cell_a, int cell_b);

struct FieldGrid {
  GridSpec spec;
  std::vector<double> xi;  // cell-averaged samples, row-major (it, ix)
  std::uint64_t seed = 0;
  double value(int it, int ix) const { return xi[static_cast<std::size_t>(spec.cell(it, ix))]; }
};

// Holds the factorized cell covariance so many seeds can be sampled from
// one assembly; the jitter actually used is recorded.
class FieldModel {
 public:
  explicit FieldModel(GridSpec spec);
  FieldGrid sample(std::uint64_t seed) const;
  const GridSpec& spec() const { return spec_; }
  double jitter() const { return jitter_; }

 private:
  GridSpec spec_;
  Eigen::MatrixXd factor_;  // lower-triangular
  double jitter_ = 0.0;
};

// Convenience sampler with a process-wide model cache keyed by spec.
FieldGrid sample_field(const GridSpec& spec, std::uint64_t seed);

// Picard terms u^{(m)} = beta sqrt(lambda) p * (Xi u^{(m-1)}), u^{(0)} = 1,
// evaluated at cell centers with exact cell-integrated kernel weights;
// returns terms 0..m_max.
std::vector<std::vector<double>> series_terms(const FieldGrid& field, int m_max,
                                              double beta, double lambda);
std::vector<double> series_term(const FieldGrid& field, int m, double beta, double lambda);
// 1 + sum_{m<=m_max} u^{(m)}.
std::vector<double> series_solution(const FieldGrid& field, int m_max,
                                    double beta, double lambda);

struct BrownianPath {
  double horizon = 1.0;
  std::vector<double> values;  // B at i * horizon / n, i = 0..n, B_0 = 0
  std::size_t resolution() const { return values.size() - 1; }
};

BrownianPath sample_brownian(double t, std::size_t resolution, Rng& rng);

// V(B) = int_0^t int_0^t p_{|r-s|}(B_r - B_s) dr ds. Between stored path
// points the kernel is replaced by its exact Brownian-bridge conditional
// expectation p_{|r-s| + V_bridge}(interpolated difference): the estimator
// stays unbiased for E[V] and keeps the pathwise bound
// V <= (8 / (3 sqrt(2 pi))) t^{3/2}. Deterministic given the path.
double brownian_double_integral(const BrownianPath& path);

// Cross term int int p_{|r-s|}(A_r - B_s) dr ds for independent paths.
double brownian_cross_integral(const BrownianPath& a, const BrownianPath& b);

// Feynman-Kac moments: p = 1 gives E_B exp((beta^2 lambda / 2) V(B));
// p = 2 uses two independent paths and the cross double integrals.
McEstimate fk_moment(int p, double beta, double lambda, double t,
                     long path_replicas, std::size_t resolution, std::uint64_t seed);

// Pairing of the cell field with the mollifier psi_{eps'}(t - s) p_eps(x - y),
// psi supported on [0, 1], by cellwise quadrature.
double mollified_field_value(const FieldGrid& field, double eps, double eps_prime,
                             double t, double x);

// The one-sided time window used by the mollifier (30 u^2 (1-u)^2 on [0,1]).
double mollifier_window(double u);

}  // namespace polyfield
