#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyfield/continuum.hpp"
#include "polyfield/environment.hpp"

namespace polyfield {

struct NormSpec {
  double alpha = -0.55;  // regularity exponent, < 0
  double kappa = 0.5;    // weight exponent, >= 0
  int r0 = 1;            // test-function smoothness order, >= -floor(alpha)
  int m_max = 4;         // dyadic scales l = 2^{-m}, m = 0..m_max
  // Macroscopic box the centers range over.
  double t_lo = 0.0, t_hi = 1.0;
  double x_lo = -1.0, x_hi = 1.0;

  void validate() const;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json parameters;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json trend;
  std::string verdict;  // "pass" | "fail" | "inconclusive"
  std::vector<std::string> notes;
};

// Kendall rank correlation of a sequence against its index; -1 means
// strictly decreasing.
double kendall_tau(const std::vector<double>& values);

// Separable polynomial bump (1-t^2)^2_+ (1-x^2)^2_+, parabolically rescaled
// to scale l and centered at (tc, xc), normalized so the C^{r0=1} norm over
// the parabolic unit ball is <= 1. Support: t in [tc - l^2, tc + l^2],
// x in [xc - l, xc + l].
TestFunction standard_bump(double l = 1.0, double tc = 0.0, double xc = 0.0);

// Deterministic quadrature for the limiting pairing variance
// 2 lambda int int_{s<t} phi p phi.
double pairing_variance_reference(const TestFunction& phi, double lambda);

ExperimentReport noise_convergence(const TestFunction& phi,
                                   const std::vector<double>& eps_list, double lambda,
                                   long replicas, std::uint64_t seed);

ExperimentReport moment_scaling(int n, const std::vector<double>& ell_list, double eps,
                                double lambda, long replicas, std::uint64_t seed,
                                bool constant_field = false);

// Discrete weighted Besov-Hoelder norm estimate: sup over dyadic scales and
// centers of |pairing(phi^l_z)| / (l^alpha w_kappa(z)). The generic overload
// takes any pairing functional; the environment overload pairs the rescaled
// occupation field.
double besov_norm_estimate(const std::function<double(const TestFunction&)>& pairing,
                           const NormSpec& spec);
double besov_norm_estimate(const Environment& env, RescaleParam eps, const NormSpec& spec);

ExperimentReport partition_vs_spde(const std::vector<std::pair<double, double>>& t_x_list,
                                   double beta, double lambda,
                                   const std::vector<double>& eps_list, long env_replicas,
                                   long path_replicas, const GridSpec& grid,
                                   std::uint64_t seed);

ExperimentReport tail_experiment(const std::vector<int>& m_list,
                                 const std::vector<double>& eps_list, double beta,
                                 double lambda, long env_replicas, long path_replicas,
                                 std::uint64_t seed);

}  // namespace polyfield
