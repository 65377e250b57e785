#include "polyfield/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "polyfield/environment.hpp"
#include "polyfield/kernels.hpp"
#include "polyfield/rng.hpp"

namespace polyfield {

double chain_product(const PointConfiguration& cfgpts) {
  if (cfgpts.points.empty()) throw std::invalid_argument("chain_product: empty configuration");
  std::vector<SpaceTimePoint> pts = cfgpts.points;
  std::stable_sort(pts.begin(), pts.end(),
                   [](const SpaceTimePoint& a, const SpaceTimePoint& b) { return a.t < b.t; });
  double prod = 1.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dt = pts[i].t - pts[i - 1].t;
    const long dx = pts[i].x - pts[i - 1].x;
    if (dt == 0.0) {
      if (dx != 0) return 0.0;  // P_0 = delta
      continue;
    }
    prod *= rw_kernel(dt, dx);
  }
  return prod;
}

double centered_poisson_moment(double mean, int n) {
  if (mean < 0.0) throw std::domain_error("centered_poisson_moment: negative mean");
  if (n < 0 || n > 12) throw std::invalid_argument("centered_poisson_moment: need 0 <= n <= 12");
  if (n == 0) return 1.0;
  if (n == 1) return 0.0;
  // s[n][k] = number of partitions of an n-set into k blocks, each of size
  // >= 2: s(n,k) = k*s(n-1,k) + (n-1)*s(n-2,k-1). Then mu_n = sum_k s(n,k) mean^k.
  double s[13][7] = {};
  s[0][0] = 1.0;
  for (int i = 2; i <= n; ++i) {
    for (int k = 1; 2 * k <= i; ++k) {
      s[i][k] = k * s[i - 1][k] + (i - 1) * s[i - 2][k - 1];
    }
  }
  double val = 0.0, pw = 1.0;
  for (int k = 1; 2 * k <= n; ++k) {
    pw *= mean;
    val += s[n][k] * pw;
  }
  return val;
}

namespace {

// Enumerates set partitions of {0..m-1} by restricted growth strings,
// accumulating prod_blocks lambda * P(block) over partitions whose blocks
// all have size >= 2.
struct PartitionSum {
  const std::vector<SpaceTimePoint>* pts;
  double lambda;
  double total = 0.0;
  int m;
  int label[8];

  double block_value(int b) const {
    PointConfiguration block;
    for (int i = 0; i < m; ++i) {
      if (label[i] == b) block.points.push_back((*pts)[i]);
    }
    return lambda * chain_product(block);
  }

  void recurse(int i, int max_label) {
    if (i == m) {
      int size[8] = {};
      for (int j = 0; j < m; ++j) ++size[label[j]];
      double prod = 1.0;
      for (int b = 0; b <= max_label; ++b) {
        if (size[b] < 2) return;  // singleton block: centered field kills it
        prod *= block_value(b);
      }
      total += prod;
      return;
    }
    for (int b = 0; b <= max_label + 1 && b < m; ++b) {
      label[i] = b;
      recurse(i + 1, std::max(max_label, b));
    }
  }
};

}  // namespace

double exact_correlation(const PointConfiguration& points, double lambda) {
  const std::size_t m = points.size();
  if (m < 1) throw std::invalid_argument("exact_correlation: empty configuration");
  if (m > 8) {
    throw std::invalid_argument(
        "exact_correlation: m > 8 not supported; use mc_correlation");
  }
  if (m == 1) return 0.0;
  PartitionSum ps;
  ps.pts = &points.points;
  ps.lambda = lambda;
  ps.m = static_cast<int>(m);
  ps.recurse(0, -1);
  return ps.total;
}

McEstimate mc_correlation(const PointConfiguration& points, double lambda,
                          long replicas, std::uint64_t seed) {
  if (replicas < 100) throw std::invalid_argument("mc_correlation: replicas >= 100 required");
  if (points.points.empty()) throw std::invalid_argument("mc_correlation: empty configuration");
  EnvironmentConfig ecfg;
  ecfg.lambda = lambda;
  double t_max = 0.0;
  long x_max = 0;
  for (const auto& p : points.points) {
    if (p.t < 0.0) throw std::invalid_argument("mc_correlation: negative time");
    t_max = std::max(t_max, p.t);
    x_max = std::max(x_max, std::labs(p.x));
  }
  ecfg.window_halfwidth = x_max;
  ecfg.horizon = std::max(t_max, 1e-12);
  double sum = 0.0, sumsq = 0.0;
  Rng seeder = Rng::keyed(seed, {0x6d63});
  for (long r = 0; r < replicas; ++r) {
    Environment env(ecfg, seeder.split(static_cast<std::uint64_t>(r)).next_u64());
    double prod = 1.0;
    for (const auto& p : points.points) prod *= env.centered_occupation(p.t, p.x);
    sum += prod;
    sumsq += prod * prod;
  }
  McEstimate out;
  out.replicas = replicas;
  const double n = static_cast<double>(replicas);
  out.estimate = sum / n;
  const double var = std::max(0.0, sumsq / n - out.estimate * out.estimate);
  out.se = std::sqrt(var / n);
  return out;
}

double coincidence_moment(const PointConfiguration& chain, int n, double lambda) {
  if (chain.points.empty()) throw std::invalid_argument("coincidence_moment: empty chain");
  return centered_poisson_moment(lambda * chain_product(chain), n);
}

}  // namespace polyfield
