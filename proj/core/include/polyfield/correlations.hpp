#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace polyfield {

struct SpaceTimePoint {
  double t = 0.0;
  long x = 0;
};

// 1 <= m <= 8 points for exact evaluation; times need not be distinct or
// sorted.
struct PointConfiguration {
  std::vector<SpaceTimePoint> points;
  std::size_t size() const { return points.size(); }
};

// Time-sorted product of transition kernels along the configuration:
// P(J) = prod_j P_{t_{j+1}-t_j}(x_{j+1}-x_j). Empty product (m = 1) is 1.
double chain_product(const PointConfiguration& points);

// n-th centered moment of Poisson(mean) as an exact polynomial in the mean
// (coefficients are associated Stirling numbers of the second kind).
double centered_poisson_moment(double mean, int n);

// E[prod_i xi~(t_i, x_i)] for the centered occupation field: sum over set
// partitions with every block of size >= 2 of prod_blocks lambda * P(block).
// Blocks of size 1 vanish because the field is centered.
double exact_correlation(const PointConfiguration& points, double lambda);

struct McEstimate {
  double estimate = 0.0;
  double se = 0.0;
  long replicas = 0;
};

// Brute-force oracle: sample independent environments and average the
// product of centered occupations.
McEstimate mc_correlation(const PointConfiguration& points, double lambda,
                          long replicas, std::uint64_t seed);

// n-th centered moment of the count of trajectories through every point of
// the chain; that count is Poisson(lambda * P(chain)).
double coincidence_moment(const PointConfiguration& chain, int n, double lambda);

}  // namespace polyfield
