#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polyfield/kernels.hpp"
#include "polyfield/rng.hpp"

namespace polyfield {

// One continuous-time simple random walk trajectory: initial site plus
// ordered jump events.
struct WalkPath {
  long x0 = 0;
  std::vector<double> jump_times;  // strictly increasing
  std::vector<int> jump_steps;     // +-1, same length as jump_times

  long position_at(double t) const;
  long range_radius() const;  // max |position| over the whole path
};

// Samples a rate-1 walk from x0 over [t0, t0 + horizon]; jump times are
// absolute.
WalkPath sample_walk(long x0, double t0, double horizon, Rng& rng);

struct EnvironmentConfig {
  double lambda = 1.0;        // particle density, > 0
  long window_halfwidth = 1;  // certified query window [-L, L]
  double horizon = 1.0;       // microscopic time horizon
  double leak_tolerance = 1e-8;

  void validate() const;
};

// Smallest buffer B such that the expected number of walks started outside
// [-(L+B), L+B] that reach [-L, L] by the horizon is <= delta. Uses the
// Poisson jump-count tail: displacement <= number of jumps.
long buffer_halfwidth(const EnvironmentConfig& cfg);

// A realized Poisson field of walks over a certified window, immutable
// after sampling. Occupation queries inside [-L, L] x [0, horizon] are
// exact up to the certified leak probability.
class Environment {
 public:
  Environment(EnvironmentConfig cfg, std::uint64_t seed);

  // Reconstructs from snapshot data (loader path).
  Environment(EnvironmentConfig cfg, long buffer, std::uint64_t seed,
              std::vector<WalkPath> walks);

  const EnvironmentConfig& config() const { return cfg_; }
  long buffer() const { return buffer_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<WalkPath>& walks() const { return walks_; }
  double leak_bound() const { return leak_bound_; }

  // Exact particle count at (t, x); requires 0 <= t <= horizon, |x| <= L.
  long occupation(double t, long x) const;
  double centered_occupation(double t, long x) const;

  // Exact integral of the centered field along a piecewise-constant polymer
  // path over [t0, t1]; both factors are piecewise constant so the value is
  // a finite sum with no quadrature error.
  double path_integral(const WalkPath& polymer, double t0, double t1) const;

  // Visits the occupancy constancy intervals of site x over [t0, t1] as
  // visit(a, b, count).
  void site_sweep(long x, double t0, double t1,
                  const std::function<void(double, double, long)>& visit) const;

 private:
  struct SiteTrack {
    std::vector<double> times;  // occupancy-change instants, sorted
    std::vector<long> counts;   // occupancy after times[i]
    long initial = 0;           // occupancy on [0, times[0])
    long count_at(double t) const;
  };

  void build_index();
  const SiteTrack* track(long x) const;
  double colocation_time(const WalkPath& polymer, double t0, double t1) const;

  EnvironmentConfig cfg_;
  long buffer_ = 0;
  std::uint64_t seed_ = 0;
  double leak_bound_ = 0.0;
  std::vector<WalkPath> walks_;
  std::vector<SiteTrack> index_;  // indexed by x + index_offset_
  long index_offset_ = 0;
};

Environment sample_environment(const EnvironmentConfig& cfg, std::uint64_t seed);

// Compactly supported macroscopic test function with its support box.
struct TestFunction {
  std::function<double(double, double)> f;  // (t, x), macroscopic
  double t_lo = 0.0, t_hi = 1.0;
  double x_lo = -1.0, x_hi = 1.0;
};

// Rescaled-field pairing xi~_eps(phi) = eps^{5/2} sum_x int phi(eps^2 t,
// eps x) xi~(t, x) dt over the microscopic window. The occupancy is
// piecewise constant, so time integration is exact quadrature per
// constancy interval.
double field_pairing(const Environment& env, const TestFunction& phi, RescaleParam eps);

// Snapshot persistence (JSON schema: lambda, window_halfwidth,
// buffer_halfwidth, horizon, seed, walks).
std::string environment_to_json(const Environment& env);
Environment environment_from_json(const std::string& text);
void save_environment(const Environment& env, const std::string& path);
Environment load_environment(const std::string& path);

}  // namespace polyfield
