#pragma once

#include <cstdint>
#include <vector>

#include "polyfield/correlations.hpp"
#include "polyfield/environment.hpp"

namespace polyfield {

struct PolymerConfig {
  double beta = 0.0;
  double horizon = 1.0;  // microscopic horizon
  double t0 = 0.0;
  long x0 = 0;

  void validate() const;
};

struct ChaosTerm {
  int order = 1;
  double value = 0.0;
  double se = 0.0;
};

// Exact field integrals h_i = int xi~(s, S_s) ds along independent polymer
// paths (the common-random-numbers ensemble shared by the partition
// function, the chaos terms, and the tail estimator).
std::vector<double> polymer_field_integrals(const Environment& env,
                                            const PolymerConfig& cfg,
                                            long replicas, std::uint64_t seed);

// Quenched partition function: MC mean of exp(beta * h) over polymer paths
// against the fixed environment.
McEstimate quenched_partition(const Environment& env, const PolymerConfig& cfg,
                              long polymer_replicas, std::uint64_t seed);

// k-th chaos term in moment form: (beta^k / k!) E_S[h^k].
ChaosTerm chaos_term(const Environment& env, const PolymerConfig& cfg, int k,
                     long path_replicas, std::uint64_t seed);

// Iterated-integral (time-simplex) oracle for the chaos term, k <= 2 only.
ChaosTerm chaos_term_simplex(const Environment& env, const PolymerConfig& cfg,
                             int k, long samples, std::uint64_t seed);

// 1 + sum_{k<=m} Z^{(k)}, same path ensemble across orders.
double truncated_series(const Environment& env, const PolymerConfig& cfg, int m,
                        long path_replicas, std::uint64_t seed);

// Solution of the lattice PDE dv/ds = (1/2) Lap v + beta 1{S_s = y} v,
// v(0, .) = 1, on y in [-window, window] with zero values outside
// (certified truncation). Solved exactly between polymer jumps by
// matrix-exponential action on w = v - 1.
class VField {
 public:
  VField(const WalkPath& polymer, double beta, double horizon, long window);

  double operator()(double s, long y) const;
  // int_0^horizon v(t, S_t) dt along the defining polymer.
  double integral_along_path() const { return integral_; }
  long window() const { return window_; }

 private:
  friend VField v_field(const WalkPath& polymer, double beta, double horizon, long window);
  std::vector<double> state_at(double s) const;  // w(s, .)

  WalkPath polymer_;
  double beta_ = 0.0;
  double horizon_ = 0.0;
  long window_ = 0;
  double integral_ = 0.0;
  std::vector<double> seg_times_;                // segment start times
  std::vector<long> seg_sites_;                  // polymer site per segment
  std::vector<std::vector<double>> seg_states_;  // w at segment starts
};

VField v_field(const WalkPath& polymer, double beta, double horizon, long window);

// Default certified truncation window for v_field.
long v_field_window(const WalkPath& polymer, double horizon);

// E[Z] = E_S[exp(lambda beta int_0^T (v_S(t, S_t) - 1) dt)].
McEstimate annealed_partition(double beta, double lambda, double horizon,
                              long s_replicas, std::uint64_t seed);

// lambda beta int v_0(t,0) dt - lambda beta int v_S(t,S_t) dt; >= 0 for
// every path and either sign of beta.
double pascal_gap(const WalkPath& polymer, double beta, double lambda, double horizon);

struct LocalTimeStats {
  double mean_ratio = 0.0;  // E[L_t / sqrt(t)]
  double mean_se = 0.0;
  double mgf = 0.0;  // E[exp(L_t / sqrt(t))]
  double mgf_se = 0.0;
};

LocalTimeStats local_time_stats(double t, long replicas, std::uint64_t seed);

}  // namespace polyfield
