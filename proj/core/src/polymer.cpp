#include "polyfield/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "polyfield/kernels.hpp"
#include "polyfield/quadrature.hpp"
#include "polyfield/rng.hpp"

namespace polyfield {

void PolymerConfig::validate() const {
  if (!(horizon > 0.0)) throw std::invalid_argument("polymer: horizon must be > 0");
  if (t0 < 0.0) throw std::invalid_argument("polymer: t0 must be >= 0");
}

namespace {

McEstimate mean_se(const std::vector<double>& v) {
  McEstimate out;
  out.replicas = static_cast<long>(v.size());
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  out.estimate = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - out.estimate) * (x - out.estimate);
  out.se = n > 1 ? std::sqrt(ss / (n * (n - 1))) : 0.0;
  return out;
}

}  // namespace

std::vector<double> polymer_field_integrals(const Environment& env,
                                            const PolymerConfig& cfg,
                                            long replicas, std::uint64_t seed) {
  cfg.validate();
  if (replicas < 1) throw std::invalid_argument("polymer: replicas >= 1 required");
  const double t1 = cfg.t0 + cfg.horizon;
  std::vector<double> h(static_cast<std::size_t>(replicas));
  bool exited = false;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < replicas; ++i) {
    Rng rng = Rng::keyed(seed, {0x706174, static_cast<std::uint64_t>(i)});
    const WalkPath path = sample_walk(cfg.x0, cfg.t0, cfg.horizon, rng);
    if (path.range_radius() > env.config().window_halfwidth) {
#pragma omp atomic write
      exited = true;
      continue;
    }
    h[static_cast<std::size_t>(i)] = env.path_integral(path, cfg.t0, t1);
  }
  if (exited) {
    throw std::runtime_error(
        "polymer: a path left the certified window; enlarge window_halfwidth "
        "(leak budget exceeded)");
  }
  return h;
}

McEstimate quenched_partition(const Environment& env, const PolymerConfig& cfg,
                              long polymer_replicas, std::uint64_t seed) {
  std::vector<double> h = polymer_field_integrals(env, cfg, polymer_replicas, seed);
  for (double& x : h) x = std::exp(cfg.beta * x);
  return mean_se(h);
}

ChaosTerm chaos_term(const Environment& env, const PolymerConfig& cfg, int k,
                     long path_replicas, std::uint64_t seed) {
  if (k < 1 || k > 6)
    throw std::invalid_argument("chaos_term: order must satisfy 1 <= k <= 6");
  std::vector<double> h = polymer_field_integrals(env, cfg, path_replicas, seed);
  double scale = 1.0;
  for (int j = 1; j <= k; ++j) scale *= cfg.beta / j;
  for (double& x : h) x = scale * std::pow(x, k);
  const McEstimate e = mean_se(h);
  return ChaosTerm{k, e.estimate, e.se};
}

ChaosTerm chaos_term_simplex(const Environment& env, const PolymerConfig& cfg,
                             int k, long samples, std::uint64_t seed) {
  if (k < 1 || k > 2)
    throw std::invalid_argument("chaos_term_simplex: oracle supports k <= 2 only");
  cfg.validate();
  const double T = cfg.horizon;
  double scale = 1.0;
  for (int j = 1; j <= k; ++j) scale *= cfg.beta * T / j;
  std::vector<double> vals(static_cast<std::size_t>(samples));
  for (long i = 0; i < samples; ++i) {
    Rng rng = Rng::keyed(seed, {0x73706c78, static_cast<std::uint64_t>(i)});
    const WalkPath path = sample_walk(cfg.x0, cfg.t0, cfg.horizon, rng);
    double prod = 1.0;
    for (int j = 0; j < k; ++j) {
      const double s = cfg.t0 + T * rng.uniform();
      prod *= env.centered_occupation(s, path.position_at(s));
    }
    vals[static_cast<std::size_t>(i)] = scale * prod;
  }
  const McEstimate e = mean_se(vals);
  return ChaosTerm{k, e.estimate, e.se};
}

double truncated_series(const Environment& env, const PolymerConfig& cfg, int m,
                        long path_replicas, std::uint64_t seed) {
  if (m < 0 || m > 6) throw std::invalid_argument("truncated_series: 0 <= m <= 6");
  if (m == 0 || cfg.beta == 0.0) return 1.0;
  const std::vector<double> h = polymer_field_integrals(env, cfg, path_replicas, seed);
  double total = 1.0;
  const double n = static_cast<double>(h.size());
  double scale = 1.0;
  for (int k = 1; k <= m; ++k) {
    scale *= cfg.beta / k;
    double acc = 0.0;
    for (double x : h) acc += std::pow(x, k);
    total += scale * acc / n;
  }
  return total;
}

// ---------------------------------------------------------------------------
// v_S lattice PDE
// ---------------------------------------------------------------------------

namespace {

// One matvec of the augmented operator M = [[A, beta e_p], [0, 0]] with
// A = (1/2) Lap + beta e_p e_p^T, Dirichlet outside [0, dim).
void aug_matvec(const std::vector<double>& z, std::vector<double>& out,
                double beta, std::size_t pidx) {
  const std::size_t dim = z.size() - 1;
  for (std::size_t i = 0; i < dim; ++i) {
    const double left = i > 0 ? z[i - 1] : 0.0;
    const double right = i + 1 < dim ? z[i + 1] : 0.0;
    out[i] = 0.5 * (left + right) - z[i];
  }
  out[pidx] += beta * (z[pidx] + z[dim]);
  out[dim] = 0.0;
}

// In-place action z <- exp(M tau) z by scaling plus truncated Taylor.
void expm_action(std::vector<double>& z, double tau, double beta, std::size_t pidx) {
  if (tau <= 0.0) return;
  const double norm_bound = 2.0 + 2.0 * std::abs(beta);
  const int steps = std::max(1, static_cast<int>(std::ceil(tau * norm_bound)));
  const double dt = tau / steps;
  std::vector<double> term(z.size()), next(z.size());
  for (int s = 0; s < steps; ++s) {
    term = z;
    double tnorm = 1.0;
    for (int j = 1; j <= 60 && tnorm > 0.0; ++j) {
      aug_matvec(term, next, beta, pidx);
      const double f = dt / j;
      tnorm = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        term[i] = f * next[i];
        z[i] += term[i];
        tnorm = std::max(tnorm, std::abs(term[i]));
      }
      if (tnorm < 1e-18) break;
    }
  }
}

}  // namespace

long v_field_window(const WalkPath& polymer, double horizon) {
  return polymer.range_radius() + kernel_truncation_radius(horizon);
}

VField::VField(const WalkPath& polymer, double beta, double horizon, long window)
    : polymer_(polymer), beta_(beta), horizon_(horizon), window_(window) {
  if (!(horizon > 0.0)) throw std::invalid_argument("v_field: horizon must be > 0");
  if (window < polymer.range_radius())
    throw std::invalid_argument("v_field: window smaller than polymer range");
  const std::size_t dim = static_cast<std::size_t>(2 * window_ + 1);
  std::vector<double> z(dim + 1, 0.0);  // w = 0, augmented 1
  z[dim] = 1.0;
  const GaussLegendre& gl = GaussLegendre::get(12);

  // Segment boundaries: polymer jump times within (0, horizon).
  std::vector<double> bounds{0.0};
  for (double t : polymer_.jump_times) {
    if (t > 0.0 && t < horizon_) bounds.push_back(t);
  }
  bounds.push_back(horizon_);

  double boundary_max = 0.0;
  long pos = polymer_.position_at(0.0);
  std::size_t ji = 0;
  while (ji < polymer_.jump_times.size() && polymer_.jump_times[ji] <= 0.0) ++ji;
  integral_ = horizon_;  // the "+1" part of v = 1 + w
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const double a = bounds[s], b = bounds[s + 1];
    const std::size_t pidx = static_cast<std::size_t>(pos + window_);
    seg_times_.push_back(a);
    seg_sites_.push_back(pos);
    seg_states_.push_back(std::vector<double>(z.begin(), z.begin() + dim));
    // Composite Gauss-Legendre over [a, b]; nodes visited in order, state
    // propagated incrementally so the pass also advances z to time b.
    const int panels = 1 + static_cast<int>(b - a);
    double cursor = a;
    for (int pnl = 0; pnl < panels; ++pnl) {
      const double pa = a + (b - a) * pnl / panels;
      const double pb = a + (b - a) * (pnl + 1) / panels;
      const double half = 0.5 * (pb - pa), mid = 0.5 * (pa + pb);
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double tq = mid + half * gl.nodes[q];
        expm_action(z, tq - cursor, beta_, pidx);
        cursor = tq;
        integral_ += half * gl.weights[q] * z[pidx];
      }
    }
    expm_action(z, b - cursor, beta_, pidx);
    boundary_max = std::max(boundary_max, std::max(std::abs(z[0]), std::abs(z[dim - 1])));
    if (s + 2 < bounds.size()) {
      while (ji < polymer_.jump_times.size() && polymer_.jump_times[ji] <= b) {
        pos += polymer_.jump_steps[ji];
        ++ji;
      }
    }
  }
  if (boundary_max > 1e-8) {
    throw std::runtime_error(
        "v_field: truncation certificate violated; enlarge the window");
  }
}

std::vector<double> VField::state_at(double s) const {
  if (s < 0.0 || s > horizon_) throw std::out_of_range("v_field: time outside [0, horizon]");
  auto it = std::upper_bound(seg_times_.begin(), seg_times_.end(), s);
  const std::size_t si = static_cast<std::size_t>(it - seg_times_.begin()) - 1;
  std::vector<double> z = seg_states_[si];
  z.push_back(1.0);
  expm_action(z, s - seg_times_[si], beta_, static_cast<std::size_t>(seg_sites_[si] + window_));
  z.pop_back();
  return z;
}

double VField::operator()(double s, long y) const {
  if (std::labs(y) > window_) return 1.0;  // outside truncation, w ~ 0
  const std::vector<double> w = state_at(s);
  return 1.0 + w[static_cast<std::size_t>(y + window_)];
}

VField v_field(const WalkPath& polymer, double beta, double horizon, long window) {
  return VField(polymer, beta, horizon, window);
}

McEstimate annealed_partition(double beta, double lambda, double horizon,
                              long s_replicas, std::uint64_t seed) {
  if (s_replicas < 1) throw std::invalid_argument("annealed_partition: replicas >= 1");
  std::vector<double> vals(static_cast<std::size_t>(s_replicas));
  bool failed = false;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < s_replicas; ++i) {
    try {
      Rng rng = Rng::keyed(seed, {0x616e6e, static_cast<std::uint64_t>(i)});
      const WalkPath path = sample_walk(0, 0.0, horizon, rng);
      const VField vf(path, beta, horizon, v_field_window(path, horizon));
      vals[static_cast<std::size_t>(i)] =
          std::exp(lambda * beta * (vf.integral_along_path() - horizon));
    } catch (...) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) throw std::runtime_error("annealed_partition: v_field solve failed");
  return mean_se(vals);
}

double pascal_gap(const WalkPath& polymer, double beta, double lambda, double horizon) {
  const long window = v_field_window(polymer, horizon);
  const VField vs(polymer, beta, horizon, window);
  WalkPath rest;
  rest.x0 = 0;
  const VField v0(rest, beta, horizon, window);
  return lambda * beta * (v0.integral_along_path() - vs.integral_along_path());
}

LocalTimeStats local_time_stats(double t, long replicas, std::uint64_t seed) {
  if (!(t > 0.0)) throw std::invalid_argument("local_time_stats: t must be > 0");
  std::vector<double> ratio(static_cast<std::size_t>(replicas)),
      mgf(static_cast<std::size_t>(replicas));
  const double rt = std::sqrt(t);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < replicas; ++i) {
    Rng rng = Rng::keyed(seed, {0x6c74, static_cast<std::uint64_t>(i)});
    const WalkPath w = sample_walk(0, 0.0, t, rng);
    double local = 0.0, a = 0.0;
    long pos = 0;
    for (std::size_t j = 0; j <= w.jump_times.size(); ++j) {
      const double b = j < w.jump_times.size() ? w.jump_times[j] : t;
      if (pos == 0) local += b - a;
      a = b;
      if (j < w.jump_times.size()) pos += w.jump_steps[j];
    }
    ratio[static_cast<std::size_t>(i)] = local / rt;
    mgf[static_cast<std::size_t>(i)] = std::exp(local / rt);
  }
  const McEstimate r = mean_se(ratio), m = mean_se(mgf);
  return LocalTimeStats{r.estimate, r.se, m.estimate, m.se};
}

}  // namespace polyfield
