#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace polyfield {

// Counter-based splittable RNG. A stream is identified by a 64-bit key
// derived from the master seed and an arbitrary path of indices; output
// word i is a stateless mix of (key, i). Distinct paths never share a
// stream, and draws are independent of thread scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  // Derives a stream key from (master seed, path components).
  static Rng keyed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t k = mix(master ^ 0x243f6a8885a308d3ull);
    for (std::uint64_t p : path) k = mix(k ^ mix(p ^ 0x13198a2e03707344ull));
    return Rng(k);
  }

  Rng split(std::uint64_t index) const {
    return Rng(mix(key_ ^ mix(index ^ 0xa4093822299f31d0ull)));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (++counter_) * 0x9e3779b97f4a7c15ull;
    return mix(z);
  }

  // Uniform on (0,1), never returns 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate = 1.0) {
    return -std::log(uniform()) / rate;
  }

  bool bernoulli(double p = 0.5) { return uniform() < p; }

  // Marsaglia polar method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // Exact Poisson sampling; inversion for small means, PTRS rejection
  // (Hormann) for large.
  long poisson(double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
      double l = std::exp(-mean), p = 1.0;
      long k = 0;
      do {
        ++k;
        p *= uniform();
      } while (p > l);
      return k - 1;
    }
    return poisson_ptrs(mean);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  long poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      double u = uniform() - 0.5;
      double v = uniform();
      double us = 0.5 - std::abs(u);
      double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<long>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
          k * loglam - mean - std::lgamma(k + 1.0)) {
        return static_cast<long>(k);
      }
    }
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace polyfield
