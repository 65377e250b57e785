#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "polyfield/environment.hpp"
#include "polyfield/kernels.hpp"
#include "polyfield/polymer.hpp"
#include "polyfield/quadrature.hpp"
#include "polyfield/rng.hpp"

using namespace polyfield;

namespace {

Environment sample_env(double lambda, double horizon, std::uint64_t seed) {
  EnvironmentConfig cfg;
  cfg.lambda = lambda;
  cfg.horizon = horizon;
  cfg.window_halfwidth = kernel_truncation_radius(horizon);
  return Environment(cfg, seed);
}

// Dense explicit RK4 integration of dv/ds = (1/2) Lap v + beta 1{S_s = y} v
// with Dirichlet truncation, as an independent oracle for VField.
std::vector<double> rk4_v(const WalkPath& S, double beta, double T, long W, double dt) {
  const long n = 2 * W + 1;
  std::vector<double> v(static_cast<std::size_t>(n), 1.0);
  std::vector<double> k1, k2, k3, k4, tmp(v.size());
  auto rhs = [&](double t, const std::vector<double>& u) {
    std::vector<double> d(u.size(), 0.0);
    const long p = S.position_at(t);
    for (long i = 0; i < n; ++i) {
      const double l = i > 0 ? u[static_cast<std::size_t>(i - 1)] : 0.0;
      const double r = i + 1 < n ? u[static_cast<std::size_t>(i + 1)] : 0.0;
      d[static_cast<std::size_t>(i)] = 0.5 * (l + r) - u[static_cast<std::size_t>(i)];
      if (i - W == p) d[static_cast<std::size_t>(i)] += beta * u[static_cast<std::size_t>(i)];
    }
    return d;
  };
  double t = 0.0;
  while (t < T - 1e-12) {
    double h = std::min(dt, T - t);
    for (double jt : S.jump_times)
      if (jt > t + 1e-15 && jt < t + h) {
        h = jt - t;
        break;
      }
    k1 = rhs(t + 1e-12, v);
    for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = v[i] + 0.5 * h * k1[i];
    k2 = rhs(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = v[i] + 0.5 * h * k2[i];
    k3 = rhs(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = v[i] + h * k3[i];
    k4 = rhs(t + h, tmp);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] += (h / 6.0) * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    t += h;
  }
  return v;
}

}  // namespace

TEST_CASE("quenched partition trivial cases") {
  const Environment env = sample_env(1.0, 2.0, 11);
  PolymerConfig cfg;
  cfg.beta = 0.0;
  cfg.horizon = 2.0;
  const McEstimate z0 = quenched_partition(env, cfg, 50, 1);
  CHECK(z0.estimate == 1.0);
  CHECK(z0.se == 0.0);

  EnvironmentConfig ecfg;
  ecfg.lambda = 1.0;
  ecfg.window_halfwidth = kernel_truncation_radius(2.0);
  ecfg.horizon = 2.0;
  const Environment empty(ecfg, buffer_halfwidth(ecfg), 0, {});
  cfg.beta = 0.7;
  const McEstimate ze = quenched_partition(empty, cfg, 50, 1);
  CHECK(ze.estimate == doctest::Approx(std::exp(-0.7 * 1.0 * 2.0)).epsilon(1e-12));
  CHECK(ze.se < 1e-14);
  CHECK(ze.estimate > 0.0);
}

TEST_CASE("chaos terms") {
  PolymerConfig cfg;
  cfg.beta = 0.4;
  cfg.horizon = 2.0;

  SUBCASE("beta = 0 kills every order") {
    const Environment env = sample_env(1.0, 2.0, 21);
    PolymerConfig zero = cfg;
    zero.beta = 0.0;
    for (int k = 1; k <= 4; ++k) CHECK(chaos_term(env, zero, k, 100, 5).value == 0.0);
  }

  SUBCASE("order 1 is centered over environments") {
    const long ne = 1500;
    double sum = 0.0, ss = 0.0;
    for (long i = 0; i < ne; ++i) {
      const Environment env = sample_env(1.0, 2.0, 300 + static_cast<std::uint64_t>(i));
      const double v = chaos_term(env, cfg, 1, 100, 5).value;
      sum += v;
      ss += v * v;
    }
    const double mean = sum / ne;
    const double se = std::sqrt((ss / ne - mean * mean) / ne);
    CHECK(std::abs(mean) < 3.0 * se);
  }

  SUBCASE("order 2 environment mean matches the kernel quadrature oracle") {
    // E_env E_S[(int xi~)^2] = 2 lambda int_0^T (T - u) P_{2u}(0) du.
    const double T = 2.0, lambda = 1.0, beta = cfg.beta;
    const double inner = integrate_composite(0.0, T, 64, 16, [&](double u) {
      return (T - u) * rw_kernel(2.0 * u, 0);
    });
    const double ref = 0.5 * beta * beta * 2.0 * lambda * inner;
    const long ne = 1200;
    double sum = 0.0, ss = 0.0;
    for (long i = 0; i < ne; ++i) {
      const Environment env = sample_env(lambda, T, 9000 + static_cast<std::uint64_t>(i));
      const double v = chaos_term(env, cfg, 2, 200, 5).value;
      sum += v;
      ss += v * v;
    }
    const double mean = sum / ne;
    const double se = std::sqrt((ss / ne - mean * mean) / ne);
    CHECK(std::abs(mean - ref) < 3.0 * se);
  }

  SUBCASE("moment form matches the time-simplex oracle") {
    const Environment env = sample_env(1.0, 2.0, 33);
    for (int k : {1, 2}) {
      const ChaosTerm a = chaos_term(env, cfg, k, 200000, 5);
      const ChaosTerm b = chaos_term_simplex(env, cfg, k, 200000, 6);
      CHECK(std::abs(a.value - b.value) < 3.0 * std::sqrt(a.se * a.se + b.se * b.se));
    }
  }
}

TEST_CASE("truncated series") {
  const Environment env = sample_env(1.0, 2.0, 44);
  PolymerConfig cfg;
  cfg.beta = 0.3;
  cfg.horizon = 2.0;
  CHECK(truncated_series(env, cfg, 0, 100, 2) == 1.0);
  PolymerConfig zero = cfg;
  zero.beta = 0.0;
  CHECK(truncated_series(env, zero, 4, 100, 2) == 1.0);

  // E|quenched - truncated(m)| decreasing in m.
  const long ne = 300, np = 400;
  std::vector<double> tail(5, 0.0);
  for (long i = 0; i < ne; ++i) {
    const Environment e = sample_env(1.0, 2.0, 7700 + static_cast<std::uint64_t>(i));
    const double z = quenched_partition(e, cfg, np, 8).estimate;
    for (int m = 1; m <= 4; ++m)
      tail[static_cast<std::size_t>(m)] += std::abs(z - truncated_series(e, cfg, m, np, 8));
  }
  for (int m = 1; m < 4; ++m) CHECK(tail[static_cast<std::size_t>(m + 1)] < tail[static_cast<std::size_t>(m)]);
}

TEST_CASE("v_field trivial and first-order behavior") {
  WalkPath still;
  still.x0 = 0;
  const VField v0(still, 0.0, 2.0, 40);
  for (double t : {0.5, 1.0, 2.0})
    for (long y : {0L, 1L, 5L}) CHECK(v0(t, y) == doctest::Approx(1.0).epsilon(1e-13));

  // v_0(t, 0) - 1 ~ beta int_0^t P_s(0) ds for small beta.
  const double beta = 1e-4, t = 2.0;
  const VField vs(still, beta, t, 60);
  const double ref = beta * integrate_composite(0.0, t, 32, 16, [](double s) {
    return rw_kernel(s, 0);
  });
  CHECK(vs(t, 0) - 1.0 == doctest::Approx(ref).epsilon(1e-3));
}

TEST_CASE("v_field matches a dense RK4 oracle") {
  Rng rng(42);
  const double beta = 0.7, T = 2.0;
  const WalkPath S = sample_walk(0, 0.0, T, rng);
  const long W = v_field_window(S, T);
  const VField vf(S, beta, T, W);
  const long Wrk = S.range_radius() + 14;
  const std::vector<double> v = rk4_v(S, beta, T, Wrk, 2e-4);
  for (long y = -4; y <= 4; ++y)
    CHECK(vf(T, y) == doctest::Approx(v[static_cast<std::size_t>(y + Wrk)]).epsilon(1e-4));
}

TEST_CASE("v_field matches the reversed-potential Feynman-Kac MC") {
  Rng rng(43);
  const double beta = 0.6, T = 2.0;
  const WalkPath S = sample_walk(0, 0.0, T, rng);
  const VField vf(S, beta, T, v_field_window(S, T));
  // v(t, y) = E_Y[exp(beta int_0^t 1{Y_s = S_{t-s}} ds)], Y_0 = y.
  const std::vector<std::pair<double, long>> probes{{0.7, 0}, {1.3, 1}, {2.0, -1}, {1.0, 2}, {1.9, 0}};
  for (auto [t, y] : probes) {
    const long n = 60000;
    double sum = 0.0, ss = 0.0;
    for (long i = 0; i < n; ++i) {
      Rng r = Rng::keyed(917, {static_cast<std::uint64_t>(i)});
      const WalkPath Y = sample_walk(y, 0.0, t, r);
      double acc = 0.0, cur = 0.0;
      std::vector<double> brk = Y.jump_times;
      for (double u : S.jump_times)
        if (t - u > 0.0 && t - u < t) brk.push_back(t - u);
      brk.push_back(t);
      std::sort(brk.begin(), brk.end());
      for (double b : brk) {
        if (b <= cur) continue;
        const double mid = 0.5 * (cur + b);
        if (Y.position_at(mid) == S.position_at(t - mid)) acc += b - cur;
        cur = b;
      }
      const double w = std::exp(beta * acc);
      sum += w;
      ss += w * w;
    }
    const double mean = sum / n;
    const double se = std::sqrt((ss / n - mean * mean) / n);
    CHECK(std::abs(vf(t, y) - mean) < 3.0 * se);
  }
}

TEST_CASE("annealed partition") {
  CHECK(annealed_partition(0.0, 1.0, 2.0, 50, 1).estimate == 1.0);
  CHECK(annealed_partition(0.4, 1e-6, 2.0, 200, 1).estimate == doctest::Approx(1.0).epsilon(1e-5));

  // Double MC (environments x polymer paths) cross-check at modest coupling.
  const double beta = 0.3, lambda = 1.0, T = 2.0;
  const long ne = 1200, np = 300;
  double sum = 0.0, ss = 0.0;
  PolymerConfig cfg;
  cfg.beta = beta;
  cfg.horizon = T;
  for (long i = 0; i < ne; ++i) {
    const Environment env = sample_env(lambda, T, 510000 + static_cast<std::uint64_t>(i));
    const double z = quenched_partition(env, cfg, np, 3).estimate;
    sum += z;
    ss += z * z;
  }
  const double mean = sum / ne;
  const double se = std::sqrt((ss / ne - mean * mean) / ne);
  const McEstimate ann = annealed_partition(beta, lambda, T, 600, 4);
  CHECK(std::abs(mean - ann.estimate) < 3.0 * std::sqrt(se * se + ann.se * ann.se));
}

TEST_CASE("pascal principle") {
  WalkPath still;
  still.x0 = 0;
  CHECK(pascal_gap(still, 0.8, 1.0, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
  Rng rng(77);
  for (double beta : {1.0, -1.0}) {
    for (int rep = 0; rep < 30; ++rep) {
      const WalkPath S = sample_walk(0, 0.0, 2.0, rng);
      CHECK(pascal_gap(S, beta, 1.0, 2.0) >= -1e-9);
    }
  }
}

TEST_CASE("local time statistics") {
  const LocalTimeStats tiny = local_time_stats(1e-3, 4000, 5);
  CHECK(tiny.mean_ratio < 0.05);
  std::vector<double> means, mgfs;
  for (double t : {1.0, 4.0, 16.0, 64.0}) {
    const LocalTimeStats s = local_time_stats(t, 4000, 6);
    means.push_back(s.mean_ratio);
    mgfs.push_back(s.mgf);
    CHECK(s.mean_ratio > 0.0);
    CHECK(std::isfinite(s.mgf));
  }
  // Bounded, no growth trend: a single generous envelope.
  for (double m : means) CHECK(m < 1.5);
  for (double m : mgfs) CHECK(m < 6.0);
  CHECK(std::abs(means.back() - means[means.size() - 2]) < 0.15);
  CHECK(std::abs(mgfs.back() - mgfs[mgfs.size() - 2]) < 0.6);
}
