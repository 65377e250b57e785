#include "polyfield/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "polyfield/kernels.hpp"
#include "polyfield/quadrature.hpp"

namespace polyfield {

void GridSpec::validate() const {
  if (nt < 2 || nx < 2) throw std::invalid_argument("grid: nt, nx >= 2 required");
  if (!(t_max > 0.0)) throw std::invalid_argument("grid: t_max must be > 0");
  if (!(x_max > x_min)) throw std::invalid_argument("grid: x_max must exceed x_min");
  if (cells() > 40000) throw std::invalid_argument("grid: cell cap 40000 exceeded");
}

namespace {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// Second antiderivative of the heat kernel in space: K2'' (y) = p_tau(y).
double heat_k2(double y, double tau) {
  const double sig = std::sqrt(tau);
  if (sig == 0.0) return std::max(y, 0.0);
  return y * norm_cdf(y / sig) + sig * norm_pdf(y / sig);
}

// int int over two x-cells of width dx at center offset g*dx of p_tau(x-y).
double spatial_cell_pair(double tau, double g, double dx) {
  return heat_k2((g + 1.0) * dx, tau) - 2.0 * heat_k2(g * dx, tau) +
         heat_k2((g - 1.0) * dx, tau);
}

// int int over two time cells of width dt at offset d of f(|t-s|), where
// f(tau) = spatial_cell_pair(tau, g, dx). The hat weight is dt - |tau - d*dt|;
// pieces touching tau = 0 use the sqrt substitution tau = u^2.
double timecell_pair(int d, double g, double dt, double dx) {
  const GaussLegendre& gl = GaussLegendre::get(24);
  auto f = [&](double tau) { return spatial_cell_pair(tau, g, dx); };
  if (d == 0) {
    const double usup = std::sqrt(dt);
    return 2.0 * gl.integrate(0.0, usup, [&](double u) {
      return (dt - u * u) * f(u * u) * 2.0 * u;
    });
  }
  double total = 0.0;
  // lower piece tau in [(d-1)dt, d*dt], weight tau - (d-1)dt
  if (d == 1) {
    const double usup = std::sqrt(dt);
    total += gl.integrate(0.0, usup, [&](double u) { return u * u * f(u * u) * 2.0 * u; });
  } else {
    total += gl.integrate((d - 1) * dt, d * dt,
                          [&](double tau) { return (tau - (d - 1) * dt) * f(tau); });
  }
  // upper piece tau in [d*dt, (d+1)dt], weight (d+1)dt - tau
  total += gl.integrate(d * dt, (d + 1) * dt,
                        [&](double tau) { return ((d + 1) * dt - tau) * f(tau); });
  return total;
}

double cell_cov_offset(const GridSpec& spec, int d, int g) {
  const double dt = spec.dt(), dx = spec.dx();
  const double cellm = dt * dx;
  return timecell_pair(std::abs(d), std::abs(g), dt, dx) / (cellm * cellm);
}

}  // namespace

double cell_covariance(const GridSpec& spec, int cell_a, int cell_b) {
  spec.validate();
  if (cell_a < 0 || cell_a >= spec.cells() || cell_b < 0 || cell_b >= spec.cells())
    throw std::out_of_range("cell_covariance: cell index out of range");
  const int d = cell_a / spec.nx - cell_b / spec.nx;
  const int g = cell_a % spec.nx - cell_b % spec.nx;
  return cell_cov_offset(spec, d, g);
}

FieldModel::FieldModel(GridSpec spec) : spec_(spec) {
  spec_.validate();
  const int N = spec_.cells();
  // Offset table: covariance depends only on (|dt|, |dx|) cell offsets.
  Eigen::MatrixXd table(spec_.nt, spec_.nx);
  for (int d = 0; d < spec_.nt; ++d) {
    for (int g = 0; g < spec_.nx; ++g) table(d, g) = cell_cov_offset(spec_, d, g);
  }
  const double trace_over_dim = table(0, 0);
  const double ladder[4] = {0.0, 1e-12, 1e-10, 1e-8};
  for (int attempt = 0; attempt < 4; ++attempt) {
    factor_.resize(N, N);
    for (int a = 0; a < N; ++a) {
      const int at = a / spec_.nx, ax = a % spec_.nx;
      for (int b = 0; b <= a; ++b) {
        const int bt = b / spec_.nx, bx = b % spec_.nx;
        factor_(a, b) = table(std::abs(at - bt), std::abs(ax - bx));
      }
      factor_(a, a) += ladder[attempt] * trace_over_dim;
    }
    factor_.triangularView<Eigen::StrictlyUpper>() =
        factor_.triangularView<Eigen::StrictlyLower>().transpose();
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(factor_);
    if (llt.info() == Eigen::Success) {
      jitter_ = ladder[attempt] * trace_over_dim;
      return;
    }
  }
  throw std::runtime_error(
      "sample_field: covariance not factorizable after max jitter 1e-8 * trace/dim");
}

FieldGrid FieldModel::sample(std::uint64_t seed) const {
  const int N = spec_.cells();
  Eigen::VectorXd gauss(N);
  Rng rng = Rng::keyed(seed, {0x786669});
  for (int i = 0; i < N; ++i) gauss(i) = rng.normal();
  Eigen::VectorXd z = factor_.triangularView<Eigen::Lower>() * gauss;
  FieldGrid out;
  out.spec = spec_;
  out.seed = seed;
  out.xi.assign(z.data(), z.data() + N);
  return out;
}

namespace {

std::mutex model_mutex;
std::vector<std::shared_ptr<FieldModel>> model_cache;

std::shared_ptr<FieldModel> model_for(const GridSpec& spec) {
  std::lock_guard<std::mutex> lock(model_mutex);
  for (const auto& m : model_cache) {
    if (m->spec() == spec) return m;
  }
  model_cache.push_back(std::make_shared<FieldModel>(spec));
  return model_cache.back();
}

}  // namespace

FieldGrid sample_field(const GridSpec& spec, std::uint64_t seed) {
  return model_for(spec)->sample(seed);
}

// ---------------------------------------------------------------------------
// Picard series on the grid
// ---------------------------------------------------------------------------

namespace {

// W(d, g) = int over source cell (time offset d >= 1, space offset g) of
// p_{t_c - s}(x_c - y) dy ds, spatial part in closed form. Only cells
// strictly before the target time cell contribute (exact causality).
struct SeriesWeights {
  GridSpec spec;
  std::vector<std::vector<double>> w;  // [d-1][|g|]

  explicit SeriesWeights(const GridSpec& s) : spec(s) {
    const double dt = spec.dt(), dx = spec.dx();
    const GaussLegendre& gl = GaussLegendre::get(16);
    auto spatial = [&](double tau, int g) {
      const double sig = std::sqrt(tau);
      return norm_cdf((g + 0.5) * dx / sig) - norm_cdf((g - 0.5) * dx / sig);
    };
    w.resize(static_cast<std::size_t>(spec.nt));
    for (int d = 1; d <= spec.nt; ++d) {
      auto& row = w[static_cast<std::size_t>(d - 1)];
      row.resize(static_cast<std::size_t>(spec.nx));
      // tau = t_c - s ranges over [(d - 1/2) dt, (d + 1/2) dt]
      for (int g = 0; g < spec.nx; ++g) {
        row[static_cast<std::size_t>(g)] = gl.integrate(
            (d - 0.5) * dt, (d + 0.5) * dt, [&](double tau) { return spatial(tau, g); });
      }
    }
  }

  // out(it, ix) = sum_{it' < it, ix'} W(it - it', |ix - ix'|) f(it', ix')
  void apply(const std::vector<double>& f, std::vector<double>& out) const {
    const int nt = spec.nt, nx = spec.nx;
    std::fill(out.begin(), out.end(), 0.0);
    for (int it = 1; it < nt; ++it) {
      double* orow = &out[static_cast<std::size_t>(it * nx)];
      for (int its = 0; its < it; ++its) {
        const double* frow = &f[static_cast<std::size_t>(its * nx)];
        const std::vector<double>& wrow = w[static_cast<std::size_t>(it - its - 1)];
        for (int ix = 0; ix < nx; ++ix) {
          double acc = 0.0;
          for (int ixs = 0; ixs < nx; ++ixs) {
            acc += wrow[static_cast<std::size_t>(std::abs(ix - ixs))] * frow[ixs];
          }
          orow[ix] += acc;
        }
      }
    }
  }
};

std::mutex weights_mutex;
std::vector<std::shared_ptr<SeriesWeights>> weights_cache;

std::shared_ptr<SeriesWeights> weights_for(const GridSpec& spec) {
  std::lock_guard<std::mutex> lock(weights_mutex);
  for (const auto& w : weights_cache) {
    if (w->spec == spec) return w;
  }
  weights_cache.push_back(std::make_shared<SeriesWeights>(spec));
  return weights_cache.back();
}

}  // namespace

std::vector<std::vector<double>> series_terms(const FieldGrid& field, int m_max,
                                              double beta, double lambda) {
  if (m_max < 0 || m_max > 6)
    throw std::invalid_argument("series_terms: order cap is 6");
  if (lambda < 0.0) throw std::domain_error("series_terms: lambda must be >= 0");
  const std::size_t N = static_cast<std::size_t>(field.spec.cells());
  if (field.xi.size() != N) throw std::invalid_argument("series_terms: field size mismatch");
  std::vector<std::vector<double>> terms;
  terms.emplace_back(N, 1.0);
  if (m_max == 0) return terms;
  auto wts = weights_for(field.spec);
  const double coef = beta * std::sqrt(lambda);
  std::vector<double> prod(N), next(N);
  for (int m = 1; m <= m_max; ++m) {
    const std::vector<double>& prev = terms.back();
    for (std::size_t i = 0; i < N; ++i) prod[i] = field.xi[i] * prev[i];
    wts->apply(prod, next);
    for (std::size_t i = 0; i < N; ++i) next[i] *= coef;
    terms.push_back(next);
  }
  return terms;
}

std::vector<double> series_term(const FieldGrid& field, int m, double beta, double lambda) {
  return series_terms(field, m, beta, lambda).back();
}

std::vector<double> series_solution(const FieldGrid& field, int m_max,
                                    double beta, double lambda) {
  const auto terms = series_terms(field, m_max, beta, lambda);
  std::vector<double> out(terms[0].size(), 0.0);
  for (const auto& t : terms) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brownian functionals
// ---------------------------------------------------------------------------

BrownianPath sample_brownian(double t, std::size_t resolution, Rng& rng) {
  if (!(t > 0.0)) throw std::invalid_argument("sample_brownian: t must be > 0");
  if (resolution < 64) throw std::invalid_argument("sample_brownian: resolution >= 64");
  BrownianPath p;
  p.horizon = t;
  p.values.resize(resolution + 1);
  p.values[0] = 0.0;
  const double sd = std::sqrt(t / static_cast<double>(resolution));
  for (std::size_t i = 1; i <= resolution; ++i) {
    p.values[i] = p.values[i - 1] + sd * rng.normal();
  }
  return p;
}

namespace {

// Bridge-conditional kernel: E[p_tau(G)] for G ~ N(m, v) is p_{tau+v}(m).
inline double bridge_kernel(double tau, double v, double m) {
  const double s2 = tau + v;
  const double arg = 0.5 * m * m / s2;
  if (arg > 60.0) return 0.0;
  return std::exp(-arg) / std::sqrt(2.0 * M_PI * s2);
}

struct PathView {
  const BrownianPath* p;
  double delta;
  double at(double r) const {
    const double u = r / delta;
    std::size_t i = std::min(static_cast<std::size_t>(u), p->resolution() - 1);
    const double f = u - static_cast<double>(i);
    return (1.0 - f) * p->values[i] + f * p->values[i + 1];
  }
  // Brownian-bridge variance of the true path around the interpolation.
  double bridge_var(double r) const {
    const double u = r / delta;
    std::size_t i = std::min(static_cast<std::size_t>(u), p->resolution() - 1);
    const double a = r - static_cast<double>(i) * delta;
    return a * (delta - a) / delta;
  }
};

}  // namespace

double brownian_double_integral(const BrownianPath& path) {
  const std::size_t n = path.resolution();
  const double t = path.horizon, delta = t / static_cast<double>(n);
  const PathView pv{&path, delta};
  const GaussLegendre& g4 = GaussLegendre::get(4);
  const GaussLegendre& g8 = GaussLegendre::get(8);
  const GaussLegendre& g12 = GaussLegendre::get(16);
  double total = 0.0;

  // Same-cell blocks: integrand depends only on w = r - s.
  for (std::size_t i = 0; i < n; ++i) {
    const double slope = (path.values[i + 1] - path.values[i]) / delta;
    const double usup = std::sqrt(delta);
    total += 2.0 * g12.integrate(0.0, usup, [&](double u) {
      const double w = u * u;
      const double v = w * (delta - w) / delta;  // bridge var of B_r - B_s
      return (delta - w) * bridge_kernel(w, v, slope * w) * 2.0 * u;
    });
  }

  // Adjacent blocks (r in cell j+1, s in cell j), doubled by symmetry;
  // sqrt substitutions in both variables tame the shared-corner
  // singularity.
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double edge = static_cast<double>(j + 1) * delta;
    const double sq = std::sqrt(delta);
    const double block = g8.integrate(0.0, sq, [&](double vvar) {
      const double s = edge - vvar * vvar;
      const double ms = pv.at(s), vs = pv.bridge_var(s);
      const double ulo = vvar, uhi = std::sqrt(edge + delta - s);
      const double inner = g8.integrate(ulo, uhi, [&](double u) {
        const double r = s + u * u;
        return 2.0 * u * bridge_kernel(u * u, vs + pv.bridge_var(r), pv.at(r) - ms);
      });
      return 2.0 * vvar * inner;
    });
    total += 2.0 * block;
  }

  // Far blocks |i - j| >= 2, doubled by symmetry.
  for (std::size_t i = 2; i < n; ++i) {
    for (std::size_t j = 0; j + 2 <= i; ++j) {
      const double ra = static_cast<double>(i) * delta, sa = static_cast<double>(j) * delta;
      double block = 0.0;
      const double half = 0.5 * delta;
      for (std::size_t qa = 0; qa < g4.nodes.size(); ++qa) {
        const double r = ra + half + half * g4.nodes[qa];
        const double mr = pv.at(r), vr = pv.bridge_var(r);
        for (std::size_t qb = 0; qb < g4.nodes.size(); ++qb) {
          const double s = sa + half + half * g4.nodes[qb];
          block += g4.weights[qa] * g4.weights[qb] *
                   bridge_kernel(r - s, vr + pv.bridge_var(s), mr - pv.at(s));
        }
      }
      total += 2.0 * block * half * half;
    }
  }
  return total;
}

double brownian_cross_integral(const BrownianPath& a, const BrownianPath& b) {
  if (a.resolution() != b.resolution() || a.horizon != b.horizon)
    throw std::invalid_argument("brownian_cross_integral: paths must share the grid");
  const std::size_t n = a.resolution();
  const double delta = a.horizon / static_cast<double>(n);
  const PathView pa{&a, delta}, pb{&b, delta};
  const GaussLegendre& g4 = GaussLegendre::get(4);
  const GaussLegendre& g6 = GaussLegendre::get(12);
  double total = 0.0;
  const double half = 0.5 * delta;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const bool near = (i == j) || (i + 1 == j) || (j + 1 == i);
      const GaussLegendre& gq = near ? g6 : g4;
      const double ra = static_cast<double>(i) * delta, sa = static_cast<double>(j) * delta;
      double block = 0.0;
      for (std::size_t qa = 0; qa < gq.nodes.size(); ++qa) {
        const double r = ra + half + half * gq.nodes[qa];
        const double mr = pa.at(r), vr = pa.bridge_var(r);
        for (std::size_t qb = 0; qb < gq.nodes.size(); ++qb) {
          const double s = sa + half + half * gq.nodes[qb];
          block += gq.weights[qa] * gq.weights[qb] *
                   bridge_kernel(std::abs(r - s), vr + pb.bridge_var(s), mr - pb.at(s));
        }
      }
      total += block * half * half;
    }
  }
  return total;
}

McEstimate fk_moment(int p, double beta, double lambda, double t,
                     long path_replicas, std::size_t resolution, std::uint64_t seed) {
  if (p != 1 && p != 2) throw std::invalid_argument("fk_moment: p must be 1 or 2");
  if (lambda < 0.0) throw std::domain_error("fk_moment: lambda must be >= 0");
  std::vector<double> vals(static_cast<std::size_t>(path_replicas));
  const double c = 0.5 * beta * beta * lambda;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < path_replicas; ++i) {
    Rng rng = Rng::keyed(seed, {0x666b, static_cast<std::uint64_t>(i)});
    const BrownianPath b1 = sample_brownian(t, resolution, rng);
    double expo = brownian_double_integral(b1);
    if (p == 2) {
      const BrownianPath b2 = sample_brownian(t, resolution, rng);
      expo += brownian_double_integral(b2) + 2.0 * brownian_cross_integral(b1, b2);
    }
    vals[static_cast<std::size_t>(i)] = std::exp(c * expo);
  }
  double sum = 0.0;
  for (double v : vals) sum += v;
  McEstimate out;
  out.replicas = path_replicas;
  const double nn = static_cast<double>(path_replicas);
  out.estimate = sum / nn;
  double ss = 0.0;
  for (double v : vals) ss += (v - out.estimate) * (v - out.estimate);
  out.se = nn > 1 ? std::sqrt(ss / (nn * (nn - 1))) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Mollified field value
// ---------------------------------------------------------------------------

double mollifier_window(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double a = u * (1.0 - u);
  return 30.0 * a * a;
}

double mollified_field_value(const FieldGrid& field, double eps, double eps_prime,
                             double t, double x) {
  if (!(eps > 0.0) || !(eps_prime > 0.0))
    throw std::invalid_argument("mollified_field_value: eps, eps' must be > 0");
  const GridSpec& spec = field.spec;
  const double spatial_reach = 8.0 * std::sqrt(eps);
  if (t - eps_prime < 0.0 || t > spec.t_max || x - spatial_reach < spec.x_min ||
      x + spatial_reach > spec.x_max) {
    throw std::domain_error("mollified_field_value: mollifier support leaves the grid");
  }
  const double dt = spec.dt(), dx = spec.dx();
  const double sig = std::sqrt(eps);
  const GaussLegendre& gl = GaussLegendre::get(8);
  const int it_lo = std::max(0, static_cast<int>(std::floor((t - eps_prime) / dt)));
  const int it_hi = std::min(spec.nt - 1, static_cast<int>(std::floor(t / dt)));
  const int ix_lo =
      std::max(0, static_cast<int>(std::floor((x - spatial_reach - spec.x_min) / dx)));
  const int ix_hi = std::min(
      spec.nx - 1, static_cast<int>(std::floor((x + spatial_reach - spec.x_min) / dx)));
  double acc = 0.0;
  for (int it = it_lo; it <= it_hi; ++it) {
    const double a = std::max(it * dt, t - eps_prime);
    const double b = std::min((it + 1) * dt, t);
    if (b <= a) continue;
    const double tw = gl.integrate(a, b, [&](double s) {
      return mollifier_window((t - s) / eps_prime) / eps_prime;
    });
    if (tw == 0.0) continue;
    for (int ix = ix_lo; ix <= ix_hi; ++ix) {
      const double ylo = spec.x_min + ix * dx, yhi = ylo + dx;
      const double sw = norm_cdf((x - ylo) / sig) - norm_cdf((x - yhi) / sig);
      acc += field.value(it, ix) * tw * sw;
    }
  }
  return acc;
}

}  // namespace polyfield
