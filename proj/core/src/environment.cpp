#include "polyfield/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "polyfield/quadrature.hpp"

namespace polyfield {

long WalkPath::position_at(double t) const {
  auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  long pos = x0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(it - jump_times.begin()); ++i) {
    pos += jump_steps[i];
  }
  return pos;
}

long WalkPath::range_radius() const {
  long pos = x0, r = std::labs(x0);
  for (int s : jump_steps) {
    pos += s;
    r = std::max(r, std::labs(pos));
  }
  return r;
}

WalkPath sample_walk(long x0, double t0, double horizon, Rng& rng) {
  WalkPath w;
  w.x0 = x0;
  double t = t0;
  const double t_end = t0 + horizon;
  for (;;) {
    t += rng.exponential();
    if (t > t_end) break;
    w.jump_times.push_back(t);
    w.jump_steps.push_back(rng.bernoulli() ? 1 : -1);
  }
  return w;
}

void EnvironmentConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("environment: lambda must be > 0");
  if (window_halfwidth < 0) throw std::invalid_argument("environment: negative window");
  if (!(horizon > 0.0)) throw std::invalid_argument("environment: horizon must be > 0");
  if (!(leak_tolerance > 0.0)) throw std::invalid_argument("environment: leak tolerance must be > 0");
}

namespace {

// 2*lambda * sum_{m > B} P(Poisson(T) >= m) = 2*lambda * E[(N_T - B)+].
double leak_at(double lambda, double T, long B) {
  // pmf recurrence; start contributing where m > B.
  double logp = -T;  // log pmf(0)
  double acc = 0.0;
  long m_hi = static_cast<long>(std::ceil(T + 60.0 * std::sqrt(T + 1.0) + 60.0));
  for (long m = 1; m <= m_hi; ++m) {
    logp += std::log(T) - std::log(static_cast<double>(m));
    if (m > B) acc += static_cast<double>(m - B) * std::exp(logp);
  }
  return 2.0 * lambda * acc;
}

}  // namespace

long buffer_halfwidth(const EnvironmentConfig& cfg) {
  cfg.validate();
  long B = 0;
  while (leak_at(cfg.lambda, cfg.horizon, B) > cfg.leak_tolerance) ++B;
  return B;
}

Environment::Environment(EnvironmentConfig cfg, std::uint64_t seed)
    : cfg_(cfg), seed_(seed) {
  cfg_.validate();
  buffer_ = buffer_halfwidth(cfg_);
  leak_bound_ = leak_at(cfg_.lambda, cfg_.horizon, buffer_);
  const long R = cfg_.window_halfwidth + buffer_;
  walks_.reserve(static_cast<std::size_t>(cfg_.lambda * (2 * R + 1)) + 16);
  for (long x = -R; x <= R; ++x) {
    const std::uint64_t xe = static_cast<std::uint64_t>(x);
    Rng count_rng = Rng::keyed(seed_, {1, xe});
    const long n = count_rng.poisson(cfg_.lambda);
    for (long j = 0; j < n; ++j) {
      Rng walk_rng = Rng::keyed(seed_, {2, xe, static_cast<std::uint64_t>(j)});
      walks_.push_back(sample_walk(x, 0.0, cfg_.horizon, walk_rng));
    }
  }
  build_index();
}

Environment::Environment(EnvironmentConfig cfg, long buffer, std::uint64_t seed,
                         std::vector<WalkPath> walks)
    : cfg_(cfg), buffer_(buffer), seed_(seed), walks_(std::move(walks)) {
  cfg_.validate();
  leak_bound_ = leak_at(cfg_.lambda, cfg_.horizon, buffer_);
  build_index();
}

void Environment::build_index() {
  long lo = -cfg_.window_halfwidth, hi = cfg_.window_halfwidth;
  for (const WalkPath& w : walks_) {
    const long r = w.range_radius();
    lo = std::min(lo, -r);
    hi = std::max(hi, r);
  }
  index_offset_ = -lo;
  index_.assign(static_cast<std::size_t>(hi - lo + 1), SiteTrack{});

  // Per-site occupancy-change events: +1 on arrival, -1 on departure.
  std::vector<std::vector<std::pair<double, int>>> events(index_.size());
  for (const WalkPath& w : walks_) {
    index_[static_cast<std::size_t>(w.x0 + index_offset_)].initial += 1;
    long pos = w.x0;
    for (std::size_t i = 0; i < w.jump_times.size(); ++i) {
      events[static_cast<std::size_t>(pos + index_offset_)].emplace_back(w.jump_times[i], -1);
      pos += w.jump_steps[i];
      events[static_cast<std::size_t>(pos + index_offset_)].emplace_back(w.jump_times[i], +1);
    }
  }
  for (std::size_t s = 0; s < index_.size(); ++s) {
    auto& ev = events[s];
    std::sort(ev.begin(), ev.end());
    SiteTrack& tr = index_[s];
    long c = tr.initial;
    tr.times.reserve(ev.size());
    tr.counts.reserve(ev.size());
    for (std::size_t i = 0; i < ev.size();) {
      const double t = ev[i].first;
      while (i < ev.size() && ev[i].first == t) c += ev[i++].second;
      tr.times.push_back(t);
      tr.counts.push_back(c);
    }
  }
}

long Environment::SiteTrack::count_at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return initial;
  return counts[static_cast<std::size_t>(it - times.begin()) - 1];
}

const Environment::SiteTrack* Environment::track(long x) const {
  const long idx = x + index_offset_;
  if (idx < 0 || idx >= static_cast<long>(index_.size())) return nullptr;
  return &index_[static_cast<std::size_t>(idx)];
}

long Environment::occupation(double t, long x) const {
  if (t < 0.0 || t > cfg_.horizon)
    throw std::out_of_range("occupation: time outside [0, horizon]");
  if (std::labs(x) > cfg_.window_halfwidth)
    throw std::out_of_range("occupation: site outside certified window");
  const SiteTrack* tr = track(x);
  return tr ? tr->count_at(t) : 0;
}

double Environment::centered_occupation(double t, long x) const {
  return static_cast<double>(occupation(t, x)) - cfg_.lambda;
}

double Environment::path_integral(const WalkPath& polymer, double t0, double t1) const {
  if (t0 < 0.0 || t1 > cfg_.horizon || t0 > t1)
    throw std::out_of_range("path_integral: time range outside [0, horizon]");
  double acc = 0.0;
  // Walk the polymer's constancy intervals clipped to [t0, t1].
  long pos = polymer.position_at(t0);
  double a = t0;
  auto it = std::upper_bound(polymer.jump_times.begin(), polymer.jump_times.end(), t0);
  std::size_t ji = static_cast<std::size_t>(it - polymer.jump_times.begin());
  while (a < t1) {
    const double b = (ji < polymer.jump_times.size())
                         ? std::min(polymer.jump_times[ji], t1)
                         : t1;
    if (std::labs(pos) > cfg_.window_halfwidth)
      throw std::out_of_range("path_integral: polymer left the certified window");
    if (b > a) {
      site_sweep(pos, a, b, [&](double u, double v, long c) {
        acc += (static_cast<double>(c) - cfg_.lambda) * (v - u);
      });
    }
    a = b;
    if (a >= t1) break;
    pos += polymer.jump_steps[ji];
    ++ji;
  }
  return acc;
}

void Environment::site_sweep(long x, double t0, double t1,
                             const std::function<void(double, double, long)>& visit) const {
  const SiteTrack* tr = track(x);
  if (tr == nullptr || tr->times.empty()) {
    visit(t0, t1, tr ? tr->initial : 0);
    return;
  }
  double u = t0;
  long c = tr->count_at(t0);
  auto et = std::upper_bound(tr->times.begin(), tr->times.end(), t0);
  std::size_t ei = static_cast<std::size_t>(et - tr->times.begin());
  while (ei < tr->times.size() && tr->times[ei] < t1) {
    visit(u, tr->times[ei], c);
    u = tr->times[ei];
    c = tr->counts[ei];
    ++ei;
  }
  visit(u, t1, c);
}

double field_pairing(const Environment& env, const TestFunction& phi, RescaleParam eps) {
  const double e = eps.eps;
  if (!(e > 0.0)) throw std::invalid_argument("field_pairing: eps must be > 0");
  const EnvironmentConfig& cfg = env.config();
  // Microscopic support box.
  const double t_lo = std::max(phi.t_lo, 0.0) / (e * e);
  const double t_hi = phi.t_hi / (e * e);
  const long x_lo = static_cast<long>(std::ceil(phi.x_lo / e));
  const long x_hi = static_cast<long>(std::floor(phi.x_hi / e));
  if (t_hi > cfg.horizon * (1.0 + 1e-12) ||
      std::max(std::labs(x_lo), std::labs(x_hi)) > cfg.window_halfwidth) {
    throw std::invalid_argument("field_pairing: support exceeds certified window");
  }
  const double t_end = std::min(t_hi, cfg.horizon);
  const GaussLegendre& gl = GaussLegendre::get(16);
  double acc = 0.0;
  for (long x = x_lo; x <= x_hi; ++x) {
    const double xm = e * static_cast<double>(x);
    // Occupancy is piecewise constant in time, so the quadrature per
    // constancy interval only has to resolve the smooth macroscopic factor.
    env.site_sweep(x, t_lo, t_end, [&](double a, double b, long c) {
      if (b <= a) return;
      const double cen = static_cast<double>(c) - cfg.lambda;
      if (cen == 0.0) return;
      const int panels = 1 + static_cast<int>(e * e * (b - a) / 0.05);
      acc += cen * integrate_composite(a, b, panels, gl,
                                       [&](double s) { return phi.f(e * e * s, xm); });
    });
  }
  return std::pow(e, 2.5) * acc;
}

std::string environment_to_json(const Environment& env) {
  nlohmann::json j;
  const EnvironmentConfig& cfg = env.config();
  j["lambda"] = cfg.lambda;
  j["window_halfwidth"] = cfg.window_halfwidth;
  j["buffer_halfwidth"] = env.buffer();
  j["horizon"] = cfg.horizon;
  j["leak_tolerance"] = cfg.leak_tolerance;
  j["seed"] = env.seed();
  nlohmann::json walks = nlohmann::json::array();
  for (const WalkPath& w : env.walks()) {
    nlohmann::json jw;
    jw["x0"] = w.x0;
    nlohmann::json jumps = nlohmann::json::array();
    for (std::size_t i = 0; i < w.jump_times.size(); ++i) {
      jumps.push_back({w.jump_times[i], w.jump_steps[i]});
    }
    jw["jumps"] = std::move(jumps);
    walks.push_back(std::move(jw));
  }
  j["walks"] = std::move(walks);
  return j.dump(2);
}

Environment environment_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  EnvironmentConfig cfg;
  cfg.lambda = j.at("lambda").get<double>();
  cfg.window_halfwidth = j.at("window_halfwidth").get<long>();
  cfg.horizon = j.at("horizon").get<double>();
  cfg.leak_tolerance = j.at("leak_tolerance").get<double>();
  const long buffer = j.at("buffer_halfwidth").get<long>();
  const std::uint64_t seed = j.at("seed").get<std::uint64_t>();
  std::vector<WalkPath> walks;
  for (const auto& jw : j.at("walks")) {
    WalkPath w;
    w.x0 = jw.at("x0").get<long>();
    for (const auto& jump : jw.at("jumps")) {
      w.jump_times.push_back(jump.at(0).get<double>());
      w.jump_steps.push_back(jump.at(1).get<int>());
    }
    walks.push_back(std::move(w));
  }
  return Environment(cfg, buffer, seed, std::move(walks));
}

void save_environment(const Environment& env, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_environment: cannot open " + path);
  out << environment_to_json(env) << '\n';
}

Environment load_environment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_environment: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return environment_from_json(ss.str());
}

Environment sample_environment(const EnvironmentConfig& cfg, std::uint64_t seed) {
  return Environment(cfg, seed);
}

}  // namespace polyfield
