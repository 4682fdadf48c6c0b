#include "sdepi/ssa.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdepi/errors.hpp"
#include "ssa_engine.hpp"

namespace sdepi {

EpidemicState EpidemicState::from_counts(std::vector<std::uint64_t> counts) {
  EpidemicState s;
  s.counts = std::move(counts);
  for (auto c : s.counts) s.total += c;
  return s;
}

void EpidemicState::apply(std::size_t node, int delta) {
  if (node >= counts.size()) throw ValidationError("event node out of range");
  if (delta == 1) {
    ++counts[node];
    ++total;
  } else if (delta == -1) {
    if (counts[node] == 0) throw ValidationError("removal at a node with no active cases");
    --counts[node];
    --total;
  } else {
    throw ValidationError("event delta must be +1 or -1");
  }
}

bool EpidemicState::valid() const {
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum == total;
}

std::size_t TimeGrid::size() const {
  if (!(step > 0.0)) return 1;
  return static_cast<std::size_t>(std::floor(t_max / step * (1.0 + 1e-12))) + 1;
}

std::vector<double> TimeGrid::points() const {
  std::vector<double> p(size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = at(i);
  return p;
}

TimeGrid SimConfig::grid() const { return TimeGrid{t_max, grid_step > 0.0 ? grid_step : t_max / 100.0}; }

void SimConfig::validate(const LocalityGraph& g) const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be > 0");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError("t_max must be > 0");
  if (grid_step < 0.0) throw ValidationError("grid step must be >= 0");
  if (D.size() != g.node_count())
    throw ValidationError("D has " + std::to_string(D.size()) + " entries for " +
                          std::to_string(g.node_count()) + " nodes");
  if (placement == Placement::SingleRandomNode) {
    if (n0 < 1) throw ValidationError("n0 must be >= 1");
  } else {
    if (initial.size() != g.node_count()) throw ValidationError("initial vector length differs from node count");
    std::uint64_t sum = 0;
    for (auto c : initial) sum += c;
    if (sum < 1) throw ValidationError("initial vector must contain at least one case");
  }
}

NodeRates node_rates(const EpidemicState& state, const LocalityGraph& g, const DiagonalModulation& D,
                     const RateProfile& beta, const RateProfile& beta_int, double delta) {
  const auto n = g.node_count();
  if (state.counts.size() != n || D.size() != n) throw ValidationError("state, D and graph sizes differ");
  NodeRates r;
  r.birth.assign(n, 0.0);
  r.death.assign(n, 0.0);
  if (state.total == 0) return r;
  const double b = beta.value(state.total);
  const double bi = beta_int.value(state.total);
  const auto& w = g.weights();
  for (Eigen::Index u = 0; u < w.outerSize(); ++u) {
    double pressure = 0.0;
    for (SparseMatrix::InnerIterator it(w, u); it; ++it)
      pressure += it.value() * static_cast<double>(state.counts[it.col()]);
    const auto x = static_cast<double>(state.counts[u]);
    r.birth[u] = b * pressure + bi * D[u] * x;
    r.death[u] = delta * x;
    r.total += r.birth[u] + r.death[u];
  }
  return r;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng run_generator(std::uint64_t master_seed, std::uint64_t run_index) {
  return Rng(splitmix64(splitmix64(master_seed) ^ splitmix64(run_index + 0x632BE59BD9B4E019ULL)));
}

double uniform_open01(Rng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

StepEvent step(const NodeRates& rates, Rng& rng) {
  if (!(rates.total > 0.0)) throw ValidationError("step called at an absorbing state (total rate 0)");
  StepEvent ev;
  ev.dt = -std::log(uniform_open01(rng)) / rates.total;
  const double x = uniform_open01(rng) * rates.total;
  double acc = 0.0;
  std::optional<std::pair<std::size_t, int>> last;
  for (int pass = 0; pass < 2; ++pass) {
    const auto& v = pass == 0 ? rates.birth : rates.death;
    for (std::size_t u = 0; u < v.size(); ++u) {
      if (v[u] <= 0.0) continue;
      acc += v[u];
      last = {u, pass == 0 ? 1 : -1};
      if (x < acc) {
        ev.node = u;
        ev.delta = last->second;
        return ev;
      }
    }
  }
  // Rounding left x just above the accumulated sum.
  ev.node = last->first;
  ev.delta = last->second;
  return ev;
}

namespace detail {

namespace {
constexpr std::uint64_t kResyncEvents = 4096;
}

Simulator::Simulator(const SimConfig& cfg, const LocalityGraph& g)
    : cfg_(cfg), g_(g), grid_(cfg.grid()), columns_(g.node_count()) {
  cfg.validate(g);
  const auto& w = g.weights();
  for (Eigen::Index u = 0; u < w.outerSize(); ++u) {
    for (SparseMatrix::InnerIterator it(w, u); it; ++it) {
      auto& col = columns_[it.col()];
      col.rows.push_back(static_cast<std::uint32_t>(u));
      col.weights.push_back(it.value());
      col.sum += it.value();
    }
  }
}

void Simulator::resync(const std::vector<std::uint64_t>& x, std::vector<double>& p, double& sum_p,
                       double& sum_dx) const {
  const auto& w = g_.weights();
  sum_p = 0.0;
  sum_dx = 0.0;
  for (Eigen::Index u = 0; u < w.outerSize(); ++u) {
    double acc = 0.0;
    for (SparseMatrix::InnerIterator it(w, u); it; ++it) acc += it.value() * static_cast<double>(x[it.col()]);
    p[u] = acc;
    sum_p += acc;
    sum_dx += cfg_.D[u] * static_cast<double>(x[u]);
  }
}

Trajectory Simulator::run(std::uint64_t run_index) const {
  const auto n = g_.node_count();
  Rng rng = run_generator(cfg_.master_seed, cfg_.seed_policy == SeedPolicy::Shared ? 0 : run_index);

  std::vector<std::uint64_t> x(n, 0);
  if (cfg_.placement == Placement::SingleRandomNode) {
    auto node = static_cast<std::size_t>(uniform_open01(rng) * static_cast<double>(n));
    x[std::min(node, n - 1)] = cfg_.n0;
  } else {
    x = cfg_.initial;
  }

  Trajectory tr;
  tr.initial = EpidemicState::from_counts(x);
  std::uint64_t total = tr.initial.total;
  std::vector<double> p(n, 0.0);
  double sum_p = 0.0, sum_dx = 0.0;
  resync(x, p, sum_p, sum_dx);

  const std::size_t grid_size = grid_.size();
  tr.grid_totals.reserve(grid_size);
  std::size_t gi = 0;
  double t = 0.0;
  std::uint64_t since_sync = 0;

  while (true) {
    if (total == 0) {
      tr.extinct_at = t;
      break;
    }
    if (cfg_.max_events && tr.event_count >= cfg_.max_events) {
      tr.truncated_at = t;
      tr.event_cap_hit = true;
      break;
    }
    const double b = cfg_.beta.value(total);
    const double bi = cfg_.beta_int.value(total);
    const double birth_sum = std::max(0.0, b * sum_p + bi * sum_dx);
    const double rate = birth_sum + cfg_.delta * static_cast<double>(total);
    const double dt = -std::log(uniform_open01(rng)) / rate;
    if (t + dt > cfg_.t_max) {
      tr.truncated_at = cfg_.t_max;
      break;
    }
    t += dt;
    while (gi < grid_size && grid_.at(gi) < t) {
      tr.grid_totals.push_back(total);
      ++gi;
    }

    double target = uniform_open01(rng) * rate;
    std::size_t node = n;
    int delta = 0;
    if (target < birth_sum) {
      double acc = 0.0;
      for (std::size_t u = 0; u < n; ++u) {
        const double r = b * p[u] + bi * cfg_.D[u] * static_cast<double>(x[u]);
        if (r <= 0.0) continue;
        acc += r;
        node = u;
        if (target < acc) break;
      }
      delta = 1;
    }
    if (node == n) {
      target = std::max(0.0, target - birth_sum);
      double acc = 0.0;
      for (std::size_t u = 0; u < n; ++u) {
        if (x[u] == 0) continue;
        acc += cfg_.delta * static_cast<double>(x[u]);
        node = u;
        if (target < acc) break;
      }
      delta = -1;
    }

    const auto& col = columns_[node];
    const double sd = static_cast<double>(delta);
    if (delta > 0) {
      ++x[node];
      ++total;
    } else {
      --x[node];
      --total;
    }
    for (std::size_t k = 0; k < col.rows.size(); ++k) p[col.rows[k]] += sd * col.weights[k];
    sum_p += sd * col.sum;
    sum_dx += sd * cfg_.D[node];
    ++tr.event_count;
    if (cfg_.record_events) tr.events.push_back(Event{t, static_cast<std::uint32_t>(node), delta});
    if (++since_sync == kResyncEvents) {
      resync(x, p, sum_p, sum_dx);
      since_sync = 0;
    }
  }

  // Extinct runs hold 0 from here on; truncated runs hold their last total.
  tr.grid_totals.resize(grid_size, total);
  tr.final_state = EpidemicState::from_counts(std::move(x));
  return tr;
}

}  // namespace detail

Trajectory simulate_run(const SimConfig& cfg, const LocalityGraph& g, std::uint64_t run_index) {
  return detail::Simulator(cfg, g).run(run_index);
}

}  // namespace sdepi
