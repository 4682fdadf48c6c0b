#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "sdepi/errors.hpp"
#include "sdepi/ssa.hpp"
#include "ssa_engine.hpp"

namespace sdepi {

namespace {

unsigned resolve_threads(unsigned threads, std::uint64_t jobs) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(jobs, 1)));
}

// Runs f(i) for i in [0, jobs) over a small pool; f writes to slot i only.
template <class F>
void parallel_for(std::uint64_t jobs, unsigned threads, F&& f) {
  const unsigned workers = resolve_threads(threads, jobs);
  if (workers == 1) {
    for (std::uint64_t i = 0; i < jobs; ++i) f(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (auto i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) f(i);
    });
  for (auto& t : pool) t.join();
}

std::pair<double, double> trimmed_interval(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto k = trim_count(v.size());
  return {v[k], v[v.size() - 1 - k]};
}

}  // namespace

EnsembleSummary summarize(const std::vector<Trajectory>& runs, const TimeGrid& grid, std::uint64_t seed) {
  EnsembleSummary s;
  s.run_count = runs.size();
  s.seed = seed;
  s.trimmed_per_side = trim_count(runs.size());
  s.time_grid = grid.points();
  const auto points = s.time_grid.size();
  const auto r = static_cast<double>(runs.size());
  std::vector<double> column(runs.size());
  for (std::size_t i = 0; i < points; ++i) {
    double sum = 0.0, alive = 0.0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      column[k] = static_cast<double>(runs[k].grid_totals.at(i));
      sum += column[k];
      alive += column[k] > 0.0 ? 1.0 : 0.0;
    }
    const double mean = sum / r;
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    s.mean_total.push_back(mean);
    s.stderr_total.push_back(runs.size() > 1 ? std::sqrt(ss / (r - 1.0) / r) : 0.0);
    auto [lo, hi] = trimmed_interval(column);
    s.lower95.push_back(lo);
    s.upper95.push_back(hi);
    s.survival_fraction.push_back(alive / r);
  }
  std::vector<double> times;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (runs[k].extinct_at) {
      s.extinction_times.emplace_back(k, *runs[k].extinct_at);
      times.push_back(*runs[k].extinct_at);
    }
  }
  if (!runs.empty() && times.size() == runs.size()) s.extinction_interval = trimmed_interval(times);
  return s;
}

EnsembleResult run_ensemble(const SimConfig& cfg, const LocalityGraph& g, std::uint64_t runs, unsigned threads) {
  if (runs < 40) throw ValidationError("ensembles need at least 40 runs for the 2.5% trimming to be meaningful");
  const detail::Simulator sim(cfg, g);
  EnsembleResult out;
  out.runs.resize(runs);
  parallel_for(runs, threads, [&](std::uint64_t i) { out.runs[i] = sim.run(i); });
  out.summary = summarize(out.runs, cfg.grid(), cfg.master_seed);
  return out;
}

SurvivalEstimate estimate_survival_probability(const SimConfig& cfg, const LocalityGraph& g, std::uint64_t runs,
                                               double horizon, unsigned threads) {
  if (!(horizon > 0.0) || horizon > cfg.t_max) throw ValidationError("horizon must lie in (0, t_max]");
  if (runs == 0) throw ValidationError("need at least one run");
  SimConfig local = cfg;
  local.t_max = horizon;
  local.grid_step = horizon;
  local.record_events = false;
  const detail::Simulator sim(local, g);
  std::vector<char> alive(runs, 0);
  parallel_for(runs, threads, [&](std::uint64_t i) { alive[i] = sim.run(i).extinct_at ? 0 : 1; });
  SurvivalEstimate est;
  est.runs = runs;
  const double r = static_cast<double>(runs);
  est.probability = static_cast<double>(std::count(alive.begin(), alive.end(), 1)) / r;
  est.standard_error = std::sqrt(est.probability * (1.0 - est.probability) / r);
  return est;
}

}  // namespace sdepi
