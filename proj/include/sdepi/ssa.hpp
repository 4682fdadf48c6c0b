#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "sdepi/graphcore.hpp"
#include "sdepi/rate_profile.hpp"

namespace sdepi {

struct EpidemicState {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  static EpidemicState from_counts(std::vector<std::uint64_t> counts);
  /// Adds +1 or -1 at `node`; refuses to go negative.
  void apply(std::size_t node, int delta);
  bool valid() const;
};

struct Event {
  double t = 0.0;
  std::uint32_t node = 0;
  int delta = 0;
};

/// Output sample times 0, step, 2 step, ... up to t_max inclusive.
struct TimeGrid {
  double t_max = 0.0;
  double step = 0.0;

  std::size_t size() const;
  double at(std::size_t i) const { return static_cast<double>(i) * step; }
  std::vector<double> points() const;
};

struct Trajectory {
  EpidemicState initial;
  EpidemicState final_state;
  /// Full event log; empty unless SimConfig::record_events.
  std::vector<Event> events;
  std::uint64_t event_count = 0;
  /// Total at each grid time (state just before the first event past it).
  std::vector<std::uint64_t> grid_totals;
  std::optional<double> extinct_at;
  std::optional<double> truncated_at;
  bool event_cap_hit = false;
};

enum class Placement { SingleRandomNode, GivenVector };
/// PerRun derives one generator per run index; Shared gives every run
/// the same stream (identical runs, useful for degenerate checks).
enum class SeedPolicy { PerRun, Shared };

struct SimConfig {
  RateProfile beta = RateProfile::constant(0.0);
  RateProfile beta_int = RateProfile::constant(0.0);
  DiagonalModulation D{std::vector<double>{1.0}};
  double delta = 1.0;
  double t_max = 1.0;
  std::uint64_t n0 = 1;
  Placement placement = Placement::SingleRandomNode;
  std::vector<std::uint64_t> initial;  // used with GivenVector
  std::uint64_t master_seed = 0;
  SeedPolicy seed_policy = SeedPolicy::PerRun;
  double grid_step = 0.0;  // 0: t_max / 100
  bool record_events = false;
  std::uint64_t max_events = 0;  // 0: unlimited

  TimeGrid grid() const;
  void validate(const LocalityGraph& g) const;
};

struct NodeRates {
  std::vector<double> birth;
  std::vector<double> death;
  double total = 0.0;
};

/// birth_u = [(beta(n) G + beta_int(n) D) X]_u, death_u = delta X_u.
NodeRates node_rates(const EpidemicState& state, const LocalityGraph& g, const DiagonalModulation& D,
                     const RateProfile& beta, const RateProfile& beta_int, double delta);

using Rng = std::mt19937_64;

/// Generator for run `run_index` under `master_seed` (splitmix64 mixing).
Rng run_generator(std::uint64_t master_seed, std::uint64_t run_index);
/// Uniform double in the open interval (0, 1) from 53 random bits.
double uniform_open01(Rng& rng);

struct StepEvent {
  double dt = 0.0;
  std::size_t node = 0;
  int delta = 0;
};

/// One Gillespie draw from explicit rates. Throws at an absorbing state.
StepEvent step(const NodeRates& rates, Rng& rng);

Trajectory simulate_run(const SimConfig& cfg, const LocalityGraph& g, std::uint64_t run_index);

struct EnsembleSummary {
  std::vector<double> time_grid;
  std::vector<double> mean_total;
  std::vector<double> stderr_total;
  std::vector<double> lower95;
  std::vector<double> upper95;
  std::vector<double> survival_fraction;
  /// (run index, extinction time) for extinct runs, ordered by run index.
  std::vector<std::pair<std::uint64_t, double>> extinction_times;
  /// Trimmed 95% interval of extinction times; set only when every run
  /// went extinct.
  std::optional<std::pair<double, double>> extinction_interval;
  std::uint64_t run_count = 0;
  std::uint64_t seed = 0;
  std::uint64_t trimmed_per_side = 0;
};

struct EnsembleResult {
  EnsembleSummary summary;
  std::vector<Trajectory> runs;
};

/// Number of runs dropped from each end before taking the envelope.
inline std::uint64_t trim_count(std::uint64_t runs) { return runs * 25 / 1000; }

/// Runs 0..runs-1 concurrently (threads = 0: hardware concurrency).
/// Requires runs >= 40.
EnsembleResult run_ensemble(const SimConfig& cfg, const LocalityGraph& g, std::uint64_t runs,
                            unsigned threads = 0);

/// Aggregates per-run grid totals; exposed for reuse on externally
/// produced runs.
EnsembleSummary summarize(const std::vector<Trajectory>& runs, const TimeGrid& grid, std::uint64_t seed);

struct SurvivalEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::uint64_t runs = 0;
};

SurvivalEstimate estimate_survival_probability(const SimConfig& cfg, const LocalityGraph& g,
                                               std::uint64_t runs, double horizon, unsigned threads = 0);

/// Integrates dE[X]/dt = (beta G + beta_int D - delta I) E[X] with RK4 and
/// returns E[X] at each grid point. D defaults to the identity.
std::vector<Vector> mean_field_trajectory(const LocalityGraph& g, double beta, double beta_int, double delta,
                                          const Vector& x0, const TimeGrid& grid,
                                          const std::optional<DiagonalModulation>& D = std::nullopt);

/// Profile-checked entry point: both profiles must be constant.
std::vector<Vector> mean_field_trajectory(const LocalityGraph& g, const RateProfile& beta,
                                          const RateProfile& beta_int, double delta, const Vector& x0,
                                          const TimeGrid& grid,
                                          const std::optional<DiagonalModulation>& D = std::nullopt);

}  // namespace sdepi
