#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sdepi/bdchain.hpp"
#include "sdepi/graphcore.hpp"
#include "sdepi/precision.hpp"
#include "sdepi/rate_profile.hpp"
#include "sdepi/ssa.hpp"

namespace sdepi {

// INI-style experiment description. Every field has the default shown
// here; the schema with ranges is documented in docs/config.md.

struct GraphConfig {
  std::string path;
  /// "" (all nodes) | "top:K" (K heaviest by in+out weight) | "a,b,c"
  std::string subset;
  bool normalize = false;
  bool operator==(const GraphConfig&) const = default;
};

struct RatesConfig {
  std::string beta = "const:0";
  std::string beta_int = "const:0";
  /// Exact decimal curing rate. Exactly one of delta / delta_ratio is set
  /// for commands that need a delta.
  std::string delta;
  /// delta = ratio * rho(beta_inf G + beta_int_inf D)
  std::optional<double> delta_ratio;
  double eta = 1.0;
  /// "label value" lines; overrides eta when set.
  std::string d_file;
  bool operator==(const RatesConfig&) const = default;
};

struct SimulationSection {
  std::uint64_t runs = 1000;
  std::uint64_t n0 = 100;
  double t_max = 10.0;
  double grid_step = 0.0;  // 0: t_max / 100
  std::uint64_t master_seed = 1;
  /// "random" (all n0 on one uniformly chosen node) | "vector"
  std::string placement = "random";
  /// With placement = vector: "label:count,label:count"
  std::string initial;
  /// "per_run" | "shared"
  std::string seed_policy = "per_run";
  bool record_events = false;
  std::uint64_t max_events = 0;
  bool operator==(const SimulationSection&) const = default;
};

struct HittingSection {
  /// "gamma" (use `gamma` below) | "upper" | "lower" (bound chains of the graph)
  std::string chain = "gamma";
  std::string gamma;
  /// Overrides [rates] delta for the chain when set.
  std::string delta;
  std::string theta = "1";
  std::uint64_t n_max = 1000;
  std::string precision = "bigfloat";
  unsigned bits = 256;
  double tolerance = 1e-30;
  std::uint64_t max_terms = 10'000'000;
  bool operator==(const HittingSection&) const = default;
};

struct AsymptoteSection {
  /// ';'-separated gamma specs, one ratio column each.
  std::vector<std::string> gammas;
  std::string delta;
  /// Explicit n values; when empty, `points` log-spaced values in [2, n_max].
  std::vector<std::uint64_t> n_list;
  std::uint64_t n_max = 100'000;
  std::uint64_t points = 50;
  bool operator==(const AsymptoteSection&) const = default;
};

struct MeanFieldSection {
  double t_max = 10.0;
  double grid_step = 0.1;
  /// "uniform" (n0 / L per node, the mean of random placement) or
  /// "label:count,..."
  std::string initial = "uniform";
  bool operator==(const MeanFieldSection&) const = default;
};

struct OutputSection {
  std::string dir = "out";
  bool event_log = false;
  bool operator==(const OutputSection&) const = default;
};

struct ExperimentConfig {
  GraphConfig graph;
  RatesConfig rates;
  SimulationSection simulation;
  HittingSection hitting;
  AsymptoteSection asymptote;
  MeanFieldSection meanfield;
  OutputSection output;
  unsigned threads = 0;

  /// Directory that relative paths resolve against (not serialized).
  std::filesystem::path base_dir;

  static ExperimentConfig parse(const std::string& ini_text, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Canonical INI text; parse(to_ini()) reproduces the config.
  std::string to_ini() const;

  /// Range checks that do not touch the filesystem.
  void validate() const;

  bool operator==(const ExperimentConfig& o) const {
    return graph == o.graph && rates == o.rates && simulation == o.simulation && hitting == o.hitting &&
           asymptote == o.asymptote && meanfield == o.meanfield && output == o.output && threads == o.threads;
  }
};

// Resolution of config fields into model objects.
std::filesystem::path resolve_path(const ExperimentConfig& cfg, const std::string& p);
LocalityGraph load_graph(const ExperimentConfig& cfg);
DiagonalModulation load_modulation(const ExperimentConfig& cfg, const LocalityGraph& g);
RateProfile load_profile(const ExperimentConfig& cfg, const std::string& spec);
/// Explicit delta, or delta_ratio times the general spectral threshold.
ExactParam resolve_delta(const ExperimentConfig& cfg, const LocalityGraph& g, const DiagonalModulation& D);
std::vector<std::uint64_t> parse_node_counts(const std::string& spec, const LocalityGraph& g);
SimConfig make_sim_config(const ExperimentConfig& cfg, const LocalityGraph& g);
PrecisionConfig make_precision(const HittingSection& h);

}  // namespace sdepi
