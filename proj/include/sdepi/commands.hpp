#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sdepi/config.hpp"
#include "sdepi/regime.hpp"

namespace sdepi {

/// Settings shared by every subcommand; command-line flags override the
/// corresponding config fields.
struct CommandContext {
  ExperimentConfig config;
  std::filesystem::path out_dir;
  unsigned threads = 0;
  std::ostream* log = nullptr;  // progress and summaries; may be null
};

/// Builds the context: --out overrides [output] dir (resolved against the
/// working directory), --seed overrides [simulation] master_seed, --threads
/// overrides [runtime] threads.
CommandContext make_context(ExperimentConfig cfg, std::optional<std::filesystem::path> out,
                            std::optional<std::uint64_t> seed, std::optional<unsigned> threads,
                            std::ostream* log);

/// classify.json: array of flat records, one per applicable method.
std::vector<RegimeReport> cmd_classify(const CommandContext& ctx);
/// trajectories.csv, summary.csv, extinctions.csv, meta.json (+ events/).
EnsembleSummary cmd_simulate(const CommandContext& ctx);
/// hitting.csv. Throws DivergenceError for chains with infinite E[T_1].
bool cmd_hitting(const CommandContext& ctx);
/// ratios.csv plus ratios.json naming the gamma behind each column.
void cmd_asymptote(const CommandContext& ctx);
/// meanfield.csv
void cmd_meanfield(const CommandContext& ctx);

/// Hash of the canonical config text, as recorded in meta.json.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace sdepi
