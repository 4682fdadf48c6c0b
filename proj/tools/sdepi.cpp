// sdepi: regime classification, simulation and hitting-time tables for
// state-dependent epidemics on locality networks.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "sdepi/commands.hpp"
#include "sdepi/errors.hpp"
#include "sdepi/version.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kDivergent = 3, kNumeric = 4, kIo = 5 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sdepi: epidemic regimes, exact simulation and extinction-time tables"};
  app.set_version_flag("--version", sdepi::kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "experiment config (INI)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory (overrides [output] dir)");
  app.add_option("--seed", seed, "master seed (overrides [simulation] master_seed)");
  app.add_option("--threads", threads, "worker threads, 0 = all cores");

  auto* classify = app.add_subcommand("classify", "threshold classification, one record per method");
  auto* simulate = app.add_subcommand("simulate", "Gillespie ensemble with trimmed 95% envelopes");
  auto* hitting = app.add_subcommand("hitting", "E[T_n] and S_n of a birth-death chain");
  auto* asymptote = app.add_subcommand("asymptote", "delta E[T_n] / ln n for one or more gamma profiles");
  auto* meanfield = app.add_subcommand("meanfield", "linear mean-field ODE trajectory");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = sdepi::ExperimentConfig::load(config_path);
    std::optional<std::filesystem::path> out_dir;
    if (out) out_dir = *out;
    const auto ctx = sdepi::make_context(std::move(cfg), out_dir, seed, threads, &std::cerr);
    if (classify->parsed()) sdepi::cmd_classify(ctx);
    if (simulate->parsed()) sdepi::cmd_simulate(ctx);
    if (hitting->parsed()) sdepi::cmd_hitting(ctx);
    if (asymptote->parsed()) sdepi::cmd_asymptote(ctx);
    if (meanfield->parsed()) sdepi::cmd_meanfield(ctx);
  } catch (const sdepi::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "the chain sits in the below-threshold regime, so the expected extinction time is infinite\n";
    return kDivergent;
  } catch (const sdepi::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kInput;
  } catch (const sdepi::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInput;
  } catch (const sdepi::ConvergenceError& e) {
    std::cerr << "numerical error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
