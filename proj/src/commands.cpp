#include "sdepi/commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include <Eigen/Core>
#include <gmp.h>
#include <mpfr.h>
#include <json.hpp>

#include "sdepi/csv.hpp"
#include "sdepi/errors.hpp"
#include "sdepi/version.hpp"

namespace sdepi {

namespace {

using json = nlohmann::ordered_json;

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

json to_json(const RegimeReport& r) {
  json j;
  j["method"] = std::string(to_string(r.method));
  j["regime"] = std::string(to_string(r.regime));
  j["threshold"] = r.threshold;
  j["delta"] = r.delta;
  j["margin"] = r.margin;
  j["strongly_connected"] = r.strongly_connected;
  if (r.detail) {
    j["lower_threshold"] = r.detail->lower;
    j["upper_threshold"] = r.detail->upper;
  }
  return j;
}

void say(const CommandContext& ctx, const std::string& line) {
  if (ctx.log) *ctx.log << line << '\n';
}

std::vector<std::uint64_t> asymptote_points(const AsymptoteSection& a) {
  if (!a.n_list.empty()) return a.n_list;
  std::set<std::uint64_t> pts;
  const double lo = std::log(2.0), hi = std::log(static_cast<double>(a.n_max));
  for (std::uint64_t i = 0; i < a.points; ++i) {
    const double f = a.points == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(a.points - 1);
    pts.insert(static_cast<std::uint64_t>(std::llround(std::exp(lo + f * (hi - lo)))));
  }
  return {pts.begin(), pts.end()};
}

std::string chain_delta_text(const ExperimentConfig& cfg, const std::string& override_text) {
  if (!override_text.empty()) return override_text;
  if (!cfg.rates.delta.empty()) return cfg.rates.delta;
  return {};
}

BirthDeathSpec hitting_spec(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  const auto& h = cfg.hitting;
  if (h.chain == "gamma") {
    if (h.gamma.empty()) throw ValidationError("[hitting] gamma is required when chain = gamma");
    const auto delta = chain_delta_text(cfg, h.delta);
    if (delta.empty()) throw ValidationError("[hitting] needs delta (or [rates] delta)");
    return BirthDeathSpec(load_profile(cfg, h.gamma), ExactParam::parse(delta), ExactParam::parse(h.theta));
  }
  const auto g = load_graph(cfg);
  const auto D = load_modulation(cfg, g);
  const auto delta =
      h.delta.empty() ? resolve_delta(cfg, g, D) : ExactParam::parse(h.delta);
  auto [upper, lower] = bound_chains_from_graph(g, load_profile(cfg, cfg.rates.beta),
                                                load_profile(cfg, cfg.rates.beta_int), delta);
  auto& chosen = h.chain == "upper" ? upper : lower;
  return BirthDeathSpec(chosen.gamma, chosen.delta, ExactParam::parse(h.theta));
}

}  // namespace

CommandContext make_context(ExperimentConfig cfg, std::optional<std::filesystem::path> out,
                            std::optional<std::uint64_t> seed, std::optional<unsigned> threads,
                            std::ostream* log) {
  CommandContext ctx;
  if (seed) cfg.simulation.master_seed = *seed;
  if (threads) cfg.threads = *threads;
  ctx.out_dir = out ? *out : resolve_path(cfg, cfg.output.dir);
  ctx.threads = cfg.threads;
  ctx.config = std::move(cfg);
  ctx.log = log;
  std::filesystem::create_directories(ctx.out_dir);
  return ctx;
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(cfg.to_ini())); }

std::vector<RegimeReport> cmd_classify(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  const auto g = load_graph(cfg);
  const auto D = load_modulation(cfg, g);
  const double b = load_profile(cfg, cfg.rates.beta).limit_at_infinity();
  const double bi = load_profile(cfg, cfg.rates.beta_int).limit_at_infinity();
  const double delta = resolve_delta(cfg, g, D).value;

  std::vector<RegimeReport> reports;
  const auto general = classify_general(g, D, b, bi, delta);
  if (is_symmetric(g) && D.is_scalar() && D[0] == 1.0) {
    auto sym = classify_symmetric(spectral_radius(g.weights()).radius, b, bi, delta);
    sym.strongly_connected = general.strongly_connected;
    reports.push_back(sym);
  }
  reports.push_back(general);
  if (D.is_scalar()) reports.push_back(classify_scalar_D(g, D[0], b, bi, delta));
  reports.push_back(classify_decoupled(g, D, b, bi, delta));

  json arr = json::array();
  for (const auto& r : reports) {
    arr.push_back(to_json(r));
    say(ctx, to_json(r).dump());
  }
  if (!general.strongly_connected)
    say(ctx, "warning: graph is not strongly connected; threshold verdicts assume strong connectivity");
  write_json(ctx.out_dir / "classify.json", arr);
  return reports;
}

EnsembleSummary cmd_simulate(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  const auto g = load_graph(cfg);
  const auto sim = make_sim_config(cfg, g);
  say(ctx, "simulating " + std::to_string(cfg.simulation.runs) + " runs on " + std::to_string(g.node_count()) +
               " nodes, delta = " + format_double(sim.delta));
  const auto result = run_ensemble(sim, g, cfg.simulation.runs, ctx.threads);
  const auto& s = result.summary;

  CsvWriter traj(ctx.out_dir / "trajectories.csv");
  traj.header({"t", "run_id", "total"});
  for (std::size_t i = 0; i < s.time_grid.size(); ++i)
    for (std::size_t r = 0; r < result.runs.size(); ++r)
      traj.cell(s.time_grid[i]).cell(static_cast<std::uint64_t>(r)).cell(result.runs[r].grid_totals[i]).end_row();
  traj.close();

  CsvWriter sum(ctx.out_dir / "summary.csv");
  sum.header({"t", "mean", "lower95", "upper95", "survival_fraction"});
  for (std::size_t i = 0; i < s.time_grid.size(); ++i)
    sum.cell(s.time_grid[i]).cell(s.mean_total[i]).cell(s.lower95[i]).cell(s.upper95[i])
        .cell(s.survival_fraction[i]).end_row();
  sum.close();

  CsvWriter ext(ctx.out_dir / "extinctions.csv");
  ext.header({"run_id", "t_extinct"});
  for (const auto& [run, t] : s.extinction_times) ext.cell(run).cell(t).end_row();
  ext.close();

  if (sim.record_events) {
    const auto dir = ctx.out_dir / "events";
    std::filesystem::create_directories(dir);
    for (std::size_t r = 0; r < result.runs.size(); ++r) {
      CsvWriter ev(dir / ("run_" + std::to_string(r) + ".csv"));
      ev.header({"t", "node_label", "delta"});
      for (const auto& e : result.runs[r].events)
        ev.cell(e.t).cell(g.labels()[e.node]).cell(e.delta > 0 ? "+1" : "-1").end_row();
      ev.close();
    }
  }

  std::uint64_t capped = 0;
  for (const auto& r : result.runs) capped += r.event_cap_hit ? 1 : 0;
  json meta;
  meta["tool"] = "sdepi";
  meta["version"] = kVersion;
  meta["config_hash"] = config_hash(cfg);
  meta["master_seed"] = cfg.simulation.master_seed;
  meta["runs"] = cfg.simulation.runs;
  meta["delta"] = sim.delta;
  meta["nodes"] = g.node_count();
  meta["extinct_runs"] = s.extinction_times.size();
  meta["event_cap_hits"] = capped;
  meta["trimmed_per_side"] = s.trimmed_per_side;
  if (s.extinction_interval) {
    meta["extinction_interval95"] = {s.extinction_interval->first, s.extinction_interval->second};
  }
  meta["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                     "." + std::to_string(EIGEN_MINOR_VERSION)},
                       {"gmp", gmp_version},
                       {"mpfr", mpfr_get_version()}};
  write_json(ctx.out_dir / "meta.json", meta);
  say(ctx, std::to_string(s.extinction_times.size()) + " of " + std::to_string(s.run_count) + " runs went extinct");
  return s;
}

bool cmd_hitting(const CommandContext& ctx) {
  const auto spec = hitting_spec(ctx);
  const auto precision = make_precision(ctx.config.hitting);
  say(ctx, positive_recurrence_check(spec).diagnostic);
  const int digits = precision.output_digits();
  CsvWriter csv(ctx.out_dir / "hitting.csv");
  csv.header({"n", "S_n", "T_n", "certified"});
  bool all = true;
  for_each_increment(
      spec, ctx.config.hitting.n_max, precision,
      [&](std::uint64_t n, const PreciseValue& s, const PreciseValue& t, bool ok) {
        csv.cell(n).cell(s.to_string(digits)).cell(t.to_string(digits)).cell(ok ? "true" : "false").end_row();
        all = all && ok;
      },
      ctx.threads == 0 ? 1 : ctx.threads);
  csv.close();
  say(ctx, std::string("hitting table ") + (all ? "certified" : "NOT certified") + " at relative tolerance " +
               format_double(precision.series_rel_tol));
  return all;
}

void cmd_asymptote(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  const auto& a = cfg.asymptote;
  if (a.gammas.empty()) throw ValidationError("[asymptote] gammas is empty");
  const auto delta_text = chain_delta_text(cfg, a.delta);
  if (delta_text.empty()) throw ValidationError("[asymptote] needs delta (or [rates] delta)");
  const auto delta = ExactParam::parse(delta_text);
  const auto precision = make_precision(cfg.hitting);
  const auto points = asymptote_points(a);

  std::vector<std::vector<AsymptotePoint>> columns;
  json names = json::object();
  std::vector<std::string> header{"n"};
  for (std::size_t i = 0; i < a.gammas.size(); ++i) {
    say(ctx, "asymptote for gamma = " + a.gammas[i]);
    columns.push_back(asymptote_ratio(BirthDeathSpec(load_profile(cfg, a.gammas[i]), delta), points, precision,
                                      ctx.threads == 0 ? 1 : ctx.threads));
    const auto column = a.gammas.size() == 1 ? std::string("ratio") : "ratio_" + std::to_string(i + 1);
    names[column] = a.gammas[i];
    header.push_back(column);
  }
  CsvWriter csv(ctx.out_dir / "ratios.csv");
  csv.header(header);
  for (std::size_t row = 0; row < columns.front().size(); ++row) {
    csv.cell(columns.front()[row].n);
    for (const auto& col : columns) csv.cell(col[row].ratio);
    csv.end_row();
  }
  csv.close();
  write_json(ctx.out_dir / "ratios.json", json{{"delta", delta.text}, {"columns", names}});
}

void cmd_meanfield(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  const auto g = load_graph(cfg);
  const auto D = load_modulation(cfg, g);
  const auto delta = resolve_delta(cfg, g, D).value;
  const auto n = g.node_count();
  Vector x0(static_cast<Eigen::Index>(n));
  if (cfg.meanfield.initial == "uniform") {
    x0.setConstant(static_cast<double>(cfg.simulation.n0) / static_cast<double>(n));
  } else {
    const auto counts = parse_node_counts(cfg.meanfield.initial, g);
    for (std::size_t u = 0; u < n; ++u) x0[static_cast<Eigen::Index>(u)] = static_cast<double>(counts[u]);
  }
  const TimeGrid grid{cfg.meanfield.t_max, cfg.meanfield.grid_step};
  const auto traj = mean_field_trajectory(g, load_profile(cfg, cfg.rates.beta), load_profile(cfg, cfg.rates.beta_int),
                                          delta, x0, grid, D);
  CsvWriter csv(ctx.out_dir / "meanfield.csv");
  std::vector<std::string> header{"t"};
  for (const auto& l : g.labels()) header.push_back(l);
  header.push_back("total");
  csv.header(header);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    csv.cell(grid.at(i));
    for (Eigen::Index u = 0; u < traj[i].size(); ++u) csv.cell(traj[i][u]);
    csv.cell(traj[i].sum()).end_row();
  }
  csv.close();
}

}  // namespace sdepi
