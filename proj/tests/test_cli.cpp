#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>
#include <sys/wait.h>
#include <sstream>

#include <json.hpp>

#include "sdepi/commands.hpp"
#include "sdepi/errors.hpp"

using namespace sdepi;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("sdepi_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Symmetric triangle, lambda_r = 2.
constexpr const char* kTriangle = "a b 1\nb a 1\nb c 1\nc b 1\na c 1\nc a 1\n";

std::string base_config(const std::string& extra) {
  return "[graph]\npath = tri.edges\n\n[rates]\nbeta = const:1\nbeta_int = const:0.5\n" + extra;
}

CommandContext context(const fs::path& dir, const std::string& ini, std::optional<std::uint64_t> seed = {}) {
  auto cfg = ExperimentConfig::parse(ini, dir);
  return make_context(std::move(cfg), dir / "out", seed, 2u, nullptr);
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(SDEPI_BIN) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config round trip and defaults") {
  const auto d = ExperimentConfig::parse("");
  CHECK(d.simulation.runs == 1000);
  CHECK(d.simulation.n0 == 100);
  CHECK(d.hitting.bits == 256);
  CHECK(d.output.dir == "out");
  CHECK(ExperimentConfig::parse(d.to_ini()) == d);

  const std::string ini =
      "[graph]\npath = g.edges\nsubset = top:5\nnormalize = true\n"
      "[rates]\nbeta = step:2,0.5,100\nbeta_int = harmonic:3\ndelta_ratio = 0.9\neta = 1.5\n"
      "[simulation]\nruns = 200\nn0 = 7\nt_max = 12.5\ngrid_step = 0.5\nmaster_seed = 99\n"
      "placement = vector\ninitial = a:3,b:4\nseed_policy = shared\nrecord_events = true\nmax_events = 10\n"
      "[hitting]\nchain = upper\ntheta = 2\nn_max = 30\nprecision = exact\nbits = 128\ntolerance = 1e-20\n"
      "[asymptote]\ngammas = harmonic:2;logn:2\ndelta = 1\nn_list = 2,10,100\n"
      "[meanfield]\nt_max = 3\ngrid_step = 0.25\ninitial = a:1\n"
      "[output]\ndir = results\nevent_log = true\n[runtime]\nthreads = 3\n";
  const auto c = ExperimentConfig::parse(ini);
  CHECK(c.rates.delta_ratio == 0.9);
  CHECK(c.asymptote.gammas == std::vector<std::string>{"harmonic:2", "logn:2"});
  CHECK(c.asymptote.n_list == std::vector<std::uint64_t>{2, 10, 100});
  CHECK(c.threads == 3);
  const auto again = ExperimentConfig::parse(c.to_ini());
  CHECK(again == c);
  CHECK(again.to_ini() == c.to_ini());
  CHECK(config_hash(again) == config_hash(c));
  auto other = c;
  other.simulation.runs = 201;
  CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(ExperimentConfig::parse("[graph]\npaht = x\n"), ParseError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[grpah]\npath = x\n"), ParseError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[simulation]\nruns = many\n"), ParseError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[simulation]\nt_max = -1\n"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[rates]\ndelta = 1\ndelta_ratio = 0.5\n"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[simulation]\nplacement = vector\n"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[hitting]\nchain = middle\n"), ValidationError);
}

TEST_CASE("classify records") {
  TempDir t("classify");
  write(t.path / "tri.edges", kTriangle);
  for (double ratio : {1.1, 0.9}) {
    const auto ctx = context(t.path, base_config("delta_ratio = " + std::to_string(ratio) + "\n"));
    const auto reports = cmd_classify(ctx);
    const auto j = nlohmann::json::parse(slurp(ctx.out_dir / "classify.json"));
    REQUIRE(j.size() == reports.size());
    std::set<std::string> methods;
    for (const auto& r : j) {
      methods.insert(r["method"].get<std::string>());
      CHECK(r["regime"] == (ratio > 1 ? "FastExtinction" : "LongLasting"));
      CHECK(r["delta"].get<double>() == doctest::Approx(2.5 * ratio).epsilon(1e-12));
      CHECK(r["strongly_connected"] == true);
    }
    CHECK(methods == std::set<std::string>{"SymmetricSpectral", "GeneralSpectral", "ScalarD", "DecoupledWeyl"});
  }

  // A directed 3-cycle with unequal weights: the Weyl bounds leave a gap.
  write(t.path / "dir.edges", "a b 2\nb c 1\nc a 0.5\n");
  const auto ctx = context(t.path,
                           "[graph]\npath = dir.edges\n[rates]\nbeta = const:1\nbeta_int = const:0\ndelta = 1.0001\n");
  const auto reports = cmd_classify(ctx);
  const auto j = nlohmann::json::parse(slurp(ctx.out_dir / "classify.json"));
  bool saw_gap = false;
  for (const auto& r : j) {
    CHECK(r["method"] != "SymmetricSpectral");
    if (r["method"] == "DecoupledWeyl") {
      saw_gap = true;
      CHECK(r["regime"] == "Indeterminate");
      CHECK(r["lower_threshold"].get<double>() < 1.0);
      CHECK(r["upper_threshold"].get<double>() > 1.0001);
    }
    if (r["method"] == "GeneralSpectral") CHECK(r["regime"] == "FastExtinction");
  }
  CHECK(saw_gap);
}

TEST_CASE("simulate is deterministic and complete") {
  TempDir t("simulate");
  write(t.path / "tri.edges", kTriangle);
  const std::string ini = base_config(
      "delta_ratio = 1.5\n[simulation]\nruns = 40\nn0 = 5\nt_max = 20\ngrid_step = 1\nmaster_seed = 11\n"
      "[output]\nevent_log = true\n");
  const auto ctx = context(t.path, ini);
  const auto s = cmd_simulate(ctx);
  CHECK(s.run_count == 40);
  const auto first = slurp(ctx.out_dir / "trajectories.csv");
  const auto first_summary = slurp(ctx.out_dir / "summary.csv");
  CHECK(first.rfind("t,run_id,total\n", 0) == 0);
  CHECK(first_summary.rfind("t,mean,lower95,upper95,survival_fraction\n", 0) == 0);
  CHECK(fs::exists(ctx.out_dir / "extinctions.csv"));
  CHECK(fs::exists(ctx.out_dir / "events" / "run_0.csv"));
  const auto meta = nlohmann::json::parse(slurp(ctx.out_dir / "meta.json"));
  CHECK(meta["master_seed"] == 11);
  CHECK(meta["runs"] == 40);
  CHECK(meta["config_hash"] == config_hash(ctx.config));

  cmd_simulate(context(t.path, ini));
  CHECK(slurp(ctx.out_dir / "trajectories.csv") == first);
  CHECK(slurp(ctx.out_dir / "summary.csv") == first_summary);

  cmd_simulate(context(t.path, ini, 12));
  CHECK(slurp(ctx.out_dir / "trajectories.csv") != first);
}

TEST_CASE("hitting, asymptote and meanfield outputs") {
  TempDir t("hitting");
  write(t.path / "tri.edges", kTriangle);
  auto ctx = context(t.path, base_config("delta = 1\n[hitting]\ngamma = harmonic:2\nn_max = 20\n"));
  CHECK(cmd_hitting(ctx));
  const auto text = slurp(ctx.out_dir / "hitting.csv");
  CHECK(text.rfind("n,S_n,T_n,certified\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 21);

  ctx = context(t.path, base_config("delta = 1\n[hitting]\ngamma = const:1.5\n"));
  CHECK_THROWS_AS(cmd_hitting(ctx), DivergenceError);

  ctx = context(t.path, base_config("delta = 1\n[asymptote]\ngammas = const:0;harmonic:2\nn_list = 2,10,1000\n"));
  cmd_asymptote(ctx);
  const auto ratios = slurp(ctx.out_dir / "ratios.csv");
  CHECK(ratios.rfind("n,ratio_1,ratio_2\n", 0) == 0);
  const auto names = nlohmann::json::parse(slurp(ctx.out_dir / "ratios.json"));
  CHECK(names["columns"]["ratio_2"] == "harmonic:2");

  ctx = context(t.path, base_config("delta = 3\n[meanfield]\nt_max = 1\ngrid_step = 0.5\n"));
  cmd_meanfield(ctx);
  const auto mf = slurp(ctx.out_dir / "meanfield.csv");
  CHECK(mf.rfind("t,a,b,c,total\n", 0) == 0);
  CHECK(std::count(mf.begin(), mf.end(), '\n') == 4);
}

TEST_CASE("exit codes of the binary") {
  TempDir t("exit");
  write(t.path / "tri.edges", kTriangle);
  const auto good = t.path / "good.ini";
  write(good, base_config("delta = 1\n[hitting]\ngamma = harmonic:1\nn_max = 5\n"));
  const auto out = " --out " + (t.path / "o").string();
  CHECK(run_cli("--config " + good.string() + out + " hitting") == 0);
  CHECK(run_cli("--config " + good.string() + out + " classify") == 0);
  CHECK(fs::exists(t.path / "o" / "classify.json"));

  const auto bad_key = t.path / "bad.ini";
  write(bad_key, "[graph]\nweight = 2\n");
  CHECK(run_cli("--config " + bad_key.string() + out + " classify") == 2);

  const auto divergent = t.path / "div.ini";
  write(divergent, base_config("delta = 1\n[hitting]\ngamma = const:2\n"));
  CHECK(run_cli("--config " + divergent.string() + out + " hitting") == 3);

  CHECK(run_cli("--config " + (t.path / "missing.ini").string() + " classify") != 0);
  CHECK(run_cli("--config " + good.string()) != 0);
}
