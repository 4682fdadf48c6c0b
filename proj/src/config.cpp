#include "sdepi/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sdepi/csv.hpp"
#include "sdepi/errors.hpp"
#include "sdepi/regime.hpp"

namespace sdepi {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::uint64_t to_u64(const std::string& text, const std::string& key) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end) throw ParseError(key + ": expected a nonnegative integer, got '" + text + "'");
  return v;
}

double to_double(const std::string& text, const std::string& key) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end) throw ParseError(key + ": expected a number, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParseError(key + ": expected true/false, got '" + text + "'");
}

// Reads one section, rejecting keys the schema does not know.
class Section {
 public:
  Section(const pt::ptree& root, const std::string& name, std::set<std::string> known) : name_(name) {
    if (auto child = root.get_child_optional(name)) {
      for (const auto& [k, v] : *child) {
        if (!known.count(k)) throw ParseError("unknown key [" + name + "] " + k);
        if (!v.empty()) throw ParseError("[" + name + "] " + k + " must be a plain value");
        values_[k] = trim(v.data());
      }
    }
  }

  template <class F>
  void read(const std::string& key, F&& assign) const {
    auto it = values_.find(key);
    if (it != values_.end()) assign(it->second, "[" + name_ + "] " + key);
  }
  void str(const std::string& key, std::string& out) const {
    read(key, [&](const std::string& v, const std::string&) { out = v; });
  }
  void u64(const std::string& key, std::uint64_t& out) const {
    read(key, [&](const std::string& v, const std::string& k) { out = to_u64(v, k); });
  }
  void uint(const std::string& key, unsigned& out) const {
    read(key, [&](const std::string& v, const std::string& k) {
      const auto x = to_u64(v, k);
      if (x > 0xFFFFFFFFULL) throw ParseError(k + ": value too large");
      out = static_cast<unsigned>(x);
    });
  }
  void real(const std::string& key, double& out) const {
    read(key, [&](const std::string& v, const std::string& k) { out = to_double(v, k); });
  }
  void flag(const std::string& key, bool& out) const {
    read(key, [&](const std::string& v, const std::string& k) { out = to_bool(v, k); });
  }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
};

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& ini_text, const std::filesystem::path& base_dir) {
  pt::ptree root;
  std::istringstream in(ini_text);
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  static const std::set<std::string> sections = {"graph",     "rates",     "simulation", "hitting",
                                                 "asymptote", "meanfield", "output",     "runtime"};
  for (const auto& [k, v] : root)
    if (!sections.count(k) || v.empty()) throw ParseError("unknown section or top-level key '" + k + "'");

  ExperimentConfig c;
  c.base_dir = base_dir;

  Section g(root, "graph", {"path", "subset", "normalize"});
  g.str("path", c.graph.path);
  g.str("subset", c.graph.subset);
  g.flag("normalize", c.graph.normalize);

  Section r(root, "rates", {"beta", "beta_int", "delta", "delta_ratio", "eta", "d_file"});
  r.str("beta", c.rates.beta);
  r.str("beta_int", c.rates.beta_int);
  r.str("delta", c.rates.delta);
  r.read("delta_ratio", [&](const std::string& v, const std::string& k) { c.rates.delta_ratio = to_double(v, k); });
  r.real("eta", c.rates.eta);
  r.str("d_file", c.rates.d_file);

  Section s(root, "simulation",
            {"runs", "n0", "t_max", "grid_step", "master_seed", "placement", "initial", "seed_policy",
             "record_events", "max_events"});
  s.u64("runs", c.simulation.runs);
  s.u64("n0", c.simulation.n0);
  s.real("t_max", c.simulation.t_max);
  s.real("grid_step", c.simulation.grid_step);
  s.u64("master_seed", c.simulation.master_seed);
  s.str("placement", c.simulation.placement);
  s.str("initial", c.simulation.initial);
  s.str("seed_policy", c.simulation.seed_policy);
  s.flag("record_events", c.simulation.record_events);
  s.u64("max_events", c.simulation.max_events);

  Section h(root, "hitting",
            {"chain", "gamma", "delta", "theta", "n_max", "precision", "bits", "tolerance", "max_terms"});
  h.str("chain", c.hitting.chain);
  h.str("gamma", c.hitting.gamma);
  h.str("delta", c.hitting.delta);
  h.str("theta", c.hitting.theta);
  h.u64("n_max", c.hitting.n_max);
  h.str("precision", c.hitting.precision);
  h.uint("bits", c.hitting.bits);
  h.real("tolerance", c.hitting.tolerance);
  h.u64("max_terms", c.hitting.max_terms);

  Section a(root, "asymptote", {"gammas", "delta", "n_list", "n_max", "points"});
  a.read("gammas", [&](const std::string& v, const std::string&) { c.asymptote.gammas = split(v, ';'); });
  a.str("delta", c.asymptote.delta);
  a.read("n_list", [&](const std::string& v, const std::string& k) {
    c.asymptote.n_list.clear();
    for (const auto& part : split(v, ',')) c.asymptote.n_list.push_back(to_u64(part, k));
  });
  a.u64("n_max", c.asymptote.n_max);
  a.u64("points", c.asymptote.points);

  Section m(root, "meanfield", {"t_max", "grid_step", "initial"});
  m.real("t_max", c.meanfield.t_max);
  m.real("grid_step", c.meanfield.grid_step);
  m.str("initial", c.meanfield.initial);

  Section o(root, "output", {"dir", "event_log"});
  o.str("dir", c.output.dir);
  o.flag("event_log", c.output.event_log);

  Section rt(root, "runtime", {"threads"});
  rt.uint("threads", c.threads);

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

std::string ExperimentConfig::to_ini() const {
  pt::ptree root;
  auto put = [&](const std::string& path, const std::string& v) { root.put(pt::ptree::path_type(path, '/'), v); };
  put("graph/path", graph.path);
  put("graph/subset", graph.subset);
  put("graph/normalize", bool_text(graph.normalize));
  put("rates/beta", rates.beta);
  put("rates/beta_int", rates.beta_int);
  put("rates/delta", rates.delta);
  if (rates.delta_ratio) put("rates/delta_ratio", format_double(*rates.delta_ratio));
  put("rates/eta", format_double(rates.eta));
  put("rates/d_file", rates.d_file);
  put("simulation/runs", std::to_string(simulation.runs));
  put("simulation/n0", std::to_string(simulation.n0));
  put("simulation/t_max", format_double(simulation.t_max));
  put("simulation/grid_step", format_double(simulation.grid_step));
  put("simulation/master_seed", std::to_string(simulation.master_seed));
  put("simulation/placement", simulation.placement);
  put("simulation/initial", simulation.initial);
  put("simulation/seed_policy", simulation.seed_policy);
  put("simulation/record_events", bool_text(simulation.record_events));
  put("simulation/max_events", std::to_string(simulation.max_events));
  put("hitting/chain", hitting.chain);
  put("hitting/gamma", hitting.gamma);
  put("hitting/delta", hitting.delta);
  put("hitting/theta", hitting.theta);
  put("hitting/n_max", std::to_string(hitting.n_max));
  put("hitting/precision", hitting.precision);
  put("hitting/bits", std::to_string(hitting.bits));
  put("hitting/tolerance", format_double(hitting.tolerance));
  put("hitting/max_terms", std::to_string(hitting.max_terms));
  put("asymptote/gammas", join(asymptote.gammas, ';'));
  put("asymptote/delta", asymptote.delta);
  std::vector<std::string> ns;
  for (auto n : asymptote.n_list) ns.push_back(std::to_string(n));
  put("asymptote/n_list", join(ns, ','));
  put("asymptote/n_max", std::to_string(asymptote.n_max));
  put("asymptote/points", std::to_string(asymptote.points));
  put("meanfield/t_max", format_double(meanfield.t_max));
  put("meanfield/grid_step", format_double(meanfield.grid_step));
  put("meanfield/initial", meanfield.initial);
  put("output/dir", output.dir);
  put("output/event_log", bool_text(output.event_log));
  put("runtime/threads", std::to_string(threads));
  std::ostringstream out;
  pt::write_ini(out, root);
  return out.str();
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError(m); };
  if (rates.delta_ratio && !(*rates.delta_ratio > 0.0)) fail("[rates] delta_ratio must be > 0");
  if (rates.delta_ratio && !rates.delta.empty()) fail("[rates] set delta or delta_ratio, not both");
  if (!(rates.eta > 0.0)) fail("[rates] eta must be > 0");
  if (!(simulation.t_max > 0.0)) fail("[simulation] t_max must be > 0");
  if (simulation.grid_step < 0.0) fail("[simulation] grid_step must be >= 0");
  if (simulation.n0 < 1) fail("[simulation] n0 must be >= 1");
  if (simulation.placement != "random" && simulation.placement != "vector")
    fail("[simulation] placement must be random or vector");
  if (simulation.placement == "vector" && simulation.initial.empty())
    fail("[simulation] placement = vector needs initial");
  if (simulation.seed_policy != "per_run" && simulation.seed_policy != "shared")
    fail("[simulation] seed_policy must be per_run or shared");
  if (hitting.chain != "gamma" && hitting.chain != "upper" && hitting.chain != "lower")
    fail("[hitting] chain must be gamma, upper or lower");
  if (hitting.n_max < 1) fail("[hitting] n_max must be >= 1");
  make_precision(hitting).validate();
  if (asymptote.n_max < 2) fail("[asymptote] n_max must be >= 2");
  if (asymptote.points < 1) fail("[asymptote] points must be >= 1");
  for (auto n : asymptote.n_list)
    if (n < 2) fail("[asymptote] n_list entries must be >= 2");
  if (!(meanfield.t_max > 0.0) || !(meanfield.grid_step > 0.0))
    fail("[meanfield] t_max and grid_step must be > 0");
}

std::filesystem::path resolve_path(const ExperimentConfig& cfg, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !cfg.base_dir.empty()) path = cfg.base_dir / path;
  return path;
}

LocalityGraph load_graph(const ExperimentConfig& cfg) {
  if (cfg.graph.path.empty()) throw ValidationError("[graph] path is required");
  auto g = load_edge_list_file(resolve_path(cfg, cfg.graph.path));
  const auto& subset = cfg.graph.subset;
  if (!subset.empty()) {
    std::vector<std::size_t> nodes;
    if (subset.rfind("top:", 0) == 0) {
      const auto k = to_u64(subset.substr(4), "[graph] subset");
      if (k < 1 || k > g.node_count())
        throw ValidationError("[graph] subset top:" + std::to_string(k) + " outside 1.." +
                              std::to_string(g.node_count()));
      nodes = top_nodes_by_weight(g, k);
    } else {
      for (const auto& label : split(subset, ',')) {
        auto idx = g.index_of(label);
        if (!idx) throw ValidationError("[graph] subset: unknown node '" + label + "'");
        nodes.push_back(*idx);
      }
    }
    g = g.subgraph(nodes);
  }
  if (cfg.graph.normalize) g = normalize_mean_column_weight(g);
  return g;
}

DiagonalModulation load_modulation(const ExperimentConfig& cfg, const LocalityGraph& g) {
  if (cfg.rates.d_file.empty()) return DiagonalModulation::scalar(g.node_count(), cfg.rates.eta);
  const auto path = resolve_path(cfg, cfg.rates.d_file);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open D file '" + path.string() + "'");
  std::vector<double> values(g.node_count(), 0.0);
  std::vector<bool> seen(g.node_count(), false);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    std::istringstream fields(trim(line.substr(0, hash)));
    std::string label, value, extra;
    if (!(fields >> label)) continue;
    if (!(fields >> value) || (fields >> extra)) throw ParseError("expected 'label value'", lineno);
    auto idx = g.index_of(label);
    if (!idx) continue;  // nodes outside the selected subset
    if (seen[*idx]) throw ValidationError("D file: duplicate entry for '" + label + "'");
    values[*idx] = to_double(value, "D file line " + std::to_string(lineno));
    seen[*idx] = true;
  }
  for (std::size_t u = 0; u < seen.size(); ++u)
    if (!seen[u]) throw ValidationError("D file has no entry for node '" + g.labels()[u] + "'");
  return DiagonalModulation(std::move(values));
}

RateProfile load_profile(const ExperimentConfig& cfg, const std::string& spec) {
  return parse_profile(spec, cfg.base_dir);
}

ExactParam resolve_delta(const ExperimentConfig& cfg, const LocalityGraph& g, const DiagonalModulation& D) {
  if (!cfg.rates.delta.empty()) return ExactParam::parse(cfg.rates.delta);
  if (!cfg.rates.delta_ratio) throw ValidationError("[rates] needs delta or delta_ratio");
  const auto beta = load_profile(cfg, cfg.rates.beta);
  const auto beta_int = load_profile(cfg, cfg.rates.beta_int);
  const auto report = classify_general(g, D, beta.limit_at_infinity(), beta_int.limit_at_infinity(), 1.0);
  const double delta = *cfg.rates.delta_ratio * report.threshold;
  if (!(delta > 0.0)) throw ValidationError("delta_ratio gives delta = 0 because the threshold is 0");
  return ExactParam::from_double(delta);
}

std::vector<std::uint64_t> parse_node_counts(const std::string& spec, const LocalityGraph& g) {
  std::vector<std::uint64_t> counts(g.node_count(), 0);
  for (const auto& item : split(spec, ',')) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) throw ParseError("expected label:count, got '" + item + "'");
    const auto label = trim(item.substr(0, colon));
    auto idx = g.index_of(label);
    if (!idx) throw ValidationError("unknown node '" + label + "'");
    counts[*idx] += to_u64(trim(item.substr(colon + 1)), "count for " + label);
  }
  return counts;
}

SimConfig make_sim_config(const ExperimentConfig& cfg, const LocalityGraph& g) {
  SimConfig s;
  s.beta = load_profile(cfg, cfg.rates.beta);
  s.beta_int = load_profile(cfg, cfg.rates.beta_int);
  s.D = load_modulation(cfg, g);
  s.delta = resolve_delta(cfg, g, s.D).value;
  s.t_max = cfg.simulation.t_max;
  s.grid_step = cfg.simulation.grid_step;
  s.n0 = cfg.simulation.n0;
  s.master_seed = cfg.simulation.master_seed;
  s.seed_policy = cfg.simulation.seed_policy == "shared" ? SeedPolicy::Shared : SeedPolicy::PerRun;
  s.record_events = cfg.simulation.record_events || cfg.output.event_log;
  s.max_events = cfg.simulation.max_events;
  if (cfg.simulation.placement == "vector") {
    s.placement = Placement::GivenVector;
    s.initial = parse_node_counts(cfg.simulation.initial, g);
  }
  s.validate(g);
  return s;
}

PrecisionConfig make_precision(const HittingSection& h) {
  PrecisionConfig p;
  p.mode = parse_precision_mode(h.precision);
  p.bits = h.bits;
  p.series_rel_tol = h.tolerance;
  p.max_terms = h.max_terms;
  return p;
}

}  // namespace sdepi
