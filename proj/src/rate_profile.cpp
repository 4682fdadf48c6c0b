#include "sdepi/rate_profile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sdepi/errors.hpp"

namespace sdepi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError("not a number: '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_count(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError("not a nonnegative integer: '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Points where the set {n : value(n) == 0} can change membership.
void collect_breakpoints(const RateProfile& p, std::set<std::uint64_t>& out) {
  out.insert(1);
  std::visit(overloaded{
                 [&](const RateProfile::Step& s) { out.insert(s.n_switch + 1); },
                 [&](const RateProfile::Table& t) {
                   out.insert(t.keys.begin(), t.keys.end());
                   out.insert(t.keys.back() + 1);
                 },
                 [&](const RateProfile::Combined& c) {
                   collect_breakpoints(*c.beta, out);
                   collect_breakpoints(*c.beta_int, out);
                 },
                 [](const auto&) {},
             },
             p.family());
}

std::size_t table_slot(const RateProfile::Table& t, std::uint64_t n) {
  auto it = std::upper_bound(t.keys.begin(), t.keys.end(), n);
  return static_cast<std::size_t>(it - t.keys.begin()) - 1;
}

void validate_table(const RateProfile::Table& t) {
  if (t.keys.empty() || t.keys.size() != t.values.size())
    throw ValidationError("table profile needs at least one 'n value' entry");
  if (t.keys.front() != 1) throw ValidationError("table profile must start at n = 1");
  for (std::size_t i = 1; i < t.keys.size(); ++i)
    if (t.keys[i] <= t.keys[i - 1]) throw ValidationError("table keys must increase strictly");
}

}  // namespace

ExactParam ExactParam::parse(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw ParseError("empty parameter");
  double v = 0.0;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = trim(text.substr(0, slash));
    const auto den = trim(text.substr(slash + 1));
    const auto is_int = [](std::string_view s) {
      return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (!is_int(num) || !is_int(den)) {
      if (!num.empty() && num.front() == '-') throw ValidationError("negative parameter '" + std::string(text) + "'");
      throw ParseError("fraction must be 'a/b' with nonnegative integers: '" + std::string(text) + "'");
    }
    const double d = parse_double(den);
    if (d == 0.0) throw ValidationError("zero denominator in '" + std::string(text) + "'");
    v = parse_double(num) / d;
  } else {
    v = parse_double(text);
  }
  if (!std::isfinite(v)) throw ValidationError("parameter is not finite: '" + std::string(text) + "'");
  if (v < 0.0 || (v == 0.0 && text.front() == '-'))
    throw ValidationError("negative parameter '" + std::string(text) + "'");
  return ExactParam{std::string(text), v};
}

ExactParam ExactParam::from_double(double v) {
  if (!std::isfinite(v) || v < 0.0) throw ValidationError("parameter must be finite and >= 0");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ExactParam{std::string(buf, ptr), v};
}

RateProfile::RateProfile(Family f) : family_(std::move(f)) {
  std::visit(overloaded{
                 [](const Table& t) { validate_table(t); },
                 [](const Combined& c) {
                   if (!c.beta || !c.beta_int) throw ValidationError("combined profile needs both parts");
                 },
                 [](const auto&) {},
             },
             family_);
}

double RateProfile::value(std::uint64_t n) const {
  if (n == 0) throw ValidationError("rate profiles are defined for n >= 1");
  const double x = static_cast<double>(n);
  return std::visit(overloaded{
                        [](const Constant& c) { return c.c.value; },
                        [&](const Step& s) { return n <= s.n_switch ? s.high.value : s.low.value; },
                        [&](const Harmonic& h) { return h.k.value / x; },
                        [&](const LogOverN& l) { return l.k.value * std::log1p(x) / x; },
                        [&](const Table& t) {
                          return n > t.keys.back() ? t.tail.value : t.values[table_slot(t, n)].value;
                        },
                        [&](const Combined& c) { return c.d.value * c.beta->value(n) + c.beta_int->value(n); },
                    },
                    family_);
}

double RateProfile::limit_at_infinity() const {
  return std::visit(overloaded{
                        [](const Constant& c) { return c.c.value; },
                        [](const Step& s) { return s.low.value; },
                        [](const Harmonic&) { return 0.0; },
                        [](const LogOverN&) { return 0.0; },
                        [](const Table& t) { return t.tail.value; },
                        [](const Combined& c) {
                          return c.d.value * c.beta->limit_at_infinity() + c.beta_int->limit_at_infinity();
                        },
                    },
                    family_);
}

double RateProfile::tail_supremum(std::uint64_t n) const {
  if (n == 0) n = 1;
  const double x = static_cast<double>(n);
  return std::visit(overloaded{
                        [](const Constant& c) { return c.c.value; },
                        [&](const Step& s) {
                          return n <= s.n_switch ? std::max(s.high.value, s.low.value) : s.low.value;
                        },
                        [&](const Harmonic& h) { return h.k.value / x; },
                        [&](const LogOverN& l) { return l.k.value * std::log1p(x) / x; },
                        [&](const Table& t) {
                          double best = t.tail.value;
                          if (n <= t.keys.back())
                            for (auto i = table_slot(t, n); i < t.values.size(); ++i)
                              best = std::max(best, t.values[i].value);
                          return best;
                        },
                        [&](const Combined& c) {
                          return c.d.value * c.beta->tail_supremum(n) + c.beta_int->tail_supremum(n);
                        },
                    },
                    family_);
}

double RateProfile::supremum() const { return tail_supremum(1); }

std::optional<std::uint64_t> RateProfile::first_zero() const {
  std::set<std::uint64_t> points;
  collect_breakpoints(*this, points);
  for (auto p : points)
    if (p >= 1 && value(p) == 0.0) return p;
  return std::nullopt;
}

std::uint64_t RateProfile::settle_index() const {
  return std::visit(overloaded{
                        [](const Step& s) { return s.n_switch + 1; },
                        [](const Table& t) { return t.keys.back() + 1; },
                        [](const Combined& c) {
                          return std::max(c.beta->settle_index(), c.beta_int->settle_index());
                        },
                        [](const auto&) { return std::uint64_t{1}; },
                    },
                    family_);
}

bool RateProfile::is_constant() const {
  return std::visit(overloaded{
                        [](const Constant&) { return true; },
                        [](const Step& s) { return s.n_switch == 0 || s.high.value == s.low.value; },
                        [](const Harmonic& h) { return h.k.value == 0.0; },
                        [](const LogOverN& l) { return l.k.value == 0.0; },
                        [](const Table& t) {
                          return std::all_of(t.values.begin(), t.values.end(),
                                             [&](const ExactParam& v) { return v.value == t.tail.value; });
                        },
                        [](const Combined& c) {
                          return (c.d.value == 0.0 || c.beta->is_constant()) && c.beta_int->is_constant();
                        },
                    },
                    family_);
}

bool RateProfile::is_rational() const {
  return std::visit(overloaded{
                        [](const LogOverN& l) { return l.k.value == 0.0; },
                        [](const Combined& c) { return c.beta->is_rational() && c.beta_int->is_rational(); },
                        [](const auto&) { return true; },
                    },
                    family_);
}

std::string RateProfile::describe() const {
  return std::visit(overloaded{
                        [](const Constant& c) { return "const:" + c.c.text; },
                        [](const Step& s) {
                          return "step:" + s.high.text + "," + s.low.text + "," + std::to_string(s.n_switch);
                        },
                        [](const Harmonic& h) { return "harmonic:" + h.k.text; },
                        [](const LogOverN& l) { return "logn:" + l.k.text; },
                        [](const Table& t) {
                          return "table:<" + std::to_string(t.keys.size()) + " entries>,tail=" + t.tail.text;
                        },
                        [](const Combined& c) {
                          return c.d.text + "*(" + c.beta->describe() + ")+(" + c.beta_int->describe() + ")";
                        },
                    },
                    family_);
}

RateProfile::Table load_table(const std::filesystem::path& path, std::optional<ExactParam> declared_tail) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table '" + path.string() + "'");
  RateProfile::Table t;
  std::optional<ExactParam> footer;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto view = trim(line);
    if (view.empty()) continue;
    try {
      if (view.starts_with("tail=")) {
        if (footer) throw ParseError("tail declared twice");
        footer = ExactParam::parse(view.substr(5));
        continue;
      }
      if (footer) throw ParseError("entries after the tail footer");
      std::istringstream fields{std::string(view)};
      std::string ntext, vtext, extra;
      if (!(fields >> ntext >> vtext) || (fields >> extra)) throw ParseError("expected 'n value'");
      t.keys.push_back(parse_count(ntext));
      t.values.push_back(ExactParam::parse(vtext));
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()), lineno);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (footer && declared_tail && !(*footer == *declared_tail))
    throw ValidationError("conflicting tail declarations for '" + path.string() + "'");
  if (!footer && !declared_tail)
    throw ValidationError("table '" + path.string() + "' declares no tail constant");
  t.tail = footer ? *footer : *declared_tail;
  validate_table(t);
  return t;
}

RateProfile parse_profile(std::string_view spec, const std::filesystem::path& base_dir) {
  spec = trim(spec);
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw ParseError("profile '" + std::string(spec) + "' lacks 'family:'");
  const auto kind = spec.substr(0, colon);
  const auto args = spec.substr(colon + 1);
  if (kind == "const") return RateProfile(RateProfile::Constant{ExactParam::parse(args)});
  if (kind == "harmonic") return RateProfile(RateProfile::Harmonic{ExactParam::parse(args)});
  if (kind == "logn") return RateProfile(RateProfile::LogOverN{ExactParam::parse(args)});
  if (kind == "step") {
    auto parts = split(args, ',');
    if (parts.size() != 3) throw ParseError("step profile is 'step:high,low,n_switch'");
    return RateProfile(RateProfile::Step{ExactParam::parse(parts[0]), ExactParam::parse(parts[1]),
                                         parse_count(parts[2])});
  }
  if (kind == "table") {
    std::string_view path_text = args;
    std::optional<ExactParam> tail;
    if (auto pos = args.rfind(",tail="); pos != std::string_view::npos) {
      path_text = trim(args.substr(0, pos));
      tail = ExactParam::parse(args.substr(pos + 6));
    }
    std::filesystem::path path{std::string(path_text)};
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    return RateProfile(load_table(path, tail));
  }
  throw ParseError("unknown profile family '" + std::string(kind) + "'");
}

RateProfile gamma_from_graph(const RateProfile& beta, const RateProfile& beta_int, double d) {
  return RateProfile(RateProfile::Combined{ExactParam::from_double(d), std::make_shared<const RateProfile>(beta),
                                           std::make_shared<const RateProfile>(beta_int)});
}

}  // namespace sdepi
