#include "sdepi/bdchain.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <thread>

#include "sdepi/errors.hpp"

namespace sdepi {

namespace {

inline bool is_zero(const mpq_class& q) { return sgn(q) == 0; }
inline bool is_zero(const BigFloat& f) { return f.is_zero(); }
inline double to_double(const mpq_class& q) { return q.get_d(); }
inline double to_double(const BigFloat& f) { return f.to_double(); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// A rate profile with every parameter converted once into the kernel's
// number type.
template <class K>
class CompiledProfile {
 public:
  using V = typename K::value_type;

  CompiledProfile(const RateProfile& p, const K& k) : k_(k), root_(compile(p)) {}

  V value(std::uint64_t n) const { return eval(*root_, n); }

  // x *= gamma(n), avoiding temporaries for the common families.
  void multiply(V& x, std::uint64_t n) const {
    const Node& node = *root_;
    switch (node.kind) {
      case Kind::Constant: x *= node.a; return;
      case Kind::Step: x *= (n <= node.n_switch ? node.a : node.b); return;
      case Kind::Harmonic:
        x *= node.a;
        x /= static_cast<unsigned long>(n);
        return;
      default: x *= eval(node, n); return;
    }
  }

 private:
  enum class Kind { Constant, Step, Harmonic, LogOverN, Table, Combined };
  struct Node {
    Kind kind = Kind::Constant;
    V a, b;
    std::uint64_t n_switch = 0;
    std::vector<std::uint64_t> keys;
    std::vector<V> values;
    std::unique_ptr<Node> beta, beta_int;
  };

  std::unique_ptr<Node> compile(const RateProfile& p) const {
    auto node = std::make_unique<Node>();
    std::visit(overloaded{
                   [&](const RateProfile::Constant& c) {
                     node->kind = Kind::Constant;
                     node->a = k_.param(c.c);
                   },
                   [&](const RateProfile::Step& s) {
                     node->kind = Kind::Step;
                     node->a = k_.param(s.high);
                     node->b = k_.param(s.low);
                     node->n_switch = s.n_switch;
                   },
                   [&](const RateProfile::Harmonic& h) {
                     node->kind = Kind::Harmonic;
                     node->a = k_.param(h.k);
                   },
                   [&](const RateProfile::LogOverN& l) {
                     node->kind = Kind::LogOverN;
                     node->a = k_.param(l.k);
                   },
                   [&](const RateProfile::Table& t) {
                     node->kind = Kind::Table;
                     node->keys = t.keys;
                     for (const auto& v : t.values) node->values.push_back(k_.param(v));
                     node->b = k_.param(t.tail);
                   },
                   [&](const RateProfile::Combined& c) {
                     node->kind = Kind::Combined;
                     node->a = k_.param(c.d);
                     node->beta = compile(*c.beta);
                     node->beta_int = compile(*c.beta_int);
                   },
               },
               p.family());
    return node;
  }

  V eval(const Node& node, std::uint64_t n) const {
    switch (node.kind) {
      case Kind::Constant: return node.a;
      case Kind::Step: return n <= node.n_switch ? node.a : node.b;
      case Kind::Harmonic: {
        V x = node.a;
        x /= static_cast<unsigned long>(n);
        return x;
      }
      case Kind::LogOverN: {
        if (is_zero(node.a)) return node.a;
        V x = k_.log1p_int(n);
        x *= node.a;
        x /= static_cast<unsigned long>(n);
        return x;
      }
      case Kind::Table: {
        if (n > node.keys.back()) return node.b;
        auto it = std::upper_bound(node.keys.begin(), node.keys.end(), n);
        return node.values[static_cast<std::size_t>(it - node.keys.begin()) - 1];
      }
      case Kind::Combined: {
        V x = eval(*node.beta, n);
        x *= node.a;
        x += eval(*node.beta_int, n);
        return x;
      }
    }
    return node.a;
  }

  K k_;
  std::unique_ptr<Node> root_;
};

void require_positive_recurrent(const BirthDeathSpec& spec) {
  auto verdict = positive_recurrence_check(spec);
  if (!verdict.positive_recurrent)
    throw DivergenceError("infinite expected extinction time: " + verdict.diagnostic);
}

void require_kernel_support(const BirthDeathSpec& spec, const PrecisionConfig& pc) {
  pc.validate();
  if (pc.mode == PrecisionMode::ExactRational && !spec.gamma.is_rational())
    throw ValidationError("profile '" + spec.gamma.describe() + "' has irrational values; use BigFloat mode");
}

// One series evaluation:
//   sum_{i >= n} (1/i) prod_{j=n}^{i-1} gamma(j)/delta, then divided by delta.
// Terms obey t_{i+1} = t_i * (i/(i+1)) * gamma(i)/delta, so once
// r = sup_{j>=i} gamma(j)/delta < 1 the remainder after term i is at most
// t_i r/(1-r). The loop stops when that remainder is below a quarter of
// the tolerance; certification also charges the accumulated rounding.
template <class K>
SeriesValue tail_series(const BirthDeathSpec& spec, const CompiledProfile<K>& gamma,
                        const typename K::value_type& delta, std::uint64_t n, const PrecisionConfig& pc,
                        const K& k, std::optional<std::uint64_t> last_index) {
  using V = typename K::value_type;
  if (n == 0) throw ValidationError("hitting-time increments start at n = 1");
  if (last_index && *last_index < n) throw ValidationError("truncation index precedes the first term");
  const double delta_d = spec.delta.value;
  const double u = k.unit_roundoff();
  const double tol = pc.series_rel_tol;

  V term = k.integer(1);
  term /= static_cast<unsigned long>(n);
  V sum = term;
  std::uint64_t i = n;
  std::uint64_t count = 1;
  bool certified = false;
  while (true) {
    const double rounding = (8.0 * static_cast<double>(count) + 8.0) * u;
    const double r = spec.gamma.tail_supremum(i) / delta_d * (1.0 + 1e-12);
    const bool at_fixed_end = last_index && i >= *last_index;
    if (r < 1.0) {
      V ratio = term;
      ratio /= sum;
      const double remainder = to_double(ratio) * r / (1.0 - r) * (1.0 + 1e-12);
      const bool proven = remainder + rounding <= 0.5 * tol;
      if (at_fixed_end || (!last_index && remainder <= 0.25 * tol)) {
        certified = proven;
        break;
      }
    } else if (at_fixed_end) {
      break;
    }
    if (count >= pc.max_terms) break;
    gamma.multiply(term, i);
    if (is_zero(term)) {
      certified = rounding <= 0.5 * tol;
      break;
    }
    term *= static_cast<unsigned long>(i);
    term /= static_cast<unsigned long>(i + 1);
    term /= delta;
    sum += term;
    ++i;
    ++count;
  }
  sum /= delta;
  return SeriesValue{k.wrap(std::move(sum)), certified, i};
}

template <class K>
struct ChainContext {
  using V = typename K::value_type;
  ChainContext(const BirthDeathSpec& spec, const K& k)
      : kernel(k), gamma(spec.gamma, k), delta(k.param(spec.delta)) {}
  K kernel;
  CompiledProfile<K> gamma;
  V delta;
};

template <class K>
typename K::value_type recursion_step(const ChainContext<K>& ctx, const typename K::value_type& s_n,
                                      std::uint64_t n) {
  using V = typename K::value_type;
  V g = ctx.gamma.value(n);
  if (is_zero(g))
    throw ValidationError("recursion undefined at n = " + std::to_string(n) +
                          " because gamma(n) = 0; use the tail series");
  V out = s_n;
  out *= ctx.delta;
  V inv = ctx.kernel.integer(1);
  inv /= static_cast<unsigned long>(n);
  out -= inv;
  out /= g;
  return out;
}

template <class K>
std::vector<PreciseValue> forward_recursion_impl(const BirthDeathSpec& spec, std::uint64_t n_max,
                                                 const PrecisionConfig& pc, const K& k,
                                                 std::optional<std::uint64_t> last_index) {
  ChainContext<K> ctx(spec, k);
  auto first = tail_series(spec, ctx.gamma, ctx.delta, 1, pc, k, last_index);
  std::vector<PreciseValue> out;
  out.reserve(n_max);
  auto s = k.unwrap(first.value);
  out.push_back(first.value);
  for (std::uint64_t n = 1; n < n_max; ++n) {
    s = recursion_step(ctx, s, n);
    out.push_back(k.wrap(s));
  }
  return out;
}

template <class K>
void for_each_increment_impl(const BirthDeathSpec& spec, std::uint64_t n_max, const PrecisionConfig& pc,
                             const K& k, std::optional<std::uint64_t> last_index, const IncrementVisitor& visit,
                             unsigned threads) {
  using V = typename K::value_type;
  ChainContext<K> ctx(spec, k);
  const double u = k.unit_roundoff();
  constexpr std::uint64_t kChunk = 2048;
  V total = k.integer(0);
  std::vector<SeriesValue> chunk;
  for (std::uint64_t base = 1; base <= n_max; base += kChunk) {
    const auto count = std::min(kChunk, n_max - base + 1);
    chunk.assign(count, SeriesValue{});
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
      // Compiled profiles hold kernel numbers; each worker owns its copy.
      ChainContext<K> local(spec, k);
      for (auto j = next.fetch_add(1); j < count; j = next.fetch_add(1))
        chunk[j] = tail_series(spec, local.gamma, local.delta, base + j, pc, k, last_index);
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (workers == 1) {
      for (std::uint64_t j = 0; j < count; ++j)
        chunk[j] = tail_series(spec, ctx.gamma, ctx.delta, base + j, pc, k, last_index);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (std::uint64_t j = 0; j < count; ++j) {
      const auto n = base + j;
      total += k.unwrap(chunk[j].value);
      const bool sum_ok = static_cast<double>(n) * u <= 0.5 * pc.series_rel_tol;
      visit(n, chunk[j].value, k.wrap(total), chunk[j].certified && sum_ok);
    }
  }
}

template <class K>
std::vector<PreciseValue> stationary_impl(const BirthDeathSpec& spec, std::uint64_t trunc, const K& k) {
  using V = typename K::value_type;
  ChainContext<K> ctx(spec, k);
  std::vector<V> w;
  w.reserve(trunc + 1);
  w.push_back(k.integer(1));
  if (trunc >= 1) {
    V w1 = k.param(spec.theta);
    w1 /= ctx.delta;
    w.push_back(std::move(w1));
  }
  for (std::uint64_t m = 1; m < trunc; ++m) {
    V next = w.back();
    ctx.gamma.multiply(next, m);
    next *= static_cast<unsigned long>(m);
    next /= static_cast<unsigned long>(m + 1);
    next /= ctx.delta;
    w.push_back(std::move(next));
  }
  V norm = k.integer(0);
  for (const auto& x : w) norm += x;
  std::vector<PreciseValue> out;
  out.reserve(w.size());
  for (auto& x : w) {
    x /= norm;
    out.push_back(k.wrap(x));
  }
  return out;
}

template <class V>
V power(V base, std::uint64_t e, V one) {
  V acc = std::move(one);
  while (e) {
    if (e & 1u) acc *= base;
    e >>= 1;
    if (e) base *= base;
  }
  return acc;
}

template <class K>
PreciseValue equilibrium_impl(const ExactParam& eps, const ExactParam& delta, std::uint64_t N, const K& k) {
  using V = typename K::value_type;
  V e = k.param(eps);
  V x = e;
  x /= k.param(delta);
  x += k.integer(1);
  V num = power(x, N + 1, k.integer(1));
  num -= k.integer(1);
  V den = e;
  den *= static_cast<unsigned long>(N + 1);
  num /= den;
  return k.wrap(std::move(num));
}

mpq_class exact_limit(const RateProfile& p) {
  return std::visit(overloaded{
                        [](const RateProfile::Constant& c) { return to_rational(c.c); },
                        [](const RateProfile::Step& s) { return to_rational(s.low); },
                        [](const RateProfile::Harmonic&) { return mpq_class(0); },
                        [](const RateProfile::LogOverN&) { return mpq_class(0); },
                        [](const RateProfile::Table& t) { return to_rational(t.tail); },
                        [](const RateProfile::Combined& c) {
                          return mpq_class(to_rational(c.d) * exact_limit(*c.beta) + exact_limit(*c.beta_int));
                        },
                    },
                    p.family());
}

template <class F>
decltype(auto) dispatch(const PrecisionConfig& pc, F&& f) {
  if (pc.mode == PrecisionMode::ExactRational) return f(RationalKernel{});
  return f(BigFloatKernel{pc.bits});
}

}  // namespace

BirthDeathSpec::BirthDeathSpec(RateProfile g, ExactParam d, ExactParam t)
    : gamma(std::move(g)), delta(std::move(d)), theta(std::move(t)) {
  if (!(delta.value > 0.0)) throw ValidationError("curing rate delta must be > 0");
  if (!(theta.value > 0.0)) throw ValidationError("theta must be > 0");
}

RecurrenceVerdict positive_recurrence_check(const BirthDeathSpec& spec) {
  if (auto zero = spec.gamma.first_zero()) {
    return {true, "gamma(" + std::to_string(*zero) + ") = 0, so the chain never exceeds " +
                      std::to_string(*zero) + " and the series is a finite sum"};
  }
  const mpq_class limit = exact_limit(spec.gamma);
  const mpq_class delta = to_rational(spec.delta);
  if (limit < delta)
    return {true, "lim gamma = " + limit.get_str() + " < delta = " + delta.get_str() + " (ratio test)"};
  if (limit == delta)
    return {false, "lim gamma = delta = " + delta.get_str() +
                       ": terms decay no faster than 1/i (harmonic series); the chain is in the "
                       "below-threshold regime"};
  return {false, "lim gamma = " + limit.get_str() + " > delta = " + delta.get_str() +
                     ": terms grow geometrically; the chain is in the below-threshold regime"};
}

SeriesValue s_tail_series(const BirthDeathSpec& spec, std::uint64_t n, const PrecisionConfig& precision,
                          std::optional<std::uint64_t> last_index) {
  require_kernel_support(spec, precision);
  require_positive_recurrent(spec);
  return dispatch(precision, [&](const auto& k) {
    using K = std::decay_t<decltype(k)>;
    ChainContext<K> ctx(spec, k);
    return tail_series(spec, ctx.gamma, ctx.delta, n, precision, k, last_index);
  });
}

SeriesValue expected_T1(const BirthDeathSpec& spec, const PrecisionConfig& precision) {
  return s_tail_series(spec, 1, precision);
}

std::uint64_t certified_truncation_index(const BirthDeathSpec& spec, std::uint64_t n_max,
                                         const PrecisionConfig& precision) {
  require_positive_recurrent(spec);
  // The stopping decision only looks at term/sum ratios in double, so a
  // 128-bit dry run finds the same indices as exact arithmetic would.
  PrecisionConfig dry = precision;
  dry.mode = PrecisionMode::BigFloat;
  dry.bits = 128;
  std::uint64_t best = 1;
  BigFloatKernel k{128};
  ChainContext<BigFloatKernel> ctx(spec, k);
  for (std::uint64_t n = 1; n <= n_max; ++n)
    best = std::max(best, tail_series(spec, ctx.gamma, ctx.delta, n, dry, k, std::nullopt).last_index);
  return best;
}

PreciseValue s_recursion_step(const BirthDeathSpec& spec, const PreciseValue& s_n, std::uint64_t n) {
  if (n == 0) throw ValidationError("recursion starts at n = 1");
  if (s_n.is_exact()) {
    if (!spec.gamma.is_rational()) throw ValidationError("exact recursion needs a rational profile");
    RationalKernel k;
    ChainContext<RationalKernel> ctx(spec, k);
    return k.wrap(recursion_step(ctx, s_n.rational(), n));
  }
  BigFloatKernel k{s_n.big().bits()};
  ChainContext<BigFloatKernel> ctx(spec, k);
  return k.wrap(recursion_step(ctx, s_n.big(), n));
}

std::vector<PreciseValue> forward_recursion(const BirthDeathSpec& spec, std::uint64_t n_max,
                                            const PrecisionConfig& precision,
                                            std::optional<std::uint64_t> last_index) {
  require_kernel_support(spec, precision);
  require_positive_recurrent(spec);
  if (n_max == 0) return {};
  return dispatch(precision,
                  [&](const auto& k) { return forward_recursion_impl(spec, n_max, precision, k, last_index); });
}

void for_each_increment(const BirthDeathSpec& spec, std::uint64_t n_max, const PrecisionConfig& precision,
                        const IncrementVisitor& visit, unsigned threads) {
  require_kernel_support(spec, precision);
  require_positive_recurrent(spec);
  std::optional<std::uint64_t> shared;
  if (precision.mode == PrecisionMode::ExactRational)
    shared = certified_truncation_index(spec, n_max, precision);
  dispatch(precision, [&](const auto& k) {
    for_each_increment_impl(spec, n_max, precision, k, shared, visit, threads);
    return 0;
  });
}

HittingTable hitting_table(const BirthDeathSpec& spec, std::uint64_t n_max, const PrecisionConfig& precision,
                           unsigned threads) {
  HittingTable table;
  table.n_max = n_max;
  table.precision = precision;
  table.certified = true;
  table.S.reserve(n_max);
  table.T.reserve(n_max);
  table.row_certified.reserve(n_max);
  for_each_increment(
      spec, n_max, precision,
      [&](std::uint64_t, const PreciseValue& s, const PreciseValue& t, bool ok) {
        table.S.push_back(s);
        table.T.push_back(t);
        table.row_certified.push_back(ok);
        table.certified = table.certified && ok;
      },
      threads);
  if (precision.mode == PrecisionMode::ExactRational)
    table.shared_truncation = certified_truncation_index(spec, n_max, precision);
  return table;
}

std::vector<AsymptotePoint> asymptote_ratio(const BirthDeathSpec& spec, std::vector<std::uint64_t> n_list,
                                            const PrecisionConfig& precision, unsigned threads) {
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
  if (n_list.empty()) return {};
  if (n_list.front() < 2) throw ValidationError("asymptote ratio needs n >= 2 (ln 1 = 0)");
  const unsigned bits = precision.mode == PrecisionMode::BigFloat ? precision.bits : 256;
  const BigFloat delta(to_rational(spec.delta), bits);
  std::vector<AsymptotePoint> out;
  std::size_t next = 0;
  for_each_increment(
      spec, n_list.back(), precision,
      [&](std::uint64_t n, const PreciseValue&, const PreciseValue& t, bool) {
        if (next < n_list.size() && n == n_list[next]) {
          BigFloat ratio = t.to_big(bits);
          ratio *= delta;
          ratio /= BigFloat::log_of(n, bits);
          out.push_back({n, ratio.to_double()});
          ++next;
        }
      },
      threads);
  return out;
}

SettlingReport settling_report(std::span<const double> x, double target, double band) {
  SettlingReport r;
  if (x.empty()) return r;
  r.all_positive = std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0; });
  std::size_t i = x.size();
  while (i > 0 && std::abs(x[i - 1] - target) < band) --i;
  if (i < x.size()) r.n_star = static_cast<std::uint64_t>(i) + 1;
  std::size_t j = x.size() - 1;
  while (j > 0 && x[j - 1] >= x[j]) --j;
  r.decreasing_from = static_cast<std::uint64_t>(j) + 1;
  return r;
}

std::vector<PreciseValue> stationary_distribution(const BirthDeathSpec& spec, std::uint64_t trunc,
                                                  const PrecisionConfig& precision) {
  require_kernel_support(spec, precision);
  require_positive_recurrent(spec);
  return dispatch(precision, [&](const auto& k) { return stationary_impl(spec, trunc, k); });
}

PreciseValue renewal_expected_T1(const PreciseValue& pi0, const ExactParam& theta,
                                 const PrecisionConfig& precision) {
  return dispatch(precision, [&](const auto& k) {
    auto p = k.unwrap(pi0);
    auto one = k.integer(1);
    auto inv = one;
    inv /= p;
    inv -= one;
    inv /= k.param(theta);
    return k.wrap(std::move(inv));
  });
}

PreciseValue equilibrium_lower_bound(const ExactParam& epsilon, const ExactParam& delta, std::uint64_t N,
                                     const PrecisionConfig& precision) {
  if (!(epsilon.value > 0.0)) throw ValidationError("epsilon must be > 0");
  if (!(delta.value > 0.0)) throw ValidationError("delta must be > 0");
  if (N < 1) throw ValidationError("equilibrium point N must be >= 1");
  precision.validate();
  return dispatch(precision, [&](const auto& k) { return equilibrium_impl(epsilon, delta, N, k); });
}

std::pair<BirthDeathSpec, BirthDeathSpec> bound_chains_from_graph(const LocalityGraph& g, const RateProfile& beta,
                                                                   const RateProfile& beta_int,
                                                                   const ExactParam& delta) {
  const auto deg = weighted_degrees(g);
  return {BirthDeathSpec(gamma_from_graph(beta, beta_int, deg.d_max), delta),
          BirthDeathSpec(gamma_from_graph(beta, beta_int, deg.d_min), delta)};
}

}  // namespace sdepi
