#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdepi/graphcore.hpp"
#include "sdepi/precision.hpp"
#include "sdepi/rate_profile.hpp"

namespace sdepi {

/// One-dimensional chain n -> n+1 at rate gamma(n) n, n -> n-1 at rate
/// delta n. `theta` is the birth rate out of 0 in the positive-recurrent
/// modification; it does not affect any hitting time.
struct BirthDeathSpec {
  RateProfile gamma;
  ExactParam delta;
  ExactParam theta = ExactParam::parse("1");

  BirthDeathSpec(RateProfile g, ExactParam d, ExactParam t = ExactParam::parse("1"));
};

struct RecurrenceVerdict {
  bool positive_recurrent = false;
  std::string diagnostic;
};

struct SeriesValue {
  PreciseValue value;
  /// Truncation and rounding bounds prove relative error <= series_rel_tol.
  bool certified = false;
  /// Index of the last term summed.
  std::uint64_t last_index = 0;
};

struct HittingTable {
  std::uint64_t n_max = 0;
  std::vector<PreciseValue> S;  // S[i] is S_{i+1}
  std::vector<PreciseValue> T;  // T[i] is E[T_{i+1}]
  std::vector<bool> row_certified;
  PrecisionConfig precision;
  bool certified = false;
  /// ExactRational tables truncate every series at one shared index.
  std::optional<std::uint64_t> shared_truncation;

  const PreciseValue& S_at(std::uint64_t n) const { return S.at(n - 1); }
  const PreciseValue& T_at(std::uint64_t n) const { return T.at(n - 1); }
};

/// Convergence of sum_i (1/i) prod_{j<i} gamma(j)/delta, decided exactly
/// from the limit of gamma (and any zero of gamma, which makes the chain
/// finite).
RecurrenceVerdict positive_recurrence_check(const BirthDeathSpec& spec);

/// E[T_1] = (1/delta) sum_{i>=1} (1/i) prod_{j<i} gamma(j)/delta.
/// Throws DivergenceError when the chain is not positive recurrent.
SeriesValue expected_T1(const BirthDeathSpec& spec, const PrecisionConfig& precision);

/// S_n = E[T_n] - E[T_{n-1}] = (1/delta) sum_{i>=n} (1/i) prod_{j=n}^{i-1} gamma(j)/delta.
/// With `last_index` the sum stops at that index instead of at the
/// certified truncation point.
SeriesValue s_tail_series(const BirthDeathSpec& spec, std::uint64_t n, const PrecisionConfig& precision,
                          std::optional<std::uint64_t> last_index = std::nullopt);

/// Largest certified truncation index over n = 1..n_max.
std::uint64_t certified_truncation_index(const BirthDeathSpec& spec, std::uint64_t n_max,
                                         const PrecisionConfig& precision);

/// S_{n+1} = (S_n delta - 1/n) / gamma(n), in the arithmetic of `s_n`.
/// Loses all accuracy quickly in floating point; exact under rationals.
PreciseValue s_recursion_step(const BirthDeathSpec& spec, const PreciseValue& s_n, std::uint64_t n);

/// S_1..S_{n_max} by the forward recursion from S_1 = E[T_1] truncated at
/// `last_index` (certified index if absent).
std::vector<PreciseValue> forward_recursion(const BirthDeathSpec& spec, std::uint64_t n_max,
                                            const PrecisionConfig& precision,
                                            std::optional<std::uint64_t> last_index = std::nullopt);

/// S_n from the tail series, T_n = sum_{i<=n} S_i.
HittingTable hitting_table(const BirthDeathSpec& spec, std::uint64_t n_max, const PrecisionConfig& precision,
                           unsigned threads = 1);

/// Streams (n, S_n, T_n, certified) for n = 1..n_max without keeping the table.
using IncrementVisitor =
    std::function<void(std::uint64_t n, const PreciseValue& s, const PreciseValue& t, bool certified)>;
void for_each_increment(const BirthDeathSpec& spec, std::uint64_t n_max, const PrecisionConfig& precision,
                        const IncrementVisitor& visit, unsigned threads = 1);

struct AsymptotePoint {
  std::uint64_t n = 0;
  double ratio = 0.0;  // delta T_n / ln n
};

/// delta E[T_n] / ln n at each requested n >= 2.
std::vector<AsymptotePoint> asymptote_ratio(const BirthDeathSpec& spec, std::vector<std::uint64_t> n_list,
                                            const PrecisionConfig& precision, unsigned threads = 1);

/// Where a sequence x_1, x_2, ... (index 0 is n = 1) settles near `target`.
struct SettlingReport {
  /// Smallest N with |x_n - target| < band for every n in [N, end].
  std::optional<std::uint64_t> n_star;
  /// Smallest N with x non-increasing on [N, end].
  std::uint64_t decreasing_from = 1;
  bool all_positive = true;
};
SettlingReport settling_report(std::span<const double> x, double target, double band);

/// pi_0..pi_trunc of the modified chain, truncated and renormalized.
std::vector<PreciseValue> stationary_distribution(const BirthDeathSpec& spec, std::uint64_t trunc,
                                                  const PrecisionConfig& precision);

/// E[T_1] = (1/theta)(1/pi_0 - 1).
PreciseValue renewal_expected_T1(const PreciseValue& pi0, const ExactParam& theta,
                                 const PrecisionConfig& precision);

/// ((1 + eps/delta)^(N+1) - 1) / ((N+1) eps), a lower bound on E[T_1]
/// for gamma = Step(delta + eps, 0, N).
PreciseValue equilibrium_lower_bound(const ExactParam& epsilon, const ExactParam& delta, std::uint64_t N,
                                     const PrecisionConfig& precision);

/// Upper and lower bound chains with gamma = d_max beta + beta_int and
/// gamma = d_min beta + beta_int.
std::pair<BirthDeathSpec, BirthDeathSpec> bound_chains_from_graph(const LocalityGraph& g, const RateProfile& beta,
                                                                   const RateProfile& beta_int,
                                                                   const ExactParam& delta);

}  // namespace sdepi
