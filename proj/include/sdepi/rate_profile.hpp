#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sdepi {

/// A nonnegative model parameter kept in its original decimal (or a/b)
/// spelling so that exact-arithmetic consumers can re-parse it without
/// going through binary floating point.
struct ExactParam {
  std::string text;
  double value = 0.0;

  static ExactParam parse(std::string_view text);
  /// Shortest decimal spelling that round-trips `v`.
  static ExactParam from_double(double v);

  friend bool operator==(const ExactParam& a, const ExactParam& b) { return a.value == b.value; }
};

/// Per-person infectiousness as a function of the total number of active
/// cases n >= 1. Every family is bounded and has a limit as n -> infinity.
class RateProfile {
 public:
  struct Constant {
    ExactParam c;
  };
  /// high for n <= n_switch, low afterwards.
  struct Step {
    ExactParam high, low;
    std::uint64_t n_switch = 0;
  };
  /// k / n
  struct Harmonic {
    ExactParam k;
  };
  /// k ln(1 + n) / n
  struct LogOverN {
    ExactParam k;
  };
  /// Piecewise constant: value at the largest key <= n, `tail` beyond the
  /// last key. Keys start at 1 and increase strictly.
  struct Table {
    std::vector<std::uint64_t> keys;
    std::vector<ExactParam> values;
    ExactParam tail;
  };
  /// d * beta(n) + beta_int(n), the bound-chain rate built from a graph.
  struct Combined {
    ExactParam d;
    std::shared_ptr<const RateProfile> beta;
    std::shared_ptr<const RateProfile> beta_int;
  };
  using Family = std::variant<Constant, Step, Harmonic, LogOverN, Table, Combined>;

  explicit RateProfile(Family f);

  static RateProfile constant(double c) { return RateProfile(Constant{ExactParam::from_double(c)}); }

  const Family& family() const noexcept { return family_; }

  double value(std::uint64_t n) const;
  double limit_at_infinity() const;
  double supremum() const;
  /// sup_{j >= n} value(j)
  double tail_supremum(std::uint64_t n) const;

  /// Smallest n with value(n) == 0, if any.
  std::optional<std::uint64_t> first_zero() const;
  /// Index from which the profile is in its final closed form (constant
  /// tail, or a strictly monotone k/n-type law).
  std::uint64_t settle_index() const;

  bool is_constant() const;
  /// False when evaluation needs transcendental functions (LogOverN).
  bool is_rational() const;

  /// Canonical spec text; Table profiles print as "table:<n entries>".
  std::string describe() const;

 private:
  Family family_;
};

/// Grammar: "const:c" | "step:high,low,n_switch" | "harmonic:k" | "logn:k"
/// | "table:path[,tail=c]". Relative table paths resolve against `base_dir`.
RateProfile parse_profile(std::string_view spec, const std::filesystem::path& base_dir = {});

/// Table file: "n value" lines with strictly increasing n starting at 1,
/// plus a "tail=c" footer. The footer may be omitted when the caller
/// declares the tail; if both are present they must agree.
RateProfile::Table load_table(const std::filesystem::path& path,
                              std::optional<ExactParam> declared_tail = std::nullopt);

/// gamma(n) = d * beta(n) + beta_int(n)
RateProfile gamma_from_graph(const RateProfile& beta, const RateProfile& beta_int, double d);

}  // namespace sdepi
