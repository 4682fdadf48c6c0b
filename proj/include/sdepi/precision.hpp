#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include <gmpxx.h>
#include <mpfr.h>

#include "sdepi/rate_profile.hpp"

namespace sdepi {

/// Binary floating point with a per-value precision in bits (MPFR).
/// Results of binary operations carry the larger operand precision;
/// every operation rounds to nearest.
class BigFloat {
 public:
  explicit BigFloat(unsigned bits = 256);
  BigFloat(long v, unsigned bits);
  BigFloat(const mpq_class& q, unsigned bits);
  BigFloat(const BigFloat& other);
  BigFloat(BigFloat&& other) noexcept;
  BigFloat& operator=(const BigFloat& other);
  BigFloat& operator=(BigFloat&& other) noexcept;
  ~BigFloat();

  static BigFloat from_double(double v, unsigned bits);
  static BigFloat from_uint(unsigned long v, unsigned bits);

  unsigned bits() const { return static_cast<unsigned>(mpfr_get_prec(v_)); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  /// Scientific notation with `digits` significant digits.
  std::string to_string(int digits) const;
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  BigFloat& operator+=(const BigFloat& o);
  BigFloat& operator-=(const BigFloat& o);
  BigFloat& operator*=(const BigFloat& o);
  BigFloat& operator/=(const BigFloat& o);
  BigFloat& operator*=(unsigned long o);
  BigFloat& operator/=(unsigned long o);

  friend BigFloat operator+(BigFloat a, const BigFloat& b) { return a += b; }
  friend BigFloat operator-(BigFloat a, const BigFloat& b) { return a -= b; }
  friend BigFloat operator*(BigFloat a, const BigFloat& b) { return a *= b; }
  friend BigFloat operator/(BigFloat a, const BigFloat& b) { return a /= b; }
  friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
  friend bool operator>(const BigFloat& a, const BigFloat& b) { return b < a; }
  friend bool operator>=(const BigFloat& a, const BigFloat& b) { return b <= a; }

  friend BigFloat log(const BigFloat& x);
  friend BigFloat exp(const BigFloat& x);
  friend BigFloat abs(const BigFloat& x);
  /// ln(n) at the given precision
  static BigFloat log_of(unsigned long n, unsigned bits);

  mpfr_srcptr raw() const { return v_; }

 private:
  void widen_to(const BigFloat& o);
  mpfr_t v_;
};

/// Parses "3", "0.25", "1e-3", "-2.5" or "a/b" exactly.
mpq_class parse_rational(std::string_view text);
inline mpq_class to_rational(const ExactParam& p) { return parse_rational(p.text); }

enum class PrecisionMode { ExactRational, BigFloat };

std::string_view to_string(PrecisionMode m);
PrecisionMode parse_precision_mode(std::string_view s);

struct PrecisionConfig {
  PrecisionMode mode = PrecisionMode::BigFloat;
  unsigned bits = 256;
  double series_rel_tol = 1e-30;
  std::uint64_t max_terms = 10'000'000;

  void validate() const;
  /// Significant digits that represent every value at this precision.
  int output_digits() const;
};

/// A value from either precision mode.
class PreciseValue {
 public:
  PreciseValue() : v_(mpq_class(0)) {}
  PreciseValue(mpq_class q) : v_(std::move(q)) {}
  PreciseValue(BigFloat f) : v_(std::move(f)) {}

  bool is_exact() const { return std::holds_alternative<mpq_class>(v_); }
  const mpq_class& rational() const { return std::get<mpq_class>(v_); }
  const BigFloat& big() const { return std::get<BigFloat>(v_); }

  double to_double() const;
  /// Converts to BigFloat (rounding rationals to `bits`).
  BigFloat to_big(unsigned bits) const;
  std::string to_string(int digits) const;

  friend bool operator==(const PreciseValue& a, const PreciseValue& b);

 private:
  std::variant<mpq_class, BigFloat> v_;
};

/// Arithmetic back ends for code templated over the number type.
struct RationalKernel {
  using value_type = mpq_class;
  static constexpr bool exact = true;

  value_type param(const ExactParam& p) const { return to_rational(p); }
  value_type integer(std::uint64_t n) const;
  value_type from_double(double v) const { return mpq_class(v); }
  value_type log1p_int(std::uint64_t) const;
  double unit_roundoff() const { return 0.0; }
  PreciseValue wrap(value_type v) const { return PreciseValue(std::move(v)); }
  value_type unwrap(const PreciseValue& v) const;
};

struct BigFloatKernel {
  using value_type = BigFloat;
  static constexpr bool exact = false;
  unsigned bits = 256;

  value_type param(const ExactParam& p) const { return BigFloat(to_rational(p), bits); }
  value_type integer(std::uint64_t n) const;
  value_type from_double(double v) const { return BigFloat::from_double(v, bits); }
  value_type log1p_int(std::uint64_t n) const { return BigFloat::log_of(n + 1, bits); }
  /// 2^-bits, the relative error bound of one rounded operation.
  double unit_roundoff() const;
  PreciseValue wrap(value_type v) const { return PreciseValue(std::move(v)); }
  value_type unwrap(const PreciseValue& v) const { return v.to_big(bits); }
};

}  // namespace sdepi
