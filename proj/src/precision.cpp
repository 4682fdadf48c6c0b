#include "sdepi/precision.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include "sdepi/errors.hpp"

namespace sdepi {

BigFloat::BigFloat(unsigned bits) {
  mpfr_init2(v_, static_cast<mpfr_prec_t>(bits));
  mpfr_set_zero(v_, 1);
}

BigFloat::BigFloat(long v, unsigned bits) {
  mpfr_init2(v_, static_cast<mpfr_prec_t>(bits));
  mpfr_set_si(v_, v, MPFR_RNDN);
}

BigFloat::BigFloat(const mpq_class& q, unsigned bits) {
  mpfr_init2(v_, static_cast<mpfr_prec_t>(bits));
  mpfr_set_q(v_, q.get_mpq_t(), MPFR_RNDN);
}

BigFloat::BigFloat(const BigFloat& other) {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& other) noexcept {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_swap(v_, other.v_);
}

BigFloat& BigFloat::operator=(const BigFloat& other) {
  if (this != &other) {
    mpfr_set_prec(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& other) noexcept {
  mpfr_swap(v_, other.v_);
  return *this;
}

BigFloat::~BigFloat() { mpfr_clear(v_); }

BigFloat BigFloat::from_uint(unsigned long v, unsigned bits) {
  BigFloat out(bits);
  mpfr_set_ui(out.v_, v, MPFR_RNDN);
  return out;
}

BigFloat BigFloat::from_double(double v, unsigned bits) {
  BigFloat out(bits);
  mpfr_set_d(out.v_, v, MPFR_RNDN);
  return out;
}

std::string BigFloat::to_string(int digits) const {
  if (digits < 1) digits = 1;
  const int needed = mpfr_snprintf(nullptr, 0, "%.*Re", digits - 1, v_);
  std::string out(static_cast<std::size_t>(needed) + 1, '\0');
  mpfr_snprintf(out.data(), out.size(), "%.*Re", digits - 1, v_);
  out.resize(static_cast<std::size_t>(needed));
  return out;
}

void BigFloat::widen_to(const BigFloat& o) {
  if (mpfr_get_prec(o.v_) > mpfr_get_prec(v_)) mpfr_prec_round(v_, mpfr_get_prec(o.v_), MPFR_RNDN);
}

BigFloat& BigFloat::operator+=(const BigFloat& o) {
  widen_to(o);
  mpfr_add(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
BigFloat& BigFloat::operator-=(const BigFloat& o) {
  widen_to(o);
  mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
BigFloat& BigFloat::operator*=(const BigFloat& o) {
  widen_to(o);
  mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
BigFloat& BigFloat::operator/=(const BigFloat& o) {
  widen_to(o);
  mpfr_div(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
BigFloat& BigFloat::operator*=(unsigned long o) {
  mpfr_mul_ui(v_, v_, o, MPFR_RNDN);
  return *this;
}
BigFloat& BigFloat::operator/=(unsigned long o) {
  mpfr_div_ui(v_, v_, o, MPFR_RNDN);
  return *this;
}

BigFloat log(const BigFloat& x) {
  BigFloat out(x.bits());
  mpfr_log(out.v_, x.v_, MPFR_RNDN);
  return out;
}

BigFloat exp(const BigFloat& x) {
  BigFloat out(x.bits());
  mpfr_exp(out.v_, x.v_, MPFR_RNDN);
  return out;
}

BigFloat abs(const BigFloat& x) {
  BigFloat out(x.bits());
  mpfr_abs(out.v_, x.v_, MPFR_RNDN);
  return out;
}

BigFloat BigFloat::log_of(unsigned long n, unsigned bits) {
  BigFloat out(bits);
  mpfr_log_ui(out.v_, n, MPFR_RNDN);
  return out;
}

mpq_class parse_rational(std::string_view text) {
  auto bad = [&] { return ParseError("not an exact decimal or fraction: '" + std::string(text) + "'"); };
  if (text.empty()) throw bad();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    mpq_class q;
    try {
      q = mpq_class(mpz_class(std::string(text.substr(0, slash)), 10), mpz_class(std::string(text.substr(slash + 1)), 10));
    } catch (const std::invalid_argument&) {
      throw bad();
    }
    if (q.get_den() == 0) throw ValidationError("zero denominator in '" + std::string(text) + "'");
    q.canonicalize();
    return q;
  }
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') negative = text[i++] == '-';
  std::string digits;
  long frac_len = 0;
  bool seen_dot = false;
  for (; i < text.size() && text[i] != 'e' && text[i] != 'E'; ++i) {
    const char c = text[i];
    if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_dot) ++frac_len;
    } else {
      throw bad();
    }
  }
  if (digits.empty()) throw bad();
  long exponent = 0;
  if (i < text.size()) {
    const auto etext = std::string(text.substr(i + 1));
    if (etext.empty()) throw bad();
    std::size_t used = 0;
    try {
      exponent = std::stol(etext, &used);
    } catch (const std::exception&) {
      throw bad();
    }
    if (used != etext.size()) throw bad();
  }
  mpz_class mant(digits, 10);
  if (negative) mant = -mant;
  const long shift = exponent - frac_len;
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(shift)));
  mpq_class q = shift >= 0 ? mpq_class(mant * ten_pow) : mpq_class(mant, ten_pow);
  q.canonicalize();
  return q;
}

std::string_view to_string(PrecisionMode m) {
  return m == PrecisionMode::ExactRational ? "exact" : "bigfloat";
}

PrecisionMode parse_precision_mode(std::string_view s) {
  if (s == "exact" || s == "ExactRational") return PrecisionMode::ExactRational;
  if (s == "bigfloat" || s == "BigFloat") return PrecisionMode::BigFloat;
  throw ParseError("precision mode must be 'exact' or 'bigfloat', got '" + std::string(s) + "'");
}

void PrecisionConfig::validate() const {
  if (mode == PrecisionMode::BigFloat && bits < 64) throw ValidationError("BigFloat precision must be >= 64 bits");
  if (!(series_rel_tol > 0.0)) throw ValidationError("series_rel_tol must be > 0");
  if (max_terms == 0) throw ValidationError("max_terms must be > 0");
}

int PrecisionConfig::output_digits() const {
  if (mode == PrecisionMode::ExactRational) return 64;
  return static_cast<int>(std::ceil(bits * std::log10(2.0))) + 1;
}

double PreciseValue::to_double() const {
  if (is_exact()) return rational().get_d();
  return big().to_double();
}

BigFloat PreciseValue::to_big(unsigned bits) const {
  if (is_exact()) return BigFloat(rational(), bits);
  BigFloat out(bits);
  out += big();  // widens to the larger of the two precisions
  return out;
}

std::string PreciseValue::to_string(int digits) const {
  if (is_exact()) {
    const auto bits = static_cast<unsigned>(digits * 3.33) + 64;
    return BigFloat(rational(), bits).to_string(digits);
  }
  return big().to_string(digits);
}

bool operator==(const PreciseValue& a, const PreciseValue& b) {
  if (a.is_exact() != b.is_exact()) return false;
  return a.is_exact() ? a.rational() == b.rational() : a.big() == b.big();
}

RationalKernel::value_type RationalKernel::integer(std::uint64_t n) const {
  mpz_class z;
  mpz_import(z.get_mpz_t(), 1, 1, sizeof n, 0, 0, &n);
  return mpq_class(z);
}

RationalKernel::value_type RationalKernel::log1p_int(std::uint64_t) const {
  throw ValidationError("logarithmic profiles have no exact rational values; use BigFloat mode");
}

RationalKernel::value_type RationalKernel::unwrap(const PreciseValue& v) const {
  if (!v.is_exact()) throw ValidationError("expected an exact rational value");
  return v.rational();
}

BigFloatKernel::value_type BigFloatKernel::integer(std::uint64_t n) const {
  return BigFloat::from_uint(n, bits);
}

double BigFloatKernel::unit_roundoff() const { return std::ldexp(1.0, -static_cast<int>(bits)); }

}  // namespace sdepi
