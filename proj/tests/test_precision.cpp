#include <doctest.h>

#include <cmath>

#include "sdepi/errors.hpp"
#include "sdepi/precision.hpp"

using namespace sdepi;

TEST_CASE("exact rational parsing") {
  CHECK(parse_rational("3") == mpq_class(3));
  CHECK(parse_rational("0.25") == mpq_class(1, 4));
  CHECK(parse_rational("1e-3") == mpq_class(1, 1000));
  CHECK(parse_rational("2.5E2") == mpq_class(250));
  CHECK(parse_rational("-2.5") == mpq_class(-5, 2));
  CHECK(parse_rational("6/4") == mpq_class(3, 2));
  CHECK(parse_rational("0.1") != mpq_class(0.1));  // not the binary double
  CHECK_THROWS(parse_rational("1/0"));
  CHECK_THROWS(parse_rational("abc"));
  CHECK_THROWS(parse_rational(""));
}

TEST_CASE("BigFloat precision bookkeeping") {
  BigFloat a = BigFloat::from_uint(1, 128);
  a /= 3UL;
  BigFloat b(mpq_class(1, 3), 512);
  CHECK(a.bits() == 128);
  BigFloat c = a;
  c += b;  // widens to 512 bits
  CHECK(c.bits() == 512);
  CHECK(std::abs((a - b).to_double()) < 1e-38);
  CHECK((a - b).to_double() != 0.0);

  CHECK(BigFloat::log_of(1, 256).is_zero());
  CHECK(exp(BigFloat::log_of(10, 256)).to_double() == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(BigFloat(mpq_class(1, 8), 64).to_string(3) == "1.25e-01");
}

TEST_CASE("precision config") {
  PrecisionConfig p;
  p.validate();
  CHECK(p.output_digits() == 79);
  p.bits = 32;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.bits = 256;
  p.series_rel_tol = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK(parse_precision_mode("exact") == PrecisionMode::ExactRational);
  CHECK(parse_precision_mode("bigfloat") == PrecisionMode::BigFloat);
  CHECK_THROWS(parse_precision_mode("double"));
}

TEST_CASE("precise values compare within their mode") {
  PreciseValue q(mpq_class(1, 2));
  PreciseValue f(BigFloat(mpq_class(1, 2), 128));
  CHECK(q.is_exact());
  CHECK_FALSE(f.is_exact());
  CHECK(q.to_double() == 0.5);
  CHECK(f.to_double() == 0.5);
  CHECK_FALSE(q == f);
  CHECK(q.to_big(128) == f.big());
}
