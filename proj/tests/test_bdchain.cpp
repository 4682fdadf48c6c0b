#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "sdepi/bdchain.hpp"
#include "sdepi/errors.hpp"

using namespace sdepi;

namespace {

BirthDeathSpec chain(const std::string& gamma, const std::string& delta = "1", const std::string& theta = "1") {
  return BirthDeathSpec(parse_profile(gamma), ExactParam::parse(delta), ExactParam::parse(theta));
}

PrecisionConfig exact() {
  PrecisionConfig p;
  p.mode = PrecisionMode::ExactRational;
  return p;
}

PrecisionConfig bigfloat(unsigned bits = 256, double tol = 1e-30) {
  PrecisionConfig p;
  p.bits = bits;
  p.series_rel_tol = tol;
  return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("positive recurrence") {
  CHECK(positive_recurrence_check(chain("const:0.5")).positive_recurrent);
  CHECK_FALSE(positive_recurrence_check(chain("const:1")).positive_recurrent);
  CHECK_FALSE(positive_recurrence_check(chain("const:3", "2")).positive_recurrent);
  CHECK(positive_recurrence_check(chain("harmonic:50", "0.1")).positive_recurrent);
  CHECK(positive_recurrence_check(chain("logn:9")).positive_recurrent);
  CHECK(positive_recurrence_check(chain("step:5,0,30")).positive_recurrent);  // finite chain
  CHECK_FALSE(positive_recurrence_check(chain("step:0.2,1,30")).positive_recurrent);
  // The exact comparison sees through decimal spellings: 1/3 < 0.3333...34.
  CHECK(positive_recurrence_check(chain("const:1/3", "0.33333333333333333334")).positive_recurrent);

  try {
    expected_T1(chain("const:1"), bigfloat());
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("infinite expected extinction time") != std::string::npos);
  }
}

TEST_CASE("E[T1] closed forms") {
  // gamma = 0: a single removal at rate delta.
  auto z = expected_T1(chain("const:0", "3/2"), exact());
  CHECK(z.value.rational() == mpq_class(2, 3));
  CHECK(z.certified);

  for (double k : {1.0, 2.0, 5.0}) {
    const auto v = expected_T1(chain("harmonic:" + std::to_string(static_cast<int>(k))), bigfloat());
    CHECK(v.certified);
    CHECK(rel(v.value.to_double(), std::expm1(k) / k) < 1e-14);
  }
  // delta != 1: (e^{k/delta} - 1) / k
  CHECK(rel(expected_T1(chain("harmonic:3", "2"), bigfloat()).value.to_double(), std::expm1(1.5) / 3.0) < 1e-14);
  // Constant alpha = delta / 2: (1/delta) 2 ln 2
  CHECK(rel(expected_T1(chain("const:1", "2"), bigfloat()).value.to_double(), 0.5 * 2.0 * std::log(2.0)) < 1e-14);
}

TEST_CASE("S_n by the tail series") {
  for (std::uint64_t n : {1ULL, 2ULL, 17ULL, 1000ULL}) {
    auto s = s_tail_series(chain("const:0", "4"), n, exact());
    CHECK(s.value.rational() == mpq_class(1, 4 * n));
  }
  const double alpha = 0.7, delta = 1.0;
  for (std::uint64_t n = 1; n <= 200; n += 7) {
    const double s = s_tail_series(chain("const:0.7"), n, bigfloat()).value.to_double();
    CHECK(s >= 1.0 / (delta * n));
    CHECK(s <= 1.0 / ((delta - alpha) * n));
  }
}

TEST_CASE("tail series equals the exact forward recursion") {
  for (const char* g : {"const:1/2", "harmonic:5", "step:3,1/2,10", "harmonic:2"}) {
    const auto spec = chain(g);
    const auto table = hitting_table(spec, 30, exact());
    REQUIRE(table.shared_truncation.has_value());
    const auto rec = forward_recursion(spec, 30, exact(), *table.shared_truncation);
    for (std::uint64_t n = 1; n <= 30; ++n) CHECK_MESSAGE(rec[n - 1] == table.S_at(n), g << " n=" << n);
    CHECK(table.certified);
  }
}

TEST_CASE("recursion step") {
  // Constant alpha: S_2 = S_1 (delta / alpha) - 1 / alpha.
  const auto spec = chain("const:1/4");
  const auto s1 = expected_T1(spec, exact()).value;
  const auto s2 = s_recursion_step(spec, s1, 1);
  CHECK(s2.rational() == s1.rational() * 4 - 4);
  CHECK_THROWS_AS(s_recursion_step(chain("step:1/2,0,3"), s1, 4), ValidationError);
}

TEST_CASE("forward recursion loses accuracy in fixed precision") {
  // Harmonic(5): each recursion step multiplies the error by n/5.
  const auto spec = chain("harmonic:5");
  const auto certified = hitting_table(spec, 120, bigfloat(512, 1e-60));
  const auto low = forward_recursion(spec, 120, bigfloat(128, 1e-30));
  CHECK(rel(low[9].to_double(), certified.S_at(10).to_double()) < 1e-20);
  CHECK(rel(low[119].to_double(), certified.S_at(120).to_double()) > 1.0);
}

TEST_CASE("hitting table structure") {
  // gamma = 0: T_n = H_n / delta exactly.
  const auto t0 = hitting_table(chain("const:0", "2"), 50, exact());
  mpq_class h = 0;
  for (std::uint64_t n = 1; n <= 50; ++n) {
    h += mpq_class(1, n);
    CHECK(t0.T_at(n).rational() == h / 2);
  }

  const auto t = hitting_table(chain("harmonic:5"), 500, bigfloat());
  CHECK(t.certified);
  BigFloat prefix(256);
  for (std::uint64_t n = 1; n <= 500; ++n) {
    CHECK(t.S_at(n).big().sign() > 0);
    if (n > 1) CHECK(t.T_at(n).big() > t.T_at(n - 1).big());
    prefix += t.S_at(n).big();
    CHECK(prefix == t.T_at(n).big());
  }
}

TEST_CASE("constant gamma envelope") {
  for (const char* a : {"0.1", "0.5", "0.9"}) {
    const double alpha = std::stod(a);
    const auto t = hitting_table(chain(std::string("const:") + a), 2000, bigfloat());
    for (std::uint64_t n = 1; n <= 2000; ++n) {
      const double tn = t.T_at(n).to_double();
      const double x = static_cast<double>(n);
      CHECK(tn >= std::log1p(x));
      CHECK(tn <= (1.0 + std::log(x)) / (1.0 - alpha));
    }
  }
}

TEST_CASE("threads do not change the table") {
  const auto spec = chain("logn:2");
  const auto a = hitting_table(spec, 3000, bigfloat(), 1);
  const auto b = hitting_table(spec, 3000, bigfloat(), 4);
  for (std::uint64_t n = 1; n <= 3000; ++n) CHECK(a.T_at(n) == b.T_at(n));
}

TEST_CASE("certification is honest") {
  const auto spec = chain("harmonic:5");
  const auto a = hitting_table(spec, 300, bigfloat(256, 1e-30));
  const auto b = hitting_table(spec, 300, bigfloat(512, 1e-60));
  REQUIRE(a.certified);
  for (std::uint64_t n = 1; n <= 300; ++n) {
    BigFloat diff = a.T_at(n).to_big(512) - b.T_at(n).big();
    diff /= b.T_at(n).big();
    CHECK(std::abs(diff.to_double()) <= 1e-30);
  }
  // 64-bit rounding cannot support a 1e-30 claim.
  CHECK_FALSE(expected_T1(spec, bigfloat(64, 1e-30)).certified);
  // Nor can a term budget that stops early.
  auto tight = bigfloat();
  tight.max_terms = 3;
  CHECK_FALSE(expected_T1(spec, tight).certified);
  CHECK_THROWS_AS(expected_T1(chain("logn:1"), exact()), ValidationError);
}

TEST_CASE("asymptote: no infectiousness gives the harmonic ratio") {
  const std::vector<std::uint64_t> ns{10, 1000, 100000};
  const auto pts = asymptote_ratio(chain("const:0"), ns, bigfloat());
  REQUIRE(pts.size() == 3);
  for (const auto& p : pts) {
    const double n = static_cast<double>(p.n);
    long double h = 0.0L;
    for (std::uint64_t k = p.n; k >= 1; --k) h += 1.0L / static_cast<long double>(k);
    CHECK(p.ratio == doctest::Approx(static_cast<double>(h) / std::log(n)).epsilon(1e-12));
    // ratio - 1 = (gamma_E + 1/(2n) + O(1/n^2)) / ln n
    CHECK(std::abs((p.ratio - 1.0) * std::log(n) - std::numbers::egamma - 0.5 / n) < 1.0 / (10 * n * n));
  }
  CHECK(pts[0].ratio > pts[1].ratio);
  CHECK(pts[1].ratio > pts[2].ratio);
  // Slow approach: still about 5% above 1 at n = 1e5.
  CHECK(pts[2].ratio > 1.04);
  CHECK_THROWS_AS(asymptote_ratio(chain("const:0"), {1}, bigfloat()), ValidationError);
}

TEST_CASE("asymptote: constant gamma stays inside its envelope") {
  const auto pts = asymptote_ratio(chain("const:0.5"), {100, 10000}, bigfloat());
  for (const auto& p : pts) {
    CHECK(p.ratio >= 1.0);
    CHECK(p.ratio <= 2.0 * (1.0 + 1.0 / std::log(static_cast<double>(p.n))));
  }
}

TEST_CASE("asymptote: vanishing gamma gives n S_n -> 1") {
  const auto t = hitting_table(chain("harmonic:5"), 2000, bigfloat());
  std::vector<double> ns(2000);
  for (std::uint64_t n = 1; n <= 2000; ++n) ns[n - 1] = static_cast<double>(n) * t.S_at(n).to_double();
  const auto r = settling_report(ns, 1.0, 0.05);
  CHECK(r.all_positive);
  REQUIRE(r.n_star.has_value());
  CHECK(*r.n_star < 2000);
  CHECK(ns.back() > 1.0);
  CHECK(ns.back() < 1.01);
}

TEST_CASE("settling report") {
  const std::vector<double> x{0.5, 3.0, 2.0, 1.5, 1.04, 1.03};
  const auto r = settling_report(x, 1.0, 0.05);
  CHECK(r.n_star == 5u);
  CHECK(r.decreasing_from == 2u);
  CHECK(r.all_positive);
  CHECK_FALSE(settling_report(std::vector<double>{2.0, 3.0}, 1.0, 0.05).n_star.has_value());
}

TEST_CASE("vanishing gamma: T_n - ln n / (delta - eps) stays bounded") {
  for (const char* g : {"harmonic:5", "logn:2"}) {
    const auto spec = chain(g);
    for (double eps : {0.1, 0.5}) {
      double head = -1e300, tail = -1e300;
      for_each_increment(spec, 100000, bigfloat(128, 1e-20),
                         [&](std::uint64_t n, const PreciseValue&, const PreciseValue& t, bool) {
                           const double h = t.to_double() - std::log(static_cast<double>(n)) / (1.0 - eps);
                           (n <= 10000 ? head : tail) = std::max(n <= 10000 ? head : tail, h);
                         });
      CHECK_MESSAGE(tail <= head, g << " eps=" << eps);
    }
  }
}

TEST_CASE("stationary distribution and the renewal identity") {
  const auto z = stationary_distribution(chain("const:0", "2", "3"), 5, exact());
  CHECK(z[0].rational() == mpq_class(2, 5));
  CHECK(z[1].rational() == mpq_class(3, 5));
  for (std::size_t i = 2; i < z.size(); ++i) CHECK(z[i].rational() == 0);
  CHECK(renewal_expected_T1(z[0], ExactParam::parse("3"), exact()).rational() == mpq_class(1, 2));

  const double series = expected_T1(chain("const:0.5"), bigfloat()).value.to_double();
  for (const char* theta : {"0.1", "1", "10"}) {
    const auto spec = chain("const:0.5", "1", theta);
    const auto pi = stationary_distribution(spec, 400, bigfloat());
    const double renewal = renewal_expected_T1(pi[0], spec.theta, bigfloat()).to_double();
    CHECK(rel(renewal, series) < 1e-9);
  }
}

TEST_CASE("equilibrium lower bound") {
  const auto b = equilibrium_lower_bound(ExactParam::parse("1"), ExactParam::parse("1"), 10, exact());
  CHECK(b.rational() == mpq_class(2047, 11));
  double prev = 0.0;
  for (const char* eps : {"0.01", "0.1", "0.5", "1"}) {
    const double v = equilibrium_lower_bound(ExactParam::parse(eps), ExactParam::parse("1"), 20, bigfloat()).to_double();
    CHECK(v > prev);
    prev = v;
  }
  prev = 0.0;
  for (std::uint64_t N : {1, 2, 10, 40}) {
    const double v = equilibrium_lower_bound(ExactParam::parse("0.3"), ExactParam::parse("1"), N, bigfloat()).to_double();
    CHECK(v > prev);
    prev = v;
  }
  const auto t1 = expected_T1(chain("step:2,0,10"), exact());
  CHECK(t1.value.rational() >= b.rational());
  CHECK_THROWS_AS(equilibrium_lower_bound(ExactParam::parse("0"), ExactParam::parse("1"), 3, exact()),
                  ValidationError);
}

TEST_CASE("bound chains from a graph") {
  const auto k4 = LocalityGraph::from_dense(fixtures::complete(4));
  const auto beta = parse_profile("const:0.1"), beta_int = parse_profile("const:0.2");
  auto [u, l] = bound_chains_from_graph(k4, beta, beta_int, ExactParam::parse("1"));
  for (std::uint64_t n : {1, 10, 100}) CHECK(u.gamma.value(n) == l.gamma.value(n));

  const auto star = LocalityGraph::from_dense(fixtures::star(4));
  auto [su, sl] = bound_chains_from_graph(star, beta, beta_int, ExactParam::parse("1"));
  CHECK(su.gamma.value(3) - sl.gamma.value(3) == doctest::Approx(3 * 0.1).epsilon(1e-15));
  const auto tu = hitting_table(su, 200, bigfloat());
  const auto tl = hitting_table(sl, 200, bigfloat());
  for (std::uint64_t n = 1; n <= 200; ++n) CHECK(tl.T_at(n).big() <= tu.T_at(n).big());

  // Vanishing profiles: both chains share the ln(n)/delta asymptote.
  auto [vu, vl] = bound_chains_from_graph(star, parse_profile("harmonic:1"), parse_profile("harmonic:1"),
                                          ExactParam::parse("1"));
  const auto ru = asymptote_ratio(vu, {100, 100000}, bigfloat());
  const auto rl = asymptote_ratio(vl, {100, 100000}, bigfloat());
  CHECK(std::abs(ru[1].ratio - rl[1].ratio) < std::abs(ru[0].ratio - rl[0].ratio) / 2);
}
