#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "sdepi/errors.hpp"
#include "sdepi/regime.hpp"

using namespace sdepi;

TEST_CASE("symmetric classification on K3") {
  // lambda_r(K3) = 2, so the threshold with beta = 1, beta_int = 0.5 is 2.5.
  CHECK(classify_symmetric(2.0, 1.0, 0.5, 3.0).regime == Regime::FastExtinction);
  CHECK(classify_symmetric(2.0, 1.0, 0.5, 2.0).regime == Regime::LongLasting);
  CHECK(classify_symmetric(2.0, 1.0, 0.5, 2.5).regime == Regime::Indeterminate);
  CHECK(classify_symmetric(2.0, 1.0, 0.5, 2.5 * (1 + 1e-10)).regime == Regime::Indeterminate);
  CHECK(classify_symmetric(2.0, 1.0, 0.5, 2.5 * (1 + 1e-7)).regime == Regime::FastExtinction);
  const auto r = classify_symmetric(2.0, 1.0, 0.5, 3.0);
  CHECK(r.threshold == 2.5);
  CHECK(r.margin == 0.5);
  CHECK(r.method == ClassifyMethod::SymmetricSpectral);

  const auto g = LocalityGraph::from_dense(fixtures::complete(3));
  const auto gen = classify_general(g, DiagonalModulation::identity(3), 1.0, 0.5, 3.0);
  CHECK(gen.threshold == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(gen.regime == Regime::FastExtinction);
  CHECK(is_symmetric(g));
}

TEST_CASE("invalid inputs") {
  const auto g = LocalityGraph::from_dense(fixtures::complete(3));
  CHECK_THROWS_AS(classify_symmetric(2.0, 1.0, 0.5, 0.0), ValidationError);
  CHECK_THROWS_AS(classify_symmetric(2.0, -1.0, 0.5, 1.0), ValidationError);
  CHECK_THROWS_AS(classify_scalar_D(g, 0.0, 1.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(classify_decoupled(g, DiagonalModulation::identity(4), 1.0, 1.0, 1.0), ValidationError);
}

TEST_CASE("the methods reduce to each other") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + trial % 12;
    const auto sym = LocalityGraph::from_dense(fixtures::random_symmetric(rng, n, 0.6));
    const double b = u(rng), bi = u(rng), delta = u(rng) * 3;
    const double lambda = spectral_radius(sym.weights()).radius;
    const auto s = classify_symmetric(lambda, b, bi, delta);
    const auto gen = classify_general(sym, DiagonalModulation::identity(n), b, bi, delta);
    CHECK(gen.threshold == doctest::Approx(s.threshold).epsilon(1e-9));

    // For symmetric G and D = I both Weyl bounds collapse onto the threshold.
    const auto dec = classify_decoupled(sym, DiagonalModulation::identity(n), b, bi, delta);
    CHECK(dec.detail->upper == doctest::Approx(s.threshold).epsilon(1e-9));
    CHECK(dec.detail->lower == doctest::Approx(s.threshold).epsilon(1e-9));

    const auto dir = LocalityGraph::from_dense(fixtures::random_strongly_connected(rng, n, 0.4));
    const double eta = u(rng);
    const auto sc = classify_scalar_D(dir, eta, b, bi, delta);
    const auto gd = classify_general(dir, DiagonalModulation::scalar(n, eta), b, bi, delta);
    CHECK(sc.threshold == doctest::Approx(gd.threshold).epsilon(1e-9));
    CHECK(sc.regime == gd.regime);
  }
}

TEST_CASE("decoupled bounds bracket the general threshold") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 15;
    const auto g = LocalityGraph::from_dense(fixtures::random_strongly_connected(rng, n, 0.3));
    std::vector<double> dv(n);
    for (auto& x : dv) x = u(rng);
    const DiagonalModulation D(dv);
    const double b = u(rng), bi = u(rng);
    const auto gen = classify_general(g, D, b, bi, 1.0);
    const auto dec = classify_decoupled(g, D, b, bi, 1.0);
    CHECK(dec.detail->lower <= gen.threshold * (1 + 1e-9));
    CHECK(gen.threshold <= dec.detail->upper * (1 + 1e-9));
    for (double delta : {0.5 * dec.detail->lower, 2.0 * dec.detail->upper}) {
      const auto a = classify_decoupled(g, D, b, bi, delta);
      const auto c = classify_general(g, D, b, bi, delta);
      CHECK(a.regime != Regime::Indeterminate);
      CHECK(a.regime == c.regime);
    }
  }
}

TEST_CASE("monotone in delta, invariant under joint scaling") {
  std::mt19937_64 rng(47);
  const auto g = LocalityGraph::from_dense(fixtures::random_strongly_connected(rng, 8, 0.3));
  const DiagonalModulation D({1, 2, 0.5, 1, 1, 3, 1, 0.7});
  const double thr = classify_general(g, D, 1.3, 0.4, 1.0).threshold;
  auto rank = [](Regime r) { return r == Regime::LongLasting ? 0 : r == Regime::Indeterminate ? 1 : 2; };
  int last = 0;
  for (int i = 1; i <= 60; ++i) {
    const double delta = thr * i / 30.0;
    const int now = rank(classify_general(g, D, 1.3, 0.4, delta).regime);
    CHECK(now >= last);
    last = now;
    for (double c : {0.01, 7.0}) {
      const auto scaled = classify_general(g, D, 1.3 * c, 0.4 * c, delta * c);
      CHECK(rank(scaled.regime) == now);
    }
  }
}

TEST_CASE("disconnected graphs are flagged") {
  sdepi::Matrix m = sdepi::Matrix::Zero(3, 3);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  const auto g = LocalityGraph::from_dense(m);
  const auto r = classify_general(g, DiagonalModulation::identity(3), 1.0, 1.0, 5.0);
  CHECK_FALSE(r.strongly_connected);
  CHECK(r.regime == Regime::FastExtinction);
  CHECK(classify_general(LocalityGraph::from_dense(fixtures::complete(3)), DiagonalModulation::identity(3), 1, 1, 5)
            .strongly_connected);
}
