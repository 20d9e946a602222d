#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "diraccbd/error.hpp"
#include "diraccbd/signal.hpp"
#include "support.hpp"

using namespace diraccbd;
using testsupport::kG;

TEST_SUITE("signal-core") {
  TEST_CASE("impulse vector stores no zeros") {
    ImpulseVector v{{0, 1.0}, {2, 0.0}};
    CHECK(v.size() == 1);
    v.accumulate(0, -1.0);
    CHECK(v.empty());
    v.set(3, 4.0);
    v.set(3, 0.0);
    CHECK(v.empty());
    v.accumulate(1, -0.0);
    CHECK(v.empty());
  }

  TEST_CASE("add_samples") {
    CHECK(add_samples({1, 1, {}}, {2, 2, {{0, 3}}}) == StepSample{3, 3, {{0, 3}}});
    const auto cancelled = add_samples({0, 0, {{0, 3}}}, {0, 0, {{0, -3}}});
    CHECK(cancelled == StepSample{0, 0, {}});
    CHECK_FALSE(cancelled.has_impulses());
    CHECK(add_samples({1, 2, {{1, 5}}}, {4, 8, {{0, 2}, {1, -1}}}) == StepSample{5, 10, {{0, 2}, {1, 4}}});
  }

  TEST_CASE("negate_sample") {
    CHECK(negate_sample({0, 0, {}}) == StepSample{0, 0, {}});
    CHECK(negate_sample({1, -2, {{0, 3}}}) == StepSample{-1, 2, {{0, -3}}});
  }

  TEST_CASE("shift_orders_up") {
    CHECK(shift_orders_up({}).empty());
    CHECK(shift_orders_up({{0, 2.5}}) == ImpulseVector{{1, 2.5}});
    CHECK(shift_orders_up({{0, 1}, {2, -4}}) == ImpulseVector{{1, 1}, {3, -4}});
  }

  TEST_CASE("extract_order_zero") {
    auto [j0, r0] = extract_order_zero({});
    CHECK(j0 == 0.0);
    CHECK(r0.empty());

    const double kick = 2.0 * std::sqrt(2.0 * kG * 10.0);  // -2 v(t_c-) for a drop from 10 m
    auto [j1, r1] = extract_order_zero({{0, kick}});
    CHECK(j1 == kick);
    CHECK(j1 == doctest::Approx(28.0143).epsilon(1e-6));
    CHECK(r1.empty());

    auto [j2, r2] = extract_order_zero({{0, 1}, {2, 20}});
    CHECK(j2 == 1.0);
    CHECK(r2 == ImpulseVector{{1, 20}});
  }

  TEST_CASE("leibniz_product examples") {
    const double c = 3.25, a = -1.5;
    const std::vector<double> u0{c};
    CHECK(leibniz_product(u0, {{0, a}}) == ImpulseVector{{0, a * c}});

    const double t = 1.44;
    const std::vector<double> line{-t * kG, -kG, 0.0};
    const auto p = leibniz_product(line, {{2, 20}});
    CHECK(p.size() == 2);
    CHECK(p.at(2) == doctest::Approx(-28.8 * kG).epsilon(1e-12));
    CHECK(p.at(1) == doctest::Approx(40 * kG).epsilon(1e-12));

    const double u = 0.7, du = -2.3;
    const std::vector<double> ud{u, du};
    CHECK(leibniz_product(ud, {{1, 1}}) == ImpulseVector{{1, u}, {0, -du}});
  }

  TEST_CASE("leibniz_product needs enough derivatives") {
    const std::vector<double> u{1.0, 2.0};
    try {
      (void)leibniz_product(u, {{2, 1.0}});
      FAIL("expected an error");
    } catch (const CbdError& e) {
      CHECK(e.code() == ErrorCode::InsufficientDerivatives);
    }
    CHECK(leibniz_product(u, {}).empty());
  }

  TEST_CASE("binomial") {
    for (unsigned n = 0; n <= 20; ++n) {
      for (unsigned k = 0; k <= n + 1; ++k) {
        CHECK(binomial(n, k) == static_cast<double>(testsupport::pascal(n, k)));
      }
    }
  }

  TEST_CASE("property: addition is commutative and associative") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
      const auto a = testsupport::random_sample(rng);
      const auto b = testsupport::random_sample(rng);
      const auto c = testsupport::random_sample(rng);
      CHECK(add_samples(a, b) == add_samples(b, a));
      const auto l = add_samples(add_samples(a, b), c);
      const auto r = add_samples(a, add_samples(b, c));
      // two roundings, each at most half an ulp of a partial sum
      auto sum_close = [](double x, double y, double p, double q, double z) {
        return std::abs(x - y) <= 2.0 * std::numeric_limits<double>::epsilon() * (std::abs(p) + std::abs(q) + std::abs(z));
      };
      CHECK(sum_close(l.left, r.left, a.left, b.left, c.left));
      CHECK(sum_close(l.right, r.right, a.right, b.right, c.right));
      for (unsigned o = 0; o <= 3; ++o) {
        CHECK(sum_close(l.impulses.at(o), r.impulses.at(o), a.impulses.at(o), b.impulses.at(o), c.impulses.at(o)));
      }
    }
  }

  TEST_CASE("property: negation is an involution") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
      const auto a = testsupport::random_sample(rng);
      CHECK(negate_sample(negate_sample(a)) == a);
    }
  }

  TEST_CASE("property: extract undoes shift") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
      const auto v = testsupport::random_impulses(rng, 6);
      auto [jump, rest] = extract_order_zero(shift_orders_up(v));
      CHECK(jump == 0.0);
      CHECK(rest == v);
    }
  }

  TEST_CASE("property: unit smooth factor is the identity") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 500; ++i) {
      const auto v = testsupport::random_impulses(rng, 6);
      std::vector<double> u(7, 0.0);
      u[0] = 1.0;
      CHECK(leibniz_product(u, v) == v);
    }
  }

  TEST_CASE("property: leibniz_product matches the termwise expansion") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
      const auto v = testsupport::random_impulses(rng, 4);
      std::vector<double> u(5);
      for (auto& x : u) x = d(rng);
      const auto got = testsupport::dense(leibniz_product(u, v), 5);
      const auto want = testsupport::brute_force_product(u, testsupport::dense(v, 5));
      for (std::size_t o = 0; o < 5; ++o) {
        // magnitude of the largest term feeding this order bounds the rounding
        double scale = 0.0;
        for (std::size_t j = o; j < 5; ++j) {
          scale = std::max(scale, std::abs(v.at(static_cast<unsigned>(j))) *
                                      static_cast<double>(testsupport::pascal(static_cast<unsigned>(j),
                                                                              static_cast<unsigned>(j - o))) *
                                      std::abs(u[j - o]));
        }
        CHECK(std::abs(got[o] - want[o]) <= 1e-12 * std::max(scale, 1e-300));
      }
    }
  }
}
