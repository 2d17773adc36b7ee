#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "negobench/rational.hpp"
#include "negobench/rng.hpp"

using negobench::Rational;

TEST_CASE("construction normalizes") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-2, 4) == Rational(-1, 2));
  CHECK(Rational(2, -4) == Rational(-1, 2));
  CHECK(Rational(0, 7) == Rational(0));
  CHECK(Rational(1, 2).den() == 2);
  CHECK(Rational(6, 3).den() == 1);
}

TEST_CASE("arithmetic identities") {
  const Rational a(3, 7), b(-5, 11);
  CHECK(a + b == Rational(3 * 11 - 5 * 7, 77));
  CHECK(a - b == Rational(3 * 11 + 5 * 7, 77));
  CHECK(a * b == Rational(-15, 77));
  CHECK(a / b == Rational(33, -35));
  CHECK((a + b) - b == a);
  CHECK(-a + a == Rational(0));
}

TEST_CASE("ordering is exact") {
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(-1, 3) > Rational(-1, 2));
  CHECK(Rational(2, 6) <= Rational(1, 3));
  CHECK(Rational(2, 6) >= Rational(1, 3));
  // the closest double to 1/3 sits just below it; exact comparison must see that
  const Rational x(6004799503160661, 18014398509481984);
  const Rational y(1, 3);
  CHECK(x < y);
  CHECK(x.to_double() == y.to_double());
}

TEST_CASE("division by zero and overflow throw") {
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
  CHECK_THROWS_AS(Rational(1) / Rational(0), std::domain_error);
  const Rational big(INT64_MAX, 1);
  CHECK_THROWS_AS(big * big, std::overflow_error);
}

TEST_CASE("random field identities") {
  negobench::Rng rng(2024);
  for (int i = 0; i < 2000; ++i) {
    const Rational a(rng.range(-50, 50), rng.range(1, 30));
    const Rational b(rng.range(-50, 50), rng.range(1, 30));
    const Rational c(rng.range(-50, 50), rng.range(1, 30));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK((a + b) + c == a + (b + c));
    if (!b.is_zero()) CHECK(a / b * b == a);
    CHECK((a.abs() >= Rational(0)));
  }
}

TEST_CASE("to_string and to_double") {
  CHECK(Rational(5).to_string() == "5");
  CHECK(Rational(-3, 2).to_string() == "-3/2");
  CHECK(Rational(1, 2).to_double() == 0.5);
}
