#include <doctest.h>

#include "kmsf/errors.hpp"
#include "kmsf/rational.hpp"

using kmsf::Rational;

TEST_CASE("rational literals and canonical form") {
  CHECK(Rational::parse("6/4") == Rational(3, 2));
  CHECK(Rational::parse(" -2/-4 ") == Rational(1, 2));
  CHECK(Rational::parse("7").str() == "7");
  CHECK(Rational(-3, 6).str() == "-1/2");
  CHECK_THROWS_AS(Rational::parse("1.5"), kmsf::ParseError);
  CHECK_THROWS_AS(Rational::parse("1/"), kmsf::ParseError);
  CHECK_THROWS_AS(Rational::parse("1/0"), kmsf::DivisionByZero);
}

TEST_CASE("rational arithmetic") {
  const Rational a(2, 3), b(-5, 7);
  CHECK(a + b == Rational(-1, 21));
  CHECK(a * b == Rational(-10, 21));
  CHECK(a / b == Rational(-14, 15));
  CHECK(a.pow(-2) == Rational(9, 4));
  CHECK(b < a);
  CHECK_THROWS_AS(a / Rational(0), kmsf::DivisionByZero);
}

TEST_CASE("rational square roots") {
  CHECK(Rational(9, 16).sqrt() == Rational(3, 4));
  CHECK_FALSE(Rational(2).sqrt().has_value());
  CHECK_FALSE(Rational(-4).sqrt().has_value());
  CHECK(Rational(0).sqrt() == Rational(0));
}
