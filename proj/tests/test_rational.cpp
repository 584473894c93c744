#include <doctest.h>

#include "ifsm/rational.hpp"

using ifsm::Rational;

TEST_CASE("rational arithmetic is exact and normalized") {
  const Rational half(1, 2), third(1, 3);
  CHECK(half + third == Rational(5, 6));
  CHECK(half - third == Rational(1, 6));
  CHECK(half * third == Rational(1, 6));
  CHECK(half / third == Rational(3, 2));
  CHECK(Rational(2, 4) == half);
  CHECK(Rational(-1, -2) == half);
  CHECK(Rational(1, -2) == -half);
  CHECK(half < Rational(2, 3));
  CHECK(Rational(7, 8).ceil() == 1);
  CHECK(Rational(7, 8).floor() == 0);
  CHECK(Rational(-7, 8).ceil() == 0);
  CHECK(Rational(-7, 8).floor() == -1);
  CHECK(Rational(16, 4).is_integer());
}

TEST_CASE("rational from double is exact for dyadics") {
  CHECK(Rational::from_double(0.5) == Rational(1, 2));
  CHECK(Rational::from_double(-0.375) == Rational(-3, 8));
  CHECK(Rational::from_double(0.0) == Rational(0));
  CHECK(Rational::from_double(3.0) == Rational(3));
  // 0.1 is not dyadic; its double is some exact rational with a 2^k
  // denominator whose value converts back bit-exactly.
  const Rational tenth = Rational::from_double(0.1);
  CHECK(tenth.to_double() == 0.1);
  CHECK(tenth != Rational(1, 10));
  CHECK_THROWS_AS(Rational::from_double(1.0 / 0.0), std::invalid_argument);
}
