#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracle.hpp"
#include "support.hpp"

using namespace qseries;
using qtest::agree;
using qtest::c;
using qtest::Env;

TEST_CASE("make_context accepts valid limits and rejects the rest") {
  const PrecisionContext def = make_context(200, 30, 10000, 200);
  CHECK(def.precision_bits() == 200);
  CHECK(def.tolerance_digits() == 30);
  CHECK(def.max_terms() == 10000);
  CHECK(def.max_window() == 200);
  CHECK(def.pole_guard_digits() == 25);
  CHECK(def == PrecisionContext());

  const PrecisionContext small = make_context(64, 5, 100, 50);
  CHECK(small.max_window() == 50);

  CHECK_THROWS_AS(make_context(64, 60, 100, 50), ArgumentError);
  CHECK_THROWS_AS(make_context(63, 5, 100, 50), ArgumentError);
  CHECK_THROWS_AS(make_context(200, 0, 100, 50), ArgumentError);
  CHECK_THROWS_AS(make_context(200, 30, 15, 50), ArgumentError);
  CHECK_THROWS_AS(make_context(200, 30, 100, 7), ArgumentError);
  // 50 digits need 166 bits plus the 32-bit margin.
  CHECK_THROWS_AS(make_context(197, 50, 100, 50), ArgumentError);
  CHECK_NOTHROW(make_context(199, 50, 100, 50));
}

TEST_CASE("with_precision keeps the other limits") {
  const PrecisionContext base = make_context(128, 20, 500, 40);
  const PrecisionContext high = base.with_precision(192);
  CHECK(high.precision_bits() == 192);
  CHECK(high.tolerance_digits() == 20);
  CHECK(high.max_terms() == 500);
  CHECK(high.max_window() == 40);
}

TEST_CASE("precision scope installs and restores the default") {
  const auto before = Real::default_precision();
  {
    qseries::PrecisionScope outer(make_context(256, 30, 100, 50));
    CHECK(Real(1).precision() >= 77);
    {
      qseries::PrecisionScope inner(make_context(96, 10, 100, 50));
      CHECK(Real(1).precision() < 40);
    }
    CHECK(Real(1).precision() >= 77);
  }
  CHECK(Real::default_precision() == before);
}

TEST_CASE("root_of_unity examples") {
  Env env;
  CHECK(root_of_unity(2, 1).value == HPComplex(-1));
  CHECK(root_of_unity(4, 2).value == HPComplex(-1));
  CHECK(root_of_unity(4, 1).value == HPComplex(0, 1));
  const HPComplex rho = root_of_unity(3, 1).value;
  const HPComplex expected(Real(-0.5), boost::multiprecision::sqrt(Real(3)) / 2);
  CHECK(agree(rho, expected, 58));
  CHECK(root_of_unity(5, -1).exponent == 4);
  CHECK(root_of_unity(5, 12).exponent == 2);
  CHECK(root_of_unity(1, 7).value == HPComplex(1));
  CHECK_THROWS_AS(root_of_unity(0, 1), ArgumentError);
  CHECK_THROWS_AS(root_of_unity(-3, 1), ArgumentError);
}

TEST_CASE("roots of unity: inverses, order and orthogonality") {
  Env env;
  const Real tol = env.ctx.tolerance();
  for (std::int64_t r = 1; r <= 12; ++r) {
    for (std::int64_t i = 0; i < r; ++i) {
      const HPComplex z = root_of_unity(r, i).value;
      CHECK(abs(z * root_of_unity(r, r - i).value - HPComplex(1)) < tol);
      CHECK(abs(pow(z, r) - HPComplex(1)) < tol);
      CHECK(agree(z, oracle::unit_root(r, i), 55));
    }
    for (std::int64_t j = -2 * r; j <= 2 * r; ++j) {
      HPComplex s(0);
      for (std::int64_t i = 0; i < r; ++i) s += root_of_unity(r, i * j).value;
      if (j % r == 0) {
        CHECK(abs(s - HPComplex(Real(r))) < tol);
      } else {
        CHECK(abs(s) < tol);
      }
    }
  }
}

TEST_CASE("q_triangular_power examples") {
  Env env;
  const HPComplex q = c("0.5");
  CHECK(q_triangular_power(q, 0) == HPComplex(1));
  CHECK(q_triangular_power(q, 1) == HPComplex(1));
  CHECK(q_triangular_power(q, 3) == c("0.125"));
  CHECK(q_triangular_power(q, 4) == c("0.015625"));
  CHECK_THROWS_AS(q_triangular_power(q, -1), ArgumentError);
}

TEST_CASE("q_triangular_power steps by q^k") {
  Env env;
  for (const char* text : {"0.5", "0.3+0.4i", "-0.7-0.1i", "0.999"}) {
    const HPComplex q = c(text);
    for (std::int64_t k = 0; k < 120; ++k) {
      const HPComplex lhs = q_triangular_power(q, k) * pow(q, k);
      CHECK(agree(lhs, q_triangular_power(q, k + 1), 55));
    }
  }
}

TEST_CASE("q_triangular_power exponent does not overflow machine integers") {
  Env env;
  // k(k-1)/2 for k = 100003 is 5000250003, past 2^32 and odd.
  CHECK(q_triangular_power(HPComplex(-1), 100003) == HPComplex(-1));
  CHECK(q_triangular_power(HPComplex(-1), 100001) == HPComplex(1));
  CHECK(q_triangular_power(HPComplex(0, 1), 100003) == pow(HPComplex(0, 1), 3));
  const HPComplex q = c("0.9999999");
  const HPComplex v = q_triangular_power(q, 100003);
  const HPComplex expected = exp(HPComplex(Real(5000250003LL)) * log(q));
  CHECK(agree(v / expected, HPComplex(1), 40));
}

TEST_CASE("integer powers and exponent weights") {
  Env env;
  const HPComplex q = c("0.3-0.2i");
  CHECK(agree(pow(q, -3) * pow(q, 3), HPComplex(1), 58));
  CHECK(agree(pow(q, BigInt(40)), oracle::ipow(q, 40), 55));
  CHECK_THROWS_AS(pow(HPComplex(0), -1), PoleError);
  CHECK(quadratic_weight(q, Rational(2), 3) == pow(q, 18));
  const HPComplex real_q = c("0.4");
  const HPComplex half = quadratic_weight(real_q, Rational(1, 2), 3);
  CHECK(agree(half, exp(HPComplex(Real(4.5)) * log(real_q)), 58));
  CHECK_THROWS_AS(quadratic_weight(q, Rational(1, 2), 3), DomainError);
  CHECK_THROWS_AS(rational_power(c("-0.4"), Rational(1, 3)), DomainError);
  CHECK(rational_power(q, Rational(0)) == HPComplex(1));
}

TEST_CASE("Rational validates and parses") {
  CHECK(Rational::parse("3").num() == 3);
  const Rational r = Rational::parse("6/4");
  CHECK(r.num() == 3);
  CHECK(r.den() == 2);
  CHECK(r.str() == "3/2");
  CHECK(Rational(4, 2).is_integer());
  CHECK_THROWS_AS(Rational(1, 13), ArgumentError);
  CHECK_THROWS_AS(Rational(-1, 2), ArgumentError);
  CHECK_THROWS_AS(Rational(1, 0), ArgumentError);
  CHECK_THROWS_AS(Rational::parse("x"), ArgumentError);
  CHECK_THROWS_AS(Rational::parse("1/"), ArgumentError);
}

TEST_CASE("parse_complex accepts the documented forms") {
  Env env;
  CHECK(c("1.5") == HPComplex(1.5));
  CHECK(c("1.5+2i") == HPComplex(1.5, 2));
  CHECK(c("1.5-2i") == HPComplex(1.5, -2));
  CHECK(c("2i") == HPComplex(0, 2));
  CHECK(c("-i") == HPComplex(0, -1));
  CHECK(c("1e-3-2.5e2i") == HPComplex(Real("1e-3"), Real(-250)));
  // Decimal input is exact at working precision, not rounded through double.
  CHECK(c("0.1").re() == Real("0.1"));
  CHECK(c("0.1").re() != Real(0.1));
  CHECK_THROWS_AS(c("abc"), ArgumentError);
  CHECK_THROWS_AS(c(""), ArgumentError);
  CHECK_THROWS_AS(c("1+"), ArgumentError);
  CHECK_THROWS_AS(c("1.2.3"), ArgumentError);
}

TEST_CASE("elementary functions at working precision") {
  Env env;
  CHECK(qseries::to_decimal(pi(), 41) == "3.1415926535897932384626433832795028841972e+00");
  const HPComplex z = c("0.3+1.7i");
  CHECK(agree(exp(log(z)), z, 58));
  CHECK(agree(z / z, HPComplex(1), 59));
  CHECK(agree(conj(z) * z, HPComplex(norm(z)), 59));
  CHECK(qseries::to_decimal(Real(2), 3) == "2.00e+00");
}
