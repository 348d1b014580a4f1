#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mhekit/errors.hpp"
#include "mhekit/funcalc.hpp"

using namespace mhekit;

TEST_CASE("PowerK evaluation and inverse") {
  PowerK k(3.04, 1.0);
  CHECK(k(5.0) == doctest::Approx(15.2));
  CHECK(k(0.0) == 0.0);

  PowerK q(2.0, 2.0);
  CHECK(q(3.0) == doctest::Approx(18.0));
  CHECK(q.inverse(18.0) == doctest::Approx(3.0));

  PowerK qi = q.inverse_fn();
  CHECK(qi.c == doctest::Approx(std::pow(0.5, 0.5)));
  CHECK(qi.a == doctest::Approx(0.5));
  for (double s : {0.1, 1.0, 7.5}) CHECK(qi(q(s)) == doctest::Approx(s));
}

TEST_CASE("PowerK composition and scaling") {
  PowerK outer(2.0, 2.0);
  PowerK inner(3.0, 1.5);

  PowerK comp = outer.compose(inner);
  for (double s : {0.2, 1.0, 4.0})
    CHECK(comp(s) == doctest::Approx(outer(inner(s))).epsilon(1e-12));

  PowerK sa = outer.scale_arg(5.0);
  CHECK(sa(2.0) == doctest::Approx(outer(10.0)));
  CHECK(sa.c == doctest::Approx(2.0 * 25.0));

  PowerK sv = outer.scale_val(0.5);
  CHECK(sv(2.0) == doctest::Approx(4.0));
}

TEST_CASE("PowerK rejects nonpositive parameters") {
  CHECK_THROWS_AS(PowerK(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PowerK(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("DecayL families") {
  DecayL e = DecayL::exponential(0.9);
  CHECK(e(0.0) == 1.0);
  CHECK(e(2.0) == doctest::Approx(0.81));

  DecayL r = DecayL::rational(2.0);
  CHECK(r(0.0) == 1.0);
  CHECK(r(3.0) == doctest::Approx(1.0 / 16.0));

  // l^e stays in the family: exponential rescales the base, rational the
  // exponent.
  DecayL eh = e.pow(0.5);
  CHECK(eh.family == DecayFamily::Exponential);
  CHECK(eh.b == doctest::Approx(std::sqrt(0.9)));
  DecayL rh = r.pow(3.0);
  CHECK(rh.family == DecayFamily::Rational);
  CHECK(rh.b == doctest::Approx(6.0));

  CHECK_THROWS_AS(DecayL::exponential(1.0), std::invalid_argument);
  CHECK_THROWS_AS(DecayL::exponential(0.0), std::invalid_argument);
  CHECK_THROWS_AS(DecayL::rational(0.0), std::invalid_argument);
}

TEST_CASE("ProductKL evaluates k(s) l(t)") {
  ProductKL beta{PowerK(3.04, 1.0), DecayL::exponential(0.9)};
  CHECK(beta(1.0, 0.0) == doctest::Approx(3.04));
  CHECK(beta(2.0, 1.0) == doctest::Approx(3.04 * 2.0 * 0.9));

  ProductKL br{PowerK(3.04, 1.0), DecayL::rational(-std::log(0.9))};
  CHECK(br(1.0, 0.0) == doctest::Approx(3.04));
  CHECK(br(1.0, 3.0) == doctest::Approx(3.04 * std::pow(4.0, std::log(0.9))));
}

TEST_CASE("exp_to_rational minimal coefficients") {
  ProductKL beta{PowerK(3.04, 1.0), DecayL::exponential(0.9)};

  SUBCASE("b1' = 1: max of 3.04 * 0.9^t (t+1) sits at t = 8 and 9") {
    ProductKL loose = exp_to_rational(beta, 1.0);
    CHECK(loose.l.family == DecayFamily::Rational);
    CHECK(loose.l.b == doctest::Approx(1.0));
    CHECK(loose.k.a == doctest::Approx(1.0));
    CHECK(loose.k.c == doctest::Approx(11.7775828656).epsilon(1e-9));
  }

  SUBCASE("b1' = -ln b1 keeps the coefficient") {
    ProductKL loose = exp_to_rational(beta, -std::log(0.9));
    CHECK(loose.k.c == doctest::Approx(3.04).epsilon(1e-12));
  }

  SUBCASE("the rational form dominates the exponential pointwise") {
    for (double bp : {0.05, -std::log(0.9), 0.5, 1.0, 2.0}) {
      ProductKL loose = exp_to_rational(beta, bp);
      for (int t = 0; t <= 100; ++t)
        CHECK(loose(1.7, static_cast<double>(t)) >=
              beta(1.7, static_cast<double>(t)) - 1e-12);
    }
  }

  CHECK_THROWS_AS(exp_to_rational(beta, 0.0), std::invalid_argument);
  ProductKL already{PowerK(1.0, 1.0), DecayL::rational(1.0)};
  CHECK_THROWS_AS(exp_to_rational(already, 1.0), MixedFamilies);
}
