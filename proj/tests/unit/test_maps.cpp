#include <alphacf/error.hpp>
#include <alphacf/maps.hpp>
#include <alphacf/rng.hpp>
#include <doctest.h>

#include <cmath>

using namespace alphacf;

namespace {

// T_alpha written out from the definition, without the library.
double t_ref(double alpha, double x) {
  const double u = std::abs(1.0 / x);
  return u - std::floor(u + 1.0 - alpha);
}

}  // namespace

TEST_SUITE("maps") {
  TEST_CASE("t_alpha examples") {
    auto s = t_alpha(AlphaContext(1.0), 2.0 / 3.0);
    CHECK(s.value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.digit == Digit{1, Sign::Plus});

    s = t_alpha(AlphaContext(1.0 / 3.0), -2.0 / 3.0);
    CHECK(s.value == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(s.digit == Digit{2, Sign::Minus});

    s = t_alpha(AlphaContext(0.2), 0.2);
    CHECK(std::abs(s.value) < 1e-15);
    CHECK(s.digit == Digit{5, Sign::Plus});
  }

  TEST_CASE("t_alpha errors") {
    const AlphaContext ctx(0.5);
    CHECK_THROWS_AS(t_alpha(ctx, 0.0), Error);
    try {
      t_alpha(ctx, 0.7);
      FAIL("expected OutOfDomain");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::OutOfDomain);
    }
    try {
      t_alpha(ctx, 1e-300);
      FAIL("expected ZeroArgument");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ZeroArgument);
    }
    CHECK_THROWS_AS(AlphaContext(1.5), Error);
    CHECK_THROWS_AS(AlphaContext(0.0).j_min(), Error);
  }

  TEST_CASE("alpha context constants") {
    const AlphaContext third(1.0 / 3.0);
    CHECK(third.hi() - third.lo() == 1.0);
    CHECK(third.j_min() == 3);
    CHECK(third.one_over_r() == 3);
    CHECK(third.r_digits() == 2);
    CHECK_FALSE(AlphaContext(0.3).one_over_r().has_value());
    CHECK(AlphaContext(1.0 / 7.0 + 1e-16).one_over_r() == 7);
    CHECK(AlphaContext(0.7).r_digits() == 0);
  }

  TEST_CASE("j_min >= 3 below sqrt(2) - 1") {
    Stream s(1, 0);
    for (int k = 0; k < 1000; ++k) {
      const double a = s.uniform(1e-3, kSqrt2Minus1);
      CHECK(AlphaContext(a).j_min() >= 3);
    }
  }

  TEST_CASE("r_digits brackets alpha between v_{r+1} and v_r") {
    Stream s(2, 0);
    for (int k = 0; k < 1000; ++k) {
      const double a = s.uniform(1e-3, kSqrt2Minus1);
      const AlphaContext ctx(a);
      const int r = ctx.r_digits();
      CHECK(v_sequence(r + 1) <= a);
      CHECK(a < v_sequence(r));
      CHECK(r_digits_from_orbit(ctx) == r);
    }
  }

  TEST_CASE("m_alpha and m_zero") {
    CHECK(m_alpha(AlphaContext(0.5), 0.4) == doctest::Approx(0.5));
    auto z = m_zero(0.3);
    CHECK(z.value == doctest::Approx(4.0 - 1.0 / 0.3));
    CHECK(z.digit.j == 4);
    const double beta = 2.0 - std::sqrt(3.0);
    z = m_zero(beta);
    CHECK(z.value == doctest::Approx(beta).epsilon(1e-13));
    CHECK(z.digit.j == 4);
    CHECK(m_zero(1.0).value == doctest::Approx(1.0));
    CHECK_THROWS_AS(m_zero(0.0), Error);
    CHECK_THROWS_AS(m_zero(1.5), Error);
  }

  TEST_CASE("t_alpha range and agreement with the definition") {
    Stream s(3, 0);
    for (int k = 0; k < 100000; ++k) {
      const double a = s.uniform(0.01, 1.0);
      const AlphaContext ctx(a);
      const double x = s.uniform(a - 1.0, a);
      const double v = t_alpha(ctx, x).value;
      REQUIRE(v >= a - 1.0 - 1e-12);
      REQUIRE(v <= a + 1e-12);
      REQUIRE(v == t_ref(a, x));
    }
  }

  TEST_CASE("M_alpha is |T_alpha| on positive arguments") {
    Stream s(4, 0);
    for (int k = 0; k < 10000; ++k) {
      const double a = s.uniform(0.05, 1.0);
      const AlphaContext ctx(a);
      const double x = s.uniform(0.0, std::max(a, 1.0 - a));
      for (double y : {x, -x}) {
        if (!ctx.contains(y, 0.0)) continue;
        REQUIRE(std::abs(t_alpha(ctx, y).value) == doctest::Approx(m_alpha(ctx, x)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("endpoint orbit for alpha = 1/r") {
    for (int r = 3; r <= 8; ++r) {
      const auto ctx = AlphaContext::one_over(r);
      double x = ctx.lo();
      for (int i = 0; i <= r - 2; ++i) {
        CHECK(x == doctest::Approx(-static_cast<double>(r - i - 1) / (r - i)).epsilon(1e-12));
        x = t_alpha(ctx, x).value;
      }
      CHECK(std::abs(t_alpha(ctx, ctx.hi()).value) < 1e-12);
    }
  }

  TEST_CASE("c points") {
    const AlphaContext ctx(1.0 / 3.0);
    const auto c = c_points(ctx);
    REQUIRE(c.size() == 4);
    CHECK(c[0] == doctest::Approx(1.0 / 3.0));
    CHECK(c[1] == doctest::Approx(-3.0 / 7.0));
    CHECK(c[2] == doctest::Approx(-7.0 / 11.0));
    CHECK(c[3] == doctest::Approx(-2.0 / 3.0));
    CHECK(v_sequence(1) == doctest::Approx(kGolden));
    CHECK(v_sequence(2) == doctest::Approx((std::sqrt(3.0) - 1.0) / 2.0));
    Stream s(5, 0);
    for (int k = 0; k < 200; ++k) {
      const AlphaContext cx(s.uniform(0.01, kSqrt2Minus1));
      const auto cs = c_points(cx);
      for (std::size_t j = 1; j + 1 < cs.size(); ++j) {
        const double jj = static_cast<double>(j);
        CHECK(-jj / (jj + 1.0) < cs[j]);
        CHECK(cs[j] <= -(jj - 1.0) / jj + 1e-15);
      }
    }
  }

  TEST_CASE("jump map") {
    const AlphaContext ctx(1.0 / 3.0);
    auto j = jump_map(ctx, 0.1);
    CHECK(j.tau == 1);
    CHECK(j.value == doctest::Approx(t_alpha(ctx, 0.1).value));
    CHECK(jump_map(ctx, -0.55).tau == 2);
    try {
      jump_map(ctx, -0.5);  // T(-1/2) = 0
      FAIL("expected ZeroArgument");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ZeroArgument);
    }
    CHECK(jump_map(ctx, -0.65).tau == 3);
    CHECK_THROWS_AS(jump_map(ctx, -3.0 / 7.0), Error);

    Stream s(6, 0);
    for (int k = 0; k < 10000; ++k) {
      const AlphaContext cx(s.uniform(0.05, kSqrt2Minus1));
      const double x = s.uniform(cx.lo(), cx.hi());
      Jump jm{};
      try {
        jm = jump_map(cx, x);
      } catch (const Error&) {
        continue;
      }
      double y = x;
      for (int i = 0; i < jm.tau; ++i) y = t_alpha(cx, y).value;
      REQUIRE(jm.value == y);
      REQUIRE(jm.tau <= cx.r_digits() + 1);
    }
  }

  TEST_CASE("inverse branches") {
    CHECK(inverse_branch_m0(2, 0.0) == 0.5);
    double y = 0.0;
    for (int k = 0; k < 2000; ++k) y = inverse_branch_m0(2, y);
    CHECK(y == doctest::Approx(1.0).epsilon(1e-3));
    const AlphaContext ctx(1.0 / 3.0);
    const double x = inverse_branch_t(ctx, {2, Sign::Minus}, 0.0);
    CHECK(x == doctest::Approx(-0.5));
    const auto back = t_alpha(ctx, x);
    CHECK(back.value == doctest::Approx(0.0));
    CHECK(back.digit == Digit{2, Sign::Minus});
    CHECK_THROWS_AS(inverse_branch_t(ctx, {2, Sign::Plus}, 0.1), Error);

    Stream s(7, 0);
    for (int k = 0; k < 10000; ++k) {
      const AlphaContext cx(s.uniform(0.05, 1.0));
      const double x0 = s.uniform(cx.lo(), cx.hi());
      const auto st = t_alpha(cx, x0);
      if (st.value == cx.lo() || st.value == cx.hi()) continue;
      REQUIRE(inverse_branch_t(cx, st.digit, st.value) == doctest::Approx(x0).epsilon(1e-12));
    }
  }

  TEST_CASE("rank one cylinder") {
    const AlphaContext ctx(1.0 / 3.0);
    const auto c = rank_one_cylinder(ctx, {2, Sign::Minus});
    REQUIRE(c.has_value());
    CHECK(c->lo == doctest::Approx(-2.0 / 3.0));
    CHECK(c->hi == doctest::Approx(-3.0 / 7.0));
    CHECK_FALSE(rank_one_cylinder(ctx, {2, Sign::Plus}).has_value());
  }

  TEST_CASE("derivative") {
    const AlphaContext ctx(0.25);
    CHECK(derivative_abs(ctx, 0.5) == 4.0);
    CHECK(derivative_abs(ctx, -1.0 / 3.0) == doctest::Approx(9.0));
    CHECK(derivative_abs(ctx, -0.75) == doctest::Approx(1.0 / 0.5625));
    CHECK_THROWS_AS(derivative_abs(ctx, 0.0), Error);
  }

  TEST_CASE("translated map") {
    const AlphaContext same(0.3);
    CHECK(translated_map(same, 0.3, 0.1) == t_alpha(same, 0.1).value);
    CHECK(translated_map(same, 0.28, 0.1) ==
          doctest::Approx(t_alpha(AlphaContext(0.28), 0.08).value + 0.02));
    CHECK(translated_map(AlphaContext(0.0), 0.1, -0.9) ==
          doctest::Approx(t_alpha(AlphaContext(0.1), -0.8).value - 0.1));
    CHECK_THROWS_AS(translated_map(same, 0.28, 0.02), Error);
  }

  TEST_CASE("orbit record") {
    const AlphaContext ctx(0.5);
    const auto rec = orbit(ctx, 0.3141592653589793, 20);
    REQUIRE(rec.points.size() == 20);
    REQUIRE(rec.digits.size() == 20);
    for (std::size_t i = 0; i + 1 < rec.points.size(); ++i) {
      const auto st = t_alpha(ctx, rec.points[i]);
      CHECK(rec.points[i + 1] == st.value);
      CHECK(rec.digits[i] == st.digit);
    }
    const auto z = orbit(AlphaContext(0.2), -0.8, 10);
    CHECK(z.escaped_zero);
    CHECK(z.points.size() == 4);
    CHECK(std::abs(z.stop_point) < 1e-12);
  }
}
