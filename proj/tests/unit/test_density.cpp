#include <alphacf/density.hpp>
#include <alphacf/error.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace alphacf;

namespace {

const double G = (std::sqrt(5.0) + 1.0) / 2.0;
const double g = (std::sqrt(5.0) - 1.0) / 2.0;

// The three displayed closed forms, transcribed directly.
double rho_ref(double a, double x) {
  if (a > g) {
    const double c = 1.0 / std::log(1.0 + a);
    return x <= (1.0 - a) / a ? c / (x + 2.0) : c / (x + 1.0);
  }
  const double c = 1.0 / std::log(G);
  if (a > 0.5) {
    if (x <= (1.0 - 2.0 * a) / a) return c / (x + G + 1.0);
    if (x < (2.0 * a - 1.0) / (1.0 - a)) return c / (x + 2.0);
    return c / (x + G);
  }
  if (x < (2.0 * a - 1.0) / (1.0 - a)) return c / (x + G + 1.0);
  if (x < (1.0 - 2.0 * a) / a) return c * (1.0 / (x + G + 1.0) + 1.0 / (x + G) - 1.0 / (x + 2.0));
  return c / (x + G);
}

double exact_h(double a) {
  const double p = std::numbers::pi * std::numbers::pi / 6.0;
  return a > g ? p / std::log(1.0 + a) : p / std::log(G);
}

}  // namespace

TEST_SUITE("density") {
  TEST_CASE("closed forms match the displayed formulas") {
    for (double a : {kSqrt2Minus1 + 1e-9, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.8, 0.95, 1.0}) {
      const Density d = closed_form_density(a);
      for (int k = 1; k < 1000; ++k) {
        const double x = a - 1.0 + k / 1000.0;
        REQUIRE(eval_density(d, x) == doctest::Approx(rho_ref(a, x)).epsilon(1e-12));
      }
      CHECK(integral(d) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("closed form breakpoints") {
    auto has = [](const std::vector<double>& v, double x) {
      for (double b : v) {
        if (std::abs(b - x) < 1e-12) return true;
      }
      return false;
    };
    auto b = closed_form_density(0.45).breakpoints();
    CHECK(has(b, -2.0 / 11.0));
    CHECK(has(b, 2.0 / 9.0));
    b = closed_form_density(0.7).breakpoints();
    CHECK(has(b, 3.0 / 7.0));
    CHECK(eval_density(closed_form_density(1.0), 1e-12) == doctest::Approx(1.0 / std::log(2.0)));
  }

  TEST_CASE("unsupported alpha") {
    try {
      closed_form_density(0.2);
      FAIL("expected UnsupportedAlpha");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnsupportedAlpha);
    }
  }

  TEST_CASE("regimes agree at alpha = 1/2") {
    const Density a = closed_form_density(0.5, ClosedFormRegime::Prop1);
    const Density b = closed_form_density(0.5, ClosedFormRegime::Golden);
    CHECK(l1_distance(a, b) < 1e-8);
    const Density c = closed_form_density(kGolden, ClosedFormRegime::Golden);
    const Density d = closed_form_density(kGolden, ClosedFormRegime::Gauss);
    CHECK(l1_distance(c, d) < 1e-8);
  }

  TEST_CASE("closed forms are bounded below") {
    for (double a : {0.42, 0.5, 0.6, 0.75, 1.0}) {
      const Density d = closed_form_density(a);
      double lo = 1e300;
      for (int k = 0; k <= 10000; ++k) lo = std::min(lo, eval_density(d, a - 1.0 + k / 10000.0));
      CHECK(lo > 0.0);
    }
  }

  TEST_CASE("rohlin entropy against the explicit values") {
    for (double a : {0.45, 0.5, 0.55, 0.65, 0.8, 1.0}) {
      CHECK(std::abs(rohlin_entropy(closed_form_density(a)) - exact_h(a)) < 1e-6);
    }
    CHECK(rohlin_entropy(closed_form_density(0.5)) == doctest::Approx(3.418315971).epsilon(1e-9));
  }

  TEST_CASE("l1 distance is a metric on examples") {
    const Density a = closed_form_density(0.7);
    const Density b = closed_form_density(0.9);
    CHECK(l1_distance(a, a) == 0.0);
    CHECK(l1_distance(a, b) == doctest::Approx(l1_distance(b, a)));
  }

  TEST_CASE("ulam density") {
    const AlphaContext ctx(1.0);
    const auto u = ulam_density(ctx);
    CHECK(u.converged);
    CHECK(u.bin_count() == 4096);
    const Density d = u;
    CHECK(integral(d) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(u(1e-6) == doctest::Approx(1.0 / std::log(2.0)).epsilon(2e-3));
    for (double w : u.weights) CHECK(w >= 0.0);
    CHECK(l1_distance(d, closed_form_density(1.0)) < 0.02);
    CHECK(l1_distance(Density{ulam_density(AlphaContext(0.5))}, closed_form_density(0.5)) < 0.02);
  }

  TEST_CASE("ulam matrix is row stochastic and fixes the density") {
    const AlphaContext ctx(0.3);
    const auto m = ulam_matrix(ctx, 512);
    REQUIRE(m.row_start.size() == 513);
    for (std::size_t k = 0; k < 512; ++k) {
      double s = 0.0;
      for (std::size_t e = m.row_start[k]; e < m.row_start[k + 1]; ++e) s += m.val[e];
      REQUIRE(s == doctest::Approx(1.0).epsilon(1e-10));
    }
    UlamOptions opt;
    opt.bins = 512;
    const auto u = ulam_density(ctx, opt);
    std::vector<double> mass(u.weights);
    for (double& v : mass) v *= u.bin_width();
    const auto next = m.push(mass);
    double change = 0.0;
    for (std::size_t k = 0; k < mass.size(); ++k) change += std::abs(next[k] - mass[k]);
    CHECK(change < 1e-9);
  }

  TEST_CASE("ulam does not depend on the thread count") {
    UlamOptions one, many;
    one.bins = many.bins = 1024;
    one.par = {1};
    many.par = {8};
    const auto a = ulam_density(AlphaContext(0.37), one);
    const auto b = ulam_density(AlphaContext(0.37), many);
    CHECK(a.weights == b.weights);
  }

  TEST_CASE("series density for alpha = 1/r") {
    const auto s = series_density_one_over_r(3, 6);
    const Density d = s;
    CHECK(integral(d) == doctest::Approx(1.0).epsilon(1e-6));
    for (int k = 1; k < 1000; ++k) CHECK(s(-2.0 / 3.0 + k / 1000.0) > 0.0);
    CHECK(l1_distance(d, Density{ulam_density(AlphaContext(1.0 / 3.0))}) < 0.03);
    CHECK_THROWS_AS(series_density_one_over_r(2, 4), Error);
  }

  TEST_CASE("serialization") {
    const Density d = closed_form_density(0.8);
    const auto csv = density_csv(d, 10);
    CHECK(csv.rfind("x,rho\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
    const auto json = density_json(d);
    CHECK(json.find("\"integral\"") != std::string::npos);
    CHECK(json.find("\"segments\"") != std::string::npos);
  }
}
