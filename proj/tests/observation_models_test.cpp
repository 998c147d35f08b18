#include "secretballot/observation_models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

using namespace secretballot;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

LikelihoodModel unit_gaussian() {
  return LikelihoodModel::gaussian_shift(0.0, 1.0, 1.0);
}
LikelihoodModel unit_exponential() {
  return LikelihoodModel::exponential_scale(1.0, 2.0);
}
}  // namespace

TEST_CASE("gaussian_shift evaluates densities, cdfs and quantiles") {
  const LikelihoodModel m = unit_gaussian();
  // Reference values computed with an independent statistics package.
  CHECK(m.density(0, 0.5) == doctest::Approx(0.35206532676429947).epsilon(1e-15));
  CHECK(m.density(1, 1.5) == doctest::Approx(0.35206532676429947).epsilon(1e-15));
  CHECK(m.cdf(0, 0.5) == doctest::Approx(1.0 - 0.3085375387259869).epsilon(1e-15));
  CHECK(m.quantile(0, 0.31) == doctest::Approx(-0.4958503473474533).epsilon(1e-14));
  CHECK(m.quantile(1, 0.31) == doctest::Approx(0.5041496526525466).epsilon(1e-14));
  CHECK(m.likelihood_ratio(0.7) == doctest::Approx(1.2214027581601699).epsilon(1e-15));
  CHECK(m.support_lower_bound() == -kInf);
}

TEST_CASE("exponential_scale evaluates densities, cdfs and quantiles") {
  const LikelihoodModel m = unit_exponential();
  CHECK(m.density(0, 0.5) == doctest::Approx(0.6065306597126334).epsilon(1e-15));
  CHECK(m.density(1, 0.5) == doctest::Approx(0.38940039153570244).epsilon(1e-15));
  CHECK(m.cdf(0, 0.8) == doctest::Approx(0.5506710358827784).epsilon(1e-15));
  CHECK(m.cdf(1, 0.8) == doctest::Approx(0.32967995396436073).epsilon(1e-15));
  CHECK(m.quantile(0, 0.31) == doctest::Approx(0.371063681390832).epsilon(1e-14));
  CHECK(m.quantile(1, 0.31) == doctest::Approx(0.742127362781664).epsilon(1e-14));
  CHECK(m.likelihood_ratio(1.3) == doctest::Approx(0.9577704145069481).epsilon(1e-15));
  CHECK(m.support_lower_bound() == 0.0);
}

TEST_CASE("densities integrate to the cdf by quadrature") {
  SUBCASE("gaussian") {
    const LikelihoodModel m = unit_gaussian();
    for (int h : {0, 1}) {
      const double mass = testing::integrate(
          [&](double y) { return m.density(h, y); }, -10.0, 0.8);
      CHECK(m.cdf(h, 0.8) == doctest::Approx(mass).epsilon(1e-12));
    }
  }
  SUBCASE("exponential") {
    const LikelihoodModel m = unit_exponential();
    for (int h : {0, 1}) {
      const double mass = testing::integrate(
          [&](double y) { return m.density(h, y); }, 0.0, 1.7);
      CHECK(m.cdf(h, 1.7) == doctest::Approx(mass).epsilon(1e-12));
    }
  }
}

TEST_CASE("likelihood_ratio is the density ratio and strictly increases") {
  for (const LikelihoodModel& m : {unit_gaussian(), unit_exponential()}) {
    const double lo = m.family() == ModelFamily::gaussian_shift ? -6.0 : 1e-9;
    const double hi = m.family() == ModelFamily::gaussian_shift ? 7.0 : 14.0;
    double previous = -kInf;
    for (int i = 0; i < 1000; ++i) {
      const double y = lo + (hi - lo) * i / 999.0;
      const double lr = m.likelihood_ratio(y);
      CHECK(lr == doctest::Approx(m.density(1, y) / m.density(0, y))
                      .epsilon(1e-12));
      CHECK(lr > previous);
      previous = lr;
    }
  }
}

TEST_CASE("likelihood_ratio_inverse round-trips interior ratios") {
  for (const LikelihoodModel& m : {unit_gaussian(), unit_exponential()}) {
    for (double y : {0.2, 0.9, 1.7, 3.4}) {
      CHECK(m.likelihood_ratio_inverse(m.likelihood_ratio(y)) ==
            doctest::Approx(y).epsilon(1e-12));
    }
  }
}

TEST_CASE("likelihood_ratio_inverse maps out-of-range ratios to sentinels") {
  const LikelihoodModel e = unit_exponential();
  // The exponential ratio never drops below scale0/scale1 = 0.5; asking for a
  // smaller ratio means "always vote 1".
  CHECK(e.likelihood_ratio_inverse(0.25) == -kInf);
  CHECK(e.likelihood_ratio_inverse(0.5) == -kInf);
  const LikelihoodModel g = unit_gaussian();
  CHECK(g.likelihood_ratio_inverse(0.0) == -kInf);
  CHECK(std::isfinite(g.likelihood_ratio_inverse(1e-12)));
}

TEST_CASE("error_probs thresholds each hypothesis' vote") {
  SUBCASE("gaussian at the midpoint") {
    const ErrorPair e = unit_gaussian().error_probs(0.5);
    CHECK(e.false_alarm == doctest::Approx(0.3085375387259869).epsilon(1e-15));
    CHECK(e.missed_detection ==
          doctest::Approx(0.3085375387259869).epsilon(1e-15));
  }
  SUBCASE("exponential at log 4") {
    const ErrorPair e = unit_exponential().error_probs(std::log(4.0));
    CHECK(e.false_alarm == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(e.missed_detection == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("false alarm complements the H0 cdf") {
    for (const LikelihoodModel& m : {unit_gaussian(), unit_exponential()}) {
      for (double t : {0.1, 0.8, 2.3}) {
        const ErrorPair e = m.error_probs(t);
        CHECK(e.false_alarm + m.cdf(0, t) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(e.missed_detection == doctest::Approx(m.cdf(1, t)).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("error_probs honors sentinel thresholds") {
  for (const LikelihoodModel& m : {unit_gaussian(), unit_exponential()}) {
    const ErrorPair always_one = m.error_probs(-kInf);
    CHECK(always_one.false_alarm == 1.0);
    CHECK(always_one.missed_detection == 0.0);
    const ErrorPair always_zero = m.error_probs(kInf);
    CHECK(always_zero.false_alarm == 0.0);
    CHECK(always_zero.missed_detection == 1.0);
  }
  // Below-support thresholds behave like "always vote 1" for the exponential.
  const ErrorPair e = unit_exponential().error_probs(-3.0);
  CHECK(e.false_alarm == 1.0);
  CHECK(e.missed_detection == 0.0);
}

TEST_CASE("error_probs is monotone in the threshold") {
  for (const LikelihoodModel& m : {unit_gaussian(), unit_exponential()}) {
    double previous_fa = 1.0;
    double previous_md = 0.0;
    for (double t = -1.0; t <= 6.0; t += 0.05) {
      const ErrorPair e = m.error_probs(t);
      CHECK(e.false_alarm <= previous_fa);
      CHECK(e.missed_detection >= previous_md);
      previous_fa = e.false_alarm;
      previous_md = e.missed_detection;
    }
  }
}

TEST_CASE("constructors reject invalid parameters") {
  CHECK_THROWS_AS(LikelihoodModel::gaussian_shift(0.0, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(LikelihoodModel::gaussian_shift(0.0, 1.0, -1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(LikelihoodModel::gaussian_shift(1.0, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(LikelihoodModel::gaussian_shift(2.0, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(LikelihoodModel::exponential_scale(0.0, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(LikelihoodModel::exponential_scale(2.0, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(LikelihoodModel::exponential_scale(3.0, 2.0),
                  std::invalid_argument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(LikelihoodModel::gaussian_shift(nan, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("exponential density rejects negative observations") {
  CHECK_THROWS_AS(unit_exponential().density(0, -0.1), std::domain_error);
  CHECK_NOTHROW(unit_exponential().density(0, 0.0));
}

TEST_CASE("error_probs rejects NaN thresholds") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(unit_gaussian().error_probs(nan), std::invalid_argument);
  CHECK_THROWS_AS(unit_exponential().error_probs(nan), std::invalid_argument);
}

TEST_CASE("family accessors guard against the wrong family") {
  CHECK(unit_gaussian().mean1() == 1.0);
  CHECK(unit_exponential().scale1() == 2.0);
  CHECK_THROWS_AS(unit_gaussian().scale0(), std::logic_error);
  CHECK_THROWS_AS(unit_exponential().stddev(), std::logic_error);
}
