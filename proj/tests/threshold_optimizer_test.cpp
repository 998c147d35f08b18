#include "secretballot/threshold_optimizer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "secretballot/rng.hpp"

using namespace secretballot;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Five agents, two 1-votes decide, misses twice as costly: the optimum was
// frozen from an independent prototype (dense scan plus root refinement).
TeamProblem reference_problem() {
  return TeamProblem(0.7, 1.0, 2.0, LikelihoodModel::exponential_scale(1.0, 2.0),
                     5, 2);
}

TeamProblem gaussian_problem() {
  return TeamProblem(0.7, 1.0, 2.0, LikelihoodModel::gaussian_shift(0.0, 1.0, 1.0),
                     3, 2);
}

}  // namespace

TEST_CASE("optimize_identical_threshold reproduces frozen optima") {
  SUBCASE("five exponential agents, two votes to decide") {
    const OptimizationResult r = optimize_identical_threshold(reference_problem());
    CHECK(r.converged);
    CHECK_FALSE(r.multimodal_warning);
    REQUIRE(r.thresholds.size() == 5);
    for (double t : r.thresholds) {
      CHECK(t == doctest::Approx(1.8494899356617505).epsilon(1e-10));
    }
    CHECK(r.risk == doctest::Approx(0.33057704304722646).epsilon(1e-13));
    CHECK(std::fabs(r.residual) <= 1e-10);
  }
  SUBCASE("three gaussian agents, two votes to decide") {
    const OptimizationResult r = optimize_identical_threshold(gaussian_problem());
    CHECK(r.converged);
    CHECK(r.thresholds.front() ==
          doctest::Approx(0.5680977665947404).epsilon(1e-10));
    CHECK(r.risk == doctest::Approx(0.29336426856390285).epsilon(1e-13));
  }
  SUBCASE("two symmetric gaussian agents, either vote decides") {
    const TeamProblem problem(0.5, 1.0, 1.0,
                              LikelihoodModel::gaussian_shift(0.0, 1.0, 1.0), 2,
                              1);
    const OptimizationResult r = optimize_identical_threshold(problem);
    CHECK(r.converged);
    CHECK(r.thresholds.front() ==
          doctest::Approx(1.013519153649272).epsilon(1e-10));
    CHECK(r.risk == doctest::Approx(0.27104173618505634).epsilon(1e-13));
  }
  SUBCASE("two exponential agents, unanimity: threshold log 4") {
    const TeamProblem problem(0.8, 1.0, 2.0,
                              LikelihoodModel::exponential_scale(1.0, 2.0), 2,
                              2);
    const OptimizationResult r = optimize_identical_threshold(problem);
    CHECK(r.converged);
    CHECK(r.thresholds.front() == doctest::Approx(std::log(4.0)).epsilon(1e-10));
    CHECK(r.risk == doctest::Approx(0.35).epsilon(1e-14));
  }
}

TEST_CASE("optimize_identical_threshold agrees with a dense grid search") {
  for (const TeamProblem& problem : {reference_problem(), gaussian_problem()}) {
    const ProbeWindow window =
        threshold_probe_window(problem.model, problem.prior_h0);
    const double oracle =
        testing::grid_search_common_threshold(problem, window.lo, window.hi);
    const OptimizationResult r = optimize_identical_threshold(problem);
    CHECK(r.thresholds.front() == doctest::Approx(oracle).epsilon(1e-7));
  }
}

TEST_CASE("the optimum is a local minimum of the common-threshold risk") {
  for (const TeamProblem& problem : {reference_problem(), gaussian_problem()}) {
    const OptimizationResult r = optimize_identical_threshold(problem);
    const double at = common_threshold_risk(problem, r.thresholds.front());
    for (double step : {1e-4, 1e-3, 1e-2}) {
      CHECK(common_threshold_risk(problem, r.thresholds.front() + step) >= at);
      CHECK(common_threshold_risk(problem, r.thresholds.front() - step) >= at);
    }
  }
}

TEST_CASE("a lopsided exponential unanimity cell optimizes to the support edge") {
  // Unlikely H0 and expensive misses: voting 1 regardless of the observation
  // is genuinely optimal, so the best threshold is the support edge and the
  // first-order gap there is one-sided (positive: risk climbs off the edge).
  const TeamProblem problem(0.2, 1.0, 5.0,
                            LikelihoodModel::exponential_scale(1.0, 2.0), 6, 6);
  const OptimizationResult r = optimize_identical_threshold(problem);
  CHECK(r.converged);
  CHECK(r.thresholds.front() == 0.0);
  CHECK(r.risk == 0.2);  // cost_false_alarm * prior_h0, exactly
  CHECK(r.residual > 0.0);
  SUBCASE("risk only climbs when the threshold moves into the support") {
    for (double t : {1e-6, 1e-3, 0.1, 1.0}) {
      CHECK(common_threshold_risk(problem, t) >= 0.2);
    }
  }
}

TEST_CASE("a tangent edge optimum is still snapped to the support edge") {
  // With these costs the risk slope vanishes to second order at the edge,
  // leaving a basin that is flat to double precision; the solver must still
  // report the edge itself, not an arbitrary basin point.
  const TeamProblem problem(0.2, 1.0, 1.0,
                            LikelihoodModel::exponential_scale(1.0, 2.0), 2, 1);
  const OptimizationResult r = optimize_identical_threshold(problem);
  CHECK(r.converged);
  CHECK(r.thresholds.front() == 0.0);
  CHECK(r.risk == 0.2);
}

TEST_CASE("threshold_probe_window spans the observation mixture") {
  SUBCASE("gaussian window sits at the mixture quantiles") {
    const LikelihoodModel m = LikelihoodModel::gaussian_shift(0.0, 1.0, 1.0);
    const ProbeWindow w = threshold_probe_window(m, 0.5, 1e-3);
    const auto mixture_cdf = [&](double t) {
      return 0.5 * m.cdf(0, t) + 0.5 * m.cdf(1, t);
    };
    CHECK(mixture_cdf(w.lo) == doctest::Approx(1e-3).epsilon(1e-6));
    CHECK(mixture_cdf(w.hi) == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
    CHECK(w.lo < 0.0);
    CHECK(w.hi > 1.0);
  }
  SUBCASE("exponential window starts exactly at the support edge") {
    const LikelihoodModel m = LikelihoodModel::exponential_scale(1.0, 2.0);
    const ProbeWindow w = threshold_probe_window(m, 0.5);
    CHECK(w.lo == 0.0);
    CHECK(w.hi > 10.0);
  }
  SUBCASE("alpha is validated") {
    const LikelihoodModel m = LikelihoodModel::gaussian_shift(0.0, 1.0, 1.0);
    CHECK_THROWS_AS(threshold_probe_window(m, 0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(threshold_probe_window(m, 0.5, 0.7), std::invalid_argument);
  }
}

TEST_CASE("stationarity_residual vanishes at the optimum and changes sign") {
  for (const TeamProblem& problem : {reference_problem(), gaussian_problem()}) {
    const OptimizationResult r = optimize_identical_threshold(problem);
    const double star = r.thresholds.front();
    CHECK(std::fabs(stationarity_residual(problem, star).value) <= 1e-8);
    // Below the optimum the risk slopes down (negative gap), above it up.
    CHECK(stationarity_residual(problem, star - 0.3).value < 0.0);
    CHECK(stationarity_residual(problem, star + 0.3).value > 0.0);
  }
}

TEST_CASE("stationarity_residual flags degenerate pivot odds") {
  const TeamProblem problem = reference_problem();
  CHECK(stationarity_residual(problem, kInf).degenerate);
  CHECK(stationarity_residual(problem, -kInf).degenerate);
  CHECK_FALSE(stationarity_residual(problem, 1.0).degenerate);
}

TEST_CASE("pbpo_optimize stays on the common optimum when started there") {
  const TeamProblem problem = reference_problem();
  const OptimizationResult common = optimize_identical_threshold(problem);
  const OptimizationResult r = pbpo_optimize(problem, common.thresholds);
  CHECK(r.converged);
  CHECK(r.risk == doctest::Approx(common.risk).epsilon(1e-12));
  for (double t : r.thresholds) {
    CHECK(t == doctest::Approx(common.thresholds.front()).epsilon(1e-8));
  }
  CHECK(r.residual <= 1e-8);
}

TEST_CASE("pbpo_optimize recovers the common optimum from skewed starts") {
  const TeamProblem problem = gaussian_problem();
  const OptimizationResult common = optimize_identical_threshold(problem);
  for (std::uint64_t run = 0; run < 8; ++run) {
    std::vector<double> start;
    for (int i = 0; i < problem.team_size; ++i) {
      start.push_back(-2.0 + 6.0 * uniform_draw(500 + run, i));
    }
    const OptimizationResult r = pbpo_optimize(problem, start);
    CHECK(r.converged);
    CHECK(r.risk == doctest::Approx(common.risk).epsilon(1e-11));
    for (double t : r.thresholds) {
      CHECK(t == doctest::Approx(common.thresholds.front()).epsilon(1e-6));
    }
  }
}

TEST_CASE("pbpo_optimize risk never rises across sweeps") {
  const TeamProblem problem = gaussian_problem();
  const std::vector<double> start = {-1.5, 2.5, 0.1};
  const OptimizationResult r = pbpo_optimize(problem, start);
  for (std::size_t i = 1; i < r.sweep_risks.size(); ++i) {
    CHECK(r.sweep_risks[i] <= r.sweep_risks[i - 1] + 1e-15);
  }
}

TEST_CASE("pbpo_optimize walks exponential unanimity onto the optimal ridge") {
  // Under unanimity with exponential observations the team risk depends on
  // the thresholds only through their sum, so the optimum is a whole ridge;
  // best-response iteration reaches some ridge point and certifies it.
  const TeamProblem problem(0.8, 1.0, 2.0,
                            LikelihoodModel::exponential_scale(1.0, 2.0), 2, 2);
  const std::vector<double> start = {0.3, 2.9};
  const OptimizationResult r = pbpo_optimize(problem, start);
  CHECK(r.converged);
  CHECK(r.risk == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(r.thresholds[0] + r.thresholds[1] ==
        doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-8));
  CHECK(r.residual <= 1e-8);
}

TEST_CASE("pbpo_optimize at sentinel starting points") {
  const TeamProblem problem(0.6, 1.0, 1.0,
                            LikelihoodModel::gaussian_shift(0.0, 1.0, 1.0), 2,
                            2);
  SUBCASE("escapes a mutually unswingable start") {
    // Under unanimity, when every agent starts at "always vote 0" no vote
    // can swing the decision and the risk is flat in every coordinate. The
    // solve answers with limiting best responses (teammates pulled just
    // inside the window), which un-freezes the team and recovers the
    // optimum.
    const std::vector<double> start = {kInf, kInf};
    const OptimizationResult r = pbpo_optimize(problem, start);
    const OptimizationResult common = optimize_identical_threshold(problem);
    CHECK(r.converged);
    CHECK(r.risk == doctest::Approx(common.risk).epsilon(1e-12));
    CHECK(r.thresholds[0] ==
          doctest::Approx(common.thresholds[0]).epsilon(1e-8));
    CHECK(r.thresholds[1] ==
          doctest::Approx(common.thresholds[0]).epsilon(1e-8));
    // Flat escape moves never increase the risk along the way.
    for (std::size_t k = 1; k < r.sweep_risks.size(); ++k) {
      CHECK(r.sweep_risks[k] <= r.sweep_risks[k - 1] + 1e-15);
    }
  }
  SUBCASE("a single sentinel start does not trap the solve") {
    // Agent 0 is updated first and its pivot odds depend only on agent 1,
    // who is interior, so the sweep immediately pulls the sentinel back.
    const std::vector<double> start = {kInf, 0.3};
    const OptimizationResult r = pbpo_optimize(problem, start);
    const OptimizationResult common = optimize_identical_threshold(problem);
    CHECK(r.converged);
    CHECK(r.thresholds[0] ==
          doctest::Approx(common.thresholds[0]).epsilon(1e-8));
    CHECK(r.thresholds[1] ==
          doctest::Approx(common.thresholds[0]).epsilon(1e-8));
    CHECK(r.risk == doctest::Approx(common.risk).epsilon(1e-12));
  }
}

TEST_CASE("pbpo_optimize validates its starting point") {
  const TeamProblem problem = gaussian_problem();
  const std::vector<double> two = {0.1, 0.2};
  CHECK_THROWS_AS(pbpo_optimize(problem, two), std::invalid_argument);
  const std::vector<double> with_nan = {
      0.1, std::numeric_limits<double>::quiet_NaN(), 0.3};
  CHECK_THROWS_AS(pbpo_optimize(problem, with_nan), std::invalid_argument);
}
