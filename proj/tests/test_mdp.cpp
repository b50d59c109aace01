#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rmab/mdp.hpp"

using namespace rmab;

TEST_SUITE_BEGIN("mdp");

TEST_CASE("reward equals the engagement indicator") {
  CHECK(reward(ArmState::Engaging) == 1.0);
  CHECK(reward(ArmState::NotEngaging) == 0.0);
  CHECK(reward(ArmState::Engaging) == 1.0);  // repeated calls identical
}

TEST_CASE("transition table round-trips through engage probabilities") {
  EngageProbs e;
  e.p = {0.2, 0.7, 0.4, 0.9};
  TransitionModel m = TransitionModel::from_engage_probs(e);
  m.validate();
  CHECK(m.engage(ArmState::NotEngaging, InterventionAction::Passive) == 0.2);
  CHECK(m.engage(ArmState::Engaging, InterventionAction::Passive) == 0.7);
  CHECK(m.engage(ArmState::NotEngaging, InterventionAction::Active) == 0.4);
  CHECK(m.engage(ArmState::Engaging, InterventionAction::Active) == 0.9);
  CHECK(m(ArmState::NotEngaging, InterventionAction::Passive,
          ArmState::NotEngaging) == doctest::Approx(0.8));
  EngageProbs back = m.engage_probs();
  for (int k = 0; k < 4; ++k) CHECK(back.p[k] == e.p[k]);
  CHECK(m.active_helps());
}

TEST_CASE("invalid tables are rejected") {
  TransitionModel m;
  m.prob = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.6};  // last row sums to 1.1
  CHECK_THROWS_AS(m.validate(), InvalidConfig);
  m.prob = {1.5, -0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};  // out of [0,1]
  CHECK_THROWS_AS(m.validate(), InvalidConfig);
}

TEST_CASE("absorbing engaging state gives geometric-series values") {
  TransitionModel m;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      m.prob[(s * 2 + a) * 2 + 1] = 1.0;
      m.prob[(s * 2 + a) * 2 + 0] = 0.0;
    }
  PlannerConfig cfg;
  QTable q = solve_subsidized(m, 0.0, cfg);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      CHECK(q.q[s * 2 + a] ==
            doctest::Approx(static_cast<double>(s) + 9.0).epsilon(1e-7));
}

TEST_CASE("absorbing not-engaging state") {
  TransitionModel m;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      m.prob[(s * 2 + a) * 2 + 0] = 1.0;
      m.prob[(s * 2 + a) * 2 + 1] = 0.0;
    }
  PlannerConfig cfg;
  QTable q = solve_subsidized(m, 0.0, cfg);
  CHECK(q(ArmState::Engaging, InterventionAction::Passive) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q(ArmState::Engaging, InterventionAction::Active) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q(ArmState::NotEngaging, InterventionAction::Passive) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(q(ArmState::NotEngaging, InterventionAction::Active) ==
        doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("solver matches the policy-enumeration oracle on random models") {
  PlannerConfig cfg;
  double worst = 0.0;
  for (uint64_t i = 0; i < 1000; ++i) {
    TransitionModel m = oracle::random_model(11, i);
    double subsidy = (i % 3 == 0) ? 0.3 : -1.0 + 2.0 * rng::uniform(12, 1, i);
    QTable q = solve_subsidized(m, subsidy, cfg);
    auto ref = oracle::optimal_q(m, subsidy, cfg.discount);
    for (int k = 0; k < 4; ++k)
      worst = std::max(worst, std::abs(q.q[k] - ref[k]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("returned table satisfies the Bellman equations to tolerance") {
  PlannerConfig cfg;
  for (uint64_t i = 0; i < 50; ++i) {
    TransitionModel m = oracle::random_model(13, i);
    QTable q = solve_subsidized(m, 0.3, cfg);
    QTable again = bellman_backup(q, m, 0.3, cfg.discount);
    for (int k = 0; k < 4; ++k)
      CHECK(std::abs(again.q[k] - q.q[k]) < cfg.bellman_tolerance);
  }
}

TEST_CASE("values stay inside the discounted-reward bounds") {
  PlannerConfig cfg;
  for (uint64_t i = 0; i < 200; ++i) {
    TransitionModel m = oracle::random_model(14, i);
    double subsidy = 2.0 * rng::uniform(14, 2, i);
    QTable q = solve_subsidized(m, subsidy, cfg);
    double cap = (1.0 + subsidy) / (1.0 - cfg.discount);
    for (int k = 0; k < 4; ++k) {
      CHECK(q.q[k] >= -1e-9);
      CHECK(q.q[k] <= cap + 1e-9);
    }
  }
}

TEST_CASE("action values and their gap are monotone in the subsidy") {
  PlannerConfig cfg;
  for (uint64_t i = 0; i < 30; ++i) {
    TransitionModel m = oracle::random_model(15, i);
    double prev_p = -1e300, prev_a = -1e300, prev_gap = -1e300;
    for (double lam = -2.0; lam <= 2.0; lam += 0.25) {
      QTable q = solve_subsidized(m, lam, cfg);
      double qp = q(ArmState::NotEngaging, InterventionAction::Passive);
      double qa = q(ArmState::NotEngaging, InterventionAction::Active);
      CHECK(qp >= prev_p - 1e-7);
      CHECK(qa >= prev_a - 1e-7);
      CHECK(qp - qa >= prev_gap - 1e-7);
      prev_p = qp;
      prev_a = qa;
      prev_gap = qp - qa;
    }
  }
}

TEST_CASE("warm starts change the sweep count, not the answer") {
  PlannerConfig cfg;
  TransitionModel m = oracle::random_model(16, 0);
  QTable cold = solve_subsidized(m, 0.5, cfg);
  QTable near = solve_subsidized(m, 0.49, cfg);
  QTable warm = solve_subsidized(m, 0.5, cfg, &near);
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(warm.q[k] - cold.q[k]) < 10 * cfg.bellman_tolerance);
}

TEST_CASE("iteration budget exhaustion raises") {
  PlannerConfig cfg;
  cfg.max_iterations = 1;
  TransitionModel m = oracle::random_model(17, 0);
  CHECK_THROWS_AS(solve_subsidized(m, 0.0, cfg), NonConvergence);
}

TEST_CASE("bad configs are rejected") {
  PlannerConfig cfg;
  cfg.discount = 1.0;
  TransitionModel m = oracle::random_model(18, 0);
  CHECK_THROWS_AS(solve_subsidized(m, 0.0, cfg), InvalidConfig);
  cfg.discount = 0.9;
  cfg.bellman_tolerance = 0.0;
  CHECK_THROWS_AS(solve_subsidized(m, 0.0, cfg), InvalidConfig);
}

TEST_SUITE_END();
