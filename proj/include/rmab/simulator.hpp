#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmab/predictor.hpp"
#include "rmab/rng.hpp"
#include "rmab/trajectory.hpp"
#include "rmab/whittle.hpp"

namespace rmab {

struct Arm {
  int64_t id = 0;
  FeatureVector features;
  TransitionModel true_model;
  ArmState initial_state = ArmState::NotEngaging;
};

struct Cohort {
  std::vector<Arm> arms;

  size_t size() const { return arms.size(); }
  /// Unique ids, valid models, and acting never hurting engagement.
  void validate() const;
};

enum class PolicyKind {
  Csoc,          // automated calls only: every arm passive
  RoundRobin,    // cycle through arms by ascending id, K per week
  WhittleTs,     // index policy on the likelihood-trained predictor
  WhittleDfl,    // index policy on the decision-trained predictor
  OracleWhittle, // index policy on the true models
  RandomK,       // uniformly random K arms; the logging policy for training data
};

std::string policy_name(PolicyKind kind);
PolicyKind policy_from_name(const std::string& name);

/// One week of independent per-arm transitions. Draws are keyed
/// (seed, arm id, week), so any execution order gives the same states.
std::vector<ArmState> step_cohort(const Cohort& cohort,
                                  const std::vector<ArmState>& states,
                                  const std::vector<InterventionAction>& actions,
                                  uint64_t seed, int64_t week);
std::vector<ArmState> step_cohort_serial(
    const Cohort& cohort, const std::vector<ArmState>& states,
    const std::vector<InterventionAction>& actions, uint64_t seed,
    int64_t week);

struct RolloutConfig {
  PolicyKind kind = PolicyKind::Csoc;
  int horizon = 1;
  int budget = 0;
  uint64_t seed = 0;
  int intervention_weeks = -1;  // -1: act for the whole horizon
  PlannerConfig planner;
  SearchConfig search = SearchConfig::for_discount(PlannerConfig{}.discount);

  void validate(size_t cohort_size) const;
};

struct Rollout {
  std::vector<Trajectory> trajectories;  // one per arm, cohort order
  BehaviorLog behavior;                  // probability of each logged action
};

/// Runs one policy over the cohort. Index policies price every arm once up
/// front (models are stationary), then each week rank arms by the index of
/// their current state and call the top K. After `intervention_weeks` the
/// cohort is only observed: all passive.
Rollout run_policy(const Cohort& cohort, const RolloutConfig& config,
                   const TransitionPredictor* ts_predictor = nullptr,
                   const TransitionPredictor* dfl_predictor = nullptr);

/// Weekly engagement drop E(0) - E(t) and its running sum; negative entries
/// are kept (an arm can end up more engaged than it started).
struct DropSeries {
  std::vector<int> drop;        // index t = week, t = 0 .. horizon
  std::vector<int> cumulative;
};

DropSeries engagement_drop(const Trajectory& trajectory);

struct TrialConfig {
  int horizon = 1;
  int budget = 0;
  std::vector<PolicyKind> groups;
  uint64_t seed = 0;
  int bootstrap_resamples = 10000;
  int intervention_weeks = -1;
  PlannerConfig planner;
  SearchConfig search = SearchConfig::for_discount(PlannerConfig{}.discount);

  void validate() const;
};

struct GroupResult {
  PolicyKind kind = PolicyKind::Csoc;
  std::string name;
  std::vector<long> weekly_engaged;        // arms engaging at week t
  std::vector<long> weekly_drop;           // sum of per-arm drops at week t
  std::vector<long> cumulative_drop;       // running sum of weekly_drop
  std::vector<long> arm_final_cumulative;  // per-arm cumulative drop at the end

  // versus the comparison group; empty / NaN when there is none
  std::vector<long> drops_prevented;  // comparison cumulative - ours, per week
  double percent_reduction = 0.0;     // 100 * prevented(final)/comparison(final)
  double p_value = 0.0;               // paired bootstrap, one-sided
  double beta = 0.0;                  // mean final cumulative drop difference
};

struct TrialReport {
  std::vector<GroupResult> groups;
  int comparison_group = -1;  // first csoc group, or -1
  int horizon = 0;
  int budget = 0;
  uint64_t seed = 0;
};

/// Runs every group over its own cohort with a shared seed. Transitions are
/// keyed by arm id, so identical cohorts run under identical policies land on
/// identical outcomes (coupled comparisons), while disjoint cohorts decouple.
/// Pairwise statistics compare each group to the first csoc group, pairing
/// arms by position; they need equal group sizes and are skipped otherwise.
TrialReport run_trial(const TrialConfig& config,
                      const std::vector<Cohort>& cohorts,
                      const std::vector<const TransitionPredictor*>& predictors);

}  // namespace rmab
