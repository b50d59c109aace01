#include "rmab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace rmab {

void Cohort::validate() const {
  if (arms.empty()) throw InvalidConfig("cohort must have at least one arm");
  std::vector<int64_t> ids;
  ids.reserve(arms.size());
  for (const Arm& a : arms) {
    a.true_model.validate();
    if (!a.true_model.active_helps())
      throw InvalidConfig("arm " + std::to_string(a.id) +
                          ": active action lowers an engagement probability");
    ids.push_back(a.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw InvalidConfig("duplicate arm identifiers in cohort");
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Csoc: return "csoc";
    case PolicyKind::RoundRobin: return "round_robin";
    case PolicyKind::WhittleTs: return "whittle_ts";
    case PolicyKind::WhittleDfl: return "whittle_dfl";
    case PolicyKind::OracleWhittle: return "oracle_whittle";
    case PolicyKind::RandomK: return "random_k";
  }
  throw InvalidConfig("unknown policy kind");
}

PolicyKind policy_from_name(const std::string& name) {
  if (name == "csoc") return PolicyKind::Csoc;
  if (name == "round_robin") return PolicyKind::RoundRobin;
  if (name == "whittle_ts") return PolicyKind::WhittleTs;
  if (name == "whittle_dfl") return PolicyKind::WhittleDfl;
  if (name == "oracle_whittle") return PolicyKind::OracleWhittle;
  if (name == "random_k") return PolicyKind::RandomK;
  throw InvalidConfig("unknown policy name: " + name);
}

namespace {

ArmState draw_next(const Arm& arm, ArmState state, InterventionAction action,
                   uint64_t seed, int64_t week) {
  double u = rng::uniform(seed, rng::streams::transitions,
                          static_cast<uint64_t>(arm.id),
                          static_cast<uint64_t>(week));
  return u < arm.true_model.engage(state, action) ? ArmState::Engaging
                                                  : ArmState::NotEngaging;
}

void check_step_sizes(const Cohort& cohort, const std::vector<ArmState>& states,
                      const std::vector<InterventionAction>& actions) {
  if (states.size() != cohort.size() || actions.size() != cohort.size())
    throw DimensionMismatch("state/action vectors must match the cohort size");
}

}  // namespace

std::vector<ArmState> step_cohort_serial(
    const Cohort& cohort, const std::vector<ArmState>& states,
    const std::vector<InterventionAction>& actions, uint64_t seed,
    int64_t week) {
  check_step_sizes(cohort, states, actions);
  std::vector<ArmState> next(cohort.size());
  for (size_t i = 0; i < cohort.size(); ++i)
    next[i] = draw_next(cohort.arms[i], states[i], actions[i], seed, week);
  return next;
}

std::vector<ArmState> step_cohort(const Cohort& cohort,
                                  const std::vector<ArmState>& states,
                                  const std::vector<InterventionAction>& actions,
                                  uint64_t seed, int64_t week) {
  check_step_sizes(cohort, states, actions);
  std::vector<ArmState> next(cohort.size());
  const int64_t n = static_cast<int64_t>(cohort.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i)
    next[i] = draw_next(cohort.arms[i], states[i], actions[i], seed, week);
  return next;
}

void RolloutConfig::validate(size_t cohort_size) const {
  if (horizon < 1) throw InvalidConfig("rollout horizon must be >= 1");
  if (budget < 0 || static_cast<size_t>(budget) > cohort_size)
    throw InvalidConfig("budget must lie in [0, cohort size]");
  if (intervention_weeks < -1)
    throw InvalidConfig("intervention weeks must be -1 or >= 0");
  planner.validate();
  search.validate();
}

namespace {

/// Index tables per arm, deduplicating identical models so cohorts built
/// from a few latent types are priced once per type.
std::vector<WhittleTable> price_arms(const std::vector<TransitionModel>& models,
                                     const PlannerConfig& planner,
                                     const SearchConfig& search) {
  std::map<std::array<double, 8>, size_t> seen;
  std::vector<TransitionModel> unique;
  std::vector<size_t> slot(models.size());
  for (size_t i = 0; i < models.size(); ++i) {
    auto [it, fresh] = seen.emplace(models[i].prob, unique.size());
    if (fresh) unique.push_back(models[i]);
    slot[i] = it->second;
  }
  std::vector<WhittleTable> priced = whittle_tables(unique, planner, search);
  std::vector<WhittleTable> tables(models.size());
  for (size_t i = 0; i < models.size(); ++i) tables[i] = priced[slot[i]];
  return tables;
}

}  // namespace

Rollout run_policy(const Cohort& cohort, const RolloutConfig& config,
                   const TransitionPredictor* ts_predictor,
                   const TransitionPredictor* dfl_predictor) {
  cohort.validate();
  config.validate(cohort.size());
  const size_t n = cohort.size();
  const int h_int =
      config.intervention_weeks < 0 ? config.horizon : config.intervention_weeks;

  // per-arm index tables for the ranking policies, computed once up front
  std::vector<WhittleTable> tables;
  if (config.kind == PolicyKind::WhittleTs ||
      config.kind == PolicyKind::WhittleDfl ||
      config.kind == PolicyKind::OracleWhittle) {
    std::vector<TransitionModel> models(n);
    if (config.kind == PolicyKind::OracleWhittle) {
      for (size_t i = 0; i < n; ++i) models[i] = cohort.arms[i].true_model;
    } else {
      const TransitionPredictor* pred =
          config.kind == PolicyKind::WhittleTs ? ts_predictor : dfl_predictor;
      if (!pred)
        throw MissingPredictor(policy_name(config.kind) +
                               " policy requires a trained predictor");
      for (size_t i = 0; i < n; ++i)
        models[i] = predict(*pred, cohort.arms[i].features);
    }
    tables = price_arms(models, config.planner, config.search);
  }

  // round-robin ordering: ascending id, pointer persists across weeks
  std::vector<size_t> rr_order(n);
  size_t rr_next = 0;
  if (config.kind == PolicyKind::RoundRobin) {
    std::iota(rr_order.begin(), rr_order.end(), size_t{0});
    std::sort(rr_order.begin(), rr_order.end(), [&](size_t a, size_t b) {
      return cohort.arms[a].id < cohort.arms[b].id;
    });
  }

  Rollout out;
  out.trajectories.resize(n);
  out.behavior.prob.assign(config.horizon, std::vector<double>(n, 1.0));

  std::vector<ArmState> states(n);
  for (size_t i = 0; i < n; ++i) states[i] = cohort.arms[i].initial_state;

  std::vector<size_t> scratch(n);
  std::vector<double> indices(n);
  for (int week = 0; week < config.horizon; ++week) {
    std::vector<InterventionAction> actions(n, InterventionAction::Passive);
    if (week < h_int && config.budget > 0) {
      switch (config.kind) {
        case PolicyKind::Csoc:
          break;
        case PolicyKind::RoundRobin:
          for (int k = 0; k < config.budget && static_cast<size_t>(k) < n; ++k)
            actions[rr_order[(rr_next + k) % n]] = InterventionAction::Active;
          rr_next = (rr_next + static_cast<size_t>(config.budget)) % n;
          break;
        case PolicyKind::RandomK: {
          std::iota(scratch.begin(), scratch.end(), size_t{0});
          size_t k = std::min(static_cast<size_t>(config.budget), n);
          for (size_t j = 0; j < k; ++j) {
            size_t r = j + rng::pick(config.seed, rng::streams::policy,
                                     static_cast<uint64_t>(week), j, n - j);
            std::swap(scratch[j], scratch[r]);
            actions[scratch[j]] = InterventionAction::Active;
          }
          double p_active = static_cast<double>(k) / static_cast<double>(n);
          for (size_t i = 0; i < n; ++i)
            out.behavior.prob[week][i] =
                actions[i] == InterventionAction::Active ? p_active
                                                         : 1.0 - p_active;
          break;
        }
        default: {  // the three index policies
          for (size_t i = 0; i < n; ++i)
            indices[i] = tables[i][states[i]];
          BudgetedSelection sel = select_top_k(indices, config.budget);
          for (int arm : sel.chosen)
            actions[static_cast<size_t>(arm)] = InterventionAction::Active;
          break;
        }
      }
    }

    std::vector<ArmState> next =
        step_cohort(cohort, states, actions, config.seed, week);
    for (size_t i = 0; i < n; ++i)
      out.trajectories[i].steps.push_back({states[i], actions[i], next[i]});
    states = std::move(next);
  }
  return out;
}

DropSeries engagement_drop(const Trajectory& trajectory) {
  trajectory.validate();
  std::vector<int> e = trajectory.weekly_states();
  DropSeries series;
  series.drop.resize(e.size());
  series.cumulative.resize(e.size());
  int running = 0;
  for (size_t t = 0; t < e.size(); ++t) {
    series.drop[t] = e[0] - e[t];
    running += series.drop[t];
    series.cumulative[t] = running;
  }
  return series;
}

void TrialConfig::validate() const {
  if (horizon < 1) throw InvalidConfig("trial horizon must be >= 1");
  if (budget < 0) throw InvalidConfig("trial budget must be >= 0");
  if (groups.empty()) throw InvalidConfig("trial needs at least one group");
  if (bootstrap_resamples < 1)
    throw InvalidConfig("bootstrap resamples must be >= 1");
  if (intervention_weeks < -1)
    throw InvalidConfig("intervention weeks must be -1 or >= 0");
  planner.validate();
  search.validate();
}

TrialReport run_trial(
    const TrialConfig& config, const std::vector<Cohort>& cohorts,
    const std::vector<const TransitionPredictor*>& predictors) {
  config.validate();
  if (cohorts.size() != config.groups.size() ||
      predictors.size() != config.groups.size())
    throw DimensionMismatch("one cohort and one predictor slot per group");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  TrialReport report;
  report.horizon = config.horizon;
  report.budget = config.budget;
  report.seed = config.seed;

  for (size_t g = 0; g < config.groups.size(); ++g) {
    const Cohort& cohort = cohorts[g];
    if (static_cast<size_t>(config.budget) > cohort.size())
      throw InvalidConfig("group " + std::to_string(g) +
                          " is smaller than the weekly budget");

    RolloutConfig rc;
    rc.kind = config.groups[g];
    rc.horizon = config.horizon;
    rc.budget = config.budget;
    rc.seed = config.seed;
    rc.intervention_weeks = config.intervention_weeks;
    rc.planner = config.planner;
    rc.search = config.search;
    Rollout roll = run_policy(cohort, rc,
                              rc.kind == PolicyKind::WhittleTs ? predictors[g]
                                                               : nullptr,
                              rc.kind == PolicyKind::WhittleDfl ? predictors[g]
                                                                : nullptr);

    GroupResult res;
    res.kind = rc.kind;
    res.name = policy_name(rc.kind);
    res.weekly_engaged.assign(config.horizon + 1, 0);
    res.weekly_drop.assign(config.horizon + 1, 0);
    res.cumulative_drop.assign(config.horizon + 1, 0);
    res.arm_final_cumulative.reserve(cohort.size());
    res.percent_reduction = nan;
    res.p_value = nan;
    res.beta = nan;

    for (const Trajectory& traj : roll.trajectories) {
      DropSeries ds = engagement_drop(traj);
      std::vector<int> e = traj.weekly_states();
      for (size_t t = 0; t < e.size(); ++t) {
        res.weekly_engaged[t] += e[t];
        res.weekly_drop[t] += ds.drop[t];
      }
      res.arm_final_cumulative.push_back(ds.cumulative.back());
    }
    long running = 0;
    for (size_t t = 0; t < res.weekly_drop.size(); ++t) {
      running += res.weekly_drop[t];
      res.cumulative_drop[t] = running;
    }
    report.groups.push_back(std::move(res));
  }

  for (size_t g = 0; g < report.groups.size(); ++g)
    if (config.groups[g] == PolicyKind::Csoc) {
      report.comparison_group = static_cast<int>(g);
      break;
    }
  if (report.comparison_group < 0) return report;

  const GroupResult& base = report.groups[static_cast<size_t>(
      report.comparison_group)];
  for (size_t g = 0; g < report.groups.size(); ++g) {
    if (static_cast<int>(g) == report.comparison_group) continue;
    GroupResult& res = report.groups[g];
    res.drops_prevented.resize(res.cumulative_drop.size());
    for (size_t t = 0; t < res.cumulative_drop.size(); ++t)
      res.drops_prevented[t] = base.cumulative_drop[t] - res.cumulative_drop[t];
    if (base.cumulative_drop.back() > 0)
      res.percent_reduction =
          100.0 * static_cast<double>(res.drops_prevented.back()) /
          static_cast<double>(base.cumulative_drop.back());

    // paired bootstrap and mean-difference coefficient need aligned arms
    if (res.arm_final_cumulative.size() != base.arm_final_cumulative.size())
      continue;
    const size_t narm = res.arm_final_cumulative.size();
    std::vector<double> diff(narm);  // prevented drops per arm pair
    double base_mean = 0.0, res_mean = 0.0;
    for (size_t i = 0; i < narm; ++i) {
      diff[i] = static_cast<double>(base.arm_final_cumulative[i] -
                                    res.arm_final_cumulative[i]);
      base_mean += static_cast<double>(base.arm_final_cumulative[i]);
      res_mean += static_cast<double>(res.arm_final_cumulative[i]);
    }
    res.beta = (res_mean - base_mean) / static_cast<double>(narm);

    int at_most_zero = 0;
    for (int b = 0; b < config.bootstrap_resamples; ++b) {
      double sum = 0.0;
      for (size_t i = 0; i < narm; ++i)
        sum += diff[rng::pick(config.seed, rng::streams::bootstrap,
                              static_cast<uint64_t>(b), i, narm)];
      if (sum <= 0.0) ++at_most_zero;
    }
    res.p_value = static_cast<double>(at_most_zero + 1) /
                  static_cast<double>(config.bootstrap_resamples + 1);
  }
  return report;
}

}  // namespace rmab
