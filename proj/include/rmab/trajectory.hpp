#pragma once

#include <cstdint>
#include <vector>

#include "rmab/model.hpp"

namespace rmab {

using FeatureVector = std::vector<double>;

struct Step {
  ArmState state;
  InterventionAction action;
  ArmState next;
};

/// Weekly (state, action, next-state) chain for one beneficiary.
struct Trajectory {
  std::vector<Step> steps;

  void validate() const {
    if (steps.empty()) throw InvalidConfig("trajectory must be nonempty");
    for (size_t t = 0; t + 1 < steps.size(); ++t)
      if (steps[t].next != steps[t + 1].state)
        throw InvalidConfig("trajectory chain break at step " +
                            std::to_string(t));
  }

  /// E(0..L): the state at week 0 followed by each step's landing state.
  std::vector<int> weekly_states() const {
    std::vector<int> w;
    w.reserve(steps.size() + 1);
    w.push_back(static_cast<int>(steps.front().state));
    for (const Step& s : steps) w.push_back(static_cast<int>(s.next));
    return w;
  }
};

/// Visit counts n(s, a, s'), same cell order as TransitionModel.
struct TransitionCounts {
  std::array<long, 8> n{};

  static TransitionCounts from_trajectory(const Trajectory& traj) {
    TransitionCounts c;
    for (const Step& s : traj.steps)
      ++c.n[TransitionModel::idx(s.state, s.action, s.next)];
    return c;
  }

  long row_total(ArmState s, InterventionAction a) const {
    size_t base = TransitionModel::idx(s, a, ArmState::NotEngaging);
    return n[base] + n[base + 1];
  }
};

/// Per-step, per-arm probability the behavior policy assigned to the action
/// it actually logged. Indexed [week][arm].
struct BehaviorLog {
  std::vector<std::vector<double>> prob;

  void validate(size_t num_arms) const {
    for (size_t t = 0; t < prob.size(); ++t) {
      if (prob[t].size() != num_arms)
        throw DimensionMismatch("behavior log week " + std::to_string(t) +
                                " has wrong arm count");
      for (double p : prob[t])
        if (!(p > 0.0 && p <= 1.0))
          throw InvalidConfig("behavior probability outside (0,1]");
    }
  }
};

/// Parallel per-arm arrays used by both trainers.
struct LearningCohort {
  std::vector<FeatureVector> features;
  std::vector<Trajectory> trajectories;

  size_t size() const { return features.size(); }

  void validate() const {
    if (features.empty() || features.size() != trajectories.size())
      throw DimensionMismatch("cohort features/trajectories size mismatch");
    size_t dim = features.front().size();
    for (const FeatureVector& f : features)
      if (f.size() != dim)
        throw DimensionMismatch("inconsistent feature dimensionality");
    for (const Trajectory& t : trajectories) t.validate();
  }
};

}  // namespace rmab
