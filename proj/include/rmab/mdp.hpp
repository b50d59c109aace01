#pragma once

#include <array>

#include "rmab/model.hpp"

namespace rmab {

struct PlannerConfig {
  double discount = 0.9;
  double bellman_tolerance = 1e-9;
  int max_iterations = 10000;

  void validate() const {
    if (!(discount > 0.0 && discount < 1.0))
      throw InvalidConfig("discount must lie in (0,1)");
    if (!(bellman_tolerance > 0.0))
      throw InvalidConfig("bellman_tolerance must be positive");
    if (max_iterations < 1) throw InvalidConfig("max_iterations must be >= 1");
  }
};

/// Action values of the subsidized single-arm MDP, indexed state*2 + action.
struct QTable {
  std::array<double, 4> q{};

  double operator()(ArmState s, InterventionAction a) const {
    return q[static_cast<size_t>(s) * 2 + static_cast<size_t>(a)];
  }
  double& operator()(ArmState s, InterventionAction a) {
    return q[static_cast<size_t>(s) * 2 + static_cast<size_t>(a)];
  }

  double value(ArmState s) const {
    size_t i = static_cast<size_t>(s) * 2;
    return q[i] > q[i + 1] ? q[i] : q[i + 1];
  }
};

/// One synchronous Bellman backup. Passive earns R(s) + subsidy, active R(s).
QTable bellman_backup(const QTable& q, const TransitionModel& model,
                      double subsidy, double discount);

/// Value-iterates to a QTable whose Bellman residual is below
/// config.bellman_tolerance. `warm` seeds the iteration (nullptr = zeros);
/// passing the solution of a nearby subsidy cuts the sweep count sharply.
QTable solve_subsidized(const TransitionModel& model, double subsidy,
                        const PlannerConfig& config,
                        const QTable* warm = nullptr);

}  // namespace rmab
