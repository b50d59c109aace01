#include "rmab/mdp.hpp"

#include <cmath>
#include <string>

namespace rmab {

QTable bellman_backup(const QTable& q, const TransitionModel& model,
                      double subsidy, double discount) {
  QTable out;
  for (int si = 0; si < 2; ++si) {
    auto s = static_cast<ArmState>(si);
    for (int ai = 0; ai < 2; ++ai) {
      auto a = static_cast<InterventionAction>(ai);
      double pe = model.engage(s, a);
      double cont = pe * q.value(ArmState::Engaging) +
                    (1.0 - pe) * q.value(ArmState::NotEngaging);
      double r = reward(s) + (a == InterventionAction::Passive ? subsidy : 0.0);
      out(s, a) = r + discount * cont;
    }
  }
  return out;
}

QTable solve_subsidized(const TransitionModel& model, double subsidy,
                        const PlannerConfig& config, const QTable* warm) {
  config.validate();
  model.validate();

  QTable q = warm ? *warm : QTable{};
  for (int it = 0; it < config.max_iterations; ++it) {
    QTable next = bellman_backup(q, model, subsidy, config.discount);
    double residual = 0.0;
    for (size_t i = 0; i < 4; ++i) {
      double d = std::abs(next.q[i] - q.q[i]);
      if (d > residual) residual = d;
    }
    q = next;
    if (residual < config.bellman_tolerance) return q;
  }
  throw NonConvergence("value iteration residual above " +
                       std::to_string(config.bellman_tolerance) + " after " +
                       std::to_string(config.max_iterations) + " sweeps");
}

}  // namespace rmab
