#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "rmab/errors.hpp"

namespace rmab {

/// Weekly engagement state of one beneficiary.
enum class ArmState : int { NotEngaging = 0, Engaging = 1 };

/// Weekly action: passive (automated calls only) or active (service call).
enum class InterventionAction : int { Passive = 0, Active = 1 };

constexpr double reward(ArmState s) { return static_cast<double>(s); }

/// Four engagement probabilities P(next=Engaging | state, action), indexed
/// action*2 + state. This is the order a predictor emits them in.
struct EngageProbs {
  std::array<double, 4> p{};

  double operator()(InterventionAction a, ArmState s) const {
    return p[static_cast<size_t>(a) * 2 + static_cast<size_t>(s)];
  }
  double& operator()(InterventionAction a, ArmState s) {
    return p[static_cast<size_t>(a) * 2 + static_cast<size_t>(s)];
  }
};

/// Full 2-state x 2-action x 2-next-state probability table.
struct TransitionModel {
  // indexed (state*2 + action)*2 + next
  std::array<double, 8> prob{};

  static constexpr size_t idx(ArmState s, InterventionAction a, ArmState next) {
    return (static_cast<size_t>(s) * 2 + static_cast<size_t>(a)) * 2 +
           static_cast<size_t>(next);
  }

  double operator()(ArmState s, InterventionAction a, ArmState next) const {
    return prob[idx(s, a, next)];
  }
  double& operator()(ArmState s, InterventionAction a, ArmState next) {
    return prob[idx(s, a, next)];
  }

  /// P(next = Engaging | s, a); the complementary entry is 1 - this.
  double engage(ArmState s, InterventionAction a) const {
    return prob[idx(s, a, ArmState::Engaging)];
  }

  static TransitionModel from_engage_probs(const EngageProbs& e) {
    TransitionModel m;
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        double pe = e.p[static_cast<size_t>(a) * 2 + static_cast<size_t>(s)];
        m.prob[(static_cast<size_t>(s) * 2 + a) * 2 + 1] = pe;
        m.prob[(static_cast<size_t>(s) * 2 + a) * 2 + 0] = 1.0 - pe;
      }
    }
    return m;
  }

  EngageProbs engage_probs() const {
    EngageProbs e;
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a)
        e.p[static_cast<size_t>(a) * 2 + s] =
            prob[(static_cast<size_t>(s) * 2 + a) * 2 + 1];
    return e;
  }

  bool is_valid() const {
    for (double v : prob) {
      if (!(v >= 0.0 && v <= 1.0)) return false;
    }
    for (size_t row = 0; row < 4; ++row) {
      double sum = prob[row * 2] + prob[row * 2 + 1];
      if (std::abs(sum - 1.0) > 1e-9) return false;
    }
    return true;
  }

  void validate() const {
    if (!is_valid())
      throw InvalidConfig("transition table not row-stochastic in [0,1]");
  }

  /// True when acting never lowers the chance of engaging next week.
  bool active_helps() const {
    for (int s = 0; s < 2; ++s) {
      auto st = static_cast<ArmState>(s);
      if (engage(st, InterventionAction::Active) <
          engage(st, InterventionAction::Passive))
        return false;
    }
    return true;
  }
};

}  // namespace rmab
