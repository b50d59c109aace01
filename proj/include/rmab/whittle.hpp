#pragma once

#include <vector>

#include "rmab/mdp.hpp"

namespace rmab {

/// Per-state index values for one arm.
struct WhittleTable {
  std::array<double, 2> index{};

  double operator[](ArmState s) const { return index[static_cast<size_t>(s)]; }
  double& operator[](ArmState s) { return index[static_cast<size_t>(s)]; }
};

struct SearchConfig {
  double lower_bound = -10.0;
  double upper_bound = 10.0;
  double subsidy_tolerance = 1e-6;
  double indifference_tolerance = 1e-4;

  /// Bracket sized to the per-step reward range: a subsidy beyond
  /// 1/(1-discount) can never be pivotal when rewards lie in [0,1].
  static SearchConfig for_discount(double discount) {
    SearchConfig c;
    c.upper_bound = 1.0 / (1.0 - discount);
    c.lower_bound = -c.upper_bound;
    return c;
  }

  void validate() const {
    if (!(lower_bound < upper_bound))
      throw InvalidConfig("search bounds must satisfy lower < upper");
    if (!(subsidy_tolerance > 0.0) || !(indifference_tolerance > 0.0))
      throw InvalidConfig("search tolerances must be positive");
  }
};

struct BudgetedSelection {
  std::vector<int> chosen;  // ascending arm positions
  int budget = 0;

  bool contains(int arm) const;
};

/// Smallest subsidy making the planner indifferent between acting and not
/// acting in `state`, found by bisection on the gap
/// g(lambda) = Q_lambda(state, passive) - Q_lambda(state, active).
double whittle_index(const TransitionModel& model, ArmState state,
                     const PlannerConfig& planner, const SearchConfig& search);

WhittleTable whittle_table(const TransitionModel& model,
                           const PlannerConfig& planner,
                           const SearchConfig& search);

/// Per-arm tables; the parallel variant distributes arms across threads,
/// the serial one is the reference it is checked against.
std::vector<WhittleTable> whittle_tables(
    const std::vector<TransitionModel>& models, const PlannerConfig& planner,
    const SearchConfig& search);
std::vector<WhittleTable> whittle_tables_serial(
    const std::vector<TransitionModel>& models, const PlannerConfig& planner,
    const SearchConfig& search);

/// Sweeps the subsidy grid and reports whether the set of states preferring
/// the passive action grows monotonically with the subsidy.
bool check_indexability(const TransitionModel& model,
                        const PlannerConfig& planner, double grid_step);

/// K arms of largest index; ties broken toward the lower position.
BudgetedSelection select_top_k(const std::vector<double>& indices, int budget);

}  // namespace rmab
