#include "rmab/whittle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rmab {

bool BudgetedSelection::contains(int arm) const {
  return std::binary_search(chosen.begin(), chosen.end(), arm);
}

namespace {

double gap_at(const TransitionModel& model, ArmState state, double subsidy,
              const PlannerConfig& planner, QTable& scratch) {
  scratch = solve_subsidized(model, subsidy, planner, &scratch);
  return scratch(state, InterventionAction::Passive) -
         scratch(state, InterventionAction::Active);
}

}  // namespace

double whittle_index(const TransitionModel& model, ArmState state,
                     const PlannerConfig& planner, const SearchConfig& search) {
  search.validate();

  QTable scratch{};
  double lo = search.lower_bound, hi = search.upper_bound;
  double glo = gap_at(model, state, lo, planner, scratch);
  double ghi = gap_at(model, state, hi, planner, scratch);
  if (glo > 0.0 || ghi < 0.0) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "subsidy gap not bracketed: g(%g)=%g, g(%g)=%g", lo, glo, hi,
                  ghi);
    throw BracketingFailure(msg);
  }

  while (hi - lo > search.subsidy_tolerance) {
    double mid = 0.5 * (lo + hi);
    if (gap_at(model, state, mid, planner, scratch) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

WhittleTable whittle_table(const TransitionModel& model,
                           const PlannerConfig& planner,
                           const SearchConfig& search) {
  WhittleTable t;
  t[ArmState::NotEngaging] =
      whittle_index(model, ArmState::NotEngaging, planner, search);
  t[ArmState::Engaging] =
      whittle_index(model, ArmState::Engaging, planner, search);
  return t;
}

std::vector<WhittleTable> whittle_tables_serial(
    const std::vector<TransitionModel>& models, const PlannerConfig& planner,
    const SearchConfig& search) {
  std::vector<WhittleTable> out(models.size());
  for (size_t i = 0; i < models.size(); ++i)
    out[i] = whittle_table(models[i], planner, search);
  return out;
}

std::vector<WhittleTable> whittle_tables(
    const std::vector<TransitionModel>& models, const PlannerConfig& planner,
    const SearchConfig& search) {
  std::vector<WhittleTable> out(models.size());
  const long n = static_cast<long>(models.size());
  bool failed = false;  // exceptions may not unwind out of the region
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = whittle_table(models[i], planner, search);
    } catch (...) {
      failed = true;
    }
  }
  if (failed)  // redo serially so the first arm's error surfaces
    return whittle_tables_serial(models, planner, search);
  return out;
}

bool check_indexability(const TransitionModel& model,
                        const PlannerConfig& planner, double grid_step) {
  if (!(grid_step > 0.0)) throw InvalidConfig("grid_step must be positive");
  model.validate();

  SearchConfig bounds = SearchConfig::for_discount(planner.discount);
  // Solver noise on Q is ~tolerance/(1-discount); use a slack an order above
  // it so the passive set is read off stably.
  double slack = 10.0 * planner.bellman_tolerance / (1.0 - planner.discount);

  QTable scratch{};
  bool passive_seen[2] = {false, false};
  long nsteps = static_cast<long>(
      std::ceil((bounds.upper_bound - bounds.lower_bound) / grid_step));
  for (long i = 0; i <= nsteps; ++i) {
    double lam =
        std::min(bounds.lower_bound + i * grid_step, bounds.upper_bound);
    scratch = solve_subsidized(model, lam, planner, &scratch);
    for (int si = 0; si < 2; ++si) {
      auto s = static_cast<ArmState>(si);
      bool passive = scratch(s, InterventionAction::Passive) >=
                     scratch(s, InterventionAction::Active) - slack;
      if (passive_seen[si] && !passive) return false;  // state left the set
      passive_seen[si] = passive_seen[si] || passive;
    }
  }
  return passive_seen[0] && passive_seen[1];
}

BudgetedSelection select_top_k(const std::vector<double>& indices, int budget) {
  if (budget < 0) throw InvalidConfig("budget must be >= 0");
  BudgetedSelection sel;
  sel.budget = budget;

  size_t k = std::min<size_t>(budget, indices.size());
  std::vector<int> order(indices.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](int a, int b) {
                      if (indices[a] != indices[b])
                        return indices[a] > indices[b];
                      return a < b;
                    });
  sel.chosen.assign(order.begin(), order.begin() + k);
  std::sort(sel.chosen.begin(), sel.chosen.end());
  return sel;
}

}  // namespace rmab
