// Wall-clock comparison of the OpenMP kernels against their serial
// reference implementations, with the max absolute divergence printed so a
// parallel/serial mismatch is visible immediately.
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "rmab/data_io.hpp"
#include "rmab/learning_ts.hpp"
#include "rmab/simulator.hpp"

using namespace rmab;

namespace {

struct Timing {
  double serial_s = 0.0;
  double parallel_s = 0.0;
  double max_diff = 0.0;
};

void print_row(const char* name, const Timing& t) {
  std::printf("%-18s %10.3f ms %10.3f ms %8.2fx %12.3g\n", name,
              1e3 * t.serial_s, 1e3 * t.parallel_s,
              t.parallel_s > 0 ? t.serial_s / t.parallel_s : 0.0, t.max_diff);
}

Timing bench_whittle(const Cohort& cohort) {
  std::vector<TransitionModel> models;
  for (const Arm& a : cohort.arms) models.push_back(a.true_model);
  PlannerConfig planner;
  SearchConfig search = SearchConfig::for_discount(planner.discount);
  Timing t;
  double t0 = omp_get_wtime();
  std::vector<WhittleTable> serial =
      whittle_tables_serial(models, planner, search);
  double t1 = omp_get_wtime();
  std::vector<WhittleTable> parallel = whittle_tables(models, planner, search);
  double t2 = omp_get_wtime();
  t.serial_s = t1 - t0;
  t.parallel_s = t2 - t1;
  for (size_t i = 0; i < serial.size(); ++i)
    for (int s = 0; s < 2; ++s)
      t.max_diff = std::max(
          t.max_diff, std::abs(serial[i].index[s] - parallel[i].index[s]));
  return t;
}

Timing bench_step(const Cohort& cohort, int weeks) {
  std::vector<ArmState> start(cohort.size(), ArmState::Engaging);
  std::vector<InterventionAction> actions(cohort.size(),
                                          InterventionAction::Passive);
  for (size_t i = 0; i < actions.size(); i += 7)
    actions[i] = InterventionAction::Active;
  Timing t;
  long serial_sum = 0, parallel_sum = 0;
  double t0 = omp_get_wtime();
  {
    std::vector<ArmState> s = start;
    for (int w = 0; w < weeks; ++w) {
      s = step_cohort_serial(cohort, s, actions, 11, w);
      for (ArmState v : s) serial_sum += static_cast<int>(v);
    }
  }
  double t1 = omp_get_wtime();
  {
    std::vector<ArmState> s = start;
    for (int w = 0; w < weeks; ++w) {
      s = step_cohort(cohort, s, actions, 11, w);
      for (ArmState v : s) parallel_sum += static_cast<int>(v);
    }
  }
  double t2 = omp_get_wtime();
  t.serial_s = t1 - t0;
  t.parallel_s = t2 - t1;
  t.max_diff = std::abs(serial_sum - parallel_sum);
  return t;
}

Timing bench_nll(const Cohort& cohort, int weeks) {
  RolloutConfig rc;
  rc.kind = PolicyKind::RandomK;
  rc.horizon = weeks;
  rc.budget = static_cast<int>(cohort.size() / 10);
  rc.seed = 21;
  Rollout roll = run_policy(cohort, rc);
  LearningCohort lc;
  for (size_t i = 0; i < cohort.size(); ++i) {
    lc.features.push_back(cohort.arms[i].features);
    lc.trajectories.push_back(roll.trajectories[i]);
  }
  TransitionPredictor pred =
      TransitionPredictor::init(kFeatureDim, 16, 3);
  Timing t;
  double t0 = omp_get_wtime();
  double serial = nll_loss_serial(pred, lc);
  double t1 = omp_get_wtime();
  double parallel = nll_loss(pred, lc);
  double t2 = omp_get_wtime();
  t.serial_s = t1 - t0;
  t.parallel_s = t2 - t1;
  t.max_diff = std::abs(serial - parallel);
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  int arms = argc > 1 ? std::atoi(argv[1]) : 20000;
  int weeks = argc > 2 ? std::atoi(argv[2]) : 40;

  GeneratorConfig gen;
  gen.seed = 2;
  gen.num_arms = arms;
  gen.types = {{0.25, 0.6, 0.2, 0.25}, {0.45, 0.8, 0.05, 0.1},
               {0.35, 0.5, 0.3, 0.4}};
  gen.model_noise = 0.05;
  Cohort cohort = generate_cohort(gen).cohort;

  std::printf("%d arms, %d weeks, %d OpenMP threads\n\n", arms, weeks,
              omp_get_max_threads());
  std::printf("%-18s %13s %13s %9s %12s\n", "kernel", "serial", "parallel",
              "speedup", "max |diff|");
  print_row("whittle_tables", bench_whittle(cohort));
  print_row("step_cohort", bench_step(cohort, weeks));
  print_row("nll_loss", bench_nll(cohort, weeks));
  return 0;
}
