#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmab/simulator.hpp"

namespace rmab {

/// Integer-coded beneficiary intake fields. Ranges are fixed by the schema
/// document; features_from_codes defines the numeric expansion.
struct BeneficiaryCodes {
  int64_t id = 0;
  int age_band = 0;                // 0..4
  int education_level = 0;         // 0..3
  int income_bracket = 0;          // 0..3
  int phone_ownership = 0;         // 0..1
  int gestational_age_weeks = 4;   // 4..40
  int num_children = 0;            // 0..6
  int language_code = 0;           // 0..3
  int call_slot_code = 0;          // 0..4

  void validate() const;
};

/// 15 unit-scale values: age one-hot (5), education, income, phone,
/// gestational age, children, language one-hot (4), call slot.
FeatureVector features_from_codes(const BeneficiaryCodes& codes);
constexpr int kFeatureDim = 15;

/// One latent beneficiary type: passive engagement probabilities per state
/// plus the additive effect of a live call.
struct GeneratorTypeSpec {
  double passive_ne = 0.3;  // P(E | passive, NotEngaging)
  double passive_e = 0.7;   // P(E | passive, Engaging)
  double boost_ne = 0.0;    // P(E|active,s) - P(E|passive,s), >= 0
  double boost_e = 0.0;
};

struct GeneratorConfig {
  uint64_t seed = 0;
  int num_arms = 0;
  std::vector<GeneratorTypeSpec> types;
  double feature_informativeness = 1.0;  // chance a field reveals the type
  double initial_engaged_fraction = 1.0;
  double model_noise = 0.0;  // half-width of per-arm jitter on base probs

  void validate() const;
};

/// A cohort plus the integer codes its features came from and the latent
/// type behind each arm (kept for experiments; not serialized).
struct GeneratedCohort {
  Cohort cohort;
  std::vector<BeneficiaryCodes> codes;
  std::vector<int> latent_type;
};

GeneratedCohort generate_cohort(const GeneratorConfig& config);

void save_cohort(const std::string& path, const Cohort& cohort,
                 const std::vector<BeneficiaryCodes>& codes);
GeneratedCohort load_cohort(const std::string& path);

struct TrajectoryFile {
  std::vector<int64_t> ids;  // aligned with trajectories
  std::vector<Trajectory> trajectories;
};

void save_trajectories(const std::string& path,
                       const std::vector<int64_t>& ids,
                       const std::vector<Trajectory>& trajectories);
TrajectoryFile load_trajectories(const std::string& path);

void save_behavior(const std::string& path, const std::vector<int64_t>& ids,
                   const std::vector<Trajectory>& trajectories,
                   const BehaviorLog& behavior);
BehaviorLog load_behavior(const std::string& path, size_t num_arms);

/// Joins cohort features with logged trajectories by beneficiary id.
LearningCohort make_learning_cohort(const GeneratedCohort& cohort,
                                    const TrajectoryFile& logs);

struct InterventionRow {
  int64_t id = 0;
  int week = 0;
  int priority_rank = 0;  // 1 = highest index
  int call_slot_code = 0;
};

/// One row per chosen arm, ranked by descending index (ties toward the
/// lower position, matching select_top_k).
void export_intervention_list(const std::string& path,
                              const BudgetedSelection& selection,
                              const std::vector<double>& indices,
                              const Cohort& cohort,
                              const std::vector<BeneficiaryCodes>& codes,
                              int week);
std::vector<InterventionRow> import_intervention_list(const std::string& path);

/// Human-readable per-group tables, one section per group.
void write_trial_report(const std::string& path, const TrialReport& report);
/// Machine-readable `key = value` summary of the headline metrics.
void write_trial_summary(const std::string& path, const TrialReport& report);
/// Plot-ready weekly series: week column, then cumulative drops per group
/// and drops prevented per treatment group.
void write_trial_series(const std::string& path, const TrialReport& report);

}  // namespace rmab
