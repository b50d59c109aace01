#pragma once

#include <cstdint>

#include "rmab/learning_ts.hpp"
#include "rmab/whittle.hpp"

namespace rmab {

/// Index values plus their sensitivities to the four engagement
/// probabilities (EngageProbs order), from implicit differentiation of the
/// indifference condition at the binary-search root.
struct WhittleDerivatives {
  WhittleTable table;
  std::array<std::array<double, 4>, 2> dindex{};  // [state][engage-prob k]
};

WhittleDerivatives soft_whittle(const TransitionModel& model,
                                const PlannerConfig& planner,
                                const SearchConfig& search);

/// Expected-selection relaxation of top-K: budget times the softmax of
/// index/temperature, with probabilities above 1 clamped and the remainder
/// renormalized so the expected number selected stays at the budget.
struct SoftSelection {
  std::vector<double> probs;
  std::vector<uint8_t> clamped;
  double kprime = 0.0;  // budget left for the unclamped arms
  double temperature = 0.0;
};

SoftSelection policy_probs(const std::vector<double>& indices, int budget,
                           double temperature);

/// Pulls d(objective)/d(probs) back to d(objective)/d(indices). Clamped
/// arms are locally constant and get zero.
std::vector<double> policy_probs_vjp(const SoftSelection& sel,
                                     const std::vector<double>& dprobs);

struct OpeEstimate {
  double value = 0.0;
  double effective_sample_size = 0.0;
};

/// Consistent weighted per-decision importance sampling. `eval_selection`
/// holds the evaluated policy's per-week, per-arm probability of the active
/// action; the behavior log holds the probability the logging policy gave
/// the action actually logged. Each arm is one trajectory; its weight at
/// week t is the product of likelihood ratios of its logged actions up to t.
OpeEstimate ope_cwpdis(const std::vector<std::vector<double>>& eval_selection,
                       const std::vector<Trajectory>& trajectories,
                       const BehaviorLog& behavior, double discount);

/// Same estimate, also filling d(value)/d(eval_selection).
OpeEstimate ope_cwpdis_grad(
    const std::vector<std::vector<double>>& eval_selection,
    const std::vector<Trajectory>& trajectories, const BehaviorLog& behavior,
    double discount, std::vector<std::vector<double>>& dselection);

/// Off-policy value of the soft index policy induced by the predictor,
/// evaluated on the logged states. Forward pass only.
double dfl_objective(const TransitionPredictor& predictor,
                     const LearningCohort& cohort, const BehaviorLog& behavior,
                     int budget, const PlannerConfig& planner,
                     const SearchConfig& search, double temperature);

/// Gradient of dfl_objective w.r.t. the predictor weights via the chain
/// value -> selection probabilities -> indices -> transition probabilities
/// -> weights. Returns the estimate at the current weights.
OpeEstimate dfl_gradient(const TransitionPredictor& predictor,
                         const LearningCohort& cohort,
                         const BehaviorLog& behavior, int budget,
                         const PlannerConfig& planner,
                         const SearchConfig& search, double temperature,
                         std::vector<double>& grad);

/// Gradient ascent on the off-policy value. `warm` optionally starts from an
/// existing predictor (e.g. the likelihood-trained one) instead of a fresh
/// seeded initialization. Returns the best parameters seen.
TransitionPredictor train_dfl(const LearningCohort& cohort,
                              const BehaviorLog& behavior, int budget,
                              const TrainConfig& config,
                              const PlannerConfig& planner,
                              const SearchConfig& search, double temperature,
                              const TransitionPredictor* warm = nullptr);

}  // namespace rmab
