#pragma once

#include "rmab/predictor.hpp"
#include "rmab/trajectory.hpp"

namespace rmab {

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 2000;
  int batch_size = 0;  // 0 = full cohort per gradient step
  uint64_t seed = 0;
  double smoothing = 0.0;  // tabular pseudo-count
  int hidden_width = 16;   // 0 = linear predictor

  void validate() const {
    if (!(learning_rate > 0.0))
      throw InvalidConfig("learning_rate must be positive");
    if (epochs < 0) throw InvalidConfig("epochs must be >= 0");
    if (batch_size < 0) throw InvalidConfig("batch_size must be >= 0");
    if (smoothing < 0.0) throw InvalidConfig("smoothing must be >= 0");
    if (hidden_width < 0) throw InvalidConfig("hidden_width must be >= 0");
  }
};

/// Count-ratio estimate with symmetric pseudo-counts:
/// prob(s,a,s') = (n(s,a,s') + smoothing) / (n(s,a,.) + 2 smoothing).
TransitionModel mle_tabular(const Trajectory& trajectory, double smoothing);

/// Mean over arms of the trajectory negative log-likelihood under the
/// predictor's transition probabilities. The parallel variant fans the
/// per-arm terms across threads; the sum order is fixed either way, so the
/// two agree bitwise.
double nll_loss(const TransitionPredictor& predictor,
                const LearningCohort& cohort);
double nll_loss_serial(const TransitionPredictor& predictor,
                       const LearningCohort& cohort);

/// Fills grad (resized to the parameter count) and returns the loss.
double nll_gradient(const TransitionPredictor& predictor,
                    const LearningCohort& cohort, std::vector<double>& grad);

/// Full-batch (or deterministic sequential mini-batch) gradient descent on
/// the likelihood. Returns the best parameters seen, so the result is never
/// worse than the initialization.
TransitionPredictor train_ts(const LearningCohort& cohort,
                             const TrainConfig& config);

}  // namespace rmab
