#include "rmab/learning_ts.hpp"

#include <cmath>
#include <cstring>

namespace rmab {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(sigmoid(z)), stable for any z
double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

constexpr double kUnderflowLog = -690.7755278982137;  // log(1e-300)

/// -log likelihood of one arm's counts given its 4 logits.
double cell_nll(const std::array<double, 4>& z, const TransitionCounts& c) {
  double nll = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int s = 0; s < 2; ++s) {
      size_t base = (static_cast<size_t>(s) * 2 + a) * 2;
      long nN = c.n[base], nE = c.n[base + 1];
      if (nN + nE == 0) continue;
      double lp = log_sigmoid(z[a * 2 + s]);        // log P(next = E)
      double lq = lp - z[a * 2 + s];                // log P(next = NE)
      if ((nE > 0 && lp <= kUnderflowLog) || (nN > 0 && lq <= kUnderflowLog))
        throw DegenerateLikelihood(
            "a logged transition has probability <= 1e-300");
      nll -= nE * lp + nN * lq;
    }
  return nll;
}

std::vector<TransitionCounts> count_cohort(const LearningCohort& cohort) {
  std::vector<TransitionCounts> counts(cohort.size());
  for (size_t i = 0; i < cohort.size(); ++i)
    counts[i] = TransitionCounts::from_trajectory(cohort.trajectories[i]);
  return counts;
}

double nll_from_counts(const TransitionPredictor& pred,
                       const LearningCohort& cohort,
                       const std::vector<TransitionCounts>& counts,
                       bool parallel) {
  const long n = static_cast<long>(cohort.size());
  std::vector<double> per_arm(n);
  if (parallel) {
    bool failed = false;  // exceptions may not unwind out of the region
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
      try {
        per_arm[i] = cell_nll(pred.logits(cohort.features[i]), counts[i]);
      } catch (...) {
        failed = true;
      }
    }
    if (failed)  // redo serially so the first arm's error surfaces
      return nll_from_counts(pred, cohort, counts, false);
  } else {
    for (long i = 0; i < n; ++i)
      per_arm[i] = cell_nll(pred.logits(cohort.features[i]), counts[i]);
  }
  double total = 0.0;
  for (long i = 0; i < n; ++i) total += per_arm[i];  // fixed reduction order
  return total / static_cast<double>(n);
}

/// Gradient of the mean NLL over arms [first, last); returns the summed
/// (not yet normalized) loss contribution of that span.
double grad_span(const TransitionPredictor& pred, const LearningCohort& cohort,
                 const std::vector<TransitionCounts>& counts, size_t first,
                 size_t last, double inv_n, std::vector<double>& grad) {
  std::vector<double> hidden(std::max(pred.hidden_width, 1));
  double total = 0.0;
  for (size_t i = first; i < last; ++i) {
    std::array<double, 4> z = pred.logits(cohort.features[i], hidden.data());
    total += cell_nll(z, counts[i]);
    std::array<double, 4> dz{};
    for (int a = 0; a < 2; ++a)
      for (int s = 0; s < 2; ++s) {
        size_t base = (static_cast<size_t>(s) * 2 + a) * 2;
        long nN = counts[i].n[base], nE = counts[i].n[base + 1];
        if (nN + nE == 0) continue;
        dz[a * 2 + s] = (sigmoid(z[a * 2 + s]) * (nN + nE) - nE) * inv_n;
      }
    pred.backprop(cohort.features[i], hidden.data(), dz, grad);
  }
  return total;
}

}  // namespace

TransitionModel mle_tabular(const Trajectory& trajectory, double smoothing) {
  trajectory.validate();
  if (smoothing < 0.0) throw InvalidConfig("smoothing must be >= 0");
  TransitionCounts c = TransitionCounts::from_trajectory(trajectory);
  TransitionModel m;
  for (size_t row = 0; row < 4; ++row) {
    double total = static_cast<double>(c.n[row * 2] + c.n[row * 2 + 1]);
    if (total == 0.0 && smoothing == 0.0)
      throw UndefinedEstimate("no visits to state/action cell " +
                              std::to_string(row) + " and no smoothing");
    for (size_t next = 0; next < 2; ++next)
      m.prob[row * 2 + next] =
          (c.n[row * 2 + next] + smoothing) / (total + 2.0 * smoothing);
  }
  return m;
}

double nll_loss(const TransitionPredictor& predictor,
                const LearningCohort& cohort) {
  cohort.validate();
  return nll_from_counts(predictor, cohort, count_cohort(cohort), true);
}

double nll_loss_serial(const TransitionPredictor& predictor,
                       const LearningCohort& cohort) {
  cohort.validate();
  return nll_from_counts(predictor, cohort, count_cohort(cohort), false);
}

double nll_gradient(const TransitionPredictor& predictor,
                    const LearningCohort& cohort, std::vector<double>& grad) {
  cohort.validate();
  grad.assign(predictor.params.size(), 0.0);
  auto counts = count_cohort(cohort);
  double total =
      grad_span(predictor, cohort, counts, 0, cohort.size(),
                1.0 / static_cast<double>(cohort.size()), grad);
  return total / static_cast<double>(cohort.size());
}

TransitionPredictor train_ts(const LearningCohort& cohort,
                             const TrainConfig& config) {
  cohort.validate();
  config.validate();
  auto counts = count_cohort(cohort);
  const size_t n = cohort.size();
  const int dim = static_cast<int>(cohort.features.front().size());

  TransitionPredictor pred =
      TransitionPredictor::init(dim, config.hidden_width, config.seed);
  if (config.epochs == 0) return pred;

  size_t batch = (config.batch_size == 0 || config.batch_size >= (int)n)
                     ? n
                     : static_cast<size_t>(config.batch_size);

  std::vector<double> grad(pred.params.size());
  std::vector<double> best = pred.params;
  double best_loss = nll_from_counts(pred, cohort, counts, false);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t first = 0; first < n; first += batch) {
      size_t last = std::min(first + batch, n);
      std::fill(grad.begin(), grad.end(), 0.0);
      grad_span(pred, cohort, counts, first, last,
                1.0 / static_cast<double>(last - first), grad);
      for (size_t i = 0; i < grad.size(); ++i)
        pred.params[i] -= config.learning_rate * grad[i];
    }
    double loss = nll_from_counts(pred, cohort, counts, false);
    if (loss < best_loss) {
      best_loss = loss;
      best = pred.params;
    }
  }
  pred.params = std::move(best);
  pred.origin = "ts";
  return pred;
}

}  // namespace rmab
