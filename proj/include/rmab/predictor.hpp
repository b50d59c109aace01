#pragma once

#include <array>
#include <string>
#include <vector>

#include "rmab/trajectory.hpp"

namespace rmab {

/// Maps registration features to 4 transition logits. hidden_width = 0 is a
/// plain affine map; otherwise one tanh layer feeds the logistic heads.
/// Flat parameter layout: [W1 (H x D) row-major, b1 (H), W2 (4 x H), b2 (4)],
/// or [W (4 x D), b (4)] when H = 0.
struct TransitionPredictor {
  int feature_dim = 0;
  int hidden_width = 0;
  std::vector<double> params;
  std::string origin = "ts";  // checkpoint provenance flag: ts | dfl

  static size_t param_count(int feature_dim, int hidden_width) {
    if (hidden_width > 0)
      return static_cast<size_t>(hidden_width) * feature_dim + hidden_width +
             4 * static_cast<size_t>(hidden_width) + 4;
    return 4 * static_cast<size_t>(feature_dim) + 4;
  }

  /// Weights drawn uniform(-0.1, 0.1) from the seed; deterministic.
  static TransitionPredictor init(int feature_dim, int hidden_width,
                                  uint64_t seed);

  /// The four logits in EngageProbs order. `hidden` (size hidden_width) is
  /// filled with the tanh activations when present; pass nullptr otherwise.
  std::array<double, 4> logits(const FeatureVector& x,
                               double* hidden = nullptr) const;

  /// Accumulates d(objective)/d(params) into grad given d(objective)/d(logits).
  void backprop(const FeatureVector& x, const double* hidden,
                const std::array<double, 4>& dlogits,
                std::vector<double>& grad) const;

  void save(const std::string& path) const;
  static TransitionPredictor load(const std::string& path);
};

/// Logistic squash of the predictor's logits, clamped inside (0,1).
TransitionModel predict(const TransitionPredictor& predictor,
                        const FeatureVector& features);

}  // namespace rmab
