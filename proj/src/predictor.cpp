#include "rmab/predictor.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rmab/rng.hpp"

namespace rmab {

TransitionPredictor TransitionPredictor::init(int feature_dim,
                                              int hidden_width,
                                              uint64_t seed) {
  if (feature_dim < 1) throw InvalidConfig("feature_dim must be >= 1");
  if (hidden_width < 0) throw InvalidConfig("hidden_width must be >= 0");
  TransitionPredictor p;
  p.feature_dim = feature_dim;
  p.hidden_width = hidden_width;
  p.params.resize(param_count(feature_dim, hidden_width));
  for (size_t i = 0; i < p.params.size(); ++i)
    p.params[i] =
        -0.1 + 0.2 * rng::uniform(seed, rng::streams::predictor_init, i);
  return p;
}

std::array<double, 4> TransitionPredictor::logits(const FeatureVector& x,
                                                  double* hidden) const {
  if (static_cast<int>(x.size()) != feature_dim)
    throw DimensionMismatch("feature vector has dimension " +
                            std::to_string(x.size()) + ", predictor expects " +
                            std::to_string(feature_dim));
  const double* w = params.data();
  std::array<double, 4> z{};
  if (hidden_width == 0) {
    const double* b = w + 4 * static_cast<size_t>(feature_dim);
    for (int k = 0; k < 4; ++k) {
      double acc = b[k];
      const double* row = w + static_cast<size_t>(k) * feature_dim;
      for (int d = 0; d < feature_dim; ++d) acc += row[d] * x[d];
      z[k] = acc;
    }
    return z;
  }

  const int H = hidden_width, D = feature_dim;
  const double* w1 = w;
  const double* b1 = w1 + static_cast<size_t>(H) * D;
  const double* w2 = b1 + H;
  const double* b2 = w2 + 4 * static_cast<size_t>(H);
  double local[64];
  std::vector<double> big;
  double* h = hidden;
  if (!h) {
    if (H <= 64) {
      h = local;
    } else {
      big.resize(H);
      h = big.data();
    }
  }
  for (int j = 0; j < H; ++j) {
    double acc = b1[j];
    const double* row = w1 + static_cast<size_t>(j) * D;
    for (int d = 0; d < D; ++d) acc += row[d] * x[d];
    h[j] = std::tanh(acc);
  }
  for (int k = 0; k < 4; ++k) {
    double acc = b2[k];
    const double* row = w2 + static_cast<size_t>(k) * H;
    for (int j = 0; j < H; ++j) acc += row[j] * h[j];
    z[k] = acc;
  }
  return z;
}

void TransitionPredictor::backprop(const FeatureVector& x,
                                   const double* hidden,
                                   const std::array<double, 4>& dlogits,
                                   std::vector<double>& grad) const {
  if (grad.size() != params.size())
    throw DimensionMismatch("gradient buffer size mismatch");
  const int D = feature_dim, H = hidden_width;
  if (H == 0) {
    double* gw = grad.data();
    double* gb = gw + 4 * static_cast<size_t>(D);
    for (int k = 0; k < 4; ++k) {
      for (int d = 0; d < D; ++d)
        gw[static_cast<size_t>(k) * D + d] += dlogits[k] * x[d];
      gb[k] += dlogits[k];
    }
    return;
  }

  const double* w2 = params.data() + static_cast<size_t>(H) * D + H;
  double* gw1 = grad.data();
  double* gb1 = gw1 + static_cast<size_t>(H) * D;
  double* gw2 = gb1 + H;
  double* gb2 = gw2 + 4 * static_cast<size_t>(H);
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < H; ++j)
      gw2[static_cast<size_t>(k) * H + j] += dlogits[k] * hidden[j];
    gb2[k] += dlogits[k];
  }
  for (int j = 0; j < H; ++j) {
    double dh = 0.0;
    for (int k = 0; k < 4; ++k)
      dh += dlogits[k] * w2[static_cast<size_t>(k) * H + j];
    double du = dh * (1.0 - hidden[j] * hidden[j]);
    for (int d = 0; d < D; ++d)
      gw1[static_cast<size_t>(j) * D + d] += du * x[d];
    gb1[j] += du;
  }
}

TransitionModel predict(const TransitionPredictor& predictor,
                        const FeatureVector& features) {
  std::array<double, 4> z = predictor.logits(features);
  EngageProbs e;
  for (int k = 0; k < 4; ++k) {
    double p = 1.0 / (1.0 + std::exp(-z[k]));
    // keep strictly inside (0,1): saturation must not round to an endpoint
    if (p < 1e-12) p = 1e-12;
    if (p > 1.0 - 1e-12) p = 1.0 - 1e-12;
    e.p[k] = p;
  }
  return TransitionModel::from_engage_probs(e);
}

void TransitionPredictor::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  out << "rmab-predictor-v1 " << origin << ' ' << feature_dim << ' '
      << hidden_width << '\n';
  char buf[32];
  for (size_t i = 0; i < params.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", params[i]);
    out << buf << ((i + 1) % 8 == 0 ? '\n' : ' ');
  }
  out << '\n';
  if (!out) throw IoFailure("write failed on " + path);
}

TransitionPredictor TransitionPredictor::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path);
  std::string magic;
  TransitionPredictor p;
  if (!(in >> magic >> p.origin >> p.feature_dim >> p.hidden_width))
    throw SchemaViolation(path + ": unreadable predictor header");
  if (magic != "rmab-predictor-v1")
    throw SchemaViolation(path + ": unknown schema '" + magic + "'");
  if (p.origin != "ts" && p.origin != "dfl")
    throw SchemaViolation(path + ": provenance flag must be ts or dfl");
  if (p.feature_dim < 1 || p.hidden_width < 0)
    throw SchemaViolation(path + ": bad dimensions in header");
  size_t n = param_count(p.feature_dim, p.hidden_width);
  p.params.resize(n);
  for (size_t i = 0; i < n; ++i)
    if (!(in >> p.params[i]))
      throw SchemaViolation(path + ": expected " + std::to_string(n) +
                            " weights, file ends at " + std::to_string(i));
  return p;
}

}  // namespace rmab
