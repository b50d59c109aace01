#include "rmab/learning_dfl.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace rmab {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// 2x2 solve of [a b; c d] x = r by Cramer's rule
void solve2(double a, double b, double c, double d, double r0, double r1,
            double& x0, double& x1) {
  double det = a * d - b * c;
  x0 = (r0 * d - b * r1) / det;
  x1 = (a * r1 - r0 * c) / det;
}

}  // namespace

WhittleDerivatives soft_whittle(const TransitionModel& model,
                                const PlannerConfig& planner,
                                const SearchConfig& search) {
  model.validate();
  const double g = planner.discount;
  // treat |Q(s,p) - Q(s,a)| below this as a tie (solver + root noise)
  const double slack =
      10.0 * (search.subsidy_tolerance + planner.bellman_tolerance) / (1.0 - g);

  WhittleDerivatives out;
  for (int s0 = 0; s0 < 2; ++s0) {
    double lam =
        whittle_index(model, static_cast<ArmState>(s0), planner, search);
    out.table.index[s0] = lam;

    // greedy continuation policy at the root; ties go passive, which also
    // fixes the indifferent state s0 itself to passive
    QTable q = solve_subsidized(model, lam, planner);
    int pi[2];
    double qe[2];
    for (int s = 0; s < 2; ++s) {
      auto st = static_cast<ArmState>(s);
      pi[s] = (q(st, InterventionAction::Passive) >=
               q(st, InterventionAction::Active) - slack)
                  ? 0
                  : 1;
      qe[s] = model.engage(st, static_cast<InterventionAction>(pi[s]));
    }

    // V of the fixed policy solves (I - g P_pi) V = r_pi
    double A = 1.0 - g * (1.0 - qe[0]), B = -g * qe[0];
    double C = -g * (1.0 - qe[1]), D = 1.0 - g * qe[1];
    double v0, v1;
    solve2(A, B, C, D, (pi[0] == 0 ? lam : 0.0), 1.0 + (pi[1] == 0 ? lam : 0.0),
           v0, v1);
    double dv = v1 - v0;

    double dl0, dl1;  // dV/dlambda
    solve2(A, B, C, D, pi[0] == 0 ? 1.0 : 0.0, pi[1] == 0 ? 1.0 : 0.0, dl0,
           dl1);

    double qp = model.engage(static_cast<ArmState>(s0),
                             InterventionAction::Passive);
    double qa =
        model.engage(static_cast<ArmState>(s0), InterventionAction::Active);
    // indifference condition phi(lambda, q) = lambda + g (qp - qa)(V1 - V0)
    double phi_lam = 1.0 + g * (qp - qa) * (dl1 - dl0);

    for (int k = 0; k < 4; ++k) {
      int ka = k / 2, ks = k % 2;
      // dV/dq_k: the policy transition row of state s depends on q_k only
      // when the policy plays that (action, state) pair
      double r0 = (pi[0] == ka && ks == 0) ? g * dv : 0.0;
      double r1 = (pi[1] == ka && ks == 1) ? g * dv : 0.0;
      double dq0, dq1;
      solve2(A, B, C, D, r0, r1, dq0, dq1);
      double direct = 0.0;
      if (ks == s0) direct = (ka == 0 ? 1.0 : -1.0) * g * dv;
      double phi_q = direct + g * (qp - qa) * (dq1 - dq0);
      out.dindex[s0][k] = -phi_q / phi_lam;
    }
  }
  return out;
}

SoftSelection policy_probs(const std::vector<double>& indices, int budget,
                           double temperature) {
  const size_t n = indices.size();
  if (!(temperature > 0.0))
    throw InvalidConfig("temperature must be positive");
  if (budget < 1 || static_cast<size_t>(budget) > n)
    throw InvalidConfig("budget must lie in [1, number of arms]");

  SoftSelection sel;
  sel.probs.assign(n, 0.0);
  sel.clamped.assign(n, 0);
  sel.temperature = temperature;
  sel.kprime = budget;

  for (;;) {
    double zmax = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i)
      if (!sel.clamped[i]) zmax = std::max(zmax, indices[i] / temperature);
    if (zmax == -std::numeric_limits<double>::infinity()) break;  // all fixed

    double den = 0.0;
    for (size_t i = 0; i < n; ++i)
      if (!sel.clamped[i]) den += std::exp(indices[i] / temperature - zmax);
    for (size_t i = 0; i < n; ++i)
      if (!sel.clamped[i])
        sel.probs[i] =
            sel.kprime * std::exp(indices[i] / temperature - zmax) / den;

    int newly = 0;
    for (size_t i = 0; i < n; ++i)
      if (!sel.clamped[i] && sel.probs[i] >= 1.0) {
        sel.clamped[i] = 1;
        sel.probs[i] = 1.0;
        ++newly;
      }
    if (newly == 0) break;
    sel.kprime -= newly;
    if (sel.kprime <= 0.0) {
      sel.kprime = 0.0;
      for (size_t i = 0; i < n; ++i)
        if (!sel.clamped[i]) sel.probs[i] = 0.0;
      break;
    }
  }
  return sel;
}

std::vector<double> policy_probs_vjp(const SoftSelection& sel,
                                     const std::vector<double>& dprobs) {
  const size_t n = sel.probs.size();
  if (dprobs.size() != n)
    throw DimensionMismatch("vjp cotangent size mismatch");
  std::vector<double> out(n, 0.0);
  if (sel.kprime <= 0.0) return out;
  double dot = 0.0;
  for (size_t i = 0; i < n; ++i)
    if (!sel.clamped[i]) dot += dprobs[i] * sel.probs[i];
  for (size_t i = 0; i < n; ++i)
    if (!sel.clamped[i])
      out[i] = (dprobs[i] * sel.probs[i] - sel.probs[i] * dot / sel.kprime) /
               sel.temperature;
  return out;
}

namespace {

struct OpeTable {
  size_t n = 0, len = 0;
  std::vector<double> w;     // [t * n + arm] cumulative ratio products
  std::vector<double> numer, denom;  // per step
};

OpeTable ope_weights(const std::vector<std::vector<double>>& eval_selection,
                     const std::vector<Trajectory>& trajectories,
                     const BehaviorLog& behavior) {
  OpeTable tbl;
  tbl.n = trajectories.size();
  if (tbl.n == 0) throw InvalidConfig("need at least one trajectory");
  tbl.len = trajectories[0].steps.size();
  for (const Trajectory& t : trajectories) {
    t.validate();
    if (t.steps.size() != tbl.len)
      throw DimensionMismatch("trajectories must share one horizon");
  }
  behavior.validate(tbl.n);
  if (behavior.prob.size() != tbl.len || eval_selection.size() != tbl.len)
    throw DimensionMismatch("evaluation/behavior week count mismatch");
  for (const auto& row : eval_selection)
    if (row.size() != tbl.n)
      throw DimensionMismatch("evaluation probability row size mismatch");

  tbl.w.assign(tbl.len * tbl.n, 0.0);
  tbl.numer.assign(tbl.len, 0.0);
  tbl.denom.assign(tbl.len, 0.0);
  for (size_t i = 0; i < tbl.n; ++i) {
    double running = 1.0;
    for (size_t t = 0; t < tbl.len; ++t) {
      const Step& st = trajectories[i].steps[t];
      double sel = eval_selection[t][i];
      if (!(sel >= 0.0 && sel <= 1.0))
        throw InvalidConfig("evaluation probability outside [0,1]");
      double e = st.action == InterventionAction::Active ? sel : 1.0 - sel;
      running *= e / behavior.prob[t][i];
      tbl.w[t * tbl.n + i] = running;
      double r = reward(st.state);
      tbl.numer[t] += running * r;
      tbl.denom[t] += running;
    }
  }
  return tbl;
}

OpeEstimate ope_value(const OpeTable& tbl, double discount) {
  OpeEstimate est;
  double gamma_t = 1.0;
  for (size_t t = 0; t < tbl.len; ++t) {
    if (tbl.denom[t] == 0.0)
      throw DegenerateWeights("importance weights all vanished at week " +
                              std::to_string(t));
    est.value += gamma_t * tbl.numer[t] / tbl.denom[t];
    gamma_t *= discount;
  }
  double sw = 0.0, sw2 = 0.0;
  for (size_t i = 0; i < tbl.n; ++i) {
    double wi = tbl.w[(tbl.len - 1) * tbl.n + i];
    sw += wi;
    sw2 += wi * wi;
  }
  est.effective_sample_size = sw * sw / sw2;
  return est;
}

}  // namespace

OpeEstimate ope_cwpdis(const std::vector<std::vector<double>>& eval_selection,
                       const std::vector<Trajectory>& trajectories,
                       const BehaviorLog& behavior, double discount) {
  OpeTable tbl = ope_weights(eval_selection, trajectories, behavior);
  return ope_value(tbl, discount);
}

OpeEstimate ope_cwpdis_grad(
    const std::vector<std::vector<double>>& eval_selection,
    const std::vector<Trajectory>& trajectories, const BehaviorLog& behavior,
    double discount, std::vector<std::vector<double>>& dselection) {
  OpeTable tbl = ope_weights(eval_selection, trajectories, behavior);
  OpeEstimate est = ope_value(tbl, discount);

  std::vector<double> coef(tbl.len), mean(tbl.len);
  double gamma_t = 1.0;
  for (size_t t = 0; t < tbl.len; ++t) {
    coef[t] = gamma_t / tbl.denom[t];
    mean[t] = tbl.numer[t] / tbl.denom[t];
    gamma_t *= discount;
  }

  dselection.assign(tbl.len, std::vector<double>(tbl.n, 0.0));
  for (size_t i = 0; i < tbl.n; ++i) {
    double suffix = 0.0;  // sum over steps >= t of gamma^u (r - mean)/D * w
    for (size_t t = tbl.len; t-- > 0;) {
      const Step& st = trajectories[i].steps[t];
      suffix += coef[t] * (reward(st.state) - mean[t]) * tbl.w[t * tbl.n + i];
      double sel = eval_selection[t][i];
      bool active = st.action == InterventionAction::Active;
      double e = active ? sel : 1.0 - sel;
      if (e > 0.0) dselection[t][i] = (active ? 1.0 : -1.0) * suffix / e;
    }
  }
  return est;
}

namespace {

using WhittleCache = std::map<std::array<double, 8>, WhittleDerivatives>;

const WhittleDerivatives& cached_soft_whittle(const TransitionModel& m,
                                              const PlannerConfig& planner,
                                              const SearchConfig& search,
                                              WhittleCache& cache) {
  auto it = cache.find(m.prob);
  if (it != cache.end()) return it->second;
  return cache.emplace(m.prob, soft_whittle(m, planner, search)).first->second;
}

struct DflForward {
  std::vector<TransitionModel> models;
  std::vector<const WhittleDerivatives*> wd;
  std::vector<std::vector<double>> eval;  // [week][arm] selection prob
  std::vector<SoftSelection> sels;        // per week
};

DflForward dfl_forward(const TransitionPredictor& pred,
                       const LearningCohort& cohort,
                       const BehaviorLog& behavior, int budget,
                       const PlannerConfig& planner,
                       const SearchConfig& search, double temperature,
                       WhittleCache& cache) {
  cohort.validate();
  const size_t n = cohort.size();
  behavior.validate(n);
  const size_t len = cohort.trajectories[0].steps.size();

  DflForward f;
  f.models.resize(n);
  f.wd.resize(n);
  for (size_t i = 0; i < n; ++i) {
    f.models[i] = predict(pred, cohort.features[i]);
    f.wd[i] = &cached_soft_whittle(f.models[i], planner, search, cache);
  }
  f.eval.resize(len);
  f.sels.reserve(len);
  std::vector<double> indices(n);
  for (size_t t = 0; t < len; ++t) {
    for (size_t i = 0; i < n; ++i) {
      const Step& st = cohort.trajectories[i].steps[t];
      indices[i] = f.wd[i]->table.index[static_cast<size_t>(st.state)];
    }
    f.sels.push_back(policy_probs(indices, budget, temperature));
    f.eval[t] = f.sels.back().probs;
  }
  return f;
}

}  // namespace

double dfl_objective(const TransitionPredictor& predictor,
                     const LearningCohort& cohort, const BehaviorLog& behavior,
                     int budget, const PlannerConfig& planner,
                     const SearchConfig& search, double temperature) {
  WhittleCache cache;
  DflForward f = dfl_forward(predictor, cohort, behavior, budget, planner,
                             search, temperature, cache);
  return ope_cwpdis(f.eval, cohort.trajectories, behavior, planner.discount)
      .value;
}

OpeEstimate dfl_gradient(const TransitionPredictor& predictor,
                         const LearningCohort& cohort,
                         const BehaviorLog& behavior, int budget,
                         const PlannerConfig& planner,
                         const SearchConfig& search, double temperature,
                         std::vector<double>& grad) {
  WhittleCache cache;
  DflForward f = dfl_forward(predictor, cohort, behavior, budget, planner,
                             search, temperature, cache);
  const size_t n = cohort.size();
  const size_t len = f.eval.size();

  std::vector<std::vector<double>> dsel;
  OpeEstimate est = ope_cwpdis_grad(f.eval, cohort.trajectories, behavior,
                                    planner.discount, dsel);

  // value -> per-arm, per-state index cotangents
  std::vector<double> dW(n * 2, 0.0);
  for (size_t t = 0; t < len; ++t) {
    std::vector<double> didx = policy_probs_vjp(f.sels[t], dsel[t]);
    for (size_t i = 0; i < n; ++i) {
      const Step& st = cohort.trajectories[i].steps[t];
      dW[i * 2 + static_cast<size_t>(st.state)] += didx[i];
    }
  }

  // indices -> engagement probabilities -> logits -> weights
  grad.assign(predictor.params.size(), 0.0);
  std::vector<double> hidden(std::max(predictor.hidden_width, 1));
  for (size_t i = 0; i < n; ++i) {
    std::array<double, 4> z =
        predictor.logits(cohort.features[i], hidden.data());
    std::array<double, 4> dz{};
    for (int k = 0; k < 4; ++k) {
      double dq = dW[i * 2 + 0] * f.wd[i]->dindex[0][k] +
                  dW[i * 2 + 1] * f.wd[i]->dindex[1][k];
      double p = sigmoid(z[k]);
      dz[k] = dq * p * (1.0 - p);
    }
    predictor.backprop(cohort.features[i], hidden.data(), dz, grad);
  }
  return est;
}

TransitionPredictor train_dfl(const LearningCohort& cohort,
                              const BehaviorLog& behavior, int budget,
                              const TrainConfig& config,
                              const PlannerConfig& planner,
                              const SearchConfig& search, double temperature,
                              const TransitionPredictor* warm) {
  cohort.validate();
  config.validate();
  const int dim = static_cast<int>(cohort.features.front().size());

  TransitionPredictor pred =
      warm ? *warm
           : TransitionPredictor::init(dim, config.hidden_width, config.seed);
  pred.origin = "dfl";
  if (config.epochs == 0) return pred;

  std::vector<double> grad;
  std::vector<double> best = pred.params;
  double best_value = -std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    OpeEstimate est = dfl_gradient(pred, cohort, behavior, budget, planner,
                                   search, temperature, grad);
    if (est.value > best_value) {
      best_value = est.value;
      best = pred.params;
    }
    for (size_t i = 0; i < grad.size(); ++i)
      pred.params[i] += config.learning_rate * grad[i];  // ascent
  }
  double final_value = dfl_objective(pred, cohort, behavior, budget, planner,
                                     search, temperature);
  if (final_value > best_value) best = pred.params;
  pred.params = std::move(best);
  return pred;
}

}  // namespace rmab
