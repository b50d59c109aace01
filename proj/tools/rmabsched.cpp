// Command-line pipeline: generate synthetic cohorts with logged rollouts,
// train transition predictors (likelihood or decision objective), emit
// weekly intervention lists, run randomized trials, and summarize saved
// rollouts. Every run writes a manifest that `rerun` replays byte for byte.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rmab/config.hpp"
#include "rmab/data_io.hpp"
#include "rmab/learning_dfl.hpp"
#include "rmab/learning_ts.hpp"
#include "rmab/simulator.hpp"
#include "rmab/version.hpp"

namespace {

using namespace rmab;

// Absent keys are filled with their defaults before the manifest is
// recorded, so a rerun sees exactly the values this run used.
std::string resolve(KvConfig& cfg, const std::string& key,
                    const std::string& fallback) {
  if (!cfg.has(key)) cfg.set(key, fallback);
  return cfg.get_string(key);
}

void resolve_out_dir(KvConfig& cfg) {
  if (!cfg.has("out_dir")) {
    const char* env = std::getenv("RMABSCHED_OUT_DIR");
    cfg.set("out_dir", (env && *env) ? env : ".");
  }
  std::error_code ec;
  std::filesystem::create_directories(cfg.get_string("out_dir"), ec);
  if (ec)
    throw IoFailure("cannot create output directory " +
                    cfg.get_string("out_dir") + ": " + ec.message());
}

// Relative paths live under out_dir; absolute paths are taken as-is.
std::string locate(const KvConfig& cfg, const std::string& name) {
  if (!name.empty() && name.front() == '/') return name;
  return cfg.get_string("out_dir") + "/" + name;
}

std::string in_file(KvConfig& cfg, const std::string& key) {
  return locate(cfg, cfg.get_string(key));
}

std::string out_file(KvConfig& cfg, const std::string& key,
                     const std::string& fallback) {
  return locate(cfg, resolve(cfg, key, fallback));
}

double num(KvConfig& cfg, const std::string& key, const std::string& def) {
  resolve(cfg, key, def);
  return cfg.get_double(key);
}

int64_t whole(KvConfig& cfg, const std::string& key, const std::string& def) {
  resolve(cfg, key, def);
  return cfg.get_int(key);
}

uint64_t seed_of(KvConfig& cfg, const std::string& key,
                 const std::string& def) {
  resolve(cfg, key, def);
  return cfg.get_uint64(key);
}

void emit_manifest(KvConfig& cfg, const std::string& command,
                   const std::vector<std::string>& inputs,
                   const std::vector<std::string>& outputs) {
  const std::string path =
      out_file(cfg, "manifest_file", command + "_manifest.txt");
  RunManifest m;
  m.command = command;
  m.tool_version = kToolVersion;
  m.config = cfg.items();
  m.inputs = inputs;
  m.outputs = outputs;
  write_manifest(path, m);
}

GeneratorConfig generator_from(KvConfig& cfg) {
  GeneratorConfig gen;
  gen.seed = cfg.get_uint64("seed");
  gen.num_arms = static_cast<int>(cfg.get_int("arms"));
  for (int t = 0;; ++t) {
    const std::string p = "type" + std::to_string(t);
    if (!cfg.has(p + ".passive_ne")) break;
    GeneratorTypeSpec spec;
    spec.passive_ne = cfg.get_double(p + ".passive_ne");
    spec.passive_e = cfg.get_double(p + ".passive_e");
    spec.boost_ne = cfg.get_double(p + ".boost_ne", 0.0);
    spec.boost_e = cfg.get_double(p + ".boost_e", 0.0);
    resolve(cfg, p + ".boost_ne", "0");
    resolve(cfg, p + ".boost_e", "0");
    gen.types.push_back(spec);
  }
  if (gen.types.empty())
    throw InvalidConfig(
        "config needs at least a [type0] section with passive_ne/passive_e");
  gen.feature_informativeness = num(cfg, "informativeness", "1");
  gen.initial_engaged_fraction = num(cfg, "engaged_fraction", "1");
  gen.model_noise = num(cfg, "model_noise", "0");
  return gen;
}

int cmd_generate(KvConfig cfg) {
  resolve_out_dir(cfg);
  resolve(cfg, "seed", "0");
  GeneratorConfig gen = generator_from(cfg);
  const int horizon = static_cast<int>(whole(cfg, "horizon", "8"));
  const int budget = static_cast<int>(whole(
      cfg, "budget", std::to_string(std::max(1, gen.num_arms / 10))));
  const std::string policy = resolve(cfg, "policy", "random_k");

  RolloutConfig rc;
  rc.kind = policy_from_name(policy);
  if (rc.kind == PolicyKind::WhittleTs || rc.kind == PolicyKind::WhittleDfl)
    throw InvalidConfig(
        "generate needs a predictor-free logging policy "
        "(random_k, round_robin, csoc, oracle_whittle)");
  rc.horizon = horizon;
  rc.budget = budget;
  rc.seed = seed_of(cfg, "rollout_seed", std::to_string(gen.seed + 1));

  GeneratedCohort g = generate_cohort(gen);
  Rollout roll = run_policy(g.cohort, rc);
  std::vector<int64_t> ids;
  for (const Arm& a : g.cohort.arms) ids.push_back(a.id);

  const std::string cohort_path = out_file(cfg, "cohort_file", "cohort.tsv");
  const std::string traj_path =
      out_file(cfg, "trajectories_file", "trajectories.tsv");
  const std::string behavior_path =
      out_file(cfg, "behavior_file", "behavior.tsv");
  save_cohort(cohort_path, g.cohort, g.codes);
  save_trajectories(traj_path, ids, roll.trajectories);
  save_behavior(behavior_path, ids, roll.trajectories, roll.behavior);
  emit_manifest(cfg, "generate", {},
                {cohort_path, traj_path, behavior_path});
  std::printf("generate: %d arms, %d logged weeks under %s\n", gen.num_arms,
              horizon, policy.c_str());
  return 0;
}

int cmd_train(KvConfig cfg) {
  resolve_out_dir(cfg);
  const std::string mode = cfg.get_string("mode");
  if (mode != "ts" && mode != "dfl")
    throw InvalidConfig("mode must be ts or dfl, got \"" + mode + "\"");

  const std::string cohort_path = in_file(cfg, "cohort_file");
  const std::string traj_path = in_file(cfg, "trajectories_file");
  GeneratedCohort g = load_cohort(cohort_path);
  TrajectoryFile tf = load_trajectories(traj_path);
  LearningCohort lc = make_learning_cohort(g, tf);

  TrainConfig tc;
  tc.learning_rate = num(cfg, "learning_rate", "0.05");
  tc.epochs = static_cast<int>(whole(cfg, "epochs", "200"));
  tc.batch_size = static_cast<int>(whole(cfg, "batch_size", "0"));
  tc.hidden_width = static_cast<int>(whole(cfg, "hidden_width", "8"));
  tc.smoothing = num(cfg, "smoothing", "0");
  tc.seed = seed_of(cfg, "seed", "0");

  std::vector<std::string> inputs = {cohort_path, traj_path};
  TransitionPredictor trained;
  if (mode == "ts") {
    trained = train_ts(lc, tc);
  } else {
    const std::string behavior_path = in_file(cfg, "behavior_file");
    inputs.push_back(behavior_path);
    BehaviorLog log = load_behavior(behavior_path, lc.size());
    const int budget = static_cast<int>(cfg.get_int("budget"));
    PlannerConfig planner;
    planner.discount = num(cfg, "discount", "0.9");
    SearchConfig search = SearchConfig::for_discount(planner.discount);
    const double temperature = num(cfg, "temperature", "0.5");
    std::optional<TransitionPredictor> warm;
    if (cfg.has("warm_start_file")) {
      const std::string warm_path = in_file(cfg, "warm_start_file");
      inputs.push_back(warm_path);
      warm = TransitionPredictor::load(warm_path);
    }
    trained = train_dfl(lc, log, budget, tc, planner, search, temperature,
                        warm ? &*warm : nullptr);
  }

  const std::string model_path =
      out_file(cfg, "model_file", "model_" + mode + ".tsv");
  trained.save(model_path);
  emit_manifest(cfg, "train", inputs, {model_path});
  std::printf("train[%s]: nll = %.17g\n", mode.c_str(),
              nll_loss(trained, lc));
  return 0;
}

int cmd_plan(KvConfig cfg) {
  resolve_out_dir(cfg);
  const std::string cohort_path = in_file(cfg, "cohort_file");
  GeneratedCohort g = load_cohort(cohort_path);
  const int budget = static_cast<int>(cfg.get_int("budget"));
  const int week = static_cast<int>(whole(cfg, "week", "0"));
  PlannerConfig planner;
  planner.discount = num(cfg, "discount", "0.9");
  SearchConfig search = SearchConfig::for_discount(planner.discount);

  const std::string oracle = resolve(cfg, "oracle", "false");
  std::vector<std::string> inputs = {cohort_path};
  std::vector<TransitionModel> models;
  if (cfg.has("model_file")) {
    if (oracle == "true")
      throw InvalidConfig("give either model_file or oracle = true, not both");
    const std::string model_path = in_file(cfg, "model_file");
    inputs.push_back(model_path);
    TransitionPredictor pred = TransitionPredictor::load(model_path);
    for (const Arm& a : g.cohort.arms)
      models.push_back(predict(pred, a.features));
  } else if (oracle == "true") {
    for (const Arm& a : g.cohort.arms) models.push_back(a.true_model);
  } else {
    throw InvalidConfig("plan needs model_file or oracle = true");
  }

  std::vector<WhittleTable> tables = whittle_tables(models, planner, search);
  std::vector<double> indices(models.size());
  for (size_t i = 0; i < models.size(); ++i)
    indices[i] =
        tables[i].index[static_cast<int>(g.cohort.arms[i].initial_state)];
  BudgetedSelection sel = select_top_k(indices, budget);

  const std::string list_path =
      out_file(cfg, "list_file", "interventions.tsv");
  export_intervention_list(list_path, sel, indices, g.cohort, g.codes, week);
  emit_manifest(cfg, "plan", inputs, {list_path});
  std::printf("plan: %zu of %zu arms scheduled for week %d\n",
              sel.chosen.size(), models.size(), week);
  return 0;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t comma = csv.find(',', start);
    std::string part = csv.substr(start, comma - start);
    size_t b = part.find_first_not_of(" \t");
    size_t e = part.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? "" : part.substr(b, e - b + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

int cmd_trial(KvConfig cfg) {
  resolve_out_dir(cfg);
  TrialConfig tc;
  tc.horizon = static_cast<int>(cfg.get_int("horizon"));
  tc.budget = static_cast<int>(cfg.get_int("budget"));
  tc.seed = seed_of(cfg, "seed", "0");
  tc.bootstrap_resamples =
      static_cast<int>(whole(cfg, "bootstrap_resamples", "10000"));
  tc.intervention_weeks =
      static_cast<int>(whole(cfg, "intervention_weeks", "-1"));
  tc.planner.discount = num(cfg, "discount", "0.9");
  tc.search = SearchConfig::for_discount(tc.planner.discount);
  for (const std::string& name : split_list(cfg.get_string("groups")))
    tc.groups.push_back(policy_from_name(name));

  std::vector<std::string> inputs;
  std::vector<Cohort> cohorts;
  if (cfg.has("cohort_files")) {
    std::vector<std::string> files = split_list(cfg.get_string("cohort_files"));
    if (files.size() != tc.groups.size())
      throw InvalidConfig("cohort_files lists " + std::to_string(files.size()) +
                          " files for " + std::to_string(tc.groups.size()) +
                          " groups");
    for (const std::string& f : files) {
      const std::string path = locate(cfg, f);
      inputs.push_back(path);
      cohorts.push_back(load_cohort(path).cohort);
    }
  } else {
    const std::string path = in_file(cfg, "cohort_file");
    inputs.push_back(path);
    Cohort c = load_cohort(path).cohort;
    cohorts.assign(tc.groups.size(), c);
  }

  std::optional<TransitionPredictor> ts_pred, dfl_pred;
  bool wants_ts = false, wants_dfl = false;
  for (PolicyKind k : tc.groups) {
    wants_ts |= k == PolicyKind::WhittleTs;
    wants_dfl |= k == PolicyKind::WhittleDfl;
  }
  if (wants_ts) {
    const std::string p = in_file(cfg, "model_file_ts");
    inputs.push_back(p);
    ts_pred = TransitionPredictor::load(p);
  }
  if (wants_dfl) {
    const std::string p = in_file(cfg, "model_file_dfl");
    inputs.push_back(p);
    dfl_pred = TransitionPredictor::load(p);
  }
  std::vector<const TransitionPredictor*> predictors;
  for (PolicyKind k : tc.groups) {
    if (k == PolicyKind::WhittleTs)
      predictors.push_back(&*ts_pred);
    else if (k == PolicyKind::WhittleDfl)
      predictors.push_back(&*dfl_pred);
    else
      predictors.push_back(nullptr);
  }

  TrialReport report = run_trial(tc, cohorts, predictors);

  const std::string report_path =
      out_file(cfg, "report_file", "trial_report.txt");
  const std::string summary_path =
      out_file(cfg, "summary_file", "trial_summary.txt");
  const std::string series_path =
      out_file(cfg, "series_file", "trial_series.tsv");
  write_trial_report(report_path, report);
  write_trial_summary(summary_path, report);
  write_trial_series(series_path, report);
  emit_manifest(cfg, "trial", inputs,
                {report_path, summary_path, series_path});
  for (size_t gi = 0; gi < report.groups.size(); ++gi) {
    const GroupResult& gr = report.groups[gi];
    if (static_cast<int>(gi) == report.comparison_group ||
        report.comparison_group < 0) {
      std::printf("trial[%zu] %s: final cumulative drop %ld\n", gi,
                  gr.name.c_str(), gr.cumulative_drop.back());
    } else {
      std::printf(
          "trial[%zu] %s: prevented %ld drops (%.1f%%), p = %.4f\n", gi,
          gr.name.c_str(), gr.drops_prevented.back(), gr.percent_reduction,
          gr.p_value);
    }
  }
  return 0;
}

int cmd_report(KvConfig cfg) {
  resolve_out_dir(cfg);
  const std::string traj_path = in_file(cfg, "trajectories_file");
  TrajectoryFile tf = load_trajectories(traj_path);
  if (tf.trajectories.empty())
    throw InvalidConfig("trajectory file has no rollouts to summarize");
  const size_t weeks = tf.trajectories.front().steps.size();
  for (const Trajectory& t : tf.trajectories)
    if (t.steps.size() != weeks)
      throw DimensionMismatch("trajectories have unequal horizons");

  std::vector<int> engaged(weeks + 1, 0), drop(weeks + 1, 0),
      cumulative(weeks + 1, 0);
  for (const Trajectory& t : tf.trajectories) {
    std::vector<int> states = t.weekly_states();
    DropSeries ds = engagement_drop(t);
    for (size_t w = 0; w <= weeks; ++w) {
      engaged[w] += states[w];
      drop[w] += ds.drop[w];
      cumulative[w] += ds.cumulative[w];
    }
  }

  std::vector<std::string> inputs = {traj_path};
  std::vector<int> prevented;
  if (cfg.has("baseline_file")) {
    const std::string base_path = in_file(cfg, "baseline_file");
    inputs.push_back(base_path);
    TrajectoryFile bf = load_trajectories(base_path);
    std::vector<int> base_cum(weeks + 1, 0);
    for (const Trajectory& t : bf.trajectories) {
      if (t.steps.size() != weeks)
        throw DimensionMismatch("baseline horizon differs from treatment");
      DropSeries ds = engagement_drop(t);
      for (size_t w = 0; w <= weeks; ++w) base_cum[w] += ds.cumulative[w];
    }
    prevented.resize(weeks + 1);
    for (size_t w = 0; w <= weeks; ++w)
      prevented[w] = base_cum[w] - cumulative[w];
  }

  const std::string series_path =
      out_file(cfg, "series_file", "report_series.tsv");
  FILE* f = std::fopen(series_path.c_str(), "wb");
  if (!f) throw IoFailure("cannot open for writing: " + series_path);
  std::fprintf(f, "week\tengaged\tdrop\tcumulative_drop%s\n",
               prevented.empty() ? "" : "\tdrops_prevented");
  for (size_t w = 0; w <= weeks; ++w) {
    std::fprintf(f, "%zu\t%d\t%d\t%d", w, engaged[w], drop[w], cumulative[w]);
    if (!prevented.empty()) std::fprintf(f, "\t%d", prevented[w]);
    std::fprintf(f, "\n");
  }
  if (std::fclose(f) != 0) throw IoFailure("write failed: " + series_path);
  emit_manifest(cfg, "report", inputs, {series_path});
  std::printf("report: %zu arms over %zu weeks, final cumulative drop %d\n",
              tf.trajectories.size(), weeks, cumulative[weeks]);
  return 0;
}

int dispatch(const std::string& command, KvConfig cfg) {
  if (command == "generate") return cmd_generate(std::move(cfg));
  if (command == "train") return cmd_train(std::move(cfg));
  if (command == "plan") return cmd_plan(std::move(cfg));
  if (command == "trial") return cmd_trial(std::move(cfg));
  if (command == "report") return cmd_report(std::move(cfg));
  throw InvalidConfig("manifest names unknown command \"" + command + "\"");
}

int run(const std::string& command, const std::string& config_path,
        const std::vector<std::string>& overrides,
        const std::string& out_dir_flag) {
  if (command == "rerun") {
    RunManifest m = read_manifest(config_path);
    KvConfig cfg;
    for (const auto& [k, v] : m.config) cfg.set(k, v);
    return dispatch(m.command, std::move(cfg));
  }
  KvConfig cfg = KvConfig::from_file(config_path);
  for (const std::string& ov : overrides) {
    size_t eq = ov.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidConfig("--set expects key=value, got \"" + ov + "\"");
    cfg.set(ov.substr(0, eq), ov.substr(eq + 1));
  }
  if (!out_dir_flag.empty()) cfg.set("out_dir", out_dir_flag);
  return dispatch(command, std::move(cfg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"restless-bandit call scheduling pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir_flag, manifest_path;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "key = value config file")
        ->required();
    cmd->add_option("-s,--set", overrides,
                    "override a config key (key=value, repeatable)");
    cmd->add_option("--out-dir", out_dir_flag,
                    "output directory (beats config and RMABSCHED_OUT_DIR)");
  };
  add_common(app.add_subcommand(
      "generate", "synthesize a cohort and a logged behavior rollout"));
  add_common(app.add_subcommand(
      "train", "fit a transition predictor (mode = ts | dfl)"));
  add_common(app.add_subcommand(
      "plan", "rank arms by Whittle index and export the call list"));
  add_common(app.add_subcommand(
      "trial", "run a multi-group randomized trial and write reports"));
  add_common(app.add_subcommand(
      "report", "summarize saved trajectories into weekly drop series"));
  app.add_subcommand("rerun", "repeat a recorded run from its manifest")
      ->add_option("manifest", manifest_path, "manifest file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    return run(command, command == "rerun" ? manifest_path : config_path,
               overrides, out_dir_flag);
  } catch (const InvalidConfig& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const SchemaViolation& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
  } catch (const DimensionMismatch& e) {
    std::fprintf(stderr, "shape error: %s\n", e.what());
  } catch (const MissingPredictor& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const UndefinedEstimate& e) {
    std::fprintf(stderr, "estimate undefined: %s\n", e.what());
  } catch (const NonConvergence& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const BracketingFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const DegenerateWeights& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const DegenerateLikelihood& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const IoFailure& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  }
  return 2;
}
