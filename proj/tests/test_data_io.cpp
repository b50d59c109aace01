#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "rmab/data_io.hpp"

using namespace rmab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

GeneratorConfig two_type_config(uint64_t seed, int arms) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.num_arms = arms;
  cfg.types = {{0.25, 0.6, 0.2, 0.25}, {0.45, 0.8, 0.05, 0.1}};
  return cfg;
}

bool same_arm(const Arm& a, const Arm& b) {
  return a.id == b.id && a.features == b.features &&
         a.true_model.prob == b.true_model.prob &&
         a.initial_state == b.initial_state;
}

bool same_codes(const BeneficiaryCodes& a, const BeneficiaryCodes& b) {
  return a.id == b.id && a.age_band == b.age_band &&
         a.education_level == b.education_level &&
         a.income_bracket == b.income_bracket &&
         a.phone_ownership == b.phone_ownership &&
         a.gestational_age_weeks == b.gestational_age_weeks &&
         a.num_children == b.num_children &&
         a.language_code == b.language_code &&
         a.call_slot_code == b.call_slot_code;
}

}  // namespace

TEST_SUITE_BEGIN("data_io");

TEST_CASE("feature expansion: one-hots, scaling, dimension") {
  BeneficiaryCodes c;
  c.id = 7;
  c.age_band = 2;
  c.education_level = 3;
  c.income_bracket = 1;
  c.phone_ownership = 1;
  c.gestational_age_weeks = 20;
  c.num_children = 3;
  c.language_code = 0;
  c.call_slot_code = 4;
  FeatureVector x = features_from_codes(c);
  REQUIRE(x.size() == static_cast<size_t>(kFeatureDim));
  CHECK(x[0] == 0.0);
  CHECK(x[2] == 1.0);  // age one-hot
  CHECK(x[5] == 1.0);  // education 3/3
  CHECK(x[6] == doctest::Approx(1.0 / 3.0));
  CHECK(x[7] == 1.0);
  CHECK(x[8] == 0.5);  // 20/40
  CHECK(x[9] == 0.5);  // 3/6
  CHECK(x[10] == 1.0);  // language one-hot
  CHECK(x[11] == 0.0);
  CHECK(x[14] == 1.0);  // slot 4/4
  for (double v : x) CHECK((v >= 0.0 && v <= 1.0));

  c.language_code = 9;
  CHECK_THROWS_AS(features_from_codes(c), InvalidConfig);
  c.language_code = 0;
  c.gestational_age_weeks = 2;
  CHECK_THROWS_AS(features_from_codes(c), InvalidConfig);
}

TEST_CASE("generator is deterministic and satisfies the cohort invariants") {
  GeneratorConfig cfg = two_type_config(5, 300);
  cfg.feature_informativeness = 0.7;
  cfg.initial_engaged_fraction = 0.6;
  cfg.model_noise = 0.08;
  GeneratedCohort a = generate_cohort(cfg);
  GeneratedCohort b = generate_cohort(cfg);
  REQUIRE(a.cohort.size() == 300);
  CHECK(a.latent_type == b.latent_type);
  for (size_t i = 0; i < 300; ++i) {
    CHECK(same_arm(a.cohort.arms[i], b.cohort.arms[i]));
    CHECK(same_codes(a.codes[i], b.codes[i]));
  }
  a.cohort.validate();
  for (const Arm& arm : a.cohort.arms)
    for (double p : arm.true_model.engage_probs().p)
      CHECK((p >= 0.01 && p <= 0.99));
  // both latent types actually occur
  CHECK(std::count(a.latent_type.begin(), a.latent_type.end(), 0) > 50);
  CHECK(std::count(a.latent_type.begin(), a.latent_type.end(), 1) > 50);
}

TEST_CASE("generator survives 1000 random configurations") {
  for (uint64_t k = 0; k < 1000; ++k) {
    GeneratorConfig cfg;
    cfg.seed = 9000 + k;
    cfg.num_arms = 3 + static_cast<int>(rng::pick(800, 1, k, 0, 20));
    size_t ntypes = 1 + rng::pick(800, 2, k, 0, 4);
    for (size_t t = 0; t < ntypes; ++t) {
      GeneratorTypeSpec spec;
      spec.passive_ne = 0.05 + 0.6 * rng::uniform(800, 3, k, t);
      spec.passive_e = 0.05 + 0.6 * rng::uniform(800, 4, k, t);
      spec.boost_ne = (1.0 - spec.passive_ne) * rng::uniform(800, 5, k, t);
      spec.boost_e = (1.0 - spec.passive_e) * rng::uniform(800, 6, k, t);
      cfg.types.push_back(spec);
    }
    cfg.feature_informativeness = rng::uniform(800, 7, k);
    cfg.initial_engaged_fraction = rng::uniform(800, 8, k);
    cfg.model_noise = 0.3 * rng::uniform(800, 9, k);
    GeneratedCohort g = generate_cohort(cfg);
    g.cohort.validate();  // row-stochastic, active-helps, unique ids
  }
}

TEST_CASE("fully informative features identify the latent type") {
  GeneratorConfig cfg = two_type_config(11, 10000);
  cfg.feature_informativeness = 1.0;
  GeneratedCohort g = generate_cohort(cfg);
  // informativeness 1 means every arm of a type carries the type's profile,
  // so exact feature matching recovers the type with accuracy 1 >= 0.99
  FeatureVector proto[2];
  bool seen[2] = {false, false};
  size_t correct = 0;
  for (size_t i = 0; i < g.cohort.size(); ++i) {
    int t = g.latent_type[i];
    if (!seen[t]) {
      proto[t] = g.cohort.arms[i].features;
      seen[t] = true;
    }
    if (g.cohort.arms[i].features == proto[t]) ++correct;
  }
  REQUIRE(seen[0]);
  REQUIRE(seen[1]);
  CHECK(proto[0] != proto[1]);
  CHECK(static_cast<double>(correct) / static_cast<double>(g.cohort.size()) >=
        0.99);
}

TEST_CASE("zero boost produces action-indifferent arms with zero indices") {
  GeneratorConfig cfg;
  cfg.seed = 13;
  cfg.num_arms = 40;
  cfg.types = {{0.3, 0.7, 0.0, 0.0}, {0.5, 0.55, 0.0, 0.0}};
  cfg.model_noise = 0.1;
  GeneratedCohort g = generate_cohort(cfg);
  PlannerConfig planner;
  SearchConfig search = SearchConfig::for_discount(planner.discount);
  for (size_t i = 0; i < g.cohort.size(); i += 5) {
    WhittleTable wt =
        whittle_table(g.cohort.arms[i].true_model, planner, search);
    CHECK(std::abs(wt.index[0]) <= search.subsidy_tolerance);
    CHECK(std::abs(wt.index[1]) <= search.subsidy_tolerance);
  }
}

TEST_CASE("meaningful boosts yield strictly positive mean indices") {
  GeneratorConfig cfg;
  cfg.seed = 17;
  cfg.num_arms = 60;
  cfg.types = {{0.25, 0.55, 0.2, 0.3}, {0.4, 0.7, 0.15, 0.2}};
  cfg.model_noise = 0.05;
  GeneratedCohort g = generate_cohort(cfg);
  PlannerConfig planner;
  SearchConfig search = SearchConfig::for_discount(planner.discount);
  std::vector<TransitionModel> models;
  for (const Arm& a : g.cohort.arms) models.push_back(a.true_model);
  std::vector<WhittleTable> tables = whittle_tables(models, planner, search);
  double mean = 0.0;
  for (const WhittleTable& t : tables) mean += t.index[0] + t.index[1];
  mean /= static_cast<double>(2 * tables.size());
  CHECK(mean > 0.01);
}

TEST_CASE("initial engagement fraction is honored") {
  GeneratorConfig cfg = two_type_config(19, 4000);
  cfg.initial_engaged_fraction = 0.0;
  for (const Arm& a : generate_cohort(cfg).cohort.arms)
    CHECK(a.initial_state == ArmState::NotEngaging);
  cfg.initial_engaged_fraction = 1.0;
  for (const Arm& a : generate_cohort(cfg).cohort.arms)
    CHECK(a.initial_state == ArmState::Engaging);
  cfg.initial_engaged_fraction = 0.5;
  long engaged = 0;
  for (const Arm& a : generate_cohort(cfg).cohort.arms)
    engaged += a.initial_state == ArmState::Engaging;
  CHECK(std::abs(engaged / 4000.0 - 0.5) < 0.03);
}

TEST_CASE("generator rejects invalid configurations") {
  GeneratorConfig cfg = two_type_config(1, 10);
  cfg.types[0].boost_ne = -0.1;
  CHECK_THROWS_AS(generate_cohort(cfg), InvalidConfig);
  cfg = two_type_config(1, 10);
  cfg.types[1].passive_e = 0.9;
  cfg.types[1].boost_e = 0.2;  // 1.1 pre-clip
  CHECK_THROWS_AS(generate_cohort(cfg), InvalidConfig);
  cfg = two_type_config(1, 0);
  CHECK_THROWS_AS(generate_cohort(cfg), InvalidConfig);
  cfg = two_type_config(1, 10);
  cfg.feature_informativeness = 1.5;
  CHECK_THROWS_AS(generate_cohort(cfg), InvalidConfig);
  cfg = two_type_config(1, 10);
  cfg.types.clear();
  CHECK_THROWS_AS(generate_cohort(cfg), InvalidConfig);
}

TEST_CASE("cohort files round-trip exactly") {
  GeneratorConfig cfg = two_type_config(23, 1000);
  cfg.feature_informativeness = 0.8;
  cfg.model_noise = 0.07;
  cfg.initial_engaged_fraction = 0.7;
  GeneratedCohort g = generate_cohort(cfg);
  const std::string path = "tmp_io_cohort.tsv";
  save_cohort(path, g.cohort, g.codes);
  GeneratedCohort loaded = load_cohort(path);
  REQUIRE(loaded.cohort.size() == g.cohort.size());
  for (size_t i = 0; i < g.cohort.size(); ++i) {
    CHECK(same_arm(g.cohort.arms[i], loaded.cohort.arms[i]));
    CHECK(same_codes(g.codes[i], loaded.codes[i]));
  }
  // a second save of the loaded cohort is byte-identical
  const std::string again = "tmp_io_cohort2.tsv";
  save_cohort(again, loaded.cohort, loaded.codes);
  CHECK(slurp(path) == slurp(again));
  std::remove(path.c_str());
  std::remove(again.c_str());
}

TEST_CASE("cohort loading pinpoints schema violations") {
  const std::string path = "tmp_io_bad_cohort.tsv";
  const std::string header =
      "beneficiary_id\tage_band\teducation_level\tincome_bracket\t"
      "phone_ownership\tgestational_age_weeks\tnum_children\tlanguage_code\t"
      "call_slot_code\tinitial_state\tp_passive_ne\tp_passive_e\tp_active_ne\t"
      "p_active_e\n";
  const std::string good =
      "0\t1\t1\t1\t1\t20\t2\t1\t1\t1\t0.3\t0.6\t0.4\t0.7\n";

  spit(path, "#rmab-cohort-v1\n" + header +
                 "1\t1\t1\t1\t1\t20\t2\t9\t1\t1\t0.3\t0.6\t0.4\t0.7\n");
  try {
    load_cohort(path);
    FAIL("expected a schema violation");
  } catch (const SchemaViolation& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    CHECK(std::string(e.what()).find("language_code") != std::string::npos);
  }

  spit(path, "#rmab-behavior-v1\n" + header + good);
  CHECK_THROWS_AS(load_cohort(path), SchemaViolation);  // wrong version tag

  spit(path, "#rmab-cohort-v1\n" + header + "0\t1\t2\n");
  CHECK_THROWS_AS(load_cohort(path), SchemaViolation);  // column count

  spit(path, "#rmab-cohort-v1\n" + header + good + good);
  CHECK_THROWS_AS(load_cohort(path), SchemaViolation);  // duplicate id

  spit(path,
       "#rmab-cohort-v1\n" + header +
           "0\t1\t1\t1\t1\t20\t2\t1\t1\t1\t0.3\t0.6\t1.4\t0.7\n");
  CHECK_THROWS_AS(load_cohort(path), SchemaViolation);  // probability range

  CHECK_THROWS_AS(load_cohort("tmp_io_missing_file.tsv"), IoFailure);
  std::remove(path.c_str());
}

TEST_CASE("trajectory and behavior files round-trip a real rollout") {
  GeneratorConfig cfg = two_type_config(29, 25);
  GeneratedCohort g = generate_cohort(cfg);
  RolloutConfig rc;
  rc.kind = PolicyKind::RandomK;
  rc.horizon = 6;
  rc.budget = 5;
  rc.seed = 31;
  Rollout roll = run_policy(g.cohort, rc);
  std::vector<int64_t> ids;
  for (const Arm& a : g.cohort.arms) ids.push_back(a.id);

  const std::string tpath = "tmp_io_traj.tsv";
  const std::string bpath = "tmp_io_behavior.tsv";
  save_trajectories(tpath, ids, roll.trajectories);
  save_behavior(bpath, ids, roll.trajectories, roll.behavior);

  TrajectoryFile tf = load_trajectories(tpath);
  CHECK(tf.ids == ids);
  REQUIRE(tf.trajectories.size() == roll.trajectories.size());
  for (size_t i = 0; i < tf.trajectories.size(); ++i) {
    REQUIRE(tf.trajectories[i].steps.size() ==
            roll.trajectories[i].steps.size());
    for (size_t t = 0; t < tf.trajectories[i].steps.size(); ++t) {
      CHECK(tf.trajectories[i].steps[t].state ==
            roll.trajectories[i].steps[t].state);
      CHECK(tf.trajectories[i].steps[t].action ==
            roll.trajectories[i].steps[t].action);
      CHECK(tf.trajectories[i].steps[t].next ==
            roll.trajectories[i].steps[t].next);
    }
  }
  BehaviorLog log = load_behavior(bpath, ids.size());
  REQUIRE(log.prob.size() == roll.behavior.prob.size());
  for (size_t t = 0; t < log.prob.size(); ++t)
    CHECK(log.prob[t] == roll.behavior.prob[t]);

  // the joined learning cohort lines features up with trajectories
  LearningCohort lc = make_learning_cohort(g, tf);
  CHECK(lc.size() == g.cohort.size());
  CHECK(lc.features[3] == g.cohort.arms[3].features);

  std::remove(tpath.c_str());
  std::remove(bpath.c_str());
}

TEST_CASE("trajectory loading rejects chain breaks and disorder") {
  const std::string path = "tmp_io_bad_traj.tsv";
  const std::string header = "beneficiary_id\tweek\tstate\taction\tnext_state\n";
  spit(path, "#rmab-trajectories-v1\n" + header +
                 "0\t0\t1\t0\t0\n"
                 "0\t1\t1\t0\t1\n");  // week 1 starts at 1, week 0 ended at 0
  try {
    load_trajectories(path);
    FAIL("expected a schema violation");
  } catch (const SchemaViolation& e) {
    CHECK(std::string(e.what()).find("chain break") != std::string::npos);
    CHECK(std::string(e.what()).find("row 4") != std::string::npos);
  }

  spit(path, "#rmab-trajectories-v1\n" + header +
                 "0\t0\t1\t0\t0\n"
                 "0\t2\t0\t0\t1\n");
  CHECK_THROWS_AS(load_trajectories(path), SchemaViolation);  // week gap

  spit(path, "#rmab-trajectories-v1\n" + header +
                 "0\t0\t1\t0\t0\n"
                 "1\t0\t1\t0\t1\n"
                 "0\t1\t0\t0\t1\n");
  CHECK_THROWS_AS(load_trajectories(path), SchemaViolation);  // not contiguous

  spit(path, "#rmab-trajectories-v1\n" + header + "0\t0\t1\t0\t2\n");
  CHECK_THROWS_AS(load_trajectories(path), SchemaViolation);  // state range
  std::remove(path.c_str());
}

TEST_CASE("intervention lists rank by index and round-trip the chosen set") {
  GeneratorConfig cfg = two_type_config(37, 5);
  GeneratedCohort g = generate_cohort(cfg);
  std::vector<double> indices = {0.5, 0.1, 0.9, 0.3, 0.2};
  BudgetedSelection sel = select_top_k(indices, 2);  // positions 0 and 2
  const std::string path = "tmp_io_calls.tsv";
  export_intervention_list(path, sel, indices, g.cohort, g.codes, 4);
  std::vector<InterventionRow> rows = import_intervention_list(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].id == g.cohort.arms[2].id);  // index 0.9 outranks 0.5
  CHECK(rows[0].priority_rank == 1);
  CHECK(rows[0].week == 4);
  CHECK(rows[0].call_slot_code == g.codes[2].call_slot_code);
  CHECK(rows[1].id == g.cohort.arms[0].id);
  CHECK(rows[1].priority_rank == 2);
  std::vector<int64_t> chosen_ids;
  for (int pos : sel.chosen) chosen_ids.push_back(g.cohort.arms[pos].id);
  std::sort(chosen_ids.begin(), chosen_ids.end());
  std::vector<int64_t> loaded_ids;
  for (const InterventionRow& r : rows) loaded_ids.push_back(r.id);
  std::sort(loaded_ids.begin(), loaded_ids.end());
  CHECK(chosen_ids == loaded_ids);

  // zero budget: header-only file, empty import
  export_intervention_list(path, select_top_k(indices, 0), indices, g.cohort,
                           g.codes, 5);
  CHECK(import_intervention_list(path).empty());
  std::remove(path.c_str());
}

TEST_CASE("trial outputs are written deterministically") {
  TrialConfig tc;
  tc.horizon = 5;
  tc.budget = 3;
  tc.groups = {PolicyKind::Csoc, PolicyKind::OracleWhittle};
  tc.seed = 43;
  tc.bootstrap_resamples = 100;
  GeneratorConfig cfg;
  cfg.seed = 47;
  cfg.num_arms = 30;
  cfg.types = {{0.25, 0.55, 0.3, 0.35}};
  Cohort c = generate_cohort(cfg).cohort;
  TrialReport report = run_trial(tc, {c, c}, {nullptr, nullptr});

  write_trial_report("tmp_io_report.txt", report);
  write_trial_summary("tmp_io_summary.txt", report);
  write_trial_series("tmp_io_series.tsv", report);

  std::string summary = slurp("tmp_io_summary.txt");
  CHECK(summary.find("group1.policy = oracle_whittle") != std::string::npos);
  CHECK(summary.find("group1.percent_reduction = ") != std::string::npos);
  CHECK(summary.find("group1.p_value = ") != std::string::npos);
  std::string series = slurp("tmp_io_series.tsv");
  CHECK(series.find("g1_oracle_whittle_drops_prevented") != std::string::npos);
  std::string rep = slurp("tmp_io_report.txt");
  CHECK(rep.find("[g0_csoc]") != std::string::npos);

  write_trial_report("tmp_io_report2.txt", report);
  CHECK(slurp("tmp_io_report.txt") == slurp("tmp_io_report2.txt"));
  for (const char* p : {"tmp_io_report.txt", "tmp_io_report2.txt",
                        "tmp_io_summary.txt", "tmp_io_series.tsv"})
    std::remove(p);
}

TEST_SUITE_END();
