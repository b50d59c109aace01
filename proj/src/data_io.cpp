#include "rmab/data_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>

namespace rmab {

namespace {

constexpr const char* kCohortTag = "#rmab-cohort-v1";
constexpr const char* kTrajectoryTag = "#rmab-trajectories-v1";
constexpr const char* kBehaviorTag = "#rmab-behavior-v1";
constexpr const char* kInterventionTag = "#rmab-interventions-v1";

constexpr const char* kCohortHeader =
    "beneficiary_id\tage_band\teducation_level\tincome_bracket\t"
    "phone_ownership\tgestational_age_weeks\tnum_children\tlanguage_code\t"
    "call_slot_code\tinitial_state\tp_passive_ne\tp_passive_e\tp_active_ne\t"
    "p_active_e";
constexpr const char* kTrajectoryHeader =
    "beneficiary_id\tweek\tstate\taction\tnext_state";
constexpr const char* kBehaviorHeader =
    "beneficiary_id\tweek\taction\tbehavior_prob";
constexpr const char* kInterventionHeader =
    "beneficiary_id\tweek\tpriority_rank\tcall_slot_code";

struct FileWriter {
  std::FILE* f = nullptr;
  std::string path;

  explicit FileWriter(const std::string& p) : path(p) {
    f = std::fopen(p.c_str(), "wb");
    if (!f) throw IoFailure("cannot open " + p + " for writing");
  }
  FileWriter(const FileWriter&) = delete;
  FileWriter& operator=(const FileWriter&) = delete;
  ~FileWriter() {
    if (f) std::fclose(f);
  }

  void line(const std::string& s) {
    if (std::fprintf(f, "%s\n", s.c_str()) < 0)
      throw IoFailure("write failed on " + path);
  }
};

std::string fmt_prob(double p) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

/// Reading context for error messages: "file row N".
struct Reader {
  std::ifstream in;
  std::string path;
  size_t row = 0;  // 1-based physical line number

  explicit Reader(const std::string& p, const char* tag, const char* header)
      : in(p), path(p) {
    if (!in) throw IoFailure("cannot open " + p + " for reading");
    std::string line;
    if (!next(line) || line != tag)
      throw SchemaViolation(p + ": missing or wrong version line (expected " +
                            tag + ")");
    if (!next(line) || line != header)
      throw SchemaViolation(p + ": unexpected header at row " +
                            std::to_string(row));
  }

  bool next(std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++row;
    return true;
  }

  std::string where() const { return path + " row " + std::to_string(row); }
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

int64_t parse_int(const Reader& r, const std::string& s, const char* column) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || errno == ERANGE)
    throw SchemaViolation(r.where() + " column " + column +
                          ": not an integer: '" + s + "'");
  return v;
}

int parse_code(const Reader& r, const std::string& s, const char* column,
               int lo, int hi) {
  int64_t v = parse_int(r, s, column);
  if (v < lo || v > hi)
    throw SchemaViolation(r.where() + " column " + column + ": value " +
                          std::to_string(v) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double parse_double(const Reader& r, const std::string& s,
                    const char* column) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || errno == ERANGE)
    throw SchemaViolation(r.where() + " column " + column +
                          ": not a number: '" + s + "'");
  return v;
}

double parse_prob(const Reader& r, const std::string& s, const char* column) {
  double v = parse_double(r, s, column);
  if (!(v >= 0.0 && v <= 1.0))
    throw SchemaViolation(r.where() + " column " + column +
                          ": probability outside [0,1]");
  return v;
}

void expect_columns(const Reader& r, const std::vector<std::string>& fields,
                    size_t n) {
  if (fields.size() != n)
    throw SchemaViolation(r.where() + ": expected " + std::to_string(n) +
                          " columns, found " + std::to_string(fields.size()));
}

}  // namespace

void BeneficiaryCodes::validate() const {
  auto in = [](int v, int lo, int hi) { return v >= lo && v <= hi; };
  if (id < 0 || !in(age_band, 0, 4) || !in(education_level, 0, 3) ||
      !in(income_bracket, 0, 3) || !in(phone_ownership, 0, 1) ||
      !in(gestational_age_weeks, 4, 40) || !in(num_children, 0, 6) ||
      !in(language_code, 0, 3) || !in(call_slot_code, 0, 4))
    throw InvalidConfig("beneficiary codes out of range for id " +
                        std::to_string(id));
}

FeatureVector features_from_codes(const BeneficiaryCodes& codes) {
  codes.validate();
  FeatureVector x(kFeatureDim, 0.0);
  x[static_cast<size_t>(codes.age_band)] = 1.0;
  x[5] = codes.education_level / 3.0;
  x[6] = codes.income_bracket / 3.0;
  x[7] = codes.phone_ownership;
  x[8] = codes.gestational_age_weeks / 40.0;
  x[9] = codes.num_children / 6.0;
  x[10 + static_cast<size_t>(codes.language_code)] = 1.0;
  x[14] = codes.call_slot_code / 4.0;
  return x;
}

void GeneratorConfig::validate() const {
  if (num_arms < 1) throw InvalidConfig("generator needs num_arms >= 1");
  if (types.empty()) throw InvalidConfig("generator needs at least one type");
  if (!(feature_informativeness >= 0.0 && feature_informativeness <= 1.0))
    throw InvalidConfig("feature_informativeness must lie in [0,1]");
  if (!(initial_engaged_fraction >= 0.0 && initial_engaged_fraction <= 1.0))
    throw InvalidConfig("initial_engaged_fraction must lie in [0,1]");
  if (!(model_noise >= 0.0 && model_noise <= 0.5))
    throw InvalidConfig("model_noise must lie in [0, 0.5]");
  for (size_t t = 0; t < types.size(); ++t) {
    const GeneratorTypeSpec& spec = types[t];
    if (!(spec.boost_ne >= 0.0 && spec.boost_e >= 0.0))
      throw InvalidConfig("type " + std::to_string(t) +
                          ": intervention boost must be >= 0");
    for (double base : {spec.passive_ne, spec.passive_e})
      if (!(base > 0.0 && base < 1.0))
        throw InvalidConfig("type " + std::to_string(t) +
                            ": passive probability outside (0,1)");
    if (spec.passive_ne + spec.boost_ne > 1.0 ||
        spec.passive_e + spec.boost_e > 1.0)
      throw InvalidConfig("type " + std::to_string(t) +
                          ": boost pushes a probability above 1");
  }
}

namespace {

// deterministic per-type intake profile; types land on distinct codes
BeneficiaryCodes type_profile(int64_t id, int type) {
  BeneficiaryCodes c;
  c.id = id;
  c.age_band = type % 5;
  c.education_level = type % 4;
  c.income_bracket = (type + 1) % 4;
  c.phone_ownership = type % 2;
  c.gestational_age_weeks = 8 + 6 * (type % 5);
  c.num_children = type % 7;
  c.language_code = type % 4;
  c.call_slot_code = type % 5;
  return c;
}

double clip01(double p) { return std::clamp(p, 0.01, 0.99); }

}  // namespace

GeneratedCohort generate_cohort(const GeneratorConfig& config) {
  config.validate();
  using rng::streams::generator;
  const size_t n = static_cast<size_t>(config.num_arms);
  const size_t ntypes = config.types.size();

  GeneratedCohort out;
  out.cohort.arms.resize(n);
  out.codes.resize(n);
  out.latent_type.resize(n);

  for (size_t i = 0; i < n; ++i) {
    int type = static_cast<int>(rng::pick(config.seed, generator, i, 0, ntypes));
    out.latent_type[i] = type;

    BeneficiaryCodes profile = type_profile(static_cast<int64_t>(i), type);
    BeneficiaryCodes codes = profile;
    // field by field: reveal the type's profile value or draw a decoy
    struct Field {
      int* value;
      int lo, hi;
    };
    Field fields[] = {
        {&codes.age_band, 0, 4},
        {&codes.education_level, 0, 3},
        {&codes.income_bracket, 0, 3},
        {&codes.phone_ownership, 0, 1},
        {&codes.gestational_age_weeks, 4, 40},
        {&codes.num_children, 0, 6},
        {&codes.language_code, 0, 3},
        {&codes.call_slot_code, 0, 4},
    };
    for (size_t f = 0; f < 8; ++f) {
      double u = rng::uniform(config.seed, generator, i, 1 + f);
      if (u >= config.feature_informativeness) {
        uint64_t span = static_cast<uint64_t>(fields[f].hi - fields[f].lo + 1);
        *fields[f].value =
            fields[f].lo +
            static_cast<int>(rng::pick(config.seed, generator, i, 16 + f, span));
      }
    }

    const GeneratorTypeSpec& spec = config.types[static_cast<size_t>(type)];
    double jitter_ne =
        config.model_noise *
        (2.0 * rng::uniform(config.seed, generator, i, 30) - 1.0);
    double jitter_e =
        config.model_noise *
        (2.0 * rng::uniform(config.seed, generator, i, 31) - 1.0);
    EngageProbs probs;
    probs.p[0] = clip01(spec.passive_ne + jitter_ne);
    probs.p[1] = clip01(spec.passive_e + jitter_e);
    probs.p[2] = clip01(probs.p[0] + spec.boost_ne);
    probs.p[3] = clip01(probs.p[1] + spec.boost_e);

    Arm& arm = out.cohort.arms[i];
    arm.id = static_cast<int64_t>(i);
    arm.features = features_from_codes(codes);
    arm.true_model = TransitionModel::from_engage_probs(probs);
    arm.initial_state =
        rng::uniform(config.seed, rng::streams::initial_state, i) <
                config.initial_engaged_fraction
            ? ArmState::Engaging
            : ArmState::NotEngaging;
    out.codes[i] = codes;
  }
  out.cohort.validate();
  return out;
}

void save_cohort(const std::string& path, const Cohort& cohort,
                 const std::vector<BeneficiaryCodes>& codes) {
  if (codes.size() != cohort.size())
    throw DimensionMismatch("one code row per arm required");
  FileWriter w(path);
  w.line(kCohortTag);
  w.line(kCohortHeader);
  char buf[512];
  for (size_t i = 0; i < cohort.size(); ++i) {
    const Arm& a = cohort.arms[i];
    const BeneficiaryCodes& c = codes[i];
    if (c.id != a.id)
      throw DimensionMismatch("code row id does not match arm id at position " +
                              std::to_string(i));
    EngageProbs e = a.true_model.engage_probs();
    std::snprintf(buf, sizeof buf,
                  "%lld\t%d\t%d\t%d\t%d\t%d\t%d\t%d\t%d\t%d\t%s\t%s\t%s\t%s",
                  static_cast<long long>(a.id), c.age_band, c.education_level,
                  c.income_bracket, c.phone_ownership, c.gestational_age_weeks,
                  c.num_children, c.language_code, c.call_slot_code,
                  static_cast<int>(a.initial_state), fmt_prob(e.p[0]).c_str(),
                  fmt_prob(e.p[1]).c_str(), fmt_prob(e.p[2]).c_str(),
                  fmt_prob(e.p[3]).c_str());
    w.line(buf);
  }
}

GeneratedCohort load_cohort(const std::string& path) {
  Reader r(path, kCohortTag, kCohortHeader);
  GeneratedCohort out;
  std::map<int64_t, size_t> seen;
  std::string line;
  while (r.next(line)) {
    std::vector<std::string> f = split_tabs(line);
    expect_columns(r, f, 14);
    BeneficiaryCodes c;
    c.id = parse_int(r, f[0], "beneficiary_id");
    if (c.id < 0)
      throw SchemaViolation(r.where() + ": negative beneficiary_id");
    if (!seen.emplace(c.id, out.codes.size()).second)
      throw SchemaViolation(r.where() + ": duplicate beneficiary_id " +
                            std::to_string(c.id));
    c.age_band = parse_code(r, f[1], "age_band", 0, 4);
    c.education_level = parse_code(r, f[2], "education_level", 0, 3);
    c.income_bracket = parse_code(r, f[3], "income_bracket", 0, 3);
    c.phone_ownership = parse_code(r, f[4], "phone_ownership", 0, 1);
    c.gestational_age_weeks =
        parse_code(r, f[5], "gestational_age_weeks", 4, 40);
    c.num_children = parse_code(r, f[6], "num_children", 0, 6);
    c.language_code = parse_code(r, f[7], "language_code", 0, 3);
    c.call_slot_code = parse_code(r, f[8], "call_slot_code", 0, 4);
    int initial = parse_code(r, f[9], "initial_state", 0, 1);
    EngageProbs probs;
    probs.p[0] = parse_prob(r, f[10], "p_passive_ne");
    probs.p[1] = parse_prob(r, f[11], "p_passive_e");
    probs.p[2] = parse_prob(r, f[12], "p_active_ne");
    probs.p[3] = parse_prob(r, f[13], "p_active_e");

    Arm arm;
    arm.id = c.id;
    arm.features = features_from_codes(c);
    arm.true_model = TransitionModel::from_engage_probs(probs);
    arm.initial_state = static_cast<ArmState>(initial);
    out.cohort.arms.push_back(std::move(arm));
    out.codes.push_back(c);
  }
  out.cohort.validate();
  return out;
}

void save_trajectories(const std::string& path,
                       const std::vector<int64_t>& ids,
                       const std::vector<Trajectory>& trajectories) {
  if (ids.size() != trajectories.size())
    throw DimensionMismatch("one id per trajectory required");
  FileWriter w(path);
  w.line(kTrajectoryTag);
  w.line(kTrajectoryHeader);
  char buf[128];
  for (size_t i = 0; i < trajectories.size(); ++i) {
    trajectories[i].validate();
    for (size_t t = 0; t < trajectories[i].steps.size(); ++t) {
      const Step& s = trajectories[i].steps[t];
      std::snprintf(buf, sizeof buf, "%lld\t%zu\t%d\t%d\t%d",
                    static_cast<long long>(ids[i]), t,
                    static_cast<int>(s.state), static_cast<int>(s.action),
                    static_cast<int>(s.next));
      w.line(buf);
    }
  }
}

TrajectoryFile load_trajectories(const std::string& path) {
  Reader r(path, kTrajectoryTag, kTrajectoryHeader);
  TrajectoryFile out;
  std::map<int64_t, size_t> seen;
  std::string line;
  while (r.next(line)) {
    std::vector<std::string> f = split_tabs(line);
    expect_columns(r, f, 5);
    int64_t id = parse_int(r, f[0], "beneficiary_id");
    int64_t week = parse_int(r, f[1], "week");
    Step step;
    step.state = static_cast<ArmState>(parse_code(r, f[2], "state", 0, 1));
    step.action =
        static_cast<InterventionAction>(parse_code(r, f[3], "action", 0, 1));
    step.next = static_cast<ArmState>(parse_code(r, f[4], "next_state", 0, 1));

    if (out.ids.empty() || out.ids.back() != id) {
      auto [it, fresh] = seen.emplace(id, out.ids.size());
      if (!fresh)
        throw SchemaViolation(r.where() + ": rows for beneficiary " +
                              std::to_string(id) + " are not contiguous");
      (void)it;
      if (week != 0)
        throw SchemaViolation(r.where() + ": first week for beneficiary " +
                              std::to_string(id) + " must be 0");
      out.ids.push_back(id);
      out.trajectories.emplace_back();
    } else {
      Trajectory& traj = out.trajectories.back();
      if (week != static_cast<int64_t>(traj.steps.size()))
        throw SchemaViolation(r.where() + ": weeks must increase by 1");
      if (traj.steps.back().next != step.state)
        throw SchemaViolation(r.where() +
                              ": state does not continue the previous "
                              "next_state (chain break)");
    }
    out.trajectories.back().steps.push_back(step);
  }
  if (out.trajectories.empty())
    throw SchemaViolation(path + ": no trajectory rows");
  return out;
}

void save_behavior(const std::string& path, const std::vector<int64_t>& ids,
                   const std::vector<Trajectory>& trajectories,
                   const BehaviorLog& behavior) {
  if (ids.size() != trajectories.size())
    throw DimensionMismatch("one id per trajectory required");
  behavior.validate(ids.size());
  FileWriter w(path);
  w.line(kBehaviorTag);
  w.line(kBehaviorHeader);
  char buf[128];
  for (size_t i = 0; i < ids.size(); ++i) {
    if (trajectories[i].steps.size() != behavior.prob.size())
      throw DimensionMismatch("behavior log weeks != trajectory length");
    for (size_t t = 0; t < behavior.prob.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%lld\t%zu\t%d\t%s",
                    static_cast<long long>(ids[i]), t,
                    static_cast<int>(trajectories[i].steps[t].action),
                    fmt_prob(behavior.prob[t][i]).c_str());
      w.line(buf);
    }
  }
}

BehaviorLog load_behavior(const std::string& path, size_t num_arms) {
  Reader r(path, kBehaviorTag, kBehaviorHeader);
  std::vector<std::vector<double>> per_arm;  // [arm][week]
  std::vector<int64_t> ids;
  std::map<int64_t, size_t> seen;
  std::string line;
  while (r.next(line)) {
    std::vector<std::string> f = split_tabs(line);
    expect_columns(r, f, 4);
    int64_t id = parse_int(r, f[0], "beneficiary_id");
    int64_t week = parse_int(r, f[1], "week");
    parse_code(r, f[2], "action", 0, 1);
    double prob = parse_prob(r, f[3], "behavior_prob");
    if (!(prob > 0.0))
      throw SchemaViolation(r.where() + ": behavior_prob must be positive");

    if (ids.empty() || ids.back() != id) {
      if (!seen.emplace(id, ids.size()).second)
        throw SchemaViolation(r.where() + ": rows for beneficiary " +
                              std::to_string(id) + " are not contiguous");
      if (week != 0)
        throw SchemaViolation(r.where() + ": first week must be 0");
      ids.push_back(id);
      per_arm.emplace_back();
    } else if (week != static_cast<int64_t>(per_arm.back().size())) {
      throw SchemaViolation(r.where() + ": weeks must increase by 1");
    }
    per_arm.back().push_back(prob);
  }
  if (per_arm.empty()) throw SchemaViolation(path + ": no behavior rows");
  if (per_arm.size() != num_arms)
    throw DimensionMismatch(path + ": behavior log covers " +
                            std::to_string(per_arm.size()) + " arms, expected " +
                            std::to_string(num_arms));
  size_t weeks = per_arm.front().size();
  for (const auto& column : per_arm)
    if (column.size() != weeks)
      throw SchemaViolation(path + ": arms disagree on the number of weeks");

  BehaviorLog log;
  log.prob.assign(weeks, std::vector<double>(per_arm.size()));
  for (size_t i = 0; i < per_arm.size(); ++i)
    for (size_t t = 0; t < weeks; ++t) log.prob[t][i] = per_arm[i][t];
  return log;
}

LearningCohort make_learning_cohort(const GeneratedCohort& cohort,
                                    const TrajectoryFile& logs) {
  std::map<int64_t, size_t> position;
  for (size_t i = 0; i < cohort.cohort.size(); ++i)
    position.emplace(cohort.cohort.arms[i].id, i);
  LearningCohort out;
  out.features.reserve(logs.ids.size());
  out.trajectories = logs.trajectories;
  for (int64_t id : logs.ids) {
    auto it = position.find(id);
    if (it == position.end())
      throw SchemaViolation("trajectory beneficiary " + std::to_string(id) +
                            " is not in the cohort");
    out.features.push_back(cohort.cohort.arms[it->second].features);
  }
  out.validate();
  return out;
}

void export_intervention_list(const std::string& path,
                              const BudgetedSelection& selection,
                              const std::vector<double>& indices,
                              const Cohort& cohort,
                              const std::vector<BeneficiaryCodes>& codes,
                              int week) {
  if (indices.size() != cohort.size() || codes.size() != cohort.size())
    throw DimensionMismatch("indices/codes must align with the cohort");
  for (int pos : selection.chosen)
    if (pos < 0 || static_cast<size_t>(pos) >= cohort.size())
      throw InvalidConfig("selection refers to a position beyond the cohort");

  std::vector<int> order(selection.chosen);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (indices[static_cast<size_t>(a)] != indices[static_cast<size_t>(b)])
      return indices[static_cast<size_t>(a)] > indices[static_cast<size_t>(b)];
    return a < b;
  });

  FileWriter w(path);
  w.line(kInterventionTag);
  w.line(kInterventionHeader);
  char buf[128];
  for (size_t rank = 0; rank < order.size(); ++rank) {
    size_t pos = static_cast<size_t>(order[rank]);
    std::snprintf(buf, sizeof buf, "%lld\t%d\t%zu\t%d",
                  static_cast<long long>(cohort.arms[pos].id), week, rank + 1,
                  codes[pos].call_slot_code);
    w.line(buf);
  }
}

std::vector<InterventionRow> import_intervention_list(const std::string& path) {
  Reader r(path, kInterventionTag, kInterventionHeader);
  std::vector<InterventionRow> rows;
  std::string line;
  while (r.next(line)) {
    std::vector<std::string> f = split_tabs(line);
    expect_columns(r, f, 4);
    InterventionRow row;
    row.id = parse_int(r, f[0], "beneficiary_id");
    row.week = static_cast<int>(parse_int(r, f[1], "week"));
    row.priority_rank = static_cast<int>(parse_int(r, f[2], "priority_rank"));
    row.call_slot_code = parse_code(r, f[3], "call_slot_code", 0, 4);
    if (row.priority_rank != static_cast<int>(rows.size()) + 1)
      throw SchemaViolation(r.where() + ": priority_rank must run 1, 2, ...");
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string group_tag(const TrialReport& report, size_t g) {
  return "g" + std::to_string(g) + "_" + report.groups[g].name;
}

std::string fmt_stat(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_trial_report(const std::string& path, const TrialReport& report) {
  FileWriter w(path);
  w.line("#rmab-trial-report-v1");
  w.line("horizon\t" + std::to_string(report.horizon));
  w.line("budget\t" + std::to_string(report.budget));
  w.line("seed\t" + std::to_string(report.seed));
  w.line("comparison_group\t" + std::to_string(report.comparison_group));
  for (size_t g = 0; g < report.groups.size(); ++g) {
    const GroupResult& res = report.groups[g];
    bool pairwise = !res.drops_prevented.empty();
    w.line("[" + group_tag(report, g) + "]");
    w.line(pairwise
               ? "week\tengaged\tdrop\tcumulative_drop\tdrops_prevented"
               : "week\tengaged\tdrop\tcumulative_drop");
    for (size_t t = 0; t < res.weekly_engaged.size(); ++t) {
      std::string row = std::to_string(t) + "\t" +
                        std::to_string(res.weekly_engaged[t]) + "\t" +
                        std::to_string(res.weekly_drop[t]) + "\t" +
                        std::to_string(res.cumulative_drop[t]);
      if (pairwise) row += "\t" + std::to_string(res.drops_prevented[t]);
      w.line(row);
    }
    if (pairwise) {
      w.line("percent_reduction\t" + fmt_stat(res.percent_reduction));
      w.line("p_value\t" + fmt_stat(res.p_value));
      w.line("beta\t" + fmt_stat(res.beta));
    }
  }
}

void write_trial_summary(const std::string& path, const TrialReport& report) {
  FileWriter w(path);
  w.line("#rmab-trial-summary-v1");
  w.line("horizon = " + std::to_string(report.horizon));
  w.line("budget = " + std::to_string(report.budget));
  w.line("seed = " + std::to_string(report.seed));
  w.line("groups = " + std::to_string(report.groups.size()));
  w.line("comparison_group = " + std::to_string(report.comparison_group));
  for (size_t g = 0; g < report.groups.size(); ++g) {
    const GroupResult& res = report.groups[g];
    std::string prefix = "group" + std::to_string(g) + ".";
    w.line(prefix + "policy = " + res.name);
    w.line(prefix + "final_engaged = " +
           std::to_string(res.weekly_engaged.back()));
    w.line(prefix + "final_cumulative_drop = " +
           std::to_string(res.cumulative_drop.back()));
    if (!res.drops_prevented.empty()) {
      w.line(prefix + "drops_prevented = " +
             std::to_string(res.drops_prevented.back()));
      w.line(prefix + "percent_reduction = " + fmt_stat(res.percent_reduction));
      w.line(prefix + "p_value = " + fmt_stat(res.p_value));
      w.line(prefix + "beta = " + fmt_stat(res.beta));
    }
  }
}

void write_trial_series(const std::string& path, const TrialReport& report) {
  FileWriter w(path);
  w.line("#rmab-trial-series-v1");
  std::string header = "week";
  for (size_t g = 0; g < report.groups.size(); ++g) {
    header += "\t" + group_tag(report, g) + "_cumulative_drop";
    if (!report.groups[g].drops_prevented.empty())
      header += "\t" + group_tag(report, g) + "_drops_prevented";
  }
  w.line(header);
  size_t weeks = report.groups.front().cumulative_drop.size();
  for (size_t t = 0; t < weeks; ++t) {
    std::string row = std::to_string(t);
    for (const GroupResult& res : report.groups) {
      row += "\t" + std::to_string(res.cumulative_drop[t]);
      if (!res.drops_prevented.empty())
        row += "\t" + std::to_string(res.drops_prevented[t]);
    }
    w.line(row);
  }
}

}  // namespace rmab
