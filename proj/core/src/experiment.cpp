#include "mfd/experiment.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "mfd/checkpoint.hpp"
#include "mfd/dataset_io.hpp"
#include "mfd/errors.hpp"
#include "mfd/random.hpp"

namespace mfd {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Strict view of one JSON object: every key read is remembered and finish()
// rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
      const auto x = v->get<long long>();
      if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(path(key) + ": out of range");
      out = static_cast<int>(x);
    }
  }
  template <typename U>
    requires std::is_unsigned_v<U>
  void get(const std::string& key, U& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(path(key) + ": expected a non-negative integer");
      out = v->get<U>();
    }
  }
  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(path(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

SamplerKind parse_sampler(const std::string& s, const std::string& where) {
  if (s == "plain") return SamplerKind::kPlain;
  if (s == "stratified") return SamplerKind::kStratified;
  throw ConfigError(where + ": sampler must be 'plain' or 'stratified'");
}

const char* sampler_name(SamplerKind k) { return k == SamplerKind::kStratified ? "stratified" : "plain"; }

MethodSpec parse_method_spec(const json& j, const std::string& where) {
  ObjectReader r(j, where);
  MethodSpec m;
  std::string method = "MFD";
  r.get("method", method);
  m.objective.method = parse_method(method);
  m.tag = upper(method);
  r.get("tag", m.tag);
  r.get("lambda", m.objective.lambda);
  r.get("temperature", m.objective.temperature);
  r.get("kd_weight", m.objective.kd_weight);
  std::string bandwidth = "per_pair";
  r.get("bandwidth", bandwidth);
  if (bandwidth == "per_pair") {
    m.objective.mmd.bandwidth_mode = BandwidthMode::kPerPairMeanSqDist;
  } else if (bandwidth == "fixed") {
    m.objective.mmd.bandwidth_mode = BandwidthMode::kFixedGlobal;
  } else {
    throw ConfigError(r.path("bandwidth") + ": expected 'per_pair' or 'fixed'");
  }
  r.get("sigma2", m.objective.mmd.fixed_sigma2);
  r.get("sigma_floor", m.objective.mmd.sigma_floor);
  m.sampler = default_sampler(m.objective.method, m.tag);
  if (const json* s = r.find("sampler")) {
    if (!s->is_string()) throw ConfigError(r.path("sampler") + ": expected a string");
    m.sampler = parse_sampler(s->get<std::string>(), r.path("sampler"));
  }
  r.finish();
  return m;
}

ordered_json method_spec_json(const MethodSpec& m) {
  ordered_json j;
  j["tag"] = m.tag;
  j["method"] = std::string(method_name(m.objective.method));
  j["lambda"] = m.objective.lambda;
  j["temperature"] = m.objective.temperature;
  j["kd_weight"] = m.objective.kd_weight;
  j["bandwidth"] = m.objective.mmd.bandwidth_mode == BandwidthMode::kFixedGlobal ? "fixed" : "per_pair";
  j["sigma2"] = m.objective.mmd.fixed_sigma2;
  j["sigma_floor"] = m.objective.mmd.sigma_floor;
  j["sampler"] = sampler_name(m.sampler);
  return j;
}

std::vector<MethodSpec> default_matrix(const ExperimentConfig& c) {
  const double lambda = c.distill.objective.lambda;
  auto spec = [&](std::string tag, Method method, double lam) {
    MethodSpec m;
    m.tag = tag;
    m.objective.method = method;
    m.objective.lambda = lam;
    m.objective.mmd = c.distill.objective.mmd;
    m.sampler = default_sampler(method, tag);
    return m;
  };
  return {spec("HKD", Method::kHkd, 0.0),       spec("FITNET", Method::kFitNet, 0.0),
          spec("SS", Method::kCe, 0.0),         spec("MFD-K", Method::kMfdK, lambda),
          spec("MFD-F", Method::kMfdF, lambda), spec("MFD", Method::kMfd, lambda)};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

double pct(double fraction) { return 100.0 * fraction; }

std::string counts_table(const LabeledDataset& ds, const std::string& title) {
  std::ostringstream out;
  out << title << " (" << ds.size() << " samples, skew " << ds.skew << ")\n";
  out << "class";
  for (int a = 0; a < ds.num_groups; ++a) out << "  group" << a;
  out << "\n";
  for (int y = 0; y < ds.num_classes; ++y) {
    out << y;
    for (int a = 0; a < ds.num_groups; ++a) out << "  " << ds.count(a, y);
    out << "\n";
  }
  return out.str();
}

RunRecord make_record(const std::string& tag, std::uint64_t root, const Evaluation& e) {
  return RunRecord{tag, root, pct(e.accuracy), pct(e.report.deo_a), pct(e.report.deo_m)};
}

}  // namespace

SamplerKind default_sampler(Method method, const std::string& tag) {
  if (method == Method::kMfd || method == Method::kMfdF || upper(tag) == "SS") return SamplerKind::kStratified;
  return SamplerKind::kPlain;
}

MlpSpec ExperimentConfig::resolved_spec() const {
  if (!spec.layer_dims.empty()) return spec;
  return MlpSpec::standard(static_cast<std::size_t>(synth.dim), static_cast<std::size_t>(synth.num_classes));
}

void ExperimentConfig::validate() const {
  synth.validate();
  if (n_test_per_class < 1) throw ConfigError("n_test_per_class must be >= 1");
  if (runs < 1) throw ConfigError("runs must be >= 1");
  const MlpSpec s = resolved_spec();
  s.validate();
  if (s.input_dim() != static_cast<std::size_t>(synth.dim) ||
      s.num_classes() != static_cast<std::size_t>(synth.num_classes)) {
    throw ConfigError("spec.layer_dims must start at synth.dim and end at synth.num_classes");
  }
  TrainConfig t = train;
  t.objective = distill.objective;
  t.validate();
  for (const auto& m : methods) m.objective.validate();
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  ObjectReader top(doc, "config");
  top.get("seed", c.seed);
  top.get("n_test_per_class", c.n_test_per_class);
  top.get("runs", c.runs);
  std::string out_dir = c.output_dir.string();
  top.get("output_dir", out_dir);
  c.output_dir = out_dir;
  if (const json* s = top.find("synth")) {
    ObjectReader r(*s, "config.synth");
    r.get("num_classes", c.synth.num_classes);
    r.get("dim", c.synth.dim);
    r.get("n_per_class", c.synth.n_per_class);
    r.get("skew", c.synth.skew);
    r.get("class_sep", c.synth.class_sep);
    r.get("noise_std", c.synth.noise_std);
    r.finish();
  }
  if (const json* s = top.find("spec")) {
    ObjectReader r(*s, "config.spec");
    if (const json* dims = r.find("layer_dims")) {
      if (!dims->is_array()) throw ConfigError("config.spec.layer_dims: expected an array");
      for (const auto& d : *dims) {
        if (!d.is_number_unsigned()) throw ConfigError("config.spec.layer_dims: expected positive integers");
        c.spec.layer_dims.push_back(d.get<std::size_t>());
      }
    }
    r.finish();
  }
  if (const json* s = top.find("train")) {
    ObjectReader r(*s, "config.train");
    r.get("epochs", c.train.epochs);
    r.get("batch_size", c.train.batch_size);
    r.get("learning_rate", c.train.learning_rate);
    r.get("plateau_patience", c.train.plateau_patience);
    r.get("decay_factor", c.train.decay_factor);
    r.get("adam_beta1", c.train.adam.beta1);
    r.get("adam_beta2", c.train.adam.beta2);
    r.get("adam_eps", c.train.adam.eps);
    r.finish();
  }
  if (const json* s = top.find("distill")) c.distill = parse_method_spec(*s, "config.distill");
  if (const json* s = top.find("methods")) {
    if (!s->is_array()) throw ConfigError("config.methods: expected an array");
    for (std::size_t i = 0; i < s->size(); ++i) {
      c.methods.push_back(parse_method_spec((*s)[i], "config.methods[" + std::to_string(i) + "]"));
    }
  }
  top.finish();
  c.synth.seed = c.seed;
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string experiment_config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["synth"] = {{"num_classes", c.synth.num_classes}, {"dim", c.synth.dim},
                {"n_per_class", c.synth.n_per_class}, {"skew", c.synth.skew},
                {"class_sep", c.synth.class_sep},     {"noise_std", c.synth.noise_std}};
  j["n_test_per_class"] = c.n_test_per_class;
  j["spec"] = {{"layer_dims", c.resolved_spec().layer_dims}};
  j["train"] = {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate},
                {"plateau_patience", c.train.plateau_patience},
                {"decay_factor", c.train.decay_factor},
                {"adam_beta1", c.train.adam.beta1},
                {"adam_beta2", c.train.adam.beta2},
                {"adam_eps", c.train.adam.eps}};
  j["distill"] = method_spec_json(c.distill);
  ordered_json methods = ordered_json::array();
  for (const auto& m : c.methods) methods.push_back(method_spec_json(m));
  j["methods"] = methods;
  j["output_dir"] = c.output_dir.string();
  j["runs"] = c.runs;
  return j.dump(2) + "\n";
}

void apply_overrides(ExperimentConfig& config, const Overrides& o) {
  if (o.seed) {
    config.seed = *o.seed;
    config.synth.seed = *o.seed;
  }
  if (o.method) {
    config.distill.objective.method = parse_method(*o.method);
    config.distill.tag = upper(*o.method);
    config.distill.sampler = default_sampler(config.distill.objective.method, config.distill.tag);
  }
  if (o.lambda) config.distill.objective.lambda = *o.lambda;
  if (o.out) config.output_dir = *o.out;
  if (o.runs) config.runs = *o.runs;
  config.validate();
}

std::uint64_t teacher_seed(std::uint64_t root) { return splitmix64(root ^ 0x7465616368ULL); }
std::uint64_t student_seed(std::uint64_t root) { return splitmix64(root ^ 0x73747564ULL); }

LabeledDataset make_train_set(const ExperimentConfig& config, std::uint64_t root, std::optional<double> skew) {
  SynthConfig s = config.synth;
  s.seed = root;
  if (skew) s.skew = *skew;
  return generate_skewed(s);
}

LabeledDataset make_test_set(const ExperimentConfig& config, std::uint64_t root) {
  SynthConfig s = config.synth;
  s.seed = root;
  return make_balanced_test(s, config.n_test_per_class);
}

RunOutput run_teacher(const ExperimentConfig& config, std::uint64_t root, const LabeledDataset& train_set,
                      const LabeledDataset& test_set) {
  TrainConfig t = config.train;
  t.seed = teacher_seed(root);
  t.objective = ObjectiveConfig{};
  t.sampler = SamplerKind::kPlain;
  RunOutput out{train(train_set, test_set, config.resolved_spec(), t), {}, {}};
  out.result.checkpoint.meta.method = "TEACHER";
  out.evaluation = evaluate(out.result.checkpoint, test_set);
  out.record = make_record("TEACHER", root, out.evaluation);
  return out;
}

RunOutput run_student(const ExperimentConfig& config, const MethodSpec& method, std::uint64_t root,
                      const LabeledDataset& train_set, const LabeledDataset& test_set,
                      const ModelCheckpoint* teacher) {
  TrainConfig t = config.train;
  t.seed = student_seed(root);
  t.objective = method.objective;
  t.sampler = method.sampler;
  RunOutput out{train(train_set, test_set, config.resolved_spec(), t, teacher), {}, {}};
  out.result.checkpoint.meta.method = method.tag;
  out.evaluation = evaluate(out.result.checkpoint, test_set);
  out.record = make_record(method.tag, root, out.evaluation);
  return out;
}

std::string metrics_json(const RunOutput& run, std::uint64_t root, double lambda) {
  ordered_json j;
  j["method"] = run.record.method;
  j["seed"] = root;
  j["lambda"] = lambda;
  j["accuracy"] = run.record.accuracy;
  j["deo_a"] = run.record.deo_a;
  j["deo_m"] = run.record.deo_m;
  j["test_loss"] = run.evaluation.loss;
  j["epochs"] = run.result.history.records.size();
  j["deo"] = ordered_json::parse(run.evaluation.report.to_json());
  return j.dump(2) + "\n";
}

std::string run_stem(const std::string& tag, double lambda, std::uint64_t root) {
  std::string stem;
  for (char c : tag) {
    stem += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : '_';
  }
  if (lambda > 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "_lam%g", lambda);
    stem += buf;
  }
  return stem + "_s" + std::to_string(root);
}

void write_run(const std::filesystem::path& dir, const std::string& stem, const RunOutput& run,
               std::uint64_t root, double lambda) {
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / (stem + ".ckpt"), run.result.checkpoint);
  write_text(dir / (stem + "_history.csv"), run.result.history.to_csv());
  write_text(dir / (stem + "_metrics.json"), metrics_json(run, root, lambda));
}

void log_event(const std::filesystem::path& dir, const std::string& message) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "run.log", std::ios::app);
  if (!out) throw IoError("cannot write " + (dir / "run.log").string());
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << stamp << " " << message << "\n";
}

std::string cmd_gen_data(const ExperimentConfig& config) {
  config.validate();
  const auto train_set = make_train_set(config, config.seed);
  const auto test_set = make_test_set(config, config.seed);
  const auto& dir = config.output_dir;
  std::filesystem::create_directories(dir);
  write_dataset(dir / "train.bin", train_set);
  write_dataset(dir / "test.bin", test_set);
  write_dataset_csv(dir / "train.csv", train_set);
  write_dataset_csv(dir / "test.csv", test_set);
  write_text(dir / "config.json", experiment_config_json(config));
  log_event(dir, "gen-data seed " + std::to_string(config.seed));
  return counts_table(train_set, "train") + counts_table(test_set, "test");
}

std::string cmd_train_teacher(const ExperimentConfig& config) {
  config.validate();
  const auto train_set = make_train_set(config, config.seed);
  const auto test_set = make_test_set(config, config.seed);
  const RunOutput run = run_teacher(config, config.seed, train_set, test_set);
  const std::string stem = run_stem("teacher", 0.0, config.seed);
  write_run(config.output_dir, stem, run, config.seed, 0.0);
  log_event(config.output_dir, "train-teacher " + stem);
  return metrics_json(run, config.seed, 0.0);
}

std::string cmd_distill(const ExperimentConfig& config, const std::filesystem::path& teacher_path) {
  config.validate();
  const MethodSpec& m = config.distill;
  std::optional<ModelCheckpoint> teacher;
  if (method_needs_teacher(m.objective.method)) {
    if (teacher_path.empty()) {
      throw UsageError("distill: method " + m.tag + " requires --teacher");
    }
    teacher = load_checkpoint(teacher_path);
  }
  const auto train_set = make_train_set(config, config.seed);
  const auto test_set = make_test_set(config, config.seed);
  const RunOutput run = run_student(config, m, config.seed, train_set, test_set, teacher ? &*teacher : nullptr);
  const std::string stem = run_stem(m.tag, m.objective.lambda, config.seed);
  write_run(config.output_dir, stem, run, config.seed, m.objective.lambda);
  log_event(config.output_dir, "distill " + stem);
  return metrics_json(run, config.seed, m.objective.lambda);
}

std::string cmd_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint_path) {
  config.validate();
  if (checkpoint_path.empty()) throw UsageError("eval: --checkpoint is required");
  const ModelCheckpoint ckpt = load_checkpoint(checkpoint_path);
  const auto test_set = make_test_set(config, config.seed);
  const Evaluation e = evaluate(ckpt, test_set);
  ordered_json j;
  j["checkpoint"] = checkpoint_path.filename().string();
  j["method"] = ckpt.meta.method;
  j["seed"] = config.seed;
  j["accuracy"] = pct(e.accuracy);
  j["deo_a"] = pct(e.report.deo_a);
  j["deo_m"] = pct(e.report.deo_m);
  j["test_loss"] = e.loss;
  j["deo"] = ordered_json::parse(e.report.to_json());
  const std::string text = j.dump(2) + "\n";
  write_text(config.output_dir / (checkpoint_path.stem().string() + "_eval.json"), text);
  return text;
}

std::vector<SweepRow> sweep_skew(const ExperimentConfig& config, const std::vector<double>& skews) {
  config.validate();
  if (skews.empty()) throw UsageError("sweep-skew: empty skew list");
  for (double s : skews) {
    if (!(s >= 0.5 && s <= 1.0)) throw UsageError("sweep-skew: skew " + std::to_string(s) + " outside [0.5, 1]");
  }
  std::vector<SweepRow> rows;
  for (int i = 0; i < config.runs; ++i) {
    const std::uint64_t root = config.seed + static_cast<std::uint64_t>(i);
    const auto test_set = make_test_set(config, root);
    const auto student_train = make_train_set(config, root);
    for (double skew : skews) {
      const auto teacher_train = make_train_set(config, root, skew);
      const RunOutput t = run_teacher(config, root, teacher_train, test_set);
      const RunOutput s = run_student(config, config.distill, root, student_train, test_set, &t.result.checkpoint);
      rows.push_back(SweepRow{skew, "teacher", root, t.record.accuracy, t.record.deo_a, t.record.deo_m});
      rows.push_back(SweepRow{skew, "student", root, s.record.accuracy, s.record.deo_a, s.record.deo_m});
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "skew,model,seed,accuracy,deo_a,deo_m\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%.17g,%s,%llu,%.17g,%.17g,%.17g\n", r.skew, r.model.c_str(),
                  static_cast<unsigned long long>(r.seed), r.accuracy, r.deo_a, r.deo_m);
    out += line;
  }
  return out;
}

std::string cmd_sweep_skew(const ExperimentConfig& config, const std::vector<double>& skews) {
  const auto rows = sweep_skew(config, skews);
  const std::string csv = sweep_csv(rows);
  write_text(config.output_dir / "sweep.csv", csv);
  log_event(config.output_dir, "sweep-skew " + std::to_string(rows.size()) + " rows");
  return csv;
}

ComparisonTable run_method_matrix(const ExperimentConfig& config, std::vector<RunRecord>* runs_out) {
  config.validate();
  const auto methods = config.methods.empty() ? default_matrix(config) : config.methods;
  std::vector<RunRecord> runs;
  for (int i = 0; i < config.runs; ++i) {
    const std::uint64_t root = config.seed + static_cast<std::uint64_t>(i);
    const auto train_set = make_train_set(config, root);
    const auto test_set = make_test_set(config, root);
    const RunOutput t = run_teacher(config, root, train_set, test_set);
    write_run(config.output_dir, run_stem("teacher", 0.0, root), t, root, 0.0);
    runs.push_back(t.record);
    for (const auto& m : methods) {
      const RunOutput s = run_student(config, m, root, train_set, test_set, &t.result.checkpoint);
      write_run(config.output_dir, run_stem(m.tag, m.objective.lambda, root), s, root, m.objective.lambda);
      runs.push_back(s.record);
    }
  }
  ComparisonTable table = build_comparison(aggregate_runs(runs));
  write_text(config.output_dir / "config.json", experiment_config_json(config));
  write_text(config.output_dir / "runs.csv", run_records_csv(runs));
  write_text(config.output_dir / "report.txt", table.to_text());
  write_text(config.output_dir / "report.csv", table.to_csv());
  if (runs_out) *runs_out = std::move(runs);
  return table;
}

std::string cmd_run(const ExperimentConfig& config) {
  const ComparisonTable table = run_method_matrix(config);
  log_event(config.output_dir, "run " + std::to_string(table.rows.size()) + " methods");
  return table.to_text();
}

std::string cmd_verify(const std::filesystem::path& out_dir, int trials, std::uint64_t seed, bool& passed) {
  GradBatteryConfig grad;
  grad.seed = seed;
  const VerificationReport report = run_verification(trials, seed, grad);
  passed = report.passed();
  const std::string text = report.to_json();
  if (!out_dir.empty()) {
    write_text(out_dir / "verification.json", text);
    log_event(out_dir, std::string("verify ") + (passed ? "passed" : "FAILED"));
  }
  return text;
}

std::string cmd_report(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir) {
  if (inputs.empty()) throw UsageError("report: no result files given");
  std::vector<RunRecord> runs;
  for (const auto& p : inputs) {
    auto r = read_run_records(p);
    runs.insert(runs.end(), r.begin(), r.end());
  }
  const ComparisonTable table = build_comparison(aggregate_runs(runs));
  if (!out_dir.empty()) {
    write_text(out_dir / "report.txt", table.to_text());
    write_text(out_dir / "report.csv", table.to_csv());
  }
  return table.to_text();
}

}  // namespace mfd
