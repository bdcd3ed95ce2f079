#include "s3rr/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "s3rr/checkpoint.hpp"
#include "s3rr/dataset_io.hpp"

namespace s3rr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : "\n") + s;
  return out;
}

// --- config reading ----------------------------------------------------------

class Reader {
 public:
  explicit Reader(std::vector<std::string>& out) : out_(out) {}

  void bad(const std::string& path, const std::string& msg) { out_.push_back(path + ": " + msg); }

  // Returns the named object section, flagging unknown keys; nullptr when absent.
  const json* section(const json& parent, const std::string& path, const char* key,
                      std::initializer_list<const char*> fields) {
    const auto it = parent.find(key);
    if (it == parent.end()) return nullptr;
    const std::string p = path.empty() ? key : path + "." + key;
    if (!it->is_object()) {
      bad(p, "expected an object");
      return nullptr;
    }
    const std::set<std::string> known(fields.begin(), fields.end());
    for (const auto& [k, v] : it->items())
      if (!known.count(k)) bad(p + "." + k, "unknown field");
    return &*it;
  }

  void integer(const json* sec, const std::string& path, const char* key, int& dst) {
    if (const json* v = find(sec, key)) {
      if (v->is_number_integer()) dst = v->get<int>();
      else bad(path + "." + key, "expected an integer");
    }
  }
  void real(const json* sec, const std::string& path, const char* key, double& dst) {
    if (const json* v = find(sec, key)) {
      if (v->is_number()) dst = v->get<double>();
      else bad(path + "." + key, "expected a number");
    }
  }
  void boolean(const json* sec, const std::string& path, const char* key, bool& dst) {
    if (const json* v = find(sec, key)) {
      if (v->is_boolean()) dst = v->get<bool>();
      else bad(path + "." + key, "expected true or false");
    }
  }
  void string(const json* sec, const std::string& path, const char* key, std::string& dst) {
    if (const json* v = find(sec, key)) {
      if (v->is_string()) dst = v->get<std::string>();
      else bad(path + "." + key, "expected a string");
    }
  }
  template <class T>
  void list(const json* sec, const std::string& path, const char* key, std::vector<T>& dst) {
    if (const json* v = find(sec, key)) {
      bool ok = v->is_array();
      if (ok)
        for (const auto& e : *v)
          ok = ok && (std::is_integral_v<T> ? e.is_number_integer() : e.is_number());
      if (ok) dst = v->get<std::vector<T>>();
      else bad(path + "." + key, std::is_integral_v<T> ? "expected an array of integers" : "expected an array of numbers");
    }
  }

 private:
  static const json* find(const json* sec, const char* key) {
    if (!sec) return nullptr;
    const auto it = sec->find(key);
    return it == sec->end() ? nullptr : &*it;
  }
  std::vector<std::string>& out_;
};

void read_rl(Reader& r, const json& parent, const std::string& path, const char* key, RLConfig& c) {
  const std::string p = path.empty() ? key : path + "." + key;
  const json* s = r.section(parent, path, key,
                            {"iterations", "rollouts_per_iter", "alpha", "gamma", "baseline", "step_size",
                             "value_step_size", "value_steps", "sparsity_lambda", "policy_layers",
                             "policy_width", "init_log_std"});
  if (!s) return;
  r.integer(s, p, "iterations", c.iterations);
  r.integer(s, p, "rollouts_per_iter", c.rollouts_per_iter);
  r.real(s, p, "alpha", c.alpha);
  if (s->contains("gamma")) {
    double g = 0.0;
    r.real(s, p, "gamma", g);
    c.gamma = g;
  }
  std::string baseline = c.baseline == RLConfig::Baseline::mean_return ? "mean_return" : "learned_value";
  r.string(s, p, "baseline", baseline);
  if (baseline == "mean_return") c.baseline = RLConfig::Baseline::mean_return;
  else if (baseline == "learned_value") c.baseline = RLConfig::Baseline::learned_value;
  else r.bad(p + ".baseline", "expected mean_return or learned_value");
  r.real(s, p, "step_size", c.step_size);
  r.real(s, p, "value_step_size", c.value_step_size);
  r.integer(s, p, "value_steps", c.value_steps);
  r.real(s, p, "sparsity_lambda", c.sparsity_lambda);
  r.integer(s, p, "policy_layers", c.policy_layers);
  r.integer(s, p, "policy_width", c.policy_width);
  r.real(s, p, "init_log_std", c.init_log_std);
}

template <class F>
void check(std::vector<std::string>& out, const std::string& path, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    out.push_back(path + ": " + e.what());
  }
}

PipelineConfig read_config(const json& doc, std::vector<std::string>& out) {
  PipelineConfig c;
  c.raw = doc;
  Reader r(out);
  if (!doc.is_object()) {
    r.bad("(root)", "expected an object");
    return c;
  }
  const std::set<std::string> top{"seed", "out_dir", "env", "airl", "degradation", "curvefit",
                                  "reward", "rl", "eval"};
  for (const auto& [k, v] : doc.items())
    if (!top.count(k)) r.bad(k, "unknown field");
  for (const char* required : {"seed", "env", "airl", "degradation", "curvefit", "reward", "rl", "eval"})
    if (!doc.contains(required)) r.bad(required, "missing");

  if (const auto it = doc.find("seed"); it != doc.end()) {
    if (it->is_number_unsigned()) c.seed = it->get<std::uint64_t>();
    else if (it->is_number_integer() && it->get<std::int64_t>() >= 0) c.seed = it->get<std::uint64_t>();
    else r.bad("seed", "expected a non-negative integer");
  }
  r.string(&doc, "", "out_dir", c.out_dir);

  if (const json* env = r.section(doc, "", "env", {"id", "n_demos", "demonstrator"})) {
    r.string(env, "env", "id", c.env_id);
    r.integer(env, "env", "n_demos", c.n_demos);
    c.demonstrator.kind = c.env_id == "reach1d" ? DemonstratorSpec::Kind::noisy_proportional
                                                : DemonstratorSpec::Kind::epsilon_suboptimal;
    if (const json* d = r.section(*env, "env", "demonstrator", {"kind", "gain", "noise", "epsilon"})) {
      std::string kind;
      r.string(d, "env.demonstrator", "kind", kind);
      if (kind == "noisy_proportional") c.demonstrator.kind = DemonstratorSpec::Kind::noisy_proportional;
      else if (kind == "epsilon_suboptimal") c.demonstrator.kind = DemonstratorSpec::Kind::epsilon_suboptimal;
      else if (!kind.empty()) r.bad("env.demonstrator.kind", "expected noisy_proportional or epsilon_suboptimal");
      r.real(d, "env.demonstrator", "gain", c.demonstrator.gain);
      r.real(d, "env.demonstrator", "noise", c.demonstrator.noise);
      r.real(d, "env.demonstrator", "epsilon", c.demonstrator.epsilon);
    }
  }

  if (const json* a = r.section(doc, "", "airl",
                                {"demo_subset_size", "disc_layers", "disc_width", "policy_layers",
                                 "policy_width", "lambda", "outer_iterations", "disc_steps_per_iter",
                                 "disc_batch", "disc_step_size", "policy_iters_per_outer", "rl"})) {
    if (a->contains("demo_subset_size")) {
      int k = 0;
      r.integer(a, "airl", "demo_subset_size", k);
      c.airl.demo_subset_size = k;
    }
    r.integer(a, "airl", "disc_layers", c.airl.disc_layers);
    r.integer(a, "airl", "disc_width", c.airl.disc_width);
    r.integer(a, "airl", "policy_layers", c.airl.policy_layers);
    r.integer(a, "airl", "policy_width", c.airl.policy_width);
    r.real(a, "airl", "lambda", c.airl.lambda);
    r.integer(a, "airl", "outer_iterations", c.airl.outer_iterations);
    r.integer(a, "airl", "disc_steps_per_iter", c.airl.disc_steps_per_iter);
    r.integer(a, "airl", "disc_batch", c.airl.disc_batch);
    r.real(a, "airl", "disc_step_size", c.airl.disc_step_size);
    r.integer(a, "airl", "policy_iters_per_outer", c.airl.policy_iters_per_outer);
    read_rl(r, *a, "airl", "rl", c.airl.rl);
  }

  std::string method;
  if (const json* d = r.section(doc, "", "degradation", {"method", "levels", "controls", "trajectories_per_level"})) {
    r.string(d, "degradation", "method", method);
    if (!method.empty()) check(out, "degradation.method", [&] { c.degradation.method = method_from_string(method); });
    r.integer(d, "degradation", "levels", c.degradation.n_levels);
    r.list(d, "degradation", "controls", c.degradation.controls);
    r.integer(d, "degradation", "trajectories_per_level", c.degradation.trajectories_per_level);
  }

  if (const json* f = r.section(doc, "", "curvefit", {"max_iterations", "tolerance", "multi_starts", "k_bound"})) {
    r.integer(f, "curvefit", "max_iterations", c.curvefit.max_iterations);
    r.real(f, "curvefit", "tolerance", c.curvefit.tolerance);
    r.integer(f, "curvefit", "multi_starts", c.curvefit.multi_starts);
    r.real(f, "curvefit", "k_bound", c.curvefit.k_bound);
  }

  if (const json* w = r.section(doc, "", "reward",
                                {"epochs", "minibatch", "step_size", "hidden_layers", "hidden_width",
                                 "normalize_targets"})) {
    r.integer(w, "reward", "epochs", c.reward.epochs);
    r.integer(w, "reward", "minibatch", c.reward.minibatch);
    r.real(w, "reward", "step_size", c.reward.step_size);
    r.integer(w, "reward", "hidden_layers", c.reward.hidden_layers);
    r.integer(w, "reward", "hidden_width", c.reward.hidden_width);
    r.boolean(w, "reward", "normalize_targets", c.reward.normalize_targets);
  }

  read_rl(r, doc, "", "rl", c.rl);

  if (const json* e = r.section(doc, "", "eval", {"splits", "m", "test"})) {
    if (const auto it = e->find("splits"); it != e->end()) {
      c.eval.splits.clear();
      if (!it->is_array()) r.bad("eval.splits", "expected an array of split names");
      else
        for (const auto& s : *it) {
          const std::string name = s.is_string() ? s.get<std::string>() : "";
          if (name == "demo") c.eval.splits.push_back(Split::demo);
          else if (name == "degradation") c.eval.splits.push_back(Split::degradation);
          else if (name == "test") c.eval.splits.push_back(Split::test);
          else r.bad("eval.splits", "expected demo, degradation or test");
        }
    }
    r.integer(e, "eval", "m", c.eval.m);
    if (const json* t = r.section(*e, "eval", "test",
                                  {"etas", "per_eta", "checkpoint_iterations", "per_checkpoint", "rl"})) {
      r.list(t, "eval.test", "etas", c.eval.test.etas);
      r.integer(t, "eval.test", "per_eta", c.eval.test.per_eta);
      r.list(t, "eval.test", "checkpoint_iterations", c.eval.test.checkpoint_iterations);
      r.integer(t, "eval.test", "per_checkpoint", c.eval.test.per_checkpoint);
      read_rl(r, *t, "eval.test", "rl", c.eval.test.rl);
    }
  }
  return c;
}

void semantic_checks(const PipelineConfig& c, std::vector<std::string>& out) {
  check(out, "env.id", [&] { make_env(c.env_id); });
  if (c.n_demos < 1) out.push_back("env.n_demos: must be >= 1");
  check(out, "env.demonstrator", [&] { c.demonstrator.validate(); });
  if (c.demonstrator.kind == DemonstratorSpec::Kind::noisy_proportional && c.env_id != "reach1d")
    out.push_back("env.demonstrator.kind: noisy_proportional needs env.id reach1d");
  if (c.demonstrator.kind == DemonstratorSpec::Kind::epsilon_suboptimal && c.env_id == "reach1d")
    out.push_back("env.demonstrator.kind: epsilon_suboptimal needs a discrete env");
  check(out, "airl", [&] { c.airl.validate(static_cast<std::size_t>(std::max(c.n_demos, 0))); });

  const DegradationPlan& d = c.degradation;
  if (d.trajectories_per_level < 1) out.push_back("degradation.trajectories_per_level: must be >= 1");
  if (d.method == DegradationMethod::noise) {
    if (d.n_levels < 2) out.push_back("degradation.levels: must be >= 2");
  } else {
    check(out, "degradation.controls", [&] { eta_from_control(d.method, d.controls); });
    if (d.method == DegradationMethod::demo_count)
      for (double k : d.controls)
        if (k > c.n_demos) {
          out.push_back("degradation.controls: demo count " + format_real(k) + " exceeds env.n_demos");
          break;
        }
  }
  check(out, "curvefit", [&] { c.curvefit.validate(); });
  check(out, "reward", [&] { c.reward.validate(); });
  check(out, "rl", [&] { c.rl.validate(); });
  if (c.eval.m < 1) out.push_back("eval.m: must be >= 1");
  if (c.eval.splits.empty()) out.push_back("eval.splits: must name at least one split");
  check(out, "eval.test", [&] { c.eval.test.validate(); });
}

// --- files -----------------------------------------------------------------------

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << bytes;
  if (!out) throw IoError("write failed: " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_bytes(p, j.dump(2) + "\n"); }

std::string loss_csv(const std::vector<double>& losses) {
  std::ostringstream os;
  os << "epoch,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) os << i << ',' << format_real(losses[i]) << '\n';
  return os.str();
}

std::string run_file(std::size_t i, const char* what) {
  return "airl/run_" + std::to_string(i) + "_" + what;
}

}  // namespace

// --- public config API -----------------------------------------------------------

ConfigError::ConfigError(std::vector<std::string> violations)
    : ValidationError(join(violations)), violations_(std::move(violations)) {}

MissingArtifact::MissingArtifact(const fs::path& path)
    : Error("missing prerequisite artifact: " + path.string()) {}

std::vector<std::string> config_violations(const json& doc) {
  std::vector<std::string> out;
  const PipelineConfig c = read_config(doc, out);
  if (doc.is_object()) semantic_checks(c, out);
  return out;
}

PipelineConfig parse_config(const json& doc) {
  std::vector<std::string> out;
  PipelineConfig c = read_config(doc, out);
  if (doc.is_object()) semantic_checks(c, out);
  if (!out.empty()) throw ConfigError(std::move(out));
  return c;
}

json read_json_file(const fs::path& path) {
  const std::string bytes = read_bytes(path);
  try {
    return json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError({assignment + ": expected path=value"});
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  std::string pointer;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError({path + ": empty path component"});
    pointer += "/" + part;
  }
  try {
    doc[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    throw ConfigError({path + ": " + e.what()});
  }
}

std::string config_digest(const json& doc) { return digest(doc.dump()); }

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"demos", "airl", "degrade", "fit", "reward", "policy", "eval"};
  return names;
}

json to_json(const RunManifest& m) {
  json j;
  j["seed"] = m.seed;
  j["config_digest"] = m.config_digest;
  j["stage_outputs"] = m.stage_outputs;
  j["warnings"] = m.warnings;
  return j;
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.stage_outputs = j.at("stage_outputs").get<std::map<std::string, std::map<std::string, std::string>>>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what(), 0);
  }
  return m;
}

// --- run directory ---------------------------------------------------------------

RunDirectory::RunDirectory(const PipelineConfig& config, fs::path dir)
    : config_(config), dir_(std::move(dir)), env_(make_env(config.env_id)) {
  fs::create_directories(dir_);
  const fs::path lock = dir_ / ".lock";
  lock_fd_ = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (lock_fd_ < 0)
    throw IoError("run directory is in use (lock file " + lock.string() + "): " + std::strerror(errno));

  try {
    const std::string digest_now = config_digest(config_.raw);
    const fs::path copy = dir_ / "config.json";
    const fs::path manifest = dir_ / "manifest.json";
    if (fs::exists(copy) && config_digest(read_json_file(copy)) != digest_now)
      throw ConfigError({"config: differs from " + copy.string() + "; use a fresh output directory"});
    write_json(copy, config_.raw);
    if (fs::exists(manifest)) {
      manifest_ = manifest_from_json(read_json_file(manifest));
    } else {
      manifest_.seed = config_.seed;
      manifest_.config_digest = digest_now;
    }
  } catch (...) {
    ::close(lock_fd_);
    fs::remove(lock);
    throw;
  }
}

RunDirectory::~RunDirectory() {
  if (lock_fd_ >= 0) {
    ::close(lock_fd_);
    std::error_code ec;
    fs::remove(dir_ / ".lock", ec);
  }
}

fs::path RunDirectory::require(const std::string& rel) const {
  const fs::path p = dir_ / rel;
  if (!fs::exists(p)) throw MissingArtifact(p);
  return p;
}

void RunDirectory::record(const std::string& stage, const std::vector<std::string>& files,
                          const std::vector<std::string>& warnings) {
  auto& outputs = manifest_.stage_outputs[stage];
  outputs.clear();
  for (const auto& f : files) outputs[f] = digest(read_bytes(dir_ / f));
  const std::string prefix = stage + ": ";
  std::erase_if(manifest_.warnings, [&](const std::string& w) { return w.rfind(prefix, 0) == 0; });
  for (const auto& w : warnings) manifest_.warnings.push_back(prefix + w);
  write_manifest();
}

void RunDirectory::write_manifest() const { write_json(dir_ / "manifest.json", to_json(manifest_)); }

void RunDirectory::run_stage(const std::string& stage) {
  if (stage == "demos") demos();
  else if (stage == "airl") airl();
  else if (stage == "degrade") degrade();
  else if (stage == "fit") fit();
  else if (stage == "reward") reward();
  else if (stage == "policy") policy();
  else if (stage == "eval") eval();
  else if (stage == "pipeline")
    for (const auto& s : stage_names()) run_stage(s);
  else throw ConfigError({"stages: unknown stage '" + stage + "'"});
}

void RunDirectory::demos() {
  const DemoSet set = make_demonstrations(*env_, config_.demonstrator, config_.n_demos,
                                          derive_seed(config_.seed, "demos"));
  DegradationDataset d;
  d.env_id = config_.env_id;
  d.trajectories = set.trajectories;
  d.provenance = Provenance::demo;
  d.seed = config_.seed;
  d.refresh_levels();
  save_dataset(d, dir_ / "demos.jsonl");
  std::vector<std::string> warnings;
  if (set.warning) warnings.push_back(*set.warning);
  record("demos", {"demos.jsonl", "demos.manifest.json"}, warnings);
}

void RunDirectory::airl() {
  const DegradationDataset demos = load_dataset(require("demos.jsonl"));
  const std::uint64_t seed = derive_seed(config_.seed, "airl");
  std::vector<std::string> files;
  if (config_.degradation.method == DegradationMethod::noise) {
    const AirlResult res = train_airl(*env_, demos.trajectories, config_.airl, seed);
    save_checkpoint(res.reward_model, dir_ / "airl_reward.json");
    save_checkpoint(res.policy, dir_ / "airl_policy.json");
    write_bytes(dir_ / "airl_log.csv", airl_log_csv(res.log));
    files = {"airl_reward.json", "airl_policy.json", "airl_log.csv"};
  } else {
    const SystematicRuns runs =
        train_systematic_runs(*env_, demos.trajectories, config_.degradation, config_.airl, seed);
    json index;
    index["method"] = std::string(to_string(runs.method));
    index["controls"] = runs.controls;
    index["etas"] = runs.etas;
    index["scorer"] = runs.scorer_index();
    json entries = json::array();
    fs::create_directories(dir_ / "airl");
    for (std::size_t i = 0; i < runs.runs.size(); ++i) {
      const AirlResult& res = runs.runs[i];
      save_checkpoint(res.reward_model, dir_ / run_file(i, "reward.json"));
      save_checkpoint(res.policy, dir_ / run_file(i, "policy.json"));
      write_bytes(dir_ / run_file(i, "log.csv"), airl_log_csv(res.log));
      entries.push_back({{"reward", run_file(i, "reward.json")}, {"policy", run_file(i, "policy.json")},
                         {"policy_l1", res.policy.net_params().lpNorm<1>()}});
      for (const char* what : {"reward.json", "policy.json", "log.csv"}) files.push_back(run_file(i, what));
    }
    index["runs"] = entries;
    write_json(dir_ / "airl_runs.json", index);
    const AirlResult& scorer = runs.runs[runs.scorer_index()];
    save_checkpoint(scorer.reward_model, dir_ / "airl_reward.json");
    save_checkpoint(scorer.policy, dir_ / "airl_policy.json");
    write_bytes(dir_ / "airl_log.csv", airl_log_csv(scorer.log));
    for (const char* f : {"airl_runs.json", "airl_reward.json", "airl_policy.json", "airl_log.csv"})
      files.push_back(f);
  }
  record("airl", files, {});
}

void RunDirectory::degrade() {
  const std::uint64_t seed = derive_seed(config_.seed, "degrade");
  DegradationDataset d;
  const int per_level = config_.degradation.trajectories_per_level;
  if (config_.degradation.method == DegradationMethod::noise) {
    AirlResult res;
    res.reward_model = load_reward_model(require("airl_reward.json"));
    res.policy = load_policy(require("airl_policy.json"));
    d = generate_noise_dataset(*env_, res, eta_grid_noise(config_.degradation.n_levels), per_level, seed);
  } else {
    const json index = read_json_file(require("airl_runs.json"));
    SystematicRuns runs;
    runs.method = method_from_string(index.at("method").get<std::string>());
    if (runs.method != config_.degradation.method)
      throw MissingArtifact(dir_ / "airl_runs.json (trained for a different method)");
    runs.controls = index.at("controls").get<std::vector<double>>();
    runs.etas = index.at("etas").get<std::vector<double>>();
    for (const auto& e : index.at("runs")) {
      AirlResult res;
      res.reward_model = load_reward_model(require(e.at("reward").get<std::string>()));
      res.policy = load_policy(require(e.at("policy").get<std::string>()));
      runs.runs.push_back(std::move(res));
    }
    d = systematic_dataset_from_runs(*env_, runs, per_level, seed);
  }
  save_dataset(d, dir_ / "degradation.jsonl");
  record("degrade", {"degradation.jsonl", "degradation.manifest.json"}, {});
}

void RunDirectory::fit() {
  const DegradationDataset d = load_dataset(require("degradation.jsonl"));
  std::vector<std::pair<double, double>> points;
  for (const auto& t : d.trajectories) points.emplace_back(t.eta, trajectory_return(t));
  const SigmoidFit fit = fit_sigmoid(points, config_.curvefit);
  json j;
  j["c"] = fit.params.c;
  j["k"] = fit.params.k;
  j["x0"] = fit.params.x0;
  j["y0"] = fit.params.y0;
  j["residual"] = fit.residual;
  j["normalization"] = {{"mean", fit.norm_mean}, {"scale", fit.norm_scale}};
  j["distinct_levels"] = fit.distinct_levels;
  j["warnings"] = fit.warnings;
  write_json(dir_ / "sigmoid.json", j);
  std::ostringstream os;
  os << "eta,return,fitted\n";
  for (const auto& [eta, y] : points)
    os << format_real(eta) << ',' << format_real(y) << ',' << format_real(sigmoid_eval(fit.params, eta)) << '\n';
  write_bytes(dir_ / "fit_points.csv", os.str());
  record("fit", {"sigmoid.json", "fit_points.csv"}, fit.warnings);
}

void RunDirectory::reward() {
  const DegradationDataset d = load_dataset(require("degradation.jsonl"));
  const json s = read_json_file(require("sigmoid.json"));
  const SigmoidParams p{s.at("c").get<double>(), s.at("k").get<double>(), s.at("x0").get<double>(),
                        s.at("y0").get<double>()};
  const RewardRegressionResult res =
      reward_regression(*env_, d, p, config_.reward, derive_seed(config_.seed, "reward"));
  save_checkpoint(res.model, dir_ / "reward.json");
  write_bytes(dir_ / "reward_loss.csv", loss_csv(res.loss_curve));
  write_json(dir_ / "reward_targets.json", {{"target_mean", res.target_mean}, {"target_scale", res.target_scale}});
  record("reward", {"reward.json", "reward_loss.csv", "reward_targets.json"}, {});
}

void RunDirectory::policy() {
  const RewardModel model = load_reward_model(require("reward.json"));
  const TrainResult res =
      train_policy(*env_, as_reward_fn(*env_, model), config_.rl, derive_seed(config_.seed, "policy"));
  save_checkpoint(res.policy, dir_ / "policy.json");
  write_bytes(dir_ / "policy_curve.csv", curve_csv(res.curve));
  record("policy", {"policy.json", "policy_curve.csv"}, {});
}

void RunDirectory::eval() {
  const RewardModel learned = load_reward_model(require("reward.json"));
  const RewardModel initial = load_reward_model(require("airl_reward.json"));
  const StochasticPolicy trained = load_policy(require("policy.json"));
  const StochasticPolicy airl_policy = load_policy(require("airl_policy.json"));
  const DegradationDataset demos = load_dataset(require("demos.jsonl"));
  const DegradationDataset degraded = load_dataset(require("degradation.jsonl"));

  DegradationDataset test;
  test.env_id = config_.env_id;
  test.provenance = Provenance::test;
  test.seed = config_.seed;
  test.trajectories = generate_test_split(*env_, airl_policy, config_.eval.test,
                                          derive_seed(config_.seed, "eval-test"));
  test.refresh_levels();
  save_dataset(test, dir_ / "test.jsonl");

  std::vector<SplitRef> splits;
  for (Split s : config_.eval.splits) {
    if (s == Split::demo) splits.push_back({s, demos.trajectories});
    if (s == Split::degradation) splits.push_back({s, degraded.trajectories});
    if (s == Split::test) splits.push_back({s, test.trajectories});
  }
  const CorrelationReport corr = correlation_report(*env_, as_reward_fn(*env_, learned), splits);
  const CorrelationReport base = correlation_report(*env_, as_reward_fn(*env_, initial), splits);
  json cj = report_json(corr);
  cj["initial_reward"] = report_json(base);
  write_bytes(dir_ / "correlation.csv", report_csv(corr));
  write_json(dir_ / "correlation.json", cj);

  const std::uint64_t seed = derive_seed(config_.seed, "eval-policy");
  json pj;
  pj["learned"] = report_json(policy_report(*env_, as_sampler(*env_, trained), demos.trajectories,
                                            config_.eval.m, seed));
  pj["initial"] = report_json(policy_report(*env_, as_sampler(*env_, airl_policy), demos.trajectories,
                                            config_.eval.m, seed));
  write_json(dir_ / "policy_report.json", pj);
  record("eval",
         {"test.jsonl", "test.manifest.json", "correlation.csv", "correlation.json", "policy_report.json"}, {});
}

}  // namespace s3rr
