#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "s3rr/degrade.hpp"
#include "s3rr/eval.hpp"
#include "s3rr/ssrr.hpp"

namespace s3rr {

// Invalid configuration; what() starts with the offending field path.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// A stage ran before the artifacts it reads exist.
class MissingArtifact : public Error {
 public:
  explicit MissingArtifact(const std::filesystem::path& path);
};

struct EvalConfig {
  std::vector<Split> splits{Split::degradation, Split::test};
  int m = 50;
  TestSplitConfig test;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "run";
  std::string env_id = "reach1d";
  DemonstratorSpec demonstrator;
  int n_demos = 10;
  AirlConfig airl;
  DegradationPlan degradation;
  FitConfig curvefit;
  RewardRegressionConfig reward;
  RLConfig rl;
  EvalConfig eval;
  nlohmann::json raw;  // the document this was parsed from
};

// Every violation found, each prefixed by its field path. Empty when valid.
std::vector<std::string> config_violations(const nlohmann::json& doc);
// Throws ConfigError listing all violations.
PipelineConfig parse_config(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::filesystem::path& path);
// "a.b.c=value"; value is parsed as JSON and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Digest of the canonical (sorted-key) serialization.
std::string config_digest(const nlohmann::json& doc);

const std::vector<std::string>& stage_names();

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

// Owns a run directory for the duration of a process: holds its lock file,
// copies the config in on first use and refuses a directory written under a
// different config.
class RunDirectory {
 public:
  RunDirectory(const PipelineConfig& config, std::filesystem::path dir);
  ~RunDirectory();
  RunDirectory(const RunDirectory&) = delete;
  RunDirectory& operator=(const RunDirectory&) = delete;

  void run_stage(const std::string& stage);
  const RunManifest& manifest() const { return manifest_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path require(const std::string& rel) const;
  void record(const std::string& stage, const std::vector<std::string>& files,
              const std::vector<std::string>& warnings);
  void write_manifest() const;

  void demos();
  void airl();
  void degrade();
  void fit();
  void reward();
  void policy();
  void eval();

  PipelineConfig config_;
  std::filesystem::path dir_;
  EnvPtr env_;
  RunManifest manifest_;
  int lock_fd_ = -1;
};

}  // namespace s3rr
