#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "s3rr/pipeline.hpp"

namespace {

constexpr int exit_error = 1;
constexpr int exit_missing = 2;
constexpr int exit_config = 3;

struct Options {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string stages;
};

nlohmann::json load(const Options& o) {
  nlohmann::json doc;
  try {
    doc = s3rr::read_json_file(o.config);
  } catch (const s3rr::Error& e) {
    throw s3rr::ConfigError({std::string("config: ") + e.what()});
  }
  for (const auto& s : o.overrides) s3rr::apply_override(doc, s);
  if (o.seed) doc["seed"] = *o.seed;
  return doc;
}

std::vector<std::string> split_stages(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  for (std::string s; std::getline(ss, s, ',');)
    if (!s.empty()) out.push_back(s);
  return out;
}

int run(const Options& o, const std::vector<std::string>& stages) {
  const s3rr::PipelineConfig config = s3rr::parse_config(load(o));
  for (const auto& s : stages)
    if (s != "pipeline" && std::find(s3rr::stage_names().begin(), s3rr::stage_names().end(), s) ==
                               s3rr::stage_names().end())
      throw s3rr::ConfigError({"stages: unknown stage '" + s + "'"});
  s3rr::RunDirectory dir(config, o.out_dir.empty() ? config.out_dir : o.out_dir);
  for (const auto& s : stages) {
    std::cerr << "[s3rr] stage " << s << '\n';
    dir.run_stage(s);
  }
  std::size_t outputs = dir.manifest().stage_outputs.size();
  std::cout << "ok: " << outputs << " stage outputs in " << (dir.dir() / "manifest.json").string() << '\n';
  for (const auto& w : dir.manifest().warnings) std::cout << "warning: " << w << '\n';
  return 0;
}

int validate(const Options& o) {
  nlohmann::json doc;
  try {
    doc = load(o);
  } catch (const s3rr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  }
  const auto violations = s3rr::config_violations(doc);
  for (const auto& v : violations) std::cout << v << '\n';
  std::cout << violations.size() << " violations\n";
  return violations.empty() ? 0 : exit_config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward regression from degraded trajectories"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", o.out_dir, "run directory (overrides out_dir)");
    sub->add_option("--seed", o.seed, "master seed (overrides seed)");
    sub->add_option("--set", o.overrides, "override a config field: path=value");
  };

  std::vector<std::pair<CLI::App*, std::string>> stage_cmds;
  for (const auto& s : s3rr::stage_names()) {
    auto* sub = app.add_subcommand(s, "run the " + s + " stage");
    common(sub);
    stage_cmds.emplace_back(sub, s);
  }
  auto* pipeline = app.add_subcommand("pipeline", "run every stage in order");
  common(pipeline);
  auto* run_cmd = app.add_subcommand("run", "run a comma-separated list of stages");
  common(run_cmd);
  run_cmd->add_option("--stages", o.stages, "e.g. demos,airl,degrade")->required();
  auto* validate_cmd = app.add_subcommand("validate", "check a config and list violations");
  common(validate_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) return validate(o);
    if (pipeline->parsed()) return run(o, {"pipeline"});
    if (run_cmd->parsed()) return run(o, split_stages(o.stages));
    for (const auto& [sub, name] : stage_cmds)
      if (sub->parsed()) return run(o, {name});
  } catch (const s3rr::ConfigError& e) {
    for (const auto& v : e.violations()) std::cerr << "config error: " << v << '\n';
    return exit_config;
  } catch (const s3rr::MissingArtifact& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_missing;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
  return exit_error;
}
