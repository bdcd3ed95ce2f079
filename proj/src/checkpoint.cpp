#include "s3rr/checkpoint.hpp"

#include <fstream>

namespace s3rr {

namespace {

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vec_from(const json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json space_json(const SpaceSpec& s) {
  json j;
  if (s.is_discrete()) {
    j["kind"] = "discrete";
    j["cardinality"] = s.cardinality;
  } else {
    j["kind"] = "continuous";
    j["lo"] = vec_json(s.lo);
    j["hi"] = vec_json(s.hi);
  }
  return j;
}

SpaceSpec space_from(const json& j) {
  if (j.at("kind") == "discrete") return SpaceSpec::finite(j.at("cardinality").get<int>());
  return SpaceSpec::box(vec_from(j.at("lo")), vec_from(j.at("hi")));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("malformed JSON in " + path.string() + ": " + e.what(), 0);
  }
}

}  // namespace

json to_json(const ApproximatorSpec& spec) {
  return {{"input_dim", spec.input_dim},
          {"output_dim", spec.output_dim},
          {"hidden_layers", spec.hidden_layers},
          {"hidden_width", spec.hidden_width},
          {"activation", "tanh"},
          {"output", spec.output == ApproximatorSpec::Output::logits ? "logits" : "identity"}};
}

ApproximatorSpec spec_from_json(const json& j) {
  ApproximatorSpec s;
  s.input_dim = j.at("input_dim").get<int>();
  s.output_dim = j.at("output_dim").get<int>();
  s.hidden_layers = j.at("hidden_layers").get<int>();
  s.hidden_width = j.at("hidden_width").get<int>();
  if (j.at("activation") != "tanh") throw ValidationError("checkpoint: only tanh activations supported");
  s.output = j.at("output") == "logits" ? ApproximatorSpec::Output::logits
                                        : ApproximatorSpec::Output::identity;
  s.validate();
  return s;
}

json to_json(const RewardModel& model) {
  return {{"kind", "reward_model"}, {"spec", to_json(model.spec)}, {"params", vec_json(model.params)}};
}

RewardModel reward_model_from_json(const json& j) {
  if (j.at("kind") != "reward_model") throw ValidationError("checkpoint is not a reward model");
  RewardModel m{spec_from_json(j.at("spec")), vec_from(j.at("params"))};
  if (static_cast<std::size_t>(m.params.size()) != m.spec.param_count())
    throw ValidationError("checkpoint: parameter count does not match spec");
  return m;
}

json to_json(const StochasticPolicy& policy) {
  return {{"kind", "policy"},
          {"spec", to_json(policy.spec())},
          {"head", policy.head() == StochasticPolicy::Head::categorical ? "categorical" : "gaussian"},
          {"action_space", space_json(policy.action_space())},
          {"params", vec_json(policy.net_params())},
          {"log_std", vec_json(policy.log_std())}};
}

StochasticPolicy policy_from_json(const json& j) {
  if (j.at("kind") != "policy") throw ValidationError("checkpoint is not a policy");
  const auto head = j.at("head") == "categorical" ? StochasticPolicy::Head::categorical
                                                  : StochasticPolicy::Head::gaussian;
  return StochasticPolicy(spec_from_json(j.at("spec")), head, space_from(j.at("action_space")),
                          vec_from(j.at("params")), vec_from(j.at("log_std")));
}

void save_checkpoint(const RewardModel& model, const std::filesystem::path& path) {
  write_text(path, to_json(model).dump(2) + "\n");
}

void save_checkpoint(const StochasticPolicy& policy, const std::filesystem::path& path) {
  write_text(path, to_json(policy).dump(2) + "\n");
}

RewardModel load_reward_model(const std::filesystem::path& path) {
  return reward_model_from_json(read_json(path));
}

StochasticPolicy load_policy(const std::filesystem::path& path) {
  return policy_from_json(read_json(path));
}

}  // namespace s3rr
