#include "s3rr/reward_model.hpp"

#include "s3rr/checkpoint.hpp"

namespace s3rr {

namespace {

ApproximatorSpec reward_spec(const Env& env, int hidden_layers, int hidden_width) {
  ApproximatorSpec spec;
  spec.input_dim = env.encoded_dim();
  spec.output_dim = 1;
  spec.hidden_layers = hidden_layers;
  spec.hidden_width = hidden_width;
  spec.validate();
  return spec;
}

}  // namespace

RewardModel RewardModel::make(const Env& env, int hidden_layers, int hidden_width, Rng& rng) {
  RewardModel m{reward_spec(env, hidden_layers, hidden_width), {}};
  m.params = init_params(m.spec, rng);
  return m;
}

RewardModel RewardModel::zeros(const Env& env, int hidden_layers, int hidden_width) {
  RewardModel m{reward_spec(env, hidden_layers, hidden_width), {}};
  m.params = Vector::Zero(static_cast<Eigen::Index>(m.spec.param_count()));
  return m;
}

std::string RewardModel::digest() const { return s3rr::digest(to_json(*this).dump()); }

RewardFn as_reward_fn(const Env& env, const RewardModel& model) {
  return [&env, &model](const Vector& s, const Vector& a) { return model.value(env, s, a); };
}

RewardFn ground_truth(const Env& env) {
  return [&env](const Vector& s, const Vector& a) { return env.reward(s, a); };
}

}  // namespace s3rr
