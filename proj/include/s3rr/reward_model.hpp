#pragma once

#include <functional>
#include <string>

#include "s3rr/approx.hpp"
#include "s3rr/envs.hpp"

namespace s3rr {

// (state, emitted action) -> reward. Ground truth, the adversarial f and the
// regressed reward all plug in through this.
using RewardFn = std::function<double(const Vector& state, const Vector& action)>;

// Scalar MLP over Env::encode(s, a).
struct RewardModel {
  ApproximatorSpec spec;
  Vector params;

  static RewardModel make(const Env& env, int hidden_layers, int hidden_width, Rng& rng);
  static RewardModel zeros(const Env& env, int hidden_layers, int hidden_width);

  double operator()(const Vector& encoded) const {
    return forward<double>(spec, params, encoded)[0];
  }
  double value(const Env& env, const Vector& state, const Vector& action) const {
    return (*this)(env.encode(state, action));
  }
  // Content hash of spec and parameters.
  std::string digest() const;
};

RewardFn as_reward_fn(const Env& env, const RewardModel& model);
RewardFn ground_truth(const Env& env);

}  // namespace s3rr
