#pragma once

#include <optional>
#include <vector>

#include "s3rr/policy.hpp"
#include "s3rr/reward_model.hpp"

namespace s3rr {

struct RLConfig {
  enum class Baseline { mean_return, learned_value };

  int iterations = 200;
  int rollouts_per_iter = 16;
  double alpha = 0.01;  // entropy weight
  std::optional<double> gamma;  // defaults to the env's
  Baseline baseline = Baseline::mean_return;
  double step_size = 1e-2;
  double value_step_size = 1e-2;
  int value_steps = 10;
  double sparsity_lambda = 0.0;  // L1 weight on the policy network parameters
  int policy_layers = 1;
  int policy_width = 8;
  double init_log_std = -0.6931471805599453;  // log(0.5)

  void validate() const;
};

struct CurvePoint {
  int iteration = 0;
  double mean_return = 0.0;  // discounted, under the reward being optimized
  double entropy = 0.0;      // mean per-step policy entropy over the batch
  double l1_norm = 0.0;      // of the policy network parameters
};

// Value baseline V(observe(s), t / horizon) fitted to reward-to-go.
class ValueBaseline {
 public:
  ValueBaseline(const Env& env, int hidden_width, double step_size, std::uint64_t seed);
  double operator()(const Vector& obs, int t) const;
  void fit(const std::vector<std::pair<Vector, double>>& inputs_and_targets, int steps);

 private:
  Vector input(const Vector& obs, int t) const;

  int horizon_;
  ApproximatorSpec spec_;
  Vector params_;
  AdamState<double> adam_;
};

struct GradientEstimate {
  Vector gradient;  // ascent direction on the policy's flat parameters
  double mean_return = 0.0;
  double mean_entropy = 0.0;
};

// REINFORCE with baseline for E[sum_t gamma^t (R + alpha H)] - lambda ||phi_net||_1.
// Entropy enters both as a per-step bonus in the reward-to-go and through its
// exact gradient at each visited state. The mean-return baseline is the
// leave-one-out mean of the reward-to-go at the same time index.
GradientEstimate policy_gradient_estimate(const Env& env, const std::vector<Trajectory>& batch,
                                          const StochasticPolicy& policy, const RewardFn& reward,
                                          const RLConfig& config,
                                          const ValueBaseline* value = nullptr);

// Stateful trainer so adversarial training can interleave policy bursts with
// discriminator updates without resetting optimizer moments.
class PolicyTrainer {
 public:
  PolicyTrainer(const Env& env, StochasticPolicy initial, RLConfig config, std::uint64_t seed);

  // One collect-estimate-update cycle; returns the batch statistics.
  CurvePoint iterate(const RewardFn& reward);
  // Batch collected by the most recent iterate().
  const std::vector<Trajectory>& last_batch() const { return last_batch_; }

  const StochasticPolicy& policy() const { return policy_; }
  const std::vector<CurvePoint>& curve() const { return curve_; }
  const RLConfig& config() const { return config_; }
  int iteration() const { return iteration_; }

 private:
  const Env& env_;
  StochasticPolicy policy_;
  RLConfig config_;
  std::uint64_t seed_;
  AdamState<double> adam_;
  std::optional<ValueBaseline> value_;
  std::vector<CurvePoint> curve_;
  std::vector<Trajectory> last_batch_;
  int iteration_ = 0;
};

struct TrainResult {
  StochasticPolicy policy;
  std::vector<CurvePoint> curve;
};

TrainResult train_policy(const Env& env, const RewardFn& reward, const RLConfig& config,
                         std::uint64_t seed);
TrainResult train_policy(const Env& env, const RewardFn& reward, const RLConfig& config,
                         std::uint64_t seed, StochasticPolicy initial);

// On-policy batch: rollout j uses derive_seed(seed, "rollout", j).
std::vector<Trajectory> collect_rollouts(const Env& env, const ActionSampler& sampler, int n,
                                         std::uint64_t seed);

// CSV with header iteration,mean_return,entropy,l1_norm.
std::string curve_csv(const std::vector<CurvePoint>& curve);

}  // namespace s3rr
