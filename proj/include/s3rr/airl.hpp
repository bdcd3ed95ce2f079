#pragma once

#include <optional>
#include <vector>

#include "s3rr/rl.hpp"

namespace s3rr {

struct AirlConfig {
  std::optional<int> demo_subset_size;  // unset: all demos
  int disc_layers = 2;
  int disc_width = 4;
  int policy_layers = 2;
  int policy_width = 4;
  double lambda = 0.0;  // policy L1 weight
  int outer_iterations = 60;
  int disc_steps_per_iter = 5;
  int disc_batch = 64;
  double disc_step_size = 1e-2;
  int policy_iters_per_outer = 2;
  // Policy burst settings; its network shape and sparsity weight are taken
  // from the fields above.
  RLConfig rl;

  void validate(std::size_t available_demos) const;
  RLConfig burst_config() const;
};

struct AirlLogEntry {
  int iteration = 0;
  double bce = 0.0;
  double accuracy = 0.0;     // D > 1/2 on demo pairs, D < 1/2 on policy pairs
  double policy_return = 0.0;  // mean discounted f-return of the last burst
};

struct AirlResult {
  RewardModel reward_model;  // f_theta, the initial reward estimate
  StochasticPolicy policy;
  std::vector<AirlLogEntry> log;
};

struct StateAction {
  Vector state;
  Vector action;
};

std::vector<StateAction> state_action_pairs(const std::vector<Trajectory>& trajectories);

// D = e^f / (e^f + pi) evaluated as sigmoid(f - log pi).
double discriminator_value(double f_value, double log_pi);

struct DiscriminatorLoss {
  double bce = 0.0;
  Vector gradient;  // with respect to the reward model parameters
};

// -mean log D over demo pairs - mean log(1 - D) over policy pairs.
DiscriminatorLoss discriminator_loss(const Env& env, const std::vector<StateAction>& demo_batch,
                                     const std::vector<StateAction>& policy_batch,
                                     const RewardModel& reward_model,
                                     const StochasticPolicy& policy);

// Seeded subset of size k: first k after a seeded shuffle.
std::vector<Trajectory> demo_subset(const std::vector<Trajectory>& demos, int k, std::uint64_t seed);

AirlResult train_airl(const Env& env, const std::vector<Trajectory>& demos,
                      const AirlConfig& config, std::uint64_t seed);

// initial_rewards[t] = f(s_t, a_t); other fields unchanged.
Trajectory score_trajectory(const Env& env, const RewardModel& reward_model, Trajectory trajectory);

std::string airl_log_csv(const std::vector<AirlLogEntry>& log);

}  // namespace s3rr
