#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "s3rr/core.hpp"
#include "s3rr/rng.hpp"

namespace s3rr {

struct EnvSpec {
  std::string id;
  SpaceSpec state_space;
  SpaceSpec action_space;
  int horizon = 1;
  double gamma = 1.0;
  double alpha = 0.0;  // default entropy weight for this env

  void validate() const;
};

struct EnvState {
  Vector vector;
  int step_index = 0;
  bool done = false;
};

struct StepResult {
  EnvState next;
  double gt_reward;
  bool done;
};

// A policy as the environment sees it: state -> action, drawing from rng.
using ActionSampler = std::function<Vector(const Vector& state, Rng& rng)>;

class Env {
 public:
  explicit Env(EnvSpec spec) : spec_(std::move(spec)) { spec_.validate(); }
  virtual ~Env() = default;

  const EnvSpec& spec() const { return spec_; }

  virtual EnvState reset(Rng& rng) const = 0;

  // Continuous actions are clipped to the action box before use. Throws on a
  // step taken from a done state.
  StepResult step(const EnvState& state, const Vector& action) const;

  // Ground-truth reward R(s, a) at the pre-step state.
  virtual double reward(const Vector& state, const Vector& action) const = 0;

  // Features a function approximator sees for a state.
  virtual Vector observe(const Vector& state) const { return state; }

  // Input vector for (s, a) models: observe(s) followed by the recorded action
  // (continuous) or a one-hot action (discrete).
  Vector encode(const Vector& state, const Vector& action) const;
  int encoded_dim() const;

 protected:
  virtual Vector transition(const Vector& state, const Vector& action) const = 0;
  // Acting from an absorbing state ends the episode.
  virtual bool absorbing(const Vector&) const { return false; }

 private:
  EnvSpec spec_;
};

using EnvPtr = std::shared_ptr<const Env>;

// x' = x + 0.1 a, reward -(x - g)^2 - 0.01 a^2, x0 ~ Uniform(start_lo, start_hi).
class Reach1D final : public Env {
 public:
  struct Params {
    double goal = 1.0;
    double start_lo = -0.1;
    double start_hi = 0.1;  // start_lo == start_hi gives a point mass
    int horizon = 50;
    double gamma = 0.99;
  };

  Reach1D() : Reach1D(Params{}) {}
  explicit Reach1D(Params p);

  EnvState reset(Rng& rng) const override;
  double reward(const Vector& state, const Vector& action) const override;
  const Params& params() const { return p_; }

 protected:
  Vector transition(const Vector& state, const Vector& action) const override;

 private:
  Params p_;
};

// 5x5 grid, start (0,0), absorbing goal (4,4). Actions 0..3 = up, right, down,
// left; moves off the grid leave the agent in place. Reward is +10 when acting
// from the goal (which ends the episode) and -1 otherwise.
class Grid5 final : public Env {
 public:
  enum Move { up = 0, right = 1, down = 2, left = 3 };
  static constexpr int size = 5;

  Grid5();

  EnvState reset(Rng& rng) const override;
  double reward(const Vector& state, const Vector& action) const override;
  Vector observe(const Vector& state) const override;

  static Vector cell(int row, int col);
  static bool is_goal(const Vector& state);

 protected:
  Vector transition(const Vector& state, const Vector& action) const override;
  bool absorbing(const Vector& state) const override { return is_goal(state); }
};

// Single-state, horizon-1 multi-armed bandit with fixed arm rewards.
class Bandit final : public Env {
 public:
  explicit Bandit(std::vector<double> arm_rewards);

  EnvState reset(Rng& rng) const override;
  double reward(const Vector& state, const Vector& action) const override;
  const std::vector<double>& arm_rewards() const { return rewards_; }

 protected:
  Vector transition(const Vector& state, const Vector& action) const override;

 private:
  std::vector<double> rewards_;
};

// "reach1d", "grid5" or "bandit2".
EnvPtr make_env(const std::string& id);

// States, emitted actions and discounted gt_return; initial_rewards empty.
Trajectory rollout(const Env& env, const ActionSampler& policy, Rng& rng);

// Per-step ground-truth rewards alongside a trajectory.
struct Rollout {
  Trajectory trajectory;
  std::vector<double> gt_rewards;
};
Rollout rollout_detailed(const Env& env, const ActionSampler& policy, Rng& rng);

struct DemonstratorSpec {
  enum class Kind { noisy_proportional, epsilon_suboptimal };
  Kind kind = Kind::noisy_proportional;
  double gain = 2.0;     // kappa
  double noise = 0.3;    // sigma_d
  double epsilon = 0.3;  // discrete

  void validate() const;
};

// Near-optimal scripted controllers: clip(10 (g - x)) on Reach1D, a shortest
// path (right, then down) on Grid5, the best arm on a bandit.
ActionSampler scripted_optimal(const Env& env);
ActionSampler uniform_random(const Env& env);
ActionSampler demonstrator(const Env& env, const DemonstratorSpec& spec);

struct DemoSet {
  std::vector<Trajectory> trajectories;
  double demo_mean = 0.0;
  double optimal_mean = 0.0;
  double random_mean = 0.0;
  std::optional<std::string> warning;  // set when the suboptimality sandwich fails
};

// Rollout i uses derive_seed(seed, "demo", i); the sandwich reference policies
// use their own streams.
DemoSet make_demonstrations(const Env& env, const DemonstratorSpec& spec, int n,
                            std::uint64_t seed);

}  // namespace s3rr
