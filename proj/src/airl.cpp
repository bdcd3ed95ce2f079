#include "s3rr/airl.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "s3rr/parallel.hpp"

namespace s3rr {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

std::vector<StateAction> resample(const std::vector<StateAction>& pool, int n, Rng& rng) {
  std::vector<StateAction> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(pool[rng.uniform_index(pool.size())]);
  return out;
}

}  // namespace

void AirlConfig::validate(std::size_t available_demos) const {
  if (demo_subset_size) {
    if (*demo_subset_size < 1) throw ValidationError("airl.demo_subset_size must be >= 1");
    if (static_cast<std::size_t>(*demo_subset_size) > available_demos)
      throw ValidationError("airl.demo_subset_size exceeds available demos");
  }
  if (!(lambda >= 0.0)) throw ValidationError("airl.lambda must be >= 0");
  if (outer_iterations < 1 || disc_steps_per_iter < 0 || disc_batch < 1 ||
      policy_iters_per_outer < 1)
    throw ValidationError("airl iteration counts must be positive");
  if (disc_layers < 0 || disc_width < 1 || policy_layers < 0 || policy_width < 1)
    throw ValidationError("airl network shapes invalid");
  if (!(disc_step_size > 0.0)) throw ValidationError("airl.disc_step_size must be > 0");
  burst_config().validate();
}

RLConfig AirlConfig::burst_config() const {
  RLConfig c = rl;
  c.policy_layers = policy_layers;
  c.policy_width = policy_width;
  c.sparsity_lambda = lambda;
  c.iterations = policy_iters_per_outer;
  return c;
}

std::vector<StateAction> state_action_pairs(const std::vector<Trajectory>& trajectories) {
  std::vector<StateAction> out;
  for (const auto& t : trajectories)
    for (std::size_t i = 0; i < t.length(); ++i) out.push_back({t.states[i], t.actions[i]});
  return out;
}

double discriminator_value(double f_value, double log_pi) {
  const double x = f_value - log_pi;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

DiscriminatorLoss discriminator_loss(const Env& env, const std::vector<StateAction>& demo_batch,
                                     const std::vector<StateAction>& policy_batch,
                                     const RewardModel& reward_model,
                                     const StochasticPolicy& policy) {
  if (demo_batch.empty() || policy_batch.empty())
    throw Error("discriminator_loss: both batches must be non-empty");
  DiscriminatorLoss out;
  out.gradient = Vector::Zero(reward_model.params.size());
  // d(-log D)/df = -(1 - D); d(-log(1 - D))/df = D.
  auto accumulate = [&](const std::vector<StateAction>& batch, bool demo) {
    const double w = 1.0 / static_cast<double>(batch.size());
    for (const auto& sa : batch) {
      const Vector x = env.encode(sa.state, sa.action);
      const double f = reward_model(x);
      const double lp = policy.log_density(env.observe(sa.state), sa.action);
      const double logit = f - lp;
      const double d = discriminator_value(f, lp);
      out.bce += w * (demo ? softplus(-logit) : softplus(logit));
      const double df = demo ? -(1.0 - d) : d;
      accumulate_gradient<double>(reward_model.spec, reward_model.params, x,
                                  Vector::Constant(1, w * df), out.gradient);
    }
  };
  accumulate(demo_batch, true);
  accumulate(policy_batch, false);
  return out;
}

std::vector<Trajectory> demo_subset(const std::vector<Trajectory>& demos, int k, std::uint64_t seed) {
  if (k < 1 || static_cast<std::size_t>(k) > demos.size())
    throw ValidationError("demo subset size out of range");
  std::vector<std::size_t> idx(demos.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  shuffle(idx.begin(), idx.end(), rng);
  std::vector<Trajectory> out;
  for (int i = 0; i < k; ++i) out.push_back(demos[idx[static_cast<std::size_t>(i)]]);
  return out;
}

AirlResult train_airl(const Env& env, const std::vector<Trajectory>& demos,
                      const AirlConfig& config, std::uint64_t seed) {
  if (demos.empty()) throw Error("train_airl: no demonstrations");
  config.validate(demos.size());
  const std::vector<Trajectory> used =
      config.demo_subset_size ? demo_subset(demos, *config.demo_subset_size, derive_seed(seed, "demo-subset"))
                              : demos;
  const std::vector<StateAction> demo_pairs = state_action_pairs(used);

  Rng init_rng(derive_seed(seed, "airl-init"));
  AirlResult result;
  result.reward_model = RewardModel::make(env, config.disc_layers, config.disc_width, init_rng);
  const RLConfig burst = config.burst_config();
  PolicyTrainer trainer(env,
                        StochasticPolicy::make(env, burst.policy_layers, burst.policy_width,
                                               init_rng, burst.init_log_std),
                        burst, derive_seed(seed, "airl-policy"));
  AdamState<double> disc_adam(result.reward_model.params.size(), config.disc_step_size);
  const RewardFn f = as_reward_fn(env, result.reward_model);

  for (int it = 0; it < config.outer_iterations; ++it) {
    const auto u = static_cast<std::uint64_t>(it);
    const std::vector<StateAction> policy_pairs = state_action_pairs(
        collect_rollouts(env, as_sampler(env, trainer.policy()), burst.rollouts_per_iter,
                         derive_seed(seed, "airl-disc-rollouts", u)));
    Rng batch_rng(derive_seed(seed, "airl-disc-batch", u));
    for (int s = 0; s < config.disc_steps_per_iter; ++s) {
      const auto loss = discriminator_loss(env, resample(demo_pairs, config.disc_batch, batch_rng),
                                           resample(policy_pairs, config.disc_batch, batch_rng),
                                           result.reward_model, trainer.policy());
      try {
        optimizer_step<double>(disc_adam, result.reward_model.params, loss.gradient);
      } catch (const DivergenceError&) {
        throw DivergenceError("airl: discriminator diverged at iteration " + std::to_string(it));
      }
    }

    AirlLogEntry entry;
    entry.iteration = it;
    const auto full = discriminator_loss(env, demo_pairs, policy_pairs, result.reward_model, trainer.policy());
    entry.bce = full.bce;
    std::size_t correct = 0;
    for (const auto& sa : demo_pairs)
      correct += discriminator_value(result.reward_model.value(env, sa.state, sa.action),
                                     trainer.policy().log_density(env.observe(sa.state), sa.action)) > 0.5;
    for (const auto& sa : policy_pairs)
      correct += discriminator_value(result.reward_model.value(env, sa.state, sa.action),
                                     trainer.policy().log_density(env.observe(sa.state), sa.action)) < 0.5;
    entry.accuracy = static_cast<double>(correct) / static_cast<double>(demo_pairs.size() + policy_pairs.size());

    try {
      for (int k = 0; k < config.policy_iters_per_outer; ++k) entry.policy_return = trainer.iterate(f).mean_return;
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string("airl: policy stage: ") + e.what() + " (outer iteration " +
                            std::to_string(it) + ")");
    }
    if (!result.reward_model.params.allFinite())
      throw DivergenceError("airl: discriminator diverged at iteration " + std::to_string(it));
    result.log.push_back(entry);
  }
  result.policy = trainer.policy();
  return result;
}

Trajectory score_trajectory(const Env& env, const RewardModel& reward_model, Trajectory trajectory) {
  trajectory.initial_rewards.resize(trajectory.length());
  for (std::size_t t = 0; t < trajectory.length(); ++t) {
    if (trajectory.states[t].size() != env.spec().state_space.value_dim() ||
        trajectory.actions[t].size() != env.spec().action_space.value_dim())
      throw Error("score_trajectory: dimension mismatch");
    trajectory.initial_rewards[t] = reward_model.value(env, trajectory.states[t], trajectory.actions[t]);
  }
  return trajectory;
}

std::string airl_log_csv(const std::vector<AirlLogEntry>& log) {
  std::ostringstream os;
  os << "iteration,bce,accuracy,policy_return\n";
  for (const auto& e : log)
    os << e.iteration << ',' << format_real(e.bce) << ',' << format_real(e.accuracy) << ','
       << format_real(e.policy_return) << '\n';
  return os.str();
}

}  // namespace s3rr
