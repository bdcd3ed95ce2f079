#include "s3rr/rl.hpp"

#include <cmath>
#include <sstream>

#include "s3rr/parallel.hpp"

namespace s3rr {

void RLConfig::validate() const {
  if (iterations < 1) throw ValidationError("rl.iterations must be >= 1");
  if (rollouts_per_iter < 1) throw ValidationError("rl.rollouts_per_iter must be >= 1");
  if (!(alpha >= 0.0)) throw ValidationError("rl.alpha must be >= 0");
  if (!(sparsity_lambda >= 0.0)) throw ValidationError("rl.sparsity_lambda must be >= 0");
  if (gamma && !(*gamma >= 0.0 && *gamma <= 1.0)) throw ValidationError("rl.gamma must be in [0,1]");
  if (!(step_size > 0.0)) throw ValidationError("rl.step_size must be > 0");
  if (policy_layers < 0 || policy_width < 1) throw ValidationError("rl policy network shape invalid");
}

// --- value baseline --------------------------------------------------------

ValueBaseline::ValueBaseline(const Env& env, int hidden_width, double step_size, std::uint64_t seed)
    : horizon_(env.spec().horizon) {
  spec_.input_dim = static_cast<int>(env.observe(env.spec().state_space.lo).size()) + 1;
  spec_.output_dim = 1;
  spec_.hidden_layers = 1;
  spec_.hidden_width = hidden_width;
  Rng rng(seed);
  params_ = init_params(spec_, rng);
  params_.tail(1).setZero();
  adam_ = AdamState<double>(params_.size(), step_size);
}

Vector ValueBaseline::input(const Vector& obs, int t) const {
  Vector x(obs.size() + 1);
  x << obs, static_cast<double>(t) / horizon_;
  return x;
}

double ValueBaseline::operator()(const Vector& obs, int t) const {
  return forward<double>(spec_, params_, input(obs, t))[0];
}

void ValueBaseline::fit(const std::vector<std::pair<Vector, double>>& data, int steps) {
  if (data.empty()) return;
  for (int s = 0; s < steps; ++s) {
    Vector g = Vector::Zero(params_.size());
    for (const auto& [x, target] : data) {
      const double err = forward<double>(spec_, params_, x)[0] - target;
      accumulate_gradient<double>(spec_, params_, x, Vector::Constant(1, 2.0 * err), g);
    }
    g /= static_cast<double>(data.size());
    optimizer_step<double>(adam_, params_, g);
  }
}

// --- estimator -------------------------------------------------------------

GradientEstimate policy_gradient_estimate(const Env& env, const std::vector<Trajectory>& batch,
                                          const StochasticPolicy& policy, const RewardFn& reward,
                                          const RLConfig& config, const ValueBaseline* value) {
  if (batch.empty()) throw Error("policy_gradient_estimate: empty batch");
  const double gamma = config.gamma.value_or(env.spec().gamma);
  const double alpha = config.alpha;
  const std::size_t n = batch.size();

  // Per-step observations, entropies and entropy-augmented reward-to-go.
  std::vector<std::vector<Vector>> obs(n);
  std::vector<std::vector<double>> togo(n);
  std::vector<double> returns(n, 0.0), entropy_sum(n, 0.0);
  std::vector<std::size_t> steps(n, 0);
  parallel_for(n, [&](std::size_t i) {
    const auto& tr = batch[i];
    const std::size_t T = tr.length();
    obs[i].resize(T);
    togo[i].assign(T, 0.0);
    std::vector<double> bonus(T);
    double discount = 1.0;
    for (std::size_t t = 0; t < T; ++t) {
      obs[i][t] = env.observe(tr.states[t]);
      const double r = reward(tr.states[t], tr.actions[t]);
      if (!std::isfinite(r)) throw Error("policy_gradient_estimate: non-finite reward");
      const double h = alpha > 0.0 ? policy.entropy(obs[i][t]) : 0.0;
      entropy_sum[i] += alpha > 0.0 ? h : policy.entropy(obs[i][t]);
      returns[i] += discount * r;
      discount *= gamma;
      bonus[t] = r + alpha * h;
    }
    double acc = 0.0;
    for (std::size_t t = T; t-- > 0;) {
      acc = bonus[t] + gamma * acc;
      togo[i][t] = acc;
    }
    steps[i] = T;
  });

  std::size_t max_t = 0;
  for (auto s : steps) max_t = std::max(max_t, s);
  std::vector<double> sum_at(max_t, 0.0);
  std::vector<int> count_at(max_t, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < steps[i]; ++t) {
      sum_at[t] += togo[i][t];
      ++count_at[t];
    }

  std::vector<Vector> per_traj(n);
  parallel_for(n, [&](std::size_t i) {
    Vector g = Vector::Zero(policy.size());
    double discount = 1.0;
    for (std::size_t t = 0; t < steps[i]; ++t) {
      double baseline = 0.0;
      if (value) {
        baseline = (*value)(obs[i][t], static_cast<int>(t));
      } else if (count_at[t] > 1) {
        baseline = (sum_at[t] - togo[i][t]) / (count_at[t] - 1);
      }
      const double adv = togo[i][t] - baseline;
      policy.accumulate_score(obs[i][t], batch[i].actions[t], discount * adv, discount * alpha, g);
      discount *= gamma;
    }
    per_traj[i] = std::move(g);
  });

  GradientEstimate out;
  out.gradient = Vector::Zero(policy.size());
  std::size_t total_steps = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.gradient += per_traj[i];
    out.mean_return += returns[i];
    out.mean_entropy += entropy_sum[i];
    total_steps += steps[i];
  }
  out.gradient /= static_cast<double>(n);
  out.mean_return /= static_cast<double>(n);
  out.mean_entropy /= static_cast<double>(std::max<std::size_t>(total_steps, 1));
  if (config.sparsity_lambda > 0.0) {
    const auto pen = l1_penalty(policy.net_params());
    out.gradient.head(policy.network_size()) -= config.sparsity_lambda * pen.subgradient;
  }
  return out;
}

std::vector<Trajectory> collect_rollouts(const Env& env, const ActionSampler& sampler, int n,
                                         std::uint64_t seed) {
  std::vector<Trajectory> out(static_cast<std::size_t>(n));
  parallel_for(out.size(), [&](std::size_t j) {
    Rng rng(derive_seed(seed, "rollout", j));
    out[j] = rollout(env, sampler, rng);
  });
  return out;
}

// --- trainer ---------------------------------------------------------------

PolicyTrainer::PolicyTrainer(const Env& env, StochasticPolicy initial, RLConfig config,
                             std::uint64_t seed)
    : env_(env), policy_(std::move(initial)), config_(config), seed_(seed) {
  config_.validate();
  adam_ = AdamState<double>(policy_.size(), config_.step_size);
  if (config_.baseline == RLConfig::Baseline::learned_value)
    value_.emplace(env_, 16, config_.value_step_size, derive_seed(seed_, "value-init"));
}

CurvePoint PolicyTrainer::iterate(const RewardFn& reward) {
  const int it = iteration_;
  last_batch_ = collect_rollouts(env_, as_sampler(env_, policy_), config_.rollouts_per_iter,
                                 derive_seed(seed_, "rl-iteration", static_cast<std::uint64_t>(it)));
  const GradientEstimate est = policy_gradient_estimate(env_, last_batch_, policy_, reward, config_,
                                                        value_ ? &*value_ : nullptr);
  CurvePoint point{it, est.mean_return, est.mean_entropy, policy_.net_params().lpNorm<1>()};

  if (value_) {
    const double gamma = config_.gamma.value_or(env_.spec().gamma);
    std::vector<std::pair<Vector, double>> data;
    for (const auto& tr : last_batch_) {
      double acc = 0.0;
      std::vector<double> togo(tr.length());
      for (std::size_t t = tr.length(); t-- > 0;) {
        const Vector obs = env_.observe(tr.states[t]);
        const double h = config_.alpha > 0.0 ? policy_.entropy(obs) : 0.0;
        acc = reward(tr.states[t], tr.actions[t]) + config_.alpha * h + gamma * acc;
        togo[t] = acc;
      }
      for (std::size_t t = 0; t < tr.length(); ++t) {
        Vector x(env_.observe(tr.states[t]).size() + 1);
        x << env_.observe(tr.states[t]), static_cast<double>(t) / env_.spec().horizon;
        data.emplace_back(std::move(x), togo[t]);
      }
    }
    value_->fit(data, config_.value_steps);
  }

  Vector phi = policy_.flat();
  try {
    // Ascent on the objective is descent on its negation.
    optimizer_step<double>(adam_, phi, -est.gradient);
    policy_.set_flat(phi);
  } catch (const DivergenceError&) {
    throw DivergenceError("policy training diverged at iteration " + std::to_string(it));
  }
  curve_.push_back(point);
  ++iteration_;
  return point;
}

TrainResult train_policy(const Env& env, const RewardFn& reward, const RLConfig& config,
                         std::uint64_t seed, StochasticPolicy initial) {
  PolicyTrainer trainer(env, std::move(initial), config, seed);
  for (int i = 0; i < config.iterations; ++i) trainer.iterate(reward);
  return {trainer.policy(), trainer.curve()};
}

TrainResult train_policy(const Env& env, const RewardFn& reward, const RLConfig& config,
                         std::uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, "policy-init"));
  return train_policy(env, reward, config, seed,
                      StochasticPolicy::make(env, config.policy_layers, config.policy_width, rng,
                                             config.init_log_std));
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream os;
  os << "iteration,mean_return,entropy,l1_norm\n";
  for (const auto& p : curve)
    os << p.iteration << ',' << format_real(p.mean_return) << ',' << format_real(p.entropy) << ','
       << format_real(p.l1_norm) << '\n';
  return os.str();
}

}  // namespace s3rr
