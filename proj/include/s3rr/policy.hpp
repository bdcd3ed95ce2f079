#pragma once

#include "s3rr/approx.hpp"
#include "s3rr/envs.hpp"

namespace s3rr {

// pi(a | s) over an MLP head. Methods take the observation Env::observe(s).
// The flat parameter vector phi is the network parameters followed, for the
// gaussian head, by the state-independent log-std vector.
class StochasticPolicy {
 public:
  enum class Head { categorical, gaussian };

  static constexpr double min_log_std = -6.907755278982137;  // log(1e-3)

  StochasticPolicy() = default;
  StochasticPolicy(ApproximatorSpec spec, Head head, SpaceSpec action_space, Vector net_params,
                   Vector log_std = {});

  // Head chosen from the env's action space; network uniformly initialized.
  static StochasticPolicy make(const Env& env, int hidden_layers, int hidden_width, Rng& rng,
                               double init_log_std = std::log(0.5));

  const ApproximatorSpec& spec() const { return spec_; }
  Head head() const { return head_; }
  const SpaceSpec& action_space() const { return action_space_; }
  const Vector& net_params() const { return net_; }
  const Vector& log_std() const { return log_std_; }

  Eigen::Index size() const { return net_.size() + log_std_.size(); }
  Eigen::Index network_size() const { return net_.size(); }
  Vector flat() const;
  // Log-std entries are kept in [log(1e-3), log(action box width)].
  void set_flat(const Vector& phi);

  // Logits (categorical) or the pre-squash mean (gaussian).
  Vector head_output(const Vector& obs) const { return forward<double>(spec_, net_, obs); }
  // Gaussian mean mid + half * tanh(head_output), inside the action box.
  Vector mean(const Vector& obs) const;

  // Pre-clip draw; this is what rollouts record.
  Vector sample_raw(const Vector& obs, Rng& rng) const;
  // Draw mapped into the action space.
  Vector sample(const Vector& obs, Rng& rng) const { return action_space_.clip(sample_raw(obs, rng)); }

  double log_density(const Vector& obs, const Vector& action) const;
  double entropy(const Vector& obs) const;
  // Categorical only.
  Vector probabilities(const Vector& obs) const;

  // out += w_logp * d log pi(a|s)/d phi + w_entropy * d H(pi(.|s))/d phi.
  void accumulate_score(const Vector& obs, const Vector& action, double w_logp, double w_entropy,
                        Eigen::Ref<Vector> out) const;

  Vector grad_log_density(const Vector& obs, const Vector& action) const;
  Vector grad_entropy(const Vector& obs) const;

 private:
  Vector squash(const Vector& z) const;

  ApproximatorSpec spec_;
  Head head_ = Head::categorical;
  SpaceSpec action_space_;
  Vector net_;
  Vector log_std_;
};

bool operator==(const StochasticPolicy& a, const StochasticPolicy& b);

// Mixture pi_eta = eta U(a) + (1 - eta) pi(a|s). At eta = 0 the draw consumes the
// RNG exactly like pi; at eta = 1 exactly like uniform_random.
Vector mixture_sample(const StochasticPolicy& policy, double eta, const Vector& obs, Rng& rng);

// Log density of the mixture (uniform over the action box for continuous spaces).
double mixture_log_density(const StochasticPolicy& policy, double eta, const Vector& obs,
                           const Vector& action);

// Adapters from a policy to an env-level sampler (applies Env::observe).
ActionSampler as_sampler(const Env& env, const StochasticPolicy& policy);
ActionSampler as_mixture_sampler(const Env& env, const StochasticPolicy& policy, double eta);

}  // namespace s3rr
