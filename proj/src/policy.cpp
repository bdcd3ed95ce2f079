#include "s3rr/policy.hpp"

#include <cmath>
#include <numbers>

namespace s3rr {

namespace {

constexpr double half_log_2pi = 0.91893853320467274178;

Vector log_softmax(const Vector& z) {
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return (z.array() - lse).matrix();
}

}  // namespace

StochasticPolicy::StochasticPolicy(ApproximatorSpec spec, Head head, SpaceSpec action_space,
                                   Vector net_params, Vector log_std)
    : spec_(spec),
      head_(head),
      action_space_(std::move(action_space)),
      net_(std::move(net_params)),
      log_std_(std::move(log_std)) {
  spec_.validate();
  action_space_.validate();
  if (static_cast<std::size_t>(net_.size()) != spec_.param_count())
    throw ValidationError("policy: parameter vector does not match spec");
  if (head_ == Head::categorical) {
    if (!action_space_.is_discrete() || spec_.output_dim != action_space_.cardinality)
      throw ValidationError("categorical head needs output_dim = action cardinality");
    log_std_.resize(0);
  } else {
    if (action_space_.is_discrete() || spec_.output_dim != action_space_.dim)
      throw ValidationError("gaussian head needs output_dim = action dim");
    if (log_std_.size() != action_space_.dim)
      throw ValidationError("gaussian head needs one log-std per action dim");
    log_std_ = log_std_.cwiseMax(min_log_std);
  }
}

StochasticPolicy StochasticPolicy::make(const Env& env, int hidden_layers, int hidden_width,
                                        Rng& rng, double init_log_std) {
  const auto& as = env.spec().action_space;
  ApproximatorSpec spec;
  spec.input_dim = static_cast<int>(env.observe(env.spec().state_space.lo).size());
  spec.hidden_layers = hidden_layers;
  spec.hidden_width = hidden_width;
  if (as.is_discrete()) {
    spec.output_dim = as.cardinality;
    spec.output = ApproximatorSpec::Output::logits;
    return StochasticPolicy(spec, Head::categorical, as, init_params(spec, rng));
  }
  spec.output_dim = as.dim;
  return StochasticPolicy(spec, Head::gaussian, as, init_params(spec, rng),
                          Vector::Constant(as.dim, init_log_std));
}

Vector StochasticPolicy::flat() const {
  Vector phi(size());
  phi << net_, log_std_;
  return phi;
}

void StochasticPolicy::set_flat(const Vector& phi) {
  if (phi.size() != size()) throw Error("policy: flat parameter vector has wrong length");
  if (!phi.allFinite()) throw DivergenceError("policy: non-finite parameters");
  net_ = phi.head(net_.size());
  log_std_ = phi.tail(log_std_.size()).cwiseMax(min_log_std);
  if (log_std_.size() > 0)
    log_std_ = log_std_.cwiseMin((action_space_.hi - action_space_.lo).array().log().matrix());
}

Vector StochasticPolicy::squash(const Vector& z) const {
  const Vector half = 0.5 * (action_space_.hi - action_space_.lo);
  const Vector mid = 0.5 * (action_space_.hi + action_space_.lo);
  return mid + half.cwiseProduct(z.array().tanh().matrix());
}

Vector StochasticPolicy::mean(const Vector& obs) const {
  if (head_ != Head::gaussian) throw Error("mean: gaussian head only");
  return squash(head_output(obs));
}

Vector StochasticPolicy::probabilities(const Vector& obs) const {
  if (head_ != Head::categorical) throw Error("probabilities: categorical head only");
  return log_softmax(head_output(obs)).array().exp().matrix();
}

Vector StochasticPolicy::sample_raw(const Vector& obs, Rng& rng) const {
  const Vector out = head_output(obs);
  if (head_ == Head::categorical) {
    const Vector p = log_softmax(out).array().exp().matrix();
    const double u = rng.uniform();
    double acc = 0.0;
    Eigen::Index pick = p.size() - 1;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      acc += p[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    return Vector::Constant(1, static_cast<double>(pick));
  }
  const Vector mu = squash(out);
  Vector a(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) a[i] = mu[i] + std::exp(log_std_[i]) * rng.normal();
  return a;
}

double StochasticPolicy::log_density(const Vector& obs, const Vector& action) const {
  const Vector out = head_output(obs);
  if (head_ == Head::categorical) return log_softmax(out)[static_cast<Eigen::Index>(action[0])];
  const Vector mu = squash(out);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double u = (action[i] - mu[i]) * std::exp(-log_std_[i]);
    lp += -0.5 * u * u - log_std_[i] - half_log_2pi;
  }
  return lp;
}

double StochasticPolicy::entropy(const Vector& obs) const {
  if (head_ == Head::categorical) {
    const Vector lp = log_softmax(head_output(obs));
    return -(lp.array().exp() * lp.array()).sum();
  }
  return log_std_.size() * (half_log_2pi + 0.5) + log_std_.sum();
}

void StochasticPolicy::accumulate_score(const Vector& obs, const Vector& action, double w_logp,
                                        double w_entropy, Eigen::Ref<Vector> out) const {
  if (out.size() != size()) throw Error("accumulate_score: buffer has wrong length");
  const Vector z = head_output(obs);
  Vector upstream(z.size());
  if (head_ == Head::categorical) {
    const Vector lp = log_softmax(z);
    const Vector p = lp.array().exp().matrix();
    const double h = -(p.array() * lp.array()).sum();
    upstream = -w_logp * p;
    upstream[static_cast<Eigen::Index>(action[0])] += w_logp;
    if (w_entropy != 0.0) upstream.array() -= w_entropy * p.array() * (lp.array() + h);
  } else {
    const Vector inv_var = (-2.0 * log_std_).array().exp().matrix();
    const Vector th = z.array().tanh().matrix();
    const Vector half = 0.5 * (action_space_.hi - action_space_.lo);
    const Vector diff = action - squash(z);
    upstream = w_logp * diff.cwiseProduct(inv_var).cwiseProduct(half).cwiseProduct(
                            (1.0 - th.array().square()).matrix());
    auto tail = out.tail(log_std_.size());
    tail.array() += w_logp * (diff.array().square() * inv_var.array() - 1.0) + w_entropy;
  }
  if (w_logp != 0.0 || w_entropy != 0.0)
    accumulate_gradient<double>(spec_, net_, obs, upstream, out.head(net_.size()));
}

Vector StochasticPolicy::grad_log_density(const Vector& obs, const Vector& action) const {
  Vector g = Vector::Zero(size());
  accumulate_score(obs, action, 1.0, 0.0, g);
  return g;
}

Vector StochasticPolicy::grad_entropy(const Vector& obs) const {
  Vector g = Vector::Zero(size());
  const Vector action = Vector::Zero(action_space_.value_dim());
  accumulate_score(obs, action, 0.0, 1.0, g);
  return g;
}

bool operator==(const StochasticPolicy& a, const StochasticPolicy& b) {
  return a.spec() == b.spec() && a.head() == b.head() && a.action_space() == b.action_space() &&
         same_values(a.net_params(), b.net_params()) && same_values(a.log_std(), b.log_std());
}

namespace {

Vector uniform_action(const SpaceSpec& space, Rng& rng) {
  if (space.is_discrete())
    return Vector::Constant(1, static_cast<double>(rng.uniform_index(space.cardinality)));
  Vector a(space.dim);
  for (int i = 0; i < space.dim; ++i) a[i] = rng.uniform(space.lo[i], space.hi[i]);
  return a;
}

double log_uniform_density(const SpaceSpec& space, const Vector& action) {
  if (space.is_discrete()) return -std::log(static_cast<double>(space.cardinality));
  if (!space.contains(action)) return -std::numeric_limits<double>::infinity();
  return -(space.hi - space.lo).array().log().sum();
}

}  // namespace

Vector mixture_sample(const StochasticPolicy& policy, double eta, const Vector& obs, Rng& rng) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("mixture_sample: eta out of [0,1]");
  if (eta == 0.0) return policy.sample_raw(obs, rng);
  if (eta == 1.0) return uniform_action(policy.action_space(), rng);
  if (rng.uniform() < eta) return uniform_action(policy.action_space(), rng);
  return policy.sample_raw(obs, rng);
}

double mixture_log_density(const StochasticPolicy& policy, double eta, const Vector& obs,
                           const Vector& action) {
  const double lu = log_uniform_density(policy.action_space(), action);
  if (eta == 1.0) return lu;
  const double lp = policy.log_density(obs, action);
  if (eta == 0.0) return lp;
  const double a = std::log(eta) + lu;
  const double b = std::log1p(-eta) + lp;
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

ActionSampler as_sampler(const Env& env, const StochasticPolicy& policy) {
  return [&env, &policy](const Vector& s, Rng& rng) { return policy.sample_raw(env.observe(s), rng); };
}

ActionSampler as_mixture_sampler(const Env& env, const StochasticPolicy& policy, double eta) {
  return [&env, &policy, eta](const Vector& s, Rng& rng) {
    return mixture_sample(policy, eta, env.observe(s), rng);
  };
}

}  // namespace s3rr
