#include "s3rr/envs.hpp"

#include <algorithm>
#include <cmath>

namespace s3rr {

void EnvSpec::validate() const {
  state_space.validate();
  action_space.validate();
  if (horizon < 1) throw ValidationError("env horizon must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("env gamma must be in [0,1]");
  if (!(alpha >= 0.0)) throw ValidationError("env alpha must be >= 0");
}

StepResult Env::step(const EnvState& state, const Vector& action) const {
  if (state.done || state.step_index >= spec_.horizon)
    throw Error("step called on a finished episode");
  if (!action.allFinite()) throw Error("step: non-finite action");
  if (spec_.action_space.is_discrete() && !spec_.action_space.contains(action))
    throw Error("step: discrete action out of range");
  const double r = reward(state.vector, action);
  StepResult out;
  out.gt_reward = r;
  out.next.step_index = state.step_index + 1;
  if (absorbing(state.vector)) {
    out.next.vector = state.vector;
    out.done = true;
  } else {
    out.next.vector = transition(state.vector, spec_.action_space.clip(action));
    out.done = out.next.step_index >= spec_.horizon;
  }
  out.next.done = out.done;
  return out;
}

Vector Env::encode(const Vector& state, const Vector& action) const {
  const Vector obs = observe(state);
  const auto& as = spec_.action_space;
  Vector x(encoded_dim());
  x.head(obs.size()) = obs;
  if (as.is_discrete()) {
    x.tail(as.cardinality).setZero();
    x[obs.size() + static_cast<Eigen::Index>(action[0])] = 1.0;
  } else {
    x.tail(as.dim) = action;
  }
  return x;
}

int Env::encoded_dim() const {
  const auto& as = spec_.action_space;
  const int obs = static_cast<int>(observe(spec_.state_space.is_discrete()
                                               ? Vector::Zero(1)
                                               : Vector(spec_.state_space.lo))
                                       .size());
  return obs + (as.is_discrete() ? as.cardinality : as.dim);
}

// --- Reach1D ---------------------------------------------------------------

namespace {

EnvSpec reach_spec(const Reach1D::Params& p) {
  EnvSpec s;
  s.id = "reach1d";
  s.state_space = SpaceSpec::box(Vector::Constant(1, -6.0), Vector::Constant(1, 6.0));
  s.action_space = SpaceSpec::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
  s.horizon = p.horizon;
  s.gamma = p.gamma;
  s.alpha = 0.01;
  return s;
}

EnvSpec grid_spec() {
  EnvSpec s;
  s.id = "grid5";
  s.state_space = SpaceSpec::box(Vector::Zero(2), Vector::Constant(2, Grid5::size - 1));
  s.action_space = SpaceSpec::finite(4);
  s.horizon = 25;
  s.gamma = 0.95;
  s.alpha = 0.05;
  return s;
}

EnvSpec bandit_spec(int arms) {
  EnvSpec s;
  s.id = "bandit" + std::to_string(arms);
  s.state_space = SpaceSpec::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
  s.action_space = SpaceSpec::finite(arms);
  s.horizon = 1;
  s.gamma = 1.0;
  s.alpha = 0.0;
  return s;
}

}  // namespace

Reach1D::Reach1D(Params p) : Env(reach_spec(p)), p_(p) {
  if (p_.start_lo > p_.start_hi) throw ValidationError("reach1d: start_lo > start_hi");
}

EnvState Reach1D::reset(Rng& rng) const {
  EnvState s;
  const double x = (p_.start_lo == p_.start_hi) ? p_.start_lo : rng.uniform(p_.start_lo, p_.start_hi);
  s.vector = Vector::Constant(1, x);
  return s;
}

double Reach1D::reward(const Vector& state, const Vector& action) const {
  const double a = spec().action_space.clip(action)[0];
  const double d = state[0] - p_.goal;
  return -d * d - 0.01 * a * a;
}

Vector Reach1D::transition(const Vector& state, const Vector& action) const {
  return Vector::Constant(1, state[0] + 0.1 * action[0]);
}

// --- Grid5 -----------------------------------------------------------------

Grid5::Grid5() : Env(grid_spec()) {}

Vector Grid5::cell(int row, int col) {
  Vector v(2);
  v << row, col;
  return v;
}

bool Grid5::is_goal(const Vector& state) {
  return state[0] == size - 1 && state[1] == size - 1;
}

EnvState Grid5::reset(Rng&) const {
  EnvState s;
  s.vector = cell(0, 0);
  return s;
}

double Grid5::reward(const Vector& state, const Vector&) const {
  return is_goal(state) ? 10.0 : -1.0;
}

Vector Grid5::observe(const Vector& state) const { return state / (size - 1); }

Vector Grid5::transition(const Vector& state, const Vector& action) const {
  int row = static_cast<int>(state[0]);
  int col = static_cast<int>(state[1]);
  switch (static_cast<int>(action[0])) {
    case up: row -= 1; break;
    case right: col += 1; break;
    case down: row += 1; break;
    case left: col -= 1; break;
    default: throw Error("grid5: invalid action");
  }
  if (row < 0 || row >= size || col < 0 || col >= size) return state;
  return cell(row, col);
}

// --- Bandit ----------------------------------------------------------------

Bandit::Bandit(std::vector<double> arm_rewards)
    : Env(bandit_spec(static_cast<int>(arm_rewards.size()))), rewards_(std::move(arm_rewards)) {}

EnvState Bandit::reset(Rng&) const {
  EnvState s;
  s.vector = Vector::Zero(1);
  return s;
}

double Bandit::reward(const Vector&, const Vector& action) const {
  return rewards_.at(static_cast<std::size_t>(action[0]));
}

Vector Bandit::transition(const Vector& state, const Vector&) const { return state; }

EnvPtr make_env(const std::string& id) {
  if (id == "reach1d") return std::make_shared<Reach1D>();
  if (id == "grid5") return std::make_shared<Grid5>();
  if (id == "bandit2") return std::make_shared<Bandit>(std::vector<double>{1.0, 0.0});
  throw ValidationError("unknown env id '" + id + "'");
}

// --- rollouts --------------------------------------------------------------

Rollout rollout_detailed(const Env& env, const ActionSampler& policy, Rng& rng) {
  Rollout out;
  auto& traj = out.trajectory;
  EnvState s = env.reset(rng);
  double discount = 1.0;
  double ret = 0.0;
  while (!s.done) {
    Vector a = policy(s.vector, rng);
    if (!a.allFinite()) throw Error("rollout: policy emitted a non-finite action");
    StepResult r = env.step(s, a);
    traj.states.push_back(s.vector);
    traj.actions.push_back(std::move(a));
    out.gt_rewards.push_back(r.gt_reward);
    ret += discount * r.gt_reward;
    discount *= env.spec().gamma;
    s = std::move(r.next);
  }
  traj.gt_return = ret;
  return out;
}

Trajectory rollout(const Env& env, const ActionSampler& policy, Rng& rng) {
  return rollout_detailed(env, policy, rng).trajectory;
}

// --- demonstrators ---------------------------------------------------------

void DemonstratorSpec::validate() const {
  if (!(noise >= 0.0)) throw ValidationError("demonstrator noise must be >= 0");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ValidationError("demonstrator epsilon must be in [0,1]");
}

namespace {

int grid_optimal_move(const Vector& s) {
  if (s[1] < Grid5::size - 1) return Grid5::right;
  if (s[0] < Grid5::size - 1) return Grid5::down;
  return Grid5::right;
}

}  // namespace

ActionSampler scripted_optimal(const Env& env) {
  if (const auto* reach = dynamic_cast<const Reach1D*>(&env)) {
    const double goal = reach->params().goal;
    return [goal](const Vector& s, Rng&) -> Vector {
      return Vector::Constant(1, std::clamp(10.0 * (goal - s[0]), -1.0, 1.0));
    };
  }
  if (dynamic_cast<const Grid5*>(&env)) {
    return [](const Vector& s, Rng&) -> Vector { return Vector::Constant(1, grid_optimal_move(s)); };
  }
  if (const auto* bandit = dynamic_cast<const Bandit*>(&env)) {
    const auto& r = bandit->arm_rewards();
    const auto best = static_cast<double>(std::max_element(r.begin(), r.end()) - r.begin());
    return [best](const Vector&, Rng&) -> Vector { return Vector::Constant(1, best); };
  }
  throw Error("scripted_optimal: unsupported env " + env.spec().id);
}

ActionSampler uniform_random(const Env& env) {
  const SpaceSpec space = env.spec().action_space;
  return [space](const Vector&, Rng& rng) -> Vector {
    if (space.is_discrete())
      return Vector::Constant(1, static_cast<double>(rng.uniform_index(space.cardinality)));
    Vector a(space.dim);
    for (int i = 0; i < space.dim; ++i) a[i] = rng.uniform(space.lo[i], space.hi[i]);
    return a;
  };
}

ActionSampler demonstrator(const Env& env, const DemonstratorSpec& spec) {
  spec.validate();
  if (spec.kind == DemonstratorSpec::Kind::noisy_proportional) {
    const auto* reach = dynamic_cast<const Reach1D*>(&env);
    if (!reach) throw ValidationError("noisy_proportional demonstrator needs a continuous reach env");
    const double goal = reach->params().goal;
    const SpaceSpec space = env.spec().action_space;
    return [goal, spec, space](const Vector& s, Rng& rng) -> Vector {
      return space.clip(Vector::Constant(1, spec.gain * (goal - s[0]) + spec.noise * rng.normal()));
    };
  }
  if (!env.spec().action_space.is_discrete())
    throw ValidationError("epsilon_suboptimal demonstrator needs a discrete action space");
  ActionSampler best = scripted_optimal(env);
  ActionSampler random = uniform_random(env);
  return [best, random, eps = spec.epsilon](const Vector& s, Rng& rng) -> Vector {
    if (eps > 0.0 && rng.uniform() < eps) return random(s, rng);
    return best(s, rng);
  };
}

DemoSet make_demonstrations(const Env& env, const DemonstratorSpec& spec, int n,
                            std::uint64_t seed) {
  if (n < 1) throw ValidationError("make_demonstrations: n must be >= 1");
  DemoSet out;
  const ActionSampler demo = demonstrator(env, spec);
  double demo_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, "demo", static_cast<std::uint64_t>(i)));
    out.trajectories.push_back(rollout(env, demo, rng));
    demo_sum += *out.trajectories.back().gt_return;
  }
  out.demo_mean = demo_sum / n;

  const int reference = std::max(n, 20);
  auto mean_of = [&](const ActionSampler& p, std::string_view label) {
    double sum = 0.0;
    for (int i = 0; i < reference; ++i) {
      Rng rng(derive_seed(seed, label, static_cast<std::uint64_t>(i)));
      sum += *rollout(env, p, rng).gt_return;
    }
    return sum / reference;
  };
  out.optimal_mean = mean_of(scripted_optimal(env), "demo-sandwich-optimal");
  out.random_mean = mean_of(uniform_random(env), "demo-sandwich-random");
  if (!(out.demo_mean < out.optimal_mean && out.demo_mean > out.random_mean)) {
    out.warning = "demonstrations not strictly between random (" + std::to_string(out.random_mean) +
                  ") and optimal (" + std::to_string(out.optimal_mean) + ") returns: mean " +
                  std::to_string(out.demo_mean);
  }
  return out;
}

}  // namespace s3rr
