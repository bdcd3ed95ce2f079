#include <gtest/gtest.h>

#include "s3rr/airl.hpp"
#include "s3rr/pipeline.hpp"
#include "test_util.hpp"

namespace s3rr {
namespace {

using testing::finite_difference;
using testing::random_vector;
using testing::relative_error;

TEST(Discriminator, ExactValues) {
  EXPECT_EQ(discriminator_value(0.0, 0.0), 0.5);
  for (double v : {-3.7, 0.0, 1.25, 40.0}) EXPECT_EQ(discriminator_value(v, v), 0.5);
  EXPECT_NEAR(discriminator_value(3.0, -2.0), 1.0 / (1.0 + std::exp(-5.0)), 1e-15);
  EXPECT_NEAR(discriminator_value(3.0, -2.0), 0.993307, 1e-6);
}

TEST(Discriminator, BoundedAndMonotone) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double f = rng.uniform(-500, 500), lp = rng.uniform(-500, 500), d = rng.uniform(0.01, 5);
    const double v = discriminator_value(f, lp);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_GE(discriminator_value(f + d, lp), v);
    EXPECT_LE(discriminator_value(f, lp + d), v);
  }
  // Strictly inside (0, 1) wherever the gap is representable.
  for (double g : {-30.0, -1.0, 0.0, 1.0, 30.0}) {
    EXPECT_GT(discriminator_value(g, 0.0), 0.0);
    EXPECT_LT(discriminator_value(g, 0.0), 1.0);
  }
}

struct Fixture {
  Grid5 env;
  StochasticPolicy policy;
  RewardModel model;
  std::vector<StateAction> demo, gen;

  explicit Fixture(std::uint64_t seed) {
    Rng rng(seed);
    policy = StochasticPolicy::make(env, 1, 4, rng);
    model = RewardModel::make(env, 1, 4, rng);
    for (int i = 0; i < 5; ++i) {
      demo.push_back({Grid5::cell(static_cast<int>(rng.uniform_index(5)), static_cast<int>(rng.uniform_index(5))),
                      Vector::Constant(1, static_cast<double>(rng.uniform_index(4)))});
      gen.push_back({Grid5::cell(static_cast<int>(rng.uniform_index(5)), static_cast<int>(rng.uniform_index(5))),
                     Vector::Constant(1, static_cast<double>(rng.uniform_index(4)))});
    }
  }
};

TEST(DiscriminatorLoss, ChanceLevelIsLog4) {
  // With uniform pi and f = log(1/4) everywhere, D = 1/2 on every pair.
  Fixture fx(2);
  Vector net = fx.policy.net_params();
  net.setZero();
  fx.policy.set_flat(net);
  fx.model.params.setZero();
  fx.model.params[fx.model.params.size() - 1] = std::log(0.25);
  const auto loss = discriminator_loss(fx.env, fx.demo, fx.gen, fx.model, fx.policy);
  EXPECT_NEAR(loss.bce, std::log(4.0), 1e-12);
}

TEST(DiscriminatorLoss, SeparatedBatchesApproachZero) {
  Fixture fx(3);
  Vector net = fx.policy.net_params();
  net.setZero();
  fx.policy.set_flat(net);
  for (auto& p : fx.demo) p.action[0] = 0;
  for (auto& p : fx.gen) p.action[0] = 1;
  // Affine f over [obs(2), one_hot(4)]: +60 on action 0, -60 on action 1.
  RewardModel m = RewardModel::zeros(fx.env, 0, 1);
  m.params[2] = 60.0;
  m.params[3] = -60.0;
  const auto loss = discriminator_loss(fx.env, fx.demo, fx.gen, m, fx.policy);
  EXPECT_LT(loss.bce, 1e-20);
}

TEST(DiscriminatorLoss, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Fixture fx(100 + seed);
    const auto loss = discriminator_loss(fx.env, fx.demo, fx.gen, fx.model, fx.policy);
    RewardModel probe = fx.model;
    const Vector numeric = finite_difference(
        [&](const Vector& q) {
          probe.params = q;
          return discriminator_loss(fx.env, fx.demo, fx.gen, probe, fx.policy).bce;
        },
        fx.model.params);
    EXPECT_LE(relative_error(loss.gradient, numeric), 1e-4) << "seed " << seed;
  }
}

TEST(ScoreTrajectory, ZeroModelScoresZero) {
  const Reach1D env;
  Rng rng(4);
  const Trajectory t = rollout(env, uniform_random(env), rng);
  const Trajectory s = score_trajectory(env, RewardModel::zeros(env, 1, 4), t);
  ASSERT_EQ(s.initial_rewards.size(), t.length());
  for (double r : s.initial_rewards) EXPECT_EQ(r, 0.0);
  EXPECT_EQ(s.states, t.states);
  EXPECT_EQ(s.gt_return, t.gt_return);
}

TEST(ScoreTrajectory, MatchesDirectForward) {
  const Grid5 env;
  Rng rng(5);
  const RewardModel m = RewardModel::make(env, 2, 3, rng);
  const Trajectory t = score_trajectory(env, m, rollout(env, uniform_random(env), rng));
  for (std::size_t k = 0; k < t.length(); ++k)
    EXPECT_EQ(t.initial_rewards[k], forward<double>(m.spec, m.params, env.encode(t.states[k], t.actions[k]))[0]);
}

TEST(DemoSubset, SeededAndSized) {
  const Reach1D env;
  const auto demos = make_demonstrations(env, {}, 10, 1).trajectories;
  const auto a = demo_subset(demos, 3, 7);
  EXPECT_EQ(a.size(), 3u);
  EXPECT_EQ(a, demo_subset(demos, 3, 7));
  EXPECT_EQ(demo_subset(demos, 10, 7).size(), 10u);
  EXPECT_THROW(demo_subset(demos, 11, 7), ValidationError);
}

TEST(AirlConfig, RejectsOversizedSubset) {
  AirlConfig c;
  c.demo_subset_size = 5;
  EXPECT_THROW(c.validate(4), ValidationError);
  EXPECT_NO_THROW(c.validate(5));
}

AirlConfig grid_airl() {
  AirlConfig c;
  c.outer_iterations = 40;
  c.disc_width = 8;
  c.policy_width = 8;
  c.disc_layers = 1;
  c.policy_layers = 1;
  c.policy_iters_per_outer = 3;
  c.rl.rollouts_per_iter = 16;
  c.rl.alpha = 0.05;
  c.rl.step_size = 0.05;
  return c;
}

TEST(Airl, GridPolicyMatchesDemonstrator) {
  const Grid5 env;
  const PipelineConfig cfg =
      parse_config(read_json_file(std::filesystem::path(S3RR_SOURCE_DIR) / "configs/grid5-noise.json"));
  const DemonstratorSpec spec = cfg.demonstrator;
  std::vector<double> policy_means, demo_means;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DemoSet demos = make_demonstrations(env, spec, 10, seed);
    const AirlResult r = train_airl(env, demos.trajectories, cfg.airl, seed);
    double pm = 0.0, dm = 0.0;
    for (int i = 0; i < 100; ++i) {
      Rng a(derive_seed(seed, "p", i)), b(derive_seed(seed, "d", i));
      pm += *rollout(env, as_sampler(env, r.policy), a).gt_return;
      dm += *rollout(env, demonstrator(env, spec), b).gt_return;
    }
    policy_means.push_back(pm / 100);
    demo_means.push_back(dm / 100);
    EXPECT_EQ(r.log.size(), static_cast<std::size_t>(cfg.airl.outer_iterations));
  }
  std::sort(policy_means.begin(), policy_means.end());
  std::sort(demo_means.begin(), demo_means.end());
  EXPECT_GE(policy_means[2], demo_means[2]);
}

TEST(Airl, ReachDiscriminatorSeparatesHeldOutPairs) {
  const PipelineConfig cfg =
      parse_config(read_json_file(std::filesystem::path(S3RR_SOURCE_DIR) / "configs/reach1d-noise.json"));
  const Reach1D env;
  const auto demos = make_demonstrations(env, cfg.demonstrator, cfg.n_demos, 1).trajectories;
  const AirlResult r = train_airl(env, demos, cfg.airl, 1);
  const auto held_out = make_demonstrations(env, cfg.demonstrator, 20, 1000).trajectories;
  std::vector<Trajectory> random;
  for (int i = 0; i < 20; ++i) {
    Rng rng(derive_seed(2, "random", static_cast<std::uint64_t>(i)));
    random.push_back(rollout(env, uniform_random(env), rng));
  }
  // Negatives come from the uniform policy, so D is taken against its density.
  const double log_u = -std::log(2.0);
  auto d = [&](const StateAction& p) {
    return discriminator_value(r.reward_model.value(env, p.state, p.action), log_u);
  };
  int correct = 0, total = 0;
  for (const auto& p : state_action_pairs(held_out)) correct += d(p) > 0.5, ++total;
  for (const auto& p : state_action_pairs(random)) correct += d(p) < 0.5, ++total;
  EXPECT_GE(static_cast<double>(correct) / total, 0.8);
}

TEST(Airl, DeterministicAcrossThreadCounts) {
  const Grid5 env;
  DemonstratorSpec spec;
  spec.kind = DemonstratorSpec::Kind::epsilon_suboptimal;
  const auto demos = make_demonstrations(env, spec, 4, 2).trajectories;
  AirlConfig c = grid_airl();
  c.outer_iterations = 3;
  auto run = [&](int threads) {
    testing::ThreadCap cap(threads);
    return train_airl(env, demos, c, 3);
  };
  const AirlResult a = run(1), b = run(5);
  EXPECT_EQ(a.reward_model.params, b.reward_model.params);
  EXPECT_TRUE(a.policy == b.policy);
}

}  // namespace
}  // namespace s3rr
