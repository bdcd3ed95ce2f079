#include <gtest/gtest.h>

#include <array>

#include "s3rr/envs.hpp"
#include "s3rr/parallel.hpp"
#include "test_util.hpp"

namespace s3rr {
namespace {

TEST(Rng, DeriveSeedSeparatesStreams) {
  EXPECT_EQ(derive_seed(1, "demos"), derive_seed(1, "demos"));
  EXPECT_NE(derive_seed(1, "demos"), derive_seed(2, "demos"));
  EXPECT_NE(derive_seed(1, "demos"), derive_seed(1, "airl"));
  EXPECT_NE(derive_seed(1, "demos", 0), derive_seed(1, "demos", 1));
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(9);
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(Parallel, ResultsIndependentOfWorkerCount) {
  auto run = [](int threads) {
    testing::ThreadCap cap(threads);
    std::vector<double> out(257);
    parallel_for(out.size(), [&](std::size_t i) {
      Rng rng(derive_seed(4, "slot", i));
      out[i] = rng.normal();
    });
    return out;
  };
  EXPECT_EQ(run(1), run(3));
  EXPECT_EQ(run(1), run(8));
}

TEST(Parallel, PropagatesExceptions) {
  testing::ThreadCap cap(4);
  EXPECT_THROW(parallel_for(16, [](std::size_t i) {
                 if (i == 11) throw Error("boom");
               }),
               Error);
}

TEST(Reach1D, PointMassReset) {
  const Reach1D env({.start_lo = 0.0, .start_hi = 0.0});
  Rng rng(1);
  EXPECT_EQ(env.reset(rng).vector[0], 0.0);
}

TEST(Reach1D, UniformResetMean) {
  const Reach1D env;
  Rng rng(2);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = env.reset(rng).vector[0];
    ASSERT_GE(x, -0.1);
    ASSERT_LE(x, 0.1);
    sum += x;
  }
  EXPECT_NEAR(sum / 10000, 0.0, 0.01);
}

TEST(Reach1D, StepDynamicsAndReward) {
  const Reach1D env;
  EnvState s;
  s.vector = Vector::Zero(1);
  const StepResult idle = env.step(s, Vector::Zero(1));
  EXPECT_EQ(idle.next.vector[0], 0.0);
  EXPECT_DOUBLE_EQ(idle.gt_reward, -1.0);
  const StepResult push = env.step(s, Vector::Ones(1));
  EXPECT_DOUBLE_EQ(push.next.vector[0], 0.1);
  EXPECT_DOUBLE_EQ(push.gt_reward, -1.01);
}

TEST(Reach1D, ActionsClippedInDynamicsAndReward) {
  const Reach1D env;
  EnvState s;
  s.vector = Vector::Zero(1);
  const StepResult r = env.step(s, Vector::Constant(1, 5.0));
  EXPECT_DOUBLE_EQ(r.next.vector[0], 0.1);
  EXPECT_DOUBLE_EQ(r.gt_reward, -1.01);
}

TEST(Env, StepAfterDoneThrows) {
  const Reach1D env;
  EnvState s;
  s.vector = Vector::Zero(1);
  s.done = true;
  EXPECT_THROW(env.step(s, Vector::Zero(1)), Error);
}

TEST(Grid5, StartAndMoves) {
  const Grid5 env;
  Rng rng(3);
  for (int i = 0; i < 5; ++i) EXPECT_TRUE(same_values(env.reset(rng).vector, Grid5::cell(0, 0)));
  EnvState s;
  s.vector = Grid5::cell(0, 0);
  const StepResult r = env.step(s, Vector::Constant(1, Grid5::right));
  EXPECT_TRUE(same_values(r.next.vector, Grid5::cell(0, 1)));
  EXPECT_EQ(r.gt_reward, -1.0);
  const StepResult wall = env.step(s, Vector::Constant(1, Grid5::up));
  EXPECT_TRUE(same_values(wall.next.vector, Grid5::cell(0, 0)));
}

TEST(Rollout, ZeroActionGeometricSum) {
  const Reach1D env({.start_lo = 0.0, .start_hi = 0.0});
  Rng rng(4);
  const Trajectory t = rollout(env, [](const Vector&, Rng&) -> Vector { return Vector::Zero(1); }, rng);
  double oracle = 0.0;
  for (int k = 0; k < 50; ++k) oracle -= std::pow(0.99, k);
  EXPECT_NEAR(*t.gt_return, oracle, 1e-12);
  EXPECT_NEAR(*t.gt_return, -39.50, 0.01);
}

TEST(Rollout, ScriptedOptimalBeatsZeroAction) {
  const Reach1D env({.start_lo = 0.0, .start_hi = 0.0});
  Rng a(5), b(5);
  const double opt = *rollout(env, scripted_optimal(env), a).gt_return;
  const double idle =
      *rollout(env, [](const Vector&, Rng&) -> Vector { return Vector::Zero(1); }, b).gt_return;
  EXPECT_GT(opt, idle);
}

TEST(Rollout, NonFiniteActionRejected) {
  const Reach1D env;
  Rng rng(6);
  EXPECT_THROW(
      rollout(env, [](const Vector&, Rng&) -> Vector { return Vector::Constant(1, std::nan("")); }, rng),
      Error);
}

// Value iteration over the 25 cells with an absorbing goal.
std::array<double, 25> grid_values(double gamma) {
  std::array<double, 25> v{};
  for (int sweep = 0; sweep < 200; ++sweep) {
    std::array<double, 25> nv{};
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) {
        if (r == 4 && c == 4) {
          nv[24] = 10.0;
          continue;
        }
        double best = -1e9;
        const int dr[4] = {-1, 0, 1, 0}, dc[4] = {0, 1, 0, -1};
        for (int a = 0; a < 4; ++a) {
          int nr = r + dr[a], nc = c + dc[a];
          if (nr < 0 || nr > 4 || nc < 0 || nc > 4) nr = r, nc = c;
          best = std::max(best, -1.0 + gamma * v[static_cast<std::size_t>(nr * 5 + nc)]);
        }
        nv[static_cast<std::size_t>(r * 5 + c)] = best;
      }
    v = nv;
  }
  return v;
}

TEST(Grid5, ScriptedOptimalMatchesValueIteration) {
  const Grid5 env;
  const auto v = grid_values(env.spec().gamma);
  Rng rng(7);
  const Rollout r = rollout_detailed(env, scripted_optimal(env), rng);
  EXPECT_NEAR(*r.trajectory.gt_return, v[0], 1e-9);
  // Eight moves, then the rewarded step from the goal.
  EXPECT_EQ(r.trajectory.length(), 9u);
  EXPECT_TRUE(Grid5::is_goal(r.trajectory.states.back()));
  double total = 0.0;
  for (double x : r.gt_rewards) total += x;
  EXPECT_DOUBLE_EQ(total, 2.0);
}

TEST(Demonstrations, ReachSandwich) {
  const Reach1D env;
  const DemoSet d = make_demonstrations(env, {}, 10, 42);
  EXPECT_EQ(d.trajectories.size(), 10u);
  EXPECT_FALSE(d.warning.has_value());

  // Independent 100-rollout reference means.
  auto mean_of = [&](const ActionSampler& p, std::uint64_t seed) {
    double s = 0.0;
    for (int i = 0; i < 100; ++i) {
      Rng rng(derive_seed(seed, "ref", i));
      s += *rollout(env, p, rng).gt_return;
    }
    return s / 100;
  };
  const double demo = mean_of(demonstrator(env, {}), 1);
  EXPECT_LT(demo, mean_of(scripted_optimal(env), 2));
  EXPECT_GT(demo, mean_of(uniform_random(env), 3));
  EXPECT_LT(d.demo_mean, d.optimal_mean);
  EXPECT_GT(d.demo_mean, d.random_mean);
}

TEST(Demonstrations, DeterministicUnderSeed) {
  const Reach1D env;
  const DemoSet a = make_demonstrations(env, {}, 1, 8);
  const DemoSet b = make_demonstrations(env, {}, 1, 8);
  ASSERT_EQ(a.trajectories.size(), 1u);
  EXPECT_TRUE(a.trajectories[0] == b.trajectories[0]);
  EXPECT_FALSE(make_demonstrations(env, {}, 1, 9).trajectories[0] == a.trajectories[0]);
}

TEST(Demonstrations, ZeroEpsilonIsOptimal) {
  const Grid5 env;
  DemonstratorSpec spec;
  spec.kind = DemonstratorSpec::Kind::epsilon_suboptimal;
  spec.epsilon = 0.0;
  Rng a(10), b(10);
  EXPECT_TRUE(rollout(env, demonstrator(env, spec), a) == rollout(env, scripted_optimal(env), b));
}

TEST(Demonstrations, KindMustMatchEnv) {
  const Grid5 grid;
  EXPECT_THROW(demonstrator(grid, {}), ValidationError);
  const Reach1D reach;
  DemonstratorSpec eps;
  eps.kind = DemonstratorSpec::Kind::epsilon_suboptimal;
  EXPECT_THROW(demonstrator(reach, eps), ValidationError);
}

TEST(Env, EncodeOneHotForDiscrete) {
  const Grid5 env;
  const Vector e = env.encode(Grid5::cell(4, 0), Vector::Constant(1, 2));
  ASSERT_EQ(e.size(), env.encoded_dim());
  ASSERT_EQ(e.size(), 6);
  EXPECT_EQ(e[0], 1.0);
  EXPECT_EQ(e[1], 0.0);
  EXPECT_EQ(e.tail(4), (Vector(4) << 0, 0, 1, 0).finished());
}

TEST(Env, MakeEnvIds) {
  EXPECT_EQ(make_env("reach1d")->spec().horizon, 50);
  EXPECT_EQ(make_env("grid5")->spec().action_space.cardinality, 4);
  EXPECT_EQ(make_env("bandit2")->spec().horizon, 1);
  EXPECT_THROW(make_env("cartpole"), ValidationError);
}

}  // namespace
}  // namespace s3rr
