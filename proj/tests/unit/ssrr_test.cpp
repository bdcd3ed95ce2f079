#include <gtest/gtest.h>

#include "s3rr/ssrr.hpp"
#include "test_util.hpp"

namespace s3rr {
namespace {

using testing::finite_difference;
using testing::random_vector;
using testing::relative_error;

std::vector<std::pair<double, double>> curve_points(const SigmoidParams& p, double noise, Rng& rng) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 21; ++i) {
    const double eta = i / 20.0;
    pts.emplace_back(eta, sigmoid_eval(p, eta) + noise * rng.normal());
  }
  return pts;
}

double sse(const SigmoidParams& p, const std::vector<std::pair<double, double>>& pts) {
  double s = 0.0;
  for (const auto& [x, y] : pts) s += std::pow(sigmoid_eval(p, x) - y, 2);
  return s;
}

double max_gap(const SigmoidParams& a, const SigmoidParams& b) {
  double m = 0.0;
  for (int i = 0; i <= 200; ++i) m = std::max(m, std::abs(sigmoid_eval(a, i / 200.0) - sigmoid_eval(b, i / 200.0)));
  return m;
}

TEST(Sigmoid, Evaluation) {
  EXPECT_EQ(sigmoid_eval({1, 1, 0, 0}, 0.0), 0.5);
  for (double eta : {0.0, 0.3, 1.0}) EXPECT_EQ(sigmoid_eval({4, 0, 0.2, -1}, eta), 1.0);
  EXPECT_NEAR(sigmoid_eval({-2, 10, 0.5, 1}, 0.9), 1.0 - 2.0 / (1.0 + std::exp(-4.0)), 1e-14);
  EXPECT_NEAR(sigmoid_eval({-2, 10, 0.5, 1}, 0.9), -0.96403, 1e-5);
  EXPECT_TRUE(std::isfinite(sigmoid_eval({1, 100, 0, 0}, -900.0)));
}

TEST(Sigmoid, MonotoneBySignOfKc) {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const SigmoidParams p{rng.uniform(-5, 5), rng.uniform(-50, 50), rng.uniform(-1, 2), rng.uniform(-3, 3)};
    double a = rng.uniform(), b = rng.uniform();
    if (a > b) std::swap(a, b);
    if (p.k * p.c > 0) EXPECT_LE(sigmoid_eval(p, a), sigmoid_eval(p, b));
    if (p.k * p.c < 0) EXPECT_GE(sigmoid_eval(p, a), sigmoid_eval(p, b));
  }
}

TEST(FitSigmoid, NoiselessRecovery) {
  Rng rng(2);
  const SigmoidParams truth{-10, 8, 0.5, 5};
  const SigmoidFit fit = fit_sigmoid(curve_points(truth, 0.0, rng), {});
  EXPECT_LE(max_gap(fit.params, truth), 1e-3);
  EXPECT_EQ(fit.distinct_levels, 21);
  EXPECT_TRUE(fit.warnings.empty());
}

TEST(FitSigmoid, RandomCurvesNoiselessAndNoisy) {
  Rng rng(3);
  for (int i = 0; i < 40; ++i) {
    const SigmoidParams truth{rng.uniform(-20, 20), rng.uniform(2, 20) * (rng.uniform() < 0.5 ? -1 : 1),
                              rng.uniform(0.2, 0.8), rng.uniform(-10, 10)};
    const SigmoidFit clean = fit_sigmoid(curve_points(truth, 0.0, rng), {});
    EXPECT_LE(max_gap(clean.params, truth), 1e-3) << i;
    const double range = std::abs(truth.c) * (1.0 / (1.0 + std::exp(-truth.k * (1 - truth.x0))) -
                                              1.0 / (1.0 + std::exp(truth.k * truth.x0)));
    const auto noisy_pts = curve_points(truth, 0.01 * std::abs(range), rng);
    const SigmoidFit noisy = fit_sigmoid(noisy_pts, {});
    EXPECT_LE(max_gap(noisy.params, truth), 3e-2 * std::abs(range)) << i;
  }
}

TEST(FitSigmoid, ConstantData) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 21; ++i) pts.emplace_back(i / 20.0, 3.0);
  const SigmoidFit fit = fit_sigmoid(pts, {});
  EXPECT_LE(fit.residual, 1e-10);
  for (int i = 0; i <= 20; ++i) EXPECT_NEAR(sigmoid_eval(fit.params, i / 20.0), 3.0, 1e-6);
}

TEST(FitSigmoid, BeatsRandomSearchAndConstantFit) {
  Rng rng(4);
  FitConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 21; ++i) pts.emplace_back(i / 20.0, rng.normal() + 3.0 * (i > 10));
    const SigmoidFit fit = fit_sigmoid(pts, cfg);
    EXPECT_NEAR(fit.residual, sse(fit.params, pts), 1e-9 * (1 + fit.residual));
    EXPECT_LE(std::abs(fit.params.k), cfg.k_bound);

    double ymin = 1e300, ymax = -1e300, mean = 0.0;
    for (const auto& [x, y] : pts) ymin = std::min(ymin, y), ymax = std::max(ymax, y), mean += y;
    mean /= 21;
    double best = 1e300;
    Rng search(derive_seed(5, "search", static_cast<std::uint64_t>(trial)));
    const double span = ymax - ymin;
    for (int s = 0; s < 10000; ++s) {
      const SigmoidParams p{search.uniform(-2 * span, 2 * span), search.uniform(-cfg.k_bound, cfg.k_bound),
                            search.uniform(-0.5, 1.5), search.uniform(ymin - span, ymax + span)};
      best = std::min(best, sse(p, pts));
    }
    EXPECT_LE(fit.residual, best);
    double constant = 0.0;
    for (const auto& [x, y] : pts) constant += (y - mean) * (y - mean);
    EXPECT_LE(fit.residual, constant + 1e-9);
  }
}

TEST(FitSigmoid, FewLevelsWarns) {
  Rng rng(6);
  std::vector<std::pair<double, double>> pts;
  for (double eta : {0.0, 1.0 / 3, 2.0 / 3, 1.0})
    for (int j = 0; j < 5; ++j) pts.emplace_back(eta, -5 * eta + 0.1 * rng.normal());
  const SigmoidFit fit = fit_sigmoid(pts, {});
  EXPECT_EQ(fit.distinct_levels, 4);
  ASSERT_FALSE(fit.warnings.empty());
  EXPECT_EQ(fit.warnings[0].rfind("levels < 6", 0), 0u);
}

TEST(FitSigmoid, InputErrors) {
  EXPECT_THROW(fit_sigmoid({{0, 1}, {1, 2}, {0.5, 1}}, {}), ValidationError);
  EXPECT_THROW(fit_sigmoid({{0.5, 1}, {0.5, 2}, {0.5, 1}, {0.5, 0}}, {}), ValidationError);
  EXPECT_THROW(fit_sigmoid({{0, 1}, {1, NAN}, {0.5, 1}, {0.2, 0}}, {}), ValidationError);
  FitConfig bad;
  bad.tolerance = 0.0;
  EXPECT_THROW(bad.validate(), ValidationError);
}

DegradationDataset random_dataset(const Env& env, int levels, int per_level, std::uint64_t seed) {
  DegradationDataset d;
  d.env_id = env.spec().id;
  d.provenance = Provenance::noise;
  for (int i = 0; i < levels; ++i)
    for (int j = 0; j < per_level; ++j) {
      Rng rng(derive_seed(seed, "traj", static_cast<std::uint64_t>(i * per_level + j)));
      Trajectory t = rollout(env, uniform_random(env), rng);
      t.eta = static_cast<double>(i) / (levels - 1);
      d.trajectories.push_back(std::move(t));
    }
  d.refresh_levels();
  d.controls = d.levels;
  return d;
}

TEST(SsrrLoss, ZeroAndOffsetCases) {
  const Reach1D env;
  const auto d = random_dataset(env, 3, 2, 1);
  const RewardModel zero = RewardModel::zeros(env, 1, 4);
  EXPECT_EQ(ssrr_loss(env, zero, d, {0, 1, 0.5, 0}), 0.0);
  EXPECT_DOUBLE_EQ(ssrr_loss(env, zero, d, {0, 1, 0.5, 2}), 4.0);
}

TEST(SsrrLoss, MatchesResummation) {
  const Reach1D env;
  const auto d = random_dataset(env, 3, 3, 2);
  Rng rng(3);
  const RewardModel m = RewardModel::make(env, 2, 5, rng);
  const SigmoidParams s{-3, 6, 0.4, 1};
  double oracle = 0.0;
  for (const auto& t : d.trajectories) {
    double ret = 0.0;
    for (std::size_t k = 0; k < t.length(); ++k)
      ret += forward<double>(m.spec, m.params, env.encode(t.states[k], t.actions[k]))[0];
    oracle += std::pow(ret - sigmoid_eval(s, t.eta), 2);
  }
  EXPECT_NEAR(ssrr_loss(env, m, d, s), oracle / d.trajectories.size(), 1e-10);
}

TEST(SsrrLoss, GradientMatchesFiniteDifferences) {
  const Grid5 env;
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_dataset(env, 3, 1, 10 + static_cast<std::uint64_t>(trial));
    RewardModel m = RewardModel::make(env, 1 + trial % 3, 3, rng);
    std::vector<double> targets;
    for (std::size_t i = 0; i < 3; ++i) targets.push_back(rng.uniform(-20, 5));
    const Vector analytic = regression_gradient(env, d.trajectories, targets, m);
    RewardModel probe = m;
    const Vector numeric = finite_difference(
        [&](const Vector& q) {
          probe.params = q;
          double s = 0.0;
          for (std::size_t i = 0; i < 3; ++i) s += std::pow(predicted_return(env, probe, d.trajectories[i]) - targets[i], 2);
          return s / 3;
        },
        m.params);
    EXPECT_LE(relative_error(analytic, numeric), 1e-4) << trial;
  }
}

TEST(RewardRegression, ExactFitIsFixedPoint) {
  const Reach1D env;
  const auto d = random_dataset(env, 3, 2, 5);
  RewardModel m = RewardModel::zeros(env, 1, 4);
  m.params[m.params.size() - 1] = 0.25;
  const SigmoidParams s{0, 1, 0.5, 0.25 * 50};
  EXPECT_EQ(ssrr_loss(env, m, d, s), 0.0);
  std::vector<double> targets(d.trajectories.size(), 12.5);
  EXPECT_TRUE(regression_gradient(env, d.trajectories, targets, m).isZero(0.0));
  RewardRegressionConfig cfg;
  cfg.normalize_targets = false;
  cfg.epochs = 5;
  const auto r = reward_regression(env, d, s, cfg, 1, m);
  EXPECT_EQ(r.model.params, m.params);
  for (double l : r.loss_curve) EXPECT_EQ(l, 0.0);
}

TEST(RewardRegression, SingleStepLinearReachesLeastSquares) {
  const Reach1D env({.start_lo = 0.0, .start_hi = 0.0, .horizon = 1});
  DegradationDataset d;
  d.env_id = "reach1d";
  d.provenance = Provenance::test;
  Trajectory t;
  t.eta = 0.3;
  t.states = {Vector::Constant(1, 0.4)};
  t.actions = {Vector::Constant(1, -0.7)};
  d.trajectories = {t};
  d.refresh_levels();
  const SigmoidParams s{2, 5, 0.5, -1};
  RewardRegressionConfig cfg;
  cfg.hidden_layers = 0;
  cfg.normalize_targets = false;
  cfg.epochs = 3000;
  cfg.minibatch = 1;
  cfg.step_size = 0.01;
  const auto r = reward_regression(env, d, s, cfg, 2);
  // Any (w, b) with w.x + b = target solves the 1-D problem exactly.
  EXPECT_NEAR(r.model.value(env, t.states[0], t.actions[0]), sigmoid_eval(s, 0.3), 1e-6);
}

TEST(RewardRegression, LossCurveNonIncreasing) {
  const Reach1D env;
  const auto d = random_dataset(env, 5, 4, 6);
  RewardRegressionConfig cfg;
  cfg.epochs = 80;
  cfg.step_size = 0.05;
  const auto r = reward_regression(env, d, {-6, 8, 0.5, 2}, cfg, 3);
  ASSERT_EQ(r.loss_curve.size(), 80u);
  for (std::size_t i = 1; i < r.loss_curve.size(); ++i) EXPECT_LE(r.loss_curve[i], r.loss_curve[i - 1] + 1e-8);
  EXPECT_LT(r.loss_curve.back(), r.loss_curve.front());
}

TEST(RewardRegression, DeterministicAcrossThreadCounts) {
  const Reach1D env;
  const auto d = random_dataset(env, 3, 4, 7);
  RewardRegressionConfig cfg;
  cfg.epochs = 10;
  auto run = [&](int threads) {
    testing::ThreadCap cap(threads);
    return reward_regression(env, d, {-6, 8, 0.5, 2}, cfg, 4).model.params;
  };
  EXPECT_EQ(run(1), run(6));
}

}  // namespace
}  // namespace s3rr
