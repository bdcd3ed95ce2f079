#pragma once

#include <vector>

#include "s3rr/reward_model.hpp"

namespace s3rr {

struct FitConfig {
  int max_iterations = 500;
  double tolerance = 1e-14;  // on relative loss decrease
  int multi_starts = 16;
  double k_bound = 100.0;  // |k| <= k_bound

  void validate() const;
};

struct SigmoidFit {
  SigmoidParams params;
  double residual = 0.0;  // sum of squared errors in the data's units
  // Standardization applied to the targets while solving.
  double norm_mean = 0.0;
  double norm_scale = 1.0;
  int distinct_levels = 0;
  std::vector<std::string> warnings;
};

// c / (1 + exp(-k (eta - x0))) + y0.
double sigmoid_eval(const SigmoidParams& p, double eta);

// Damped Gauss-Newton (Levenberg-Marquardt) from several starts on
// standardized targets; the best-residual start wins, lowest index on ties.
SigmoidFit fit_sigmoid(const std::vector<std::pair<double, double>>& points, const FitConfig& config);

struct RewardRegressionConfig {
  int epochs = 200;
  int minibatch = 16;
  double step_size = 1e-2;
  int hidden_layers = 1;
  int hidden_width = 8;
  bool normalize_targets = true;

  void validate() const;
};

struct RewardRegressionResult {
  RewardModel model;
  std::vector<double> loss_curve;  // full-dataset loss after each epoch
  double target_mean = 0.0;        // normalization folded out of the targets
  double target_scale = 1.0;
};

// Minimizes mean_i (sum_t R(s_t, a_t) - sigma(eta_i))^2 by minibatch Adam. Any
// epoch that raises the full-dataset loss is undone, and Adam restarts with half
// the step size.
RewardRegressionResult reward_regression(const Env& env, const DegradationDataset& dataset,
                                         const SigmoidParams& sigmoid,
                                         const RewardRegressionConfig& config, std::uint64_t seed);
RewardRegressionResult reward_regression(const Env& env, const DegradationDataset& dataset,
                                         const SigmoidParams& sigmoid,
                                         const RewardRegressionConfig& config, std::uint64_t seed,
                                         RewardModel initial);

// Gradient of the regression loss (with the given targets) at the model.
Vector regression_gradient(const Env& env, const std::vector<Trajectory>& trajectories,
                           const std::vector<double>& targets, const RewardModel& model);

// Exact mean over trajectories of (sum_t R - sigma(eta))^2.
double ssrr_loss(const Env& env, const RewardModel& model, const DegradationDataset& dataset,
                 const SigmoidParams& sigmoid);

// Sum of model rewards over a trajectory.
double predicted_return(const Env& env, const RewardModel& model, const Trajectory& t);

}  // namespace s3rr
