#include "s3rr/ssrr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "s3rr/parallel.hpp"

namespace s3rr {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

using Points = std::vector<std::pair<double, double>>;

double sse(const SigmoidParams& p, const Points& pts) {
  double s = 0.0;
  for (const auto& [eta, y] : pts) {
    const double r = sigmoid_eval(p, eta) - y;
    s += r * r;
  }
  return s;
}

struct StartResult {
  SigmoidParams params;
  double loss = std::numeric_limits<double>::infinity();
  bool ok = false;
};

StartResult levenberg_marquardt(SigmoidParams p, const Points& pts, const FitConfig& cfg) {
  using Vec4 = Eigen::Vector4d;
  using Mat4 = Eigen::Matrix4d;
  const std::size_t n = pts.size();
  auto clamp_k = [&](SigmoidParams& q) { q.k = std::clamp(q.k, -cfg.k_bound, cfg.k_bound); };
  clamp_k(p);
  double loss = sse(p, pts);
  double damping = 1e-3;
  for (int it = 0; it < cfg.max_iterations && std::isfinite(loss) && loss > 1e-30; ++it) {
    Mat4 A = Mat4::Zero();
    Vec4 g = Vec4::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double eta = pts[i].first;
      const double s = logistic(p.k * (eta - p.x0));
      const double ds = s * (1.0 - s);
      Vec4 j;
      j << s, p.c * ds * (eta - p.x0), -p.c * ds * p.k, 1.0;
      const double r = p.c * s + p.y0 - pts[i].second;
      A.noalias() += j * j.transpose();
      g += r * j;
    }
    bool accepted = false;
    while (damping < 1e14) {
      Mat4 M = A;
      M.diagonal() += damping * (A.diagonal().array() + 1e-12).matrix();
      const Vec4 delta = M.ldlt().solve(-g);
      SigmoidParams q{p.c + delta[0], p.k + delta[1], p.x0 + delta[2], p.y0 + delta[3]};
      clamp_k(q);
      const double trial = q.finite() ? sse(q, pts) : std::numeric_limits<double>::infinity();
      if (std::isfinite(trial) && trial < loss) {
        const double improvement = loss - trial;
        p = q;
        loss = trial;
        damping = std::max(damping / 3.0, 1e-15);
        accepted = true;
        if (improvement <= cfg.tolerance * loss) it = cfg.max_iterations;
        break;
      }
      damping *= 4.0;
    }
    if (!accepted) break;
  }
  StartResult out;
  out.params = p;
  out.loss = loss;
  out.ok = p.finite() && std::isfinite(loss);
  return out;
}

}  // namespace

void FitConfig::validate() const {
  if (!(tolerance > 0.0)) throw ValidationError("curvefit.tolerance must be > 0");
  if (max_iterations < 1) throw ValidationError("curvefit.max_iterations must be >= 1");
  if (multi_starts < 1) throw ValidationError("curvefit.multi_starts must be >= 1");
  if (!(k_bound > 0.0)) throw ValidationError("curvefit.k_bound must be > 0");
}

double sigmoid_eval(const SigmoidParams& p, double eta) {
  return p.c * logistic(p.k * (eta - p.x0)) + p.y0;
}

SigmoidFit fit_sigmoid(const Points& points, const FitConfig& config) {
  config.validate();
  if (points.size() < 4) throw ValidationError("fit_sigmoid: at least 4 points required");
  std::set<double> distinct;
  for (const auto& [eta, y] : points) {
    if (!std::isfinite(eta) || !std::isfinite(y)) throw ValidationError("fit_sigmoid: non-finite point");
    distinct.insert(eta);
  }
  if (distinct.size() < 2) throw ValidationError("fit_sigmoid: at least 2 distinct eta required");

  const double n = static_cast<double>(points.size());
  double mean = 0.0;
  for (const auto& pt : points) mean += pt.second;
  mean /= n;
  double var = 0.0;
  for (const auto& pt : points) var += (pt.second - mean) * (pt.second - mean);
  const double scale = var > 0.0 ? std::sqrt(var / n) : 1.0;
  Points z;
  z.reserve(points.size());
  for (const auto& [eta, y] : points) z.emplace_back(eta, (y - mean) / scale);

  double zmin = z[0].second, zmax = z[0].second;
  for (const auto& pt : z) {
    zmin = std::min(zmin, pt.second);
    zmax = std::max(zmax, pt.second);
  }
  const double range = zmax > zmin ? zmax - zmin : 1.0;
  std::vector<double> etas(distinct.begin(), distinct.end());
  auto quantile = [&](double q) { return etas[static_cast<std::size_t>(q * (etas.size() - 1) + 0.5)]; };

  std::vector<SigmoidParams> starts;
  const double x0_choices[] = {quantile(0.5), quantile(0.25), quantile(0.75), quantile(0.0), quantile(1.0)};
  for (std::size_t round = 0; static_cast<int>(starts.size()) < config.multi_starts; ++round) {
    const double x0 = x0_choices[round % 5];
    for (double kmag : {8.0, 2.0})
      for (double cs : {1.0, -1.0})
        for (double ks : {1.0, -1.0})
          for (double y0 : {zmin, zmax})
            if (static_cast<int>(starts.size()) < config.multi_starts)
              starts.push_back({cs * range, std::min(ks * kmag, config.k_bound), x0, y0});
  }

  std::vector<StartResult> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { results[i] = levenberg_marquardt(starts[i], z, config); });

  std::size_t best = results.size();
  for (std::size_t i = 0; i < results.size(); ++i)
    if (results[i].ok && (best == results.size() || results[i].loss < results[best].loss)) best = i;
  if (best == results.size()) throw Error("fit_sigmoid: every solver start diverged");

  SigmoidFit fit;
  const SigmoidParams& q = results[best].params;
  fit.params = {q.c * scale, q.k, q.x0, q.y0 * scale + mean};
  fit.residual = sse(fit.params, points);
  fit.norm_mean = mean;
  fit.norm_scale = scale;
  fit.distinct_levels = static_cast<int>(distinct.size());
  if (distinct.size() < 6)
    fit.warnings.push_back("levels < 6: " + std::to_string(distinct.size()) +
                           " distinct eta values for 4 curve parameters; residual " +
                           format_real(fit.residual));
  return fit;
}

void RewardRegressionConfig::validate() const {
  if (epochs < 1) throw ValidationError("reward.epochs must be >= 1");
  if (minibatch < 1) throw ValidationError("reward.minibatch must be >= 1");
  if (!(step_size > 0.0)) throw ValidationError("reward.step_size must be > 0");
  if (hidden_layers < 0 || hidden_width < 1) throw ValidationError("reward model shape invalid");
}

double predicted_return(const Env& env, const RewardModel& model, const Trajectory& t) {
  double sum = 0.0;
  for (std::size_t i = 0; i < t.length(); ++i) sum += model.value(env, t.states[i], t.actions[i]);
  return sum;
}

namespace {

using Encoded = std::vector<std::vector<Vector>>;

Encoded encode_all(const Env& env, const std::vector<Trajectory>& trajectories) {
  Encoded out(trajectories.size());
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    for (std::size_t t = 0; t < trajectories[i].length(); ++t)
      out[i].push_back(env.encode(trajectories[i].states[t], trajectories[i].actions[t]));
  return out;
}

double predicted(const RewardModel& model, const std::vector<Vector>& xs) {
  double s = 0.0;
  for (const auto& x : xs) s += model(x);
  return s;
}

double mean_loss(const RewardModel& model, const Encoded& xs, const std::vector<double>& targets) {
  std::vector<double> sq(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    const double r = predicted(model, xs[i]) - targets[i];
    sq[i] = r * r;
  });
  double s = 0.0;
  for (double v : sq) s += v;
  return s / static_cast<double>(xs.size());
}

// d/dtheta of mean over `items` of (sum_t R - target)^2.
Vector batch_gradient(const RewardModel& model, const Encoded& xs, const std::vector<double>& targets,
                      const std::vector<std::size_t>& items) {
  std::vector<Vector> parts(items.size());
  parallel_for(items.size(), [&](std::size_t j) {
    const std::size_t i = items[j];
    Vector g = Vector::Zero(model.params.size());
    const double r = predicted(model, xs[i]) - targets[i];
    const Vector up = Vector::Constant(1, 2.0 * r);
    for (const auto& x : xs[i]) accumulate_gradient<double>(model.spec, model.params, x, up, g);
    parts[j] = std::move(g);
  });
  Vector total = Vector::Zero(model.params.size());
  for (const auto& p : parts) total += p;
  return total / static_cast<double>(items.size());
}

}  // namespace

Vector regression_gradient(const Env& env, const std::vector<Trajectory>& trajectories,
                           const std::vector<double>& targets, const RewardModel& model) {
  const Encoded xs = encode_all(env, trajectories);
  std::vector<std::size_t> all(trajectories.size());
  std::iota(all.begin(), all.end(), 0);
  return batch_gradient(model, xs, targets, all);
}

RewardRegressionResult reward_regression(const Env& env, const DegradationDataset& dataset,
                                         const SigmoidParams& sigmoid,
                                         const RewardRegressionConfig& config, std::uint64_t seed,
                                         RewardModel initial) {
  config.validate();
  dataset.validate();
  if (!sigmoid.finite()) throw ValidationError("reward_regression: sigmoid parameters not finite");
  if (dataset.trajectories.empty()) throw ValidationError("reward_regression: empty dataset");

  RewardRegressionResult result;
  const std::size_t n = dataset.trajectories.size();
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = sigmoid_eval(sigmoid, dataset.trajectories[i].eta);
  if (config.normalize_targets) {
    double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double t : targets) var += (t - mean) * (t - mean);
    const double scale = var > 0.0 ? std::sqrt(var / static_cast<double>(n)) : 1.0;
    for (double& t : targets) t = (t - mean) / scale;
    result.target_mean = mean;
    result.target_scale = scale;
  }

  const Encoded xs = encode_all(env, dataset.trajectories);
  RewardModel model = std::move(initial);
  AdamState<double> adam(model.params.size(), config.step_size);
  Rng rng(derive_seed(seed, "reward-regression"));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double prev = mean_loss(model, xs, targets);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Vector saved = model.params;
    shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.minibatch)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.minibatch));
      const std::vector<std::size_t> items(order.begin() + static_cast<long>(start),
                                           order.begin() + static_cast<long>(stop));
      const Vector g = batch_gradient(model, xs, targets, items);
      try {
        optimizer_step<double>(adam, model.params, g);
      } catch (const DivergenceError&) {
        throw DivergenceError("reward regression diverged at epoch " + std::to_string(epoch));
      }
    }
    const double loss = mean_loss(model, xs, targets);
    if (!std::isfinite(loss)) throw DivergenceError("reward regression diverged at epoch " + std::to_string(epoch));
    if (loss > prev) {
      model.params = saved;
      adam = AdamState<double>(model.params.size(), std::max(0.5 * adam.step_size, 1e-12));
    } else {
      prev = loss;
    }
    result.loss_curve.push_back(prev);
  }
  result.model = std::move(model);
  return result;
}

RewardRegressionResult reward_regression(const Env& env, const DegradationDataset& dataset,
                                         const SigmoidParams& sigmoid,
                                         const RewardRegressionConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, "reward-init"));
  return reward_regression(env, dataset, sigmoid, config, seed,
                           RewardModel::make(env, config.hidden_layers, config.hidden_width, rng));
}

double ssrr_loss(const Env& env, const RewardModel& model, const DegradationDataset& dataset,
                 const SigmoidParams& sigmoid) {
  if (dataset.trajectories.empty()) throw Error("ssrr_loss: empty dataset");
  double s = 0.0;
  for (const auto& t : dataset.trajectories) {
    const double r = predicted_return(env, model, t) - sigmoid_eval(sigmoid, t.eta);
    s += r * r;
  }
  return s / static_cast<double>(dataset.trajectories.size());
}

}  // namespace s3rr
