#include "s3rr/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "s3rr/parallel.hpp"

namespace s3rr {

std::string_view to_string(DegradationMethod m) {
  switch (m) {
    case DegradationMethod::noise: return "noise";
    case DegradationMethod::demo_count: return "demo_count";
    case DegradationMethod::capacity: return "capacity";
    case DegradationMethod::sparsity: return "sparsity";
  }
  return "unknown";
}

DegradationMethod method_from_string(std::string_view s) {
  for (auto m : {DegradationMethod::noise, DegradationMethod::demo_count, DegradationMethod::capacity,
                 DegradationMethod::sparsity})
    if (to_string(m) == s) return m;
  throw ValidationError("unknown degradation method '" + std::string(s) + "'");
}

Provenance provenance_of(DegradationMethod m) {
  switch (m) {
    case DegradationMethod::noise: return Provenance::noise;
    case DegradationMethod::demo_count: return Provenance::demo_count;
    case DegradationMethod::capacity: return Provenance::capacity;
    case DegradationMethod::sparsity: return Provenance::sparsity;
  }
  return Provenance::noise;
}

void DegradationPlan::validate() const {
  if (trajectories_per_level < 1) throw ValidationError("trajectories_per_level must be >= 1");
  if (method == DegradationMethod::noise) {
    if (n_levels < 2) throw ValidationError("noise plan needs n_levels >= 2");
    return;
  }
  eta_from_control(method, controls);
}

std::vector<double> eta_grid_noise(int n_levels) {
  if (n_levels < 2) throw ValidationError("eta_grid_noise: n_levels must be >= 2");
  std::vector<double> etas(static_cast<std::size_t>(n_levels));
  for (int i = 0; i < n_levels; ++i) etas[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n_levels - 1);
  return etas;
}

std::vector<double> eta_from_control(DegradationMethod method, const std::vector<double>& controls) {
  if (controls.size() < 2) throw ValidationError("eta_from_control: at least 2 controls required");
  if (std::set<double>(controls.begin(), controls.end()).size() != controls.size())
    throw ValidationError("duplicate controls");
  const std::size_t m = controls.size();
  std::vector<double> etas(m);
  switch (method) {
    case DegradationMethod::demo_count: {
      const auto [lo, hi] = std::minmax_element(controls.begin(), controls.end());
      for (std::size_t i = 0; i < m; ++i) {
        if (controls[i] < 1 || controls[i] != std::floor(controls[i]))
          throw ValidationError("demo counts must be positive integers");
        etas[i] = (*hi - controls[i]) / (*hi - *lo);
      }
      return etas;
    }
    case DegradationMethod::capacity:
    case DegradationMethod::sparsity: {
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), 0);
      if (method == DegradationMethod::capacity) {
        for (double c : controls)
          if (c < 0 || c != std::floor(c)) throw ValidationError("layer counts must be non-negative integers");
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return controls[a] < controls[b]; });
      } else {
        for (double c : controls)
          if (!(c >= 0.0)) throw ValidationError("lambda values must be >= 0");
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return controls[a] > controls[b]; });
      }
      for (std::size_t r = 0; r < m; ++r)
        etas[order[r]] = 1.0 - static_cast<double>(r) / static_cast<double>(m - 1);
      return etas;
    }
    case DegradationMethod::noise:
      break;
  }
  throw ValidationError("eta_from_control: noise levels come from eta_grid_noise");
}

DegradationDataset generate_noise_dataset(const Env& env, const AirlResult& airl,
                                          const std::vector<double>& etas, int per_level,
                                          std::uint64_t seed) {
  if (per_level < 1) throw ValidationError("per_level must be >= 1");
  const std::size_t n = etas.size() * static_cast<std::size_t>(per_level);
  std::vector<Trajectory> out(n);
  parallel_for(n, [&](std::size_t k) {
    const double eta = etas[k / static_cast<std::size_t>(per_level)];
    Rng rng(derive_seed(seed, "noise-level", k));
    Trajectory t = rollout(env, as_mixture_sampler(env, airl.policy, eta), rng);
    t.eta = eta;
    out[k] = score_trajectory(env, airl.reward_model, std::move(t));
  });
  DegradationDataset d;
  d.env_id = env.spec().id;
  d.trajectories = std::move(out);
  d.provenance = Provenance::noise;
  d.seed = seed;
  d.scorer_digest = airl.reward_model.digest();
  d.refresh_levels();
  d.controls = d.levels;
  d.validate();
  return d;
}

AirlConfig config_for_control(DegradationMethod method, const AirlConfig& base, double control) {
  AirlConfig c = base;
  switch (method) {
    case DegradationMethod::demo_count: c.demo_subset_size = static_cast<int>(control); break;
    case DegradationMethod::capacity:
      c.disc_layers = static_cast<int>(control);
      c.policy_layers = static_cast<int>(control);
      break;
    case DegradationMethod::sparsity: c.lambda = control; break;
    case DegradationMethod::noise: throw ValidationError("noise plans have no AIRL control knob");
  }
  return c;
}

std::size_t SystematicRuns::scorer_index() const {
  return static_cast<std::size_t>(std::min_element(etas.begin(), etas.end()) - etas.begin());
}

SystematicRuns train_systematic_runs(const Env& env, const std::vector<Trajectory>& demos,
                                     const DegradationPlan& plan, const AirlConfig& base,
                                     std::uint64_t seed) {
  plan.validate();
  if (plan.method == DegradationMethod::noise)
    throw ValidationError("train_systematic_runs: plan method must be systematic");
  SystematicRuns runs;
  runs.method = plan.method;
  runs.controls = plan.controls;
  runs.etas = eta_from_control(plan.method, plan.controls);
  for (double c : plan.controls) runs.configs.push_back(config_for_control(plan.method, base, c));
  runs.runs.resize(plan.controls.size());
  parallel_for(plan.controls.size(), [&](std::size_t i) {
    try {
      runs.runs[i] = train_airl(env, demos, runs.configs[i], derive_seed(seed, "airl-run", i));
    } catch (const Error& e) {
      throw DivergenceError("AIRL run for control " + format_real(plan.controls[i]) + " failed: " + e.what());
    }
  });
  return runs;
}

DegradationDataset systematic_dataset_from_runs(const Env& env, const SystematicRuns& runs,
                                                int per_level, std::uint64_t seed) {
  if (per_level < 1) throw ValidationError("per_level must be >= 1");
  const RewardModel& scorer = runs.runs.at(runs.scorer_index()).reward_model;
  const std::size_t n = runs.runs.size() * static_cast<std::size_t>(per_level);
  std::vector<Trajectory> out(n);
  parallel_for(n, [&](std::size_t k) {
    const std::size_t level = k / static_cast<std::size_t>(per_level);
    Rng rng(derive_seed(seed, "systematic-level", k));
    Trajectory t = rollout(env, as_sampler(env, runs.runs[level].policy), rng);
    t.eta = runs.etas[level];
    out[k] = score_trajectory(env, scorer, std::move(t));
  });
  DegradationDataset d;
  d.env_id = env.spec().id;
  d.trajectories = std::move(out);
  d.provenance = provenance_of(runs.method);
  d.seed = seed;
  d.scorer_digest = scorer.digest();
  d.refresh_levels();
  for (double level : d.levels) {
    const auto it = std::find(runs.etas.begin(), runs.etas.end(), level);
    d.controls.push_back(runs.controls[static_cast<std::size_t>(it - runs.etas.begin())]);
  }
  d.validate();
  return d;
}

DegradationDataset generate_systematic_dataset(const Env& env, const std::vector<Trajectory>& demos,
                                               const DegradationPlan& plan, const AirlConfig& base,
                                               std::uint64_t seed) {
  const SystematicRuns runs = train_systematic_runs(env, demos, plan, base, derive_seed(seed, "runs"));
  return systematic_dataset_from_runs(env, runs, plan.trajectories_per_level, derive_seed(seed, "rollouts"));
}

}  // namespace s3rr
