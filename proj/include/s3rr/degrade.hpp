#pragma once

#include <vector>

#include "s3rr/airl.hpp"

namespace s3rr {

enum class DegradationMethod { noise, demo_count, capacity, sparsity };

std::string_view to_string(DegradationMethod m);
DegradationMethod method_from_string(std::string_view s);
Provenance provenance_of(DegradationMethod m);

struct DegradationPlan {
  DegradationMethod method = DegradationMethod::noise;
  // noise: number of equally spaced eta levels. Systematic methods: one
  // control value per level (demo counts, hidden-layer counts or L1 weights).
  int n_levels = 21;
  std::vector<double> controls;
  int trajectories_per_level = 10;

  void validate() const;
};

// eta_i = i / (n - 1).
std::vector<double> eta_grid_noise(int n_levels);

// Returns one eta per control, in input order.
//   demo_count: (max - n) / (max - min)
//   capacity:   rank by layer count ascending -> 1.0 ... 0.0 equally spaced
//   sparsity:   rank by lambda descending     -> 1.0 ... 0.0 equally spaced
std::vector<double> eta_from_control(DegradationMethod method, const std::vector<double>& controls);

// Rollouts of the eta-mixture of the adversarial policy, all scored by its
// reward model. Level i, rollout j uses derive_seed(seed, "noise-level", i * per_level + j).
DegradationDataset generate_noise_dataset(const Env& env, const AirlResult& airl,
                                          const std::vector<double>& etas, int per_level,
                                          std::uint64_t seed);

// base with the single knob for `method` set to `control`.
AirlConfig config_for_control(DegradationMethod method, const AirlConfig& base, double control);

struct SystematicRuns {
  DegradationMethod method = DegradationMethod::demo_count;
  std::vector<double> controls;
  std::vector<double> etas;
  std::vector<AirlConfig> configs;
  std::vector<AirlResult> runs;

  // The least-degraded run (eta = 0); its reward model scores every level.
  std::size_t scorer_index() const;
};

// Run i uses derive_seed(seed, "airl-run", i).
SystematicRuns train_systematic_runs(const Env& env, const std::vector<Trajectory>& demos,
                                     const DegradationPlan& plan, const AirlConfig& base,
                                     std::uint64_t seed);

DegradationDataset systematic_dataset_from_runs(const Env& env, const SystematicRuns& runs,
                                                int per_level, std::uint64_t seed);

DegradationDataset generate_systematic_dataset(const Env& env, const std::vector<Trajectory>& demos,
                                               const DegradationPlan& plan, const AirlConfig& base,
                                               std::uint64_t seed);

}  // namespace s3rr
