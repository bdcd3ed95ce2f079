#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "s3rr/rl.hpp"

namespace s3rr {

// Sample Pearson correlation. Throws "undefined correlation" when either side
// has zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Affine map sending [min(values), max(values)] onto [lo, hi].
std::vector<double> normalize_to_range(const std::vector<double>& values, double lo, double hi);

enum class Split { demo, degradation, test };
std::string_view to_string(Split s);

struct SplitRef {
  Split split;
  const std::vector<Trajectory>& trajectories;
};

struct CorrelationReport {
  double pearson_r = 0.0;
  std::size_t n = 0;
  std::vector<Split> tags;
  std::vector<double> gt_returns;         // undiscounted ground-truth sums
  std::vector<double> predicted_returns;  // undiscounted learned-reward sums
  std::vector<double> normalized_predicted;  // mapped onto the pooled gt range
};

// Returns of every trajectory under both rewards, pooled across splits.
// Trajectories without gt_return are rejected.
CorrelationReport correlation_report(const Env& env, const RewardFn& learned,
                                     const std::vector<SplitRef>& splits);

std::string report_csv(const CorrelationReport& report);
nlohmann::json report_json(const CorrelationReport& report);

struct PolicyReport {
  double demo_mean = 0.0;
  double demo_best = 0.0;
  double policy_mean = 0.0;
  int m = 0;
  // 100 * (1 + (policy - ref) / |ref|); equals 100 * policy / ref for ref > 0.
  double percent_of_best = 0.0;
  double percent_of_mean = 0.0;
};

double percent_of(double value, double reference);

// m fresh ground-truth rollouts; rollout j uses derive_seed(seed, "policy-eval", j).
PolicyReport policy_report(const Env& env, const ActionSampler& policy,
                           const std::vector<Trajectory>& demos, int m, std::uint64_t seed);
nlohmann::json report_json(const PolicyReport& report);

struct TestSplitConfig {
  std::vector<double> etas{0.125, 0.375, 0.625, 0.875};
  int per_eta = 5;
  // Snapshots of a policy trained on the ground truth, taken after these
  // iteration counts.
  std::vector<int> checkpoint_iterations{0, 5, 15, 40};
  int per_checkpoint = 5;
  RLConfig rl;

  void validate() const;
};

// Unseen trajectories: eta mixtures of `policy` at off-grid levels plus
// rollouts of partially trained ground-truth policies. Checkpoint rollouts get
// eta = 1 - iteration / max(iterations).
std::vector<Trajectory> generate_test_split(const Env& env, const StochasticPolicy& policy,
                                            const TestSplitConfig& config, std::uint64_t seed);

struct Summary {
  double median = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
};
Summary summarize(std::vector<double> values);

}  // namespace s3rr
