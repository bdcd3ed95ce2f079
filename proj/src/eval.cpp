#include "s3rr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "s3rr/parallel.hpp"

namespace s3rr {

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ValidationError("pearson: length mismatch");
  if (xs.size() < 2) throw ValidationError("pearson: at least 2 samples required");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error("undefined correlation");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> normalize_to_range(const std::vector<double>& values, double lo, double hi) {
  if (values.empty()) throw ValidationError("normalize_to_range: no values");
  if (!(hi > lo)) throw ValidationError("normalize_to_range: target_hi must exceed target_lo");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (!(*mx > *mn)) throw ValidationError("normalize_to_range: degenerate input range");
  const double a = *mn, b = *mx;
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == a) out[i] = lo;
    else if (values[i] == b) out[i] = hi;
    else out[i] = lo + (values[i] - a) / (b - a) * (hi - lo);
  }
  return out;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::demo: return "demo";
    case Split::degradation: return "degradation";
    case Split::test: return "test";
  }
  return "unknown";
}

CorrelationReport correlation_report(const Env& env, const RewardFn& learned,
                                     const std::vector<SplitRef>& splits) {
  CorrelationReport r;
  std::vector<const Trajectory*> all;
  for (const auto& s : splits)
    for (const auto& t : s.trajectories) {
      if (!t.gt_return) throw ValidationError("correlation_report: trajectory without gt_return");
      all.push_back(&t);
      r.tags.push_back(s.split);
    }
  r.n = all.size();
  r.gt_returns.resize(r.n);
  r.predicted_returns.resize(r.n);
  parallel_for(r.n, [&](std::size_t i) {
    const Trajectory& t = *all[i];
    double gt = 0.0, pred = 0.0;
    for (std::size_t k = 0; k < t.length(); ++k) {
      gt += env.reward(t.states[k], t.actions[k]);
      pred += learned(t.states[k], t.actions[k]);
    }
    r.gt_returns[i] = gt;
    r.predicted_returns[i] = pred;
  });
  r.pearson_r = pearson(r.gt_returns, r.predicted_returns);
  const auto [lo, hi] = std::minmax_element(r.gt_returns.begin(), r.gt_returns.end());
  r.normalized_predicted = normalize_to_range(r.predicted_returns, *lo, *hi);
  return r;
}

std::string report_csv(const CorrelationReport& report) {
  std::ostringstream os;
  os << "split,gt_return,predicted_return,normalized_predicted\n";
  for (std::size_t i = 0; i < report.n; ++i)
    os << to_string(report.tags[i]) << ',' << format_real(report.gt_returns[i]) << ','
       << format_real(report.predicted_returns[i]) << ',' << format_real(report.normalized_predicted[i])
       << '\n';
  return os.str();
}

nlohmann::json report_json(const CorrelationReport& report) {
  nlohmann::json j;
  j["pearson_r"] = report.pearson_r;
  j["n"] = report.n;
  nlohmann::json per = nlohmann::json::object();
  for (Split s : {Split::demo, Split::degradation, Split::test}) {
    std::vector<double> g, p;
    for (std::size_t i = 0; i < report.n; ++i)
      if (report.tags[i] == s) {
        g.push_back(report.gt_returns[i]);
        p.push_back(report.predicted_returns[i]);
      }
    if (g.empty()) continue;
    nlohmann::json e;
    e["n"] = g.size();
    try {
      e["pearson_r"] = pearson(g, p);
    } catch (const Error&) {
      e["pearson_r"] = nullptr;
    }
    per[std::string(to_string(s))] = e;
  }
  j["splits"] = per;
  return j;
}

double percent_of(double value, double reference) {
  if (reference == 0.0) throw ValidationError("percent_of: zero reference");
  return 100.0 * (1.0 + (value - reference) / std::abs(reference));
}

PolicyReport policy_report(const Env& env, const ActionSampler& policy,
                           const std::vector<Trajectory>& demos, int m, std::uint64_t seed) {
  if (m < 1) throw ValidationError("policy_report: m must be >= 1");
  if (demos.empty()) throw ValidationError("policy_report: no demonstrations");
  PolicyReport r;
  r.m = m;
  r.demo_best = -std::numeric_limits<double>::infinity();
  for (const auto& d : demos) {
    if (!d.gt_return) throw ValidationError("policy_report: demonstration without gt_return");
    r.demo_mean += *d.gt_return;
    r.demo_best = std::max(r.demo_best, *d.gt_return);
  }
  r.demo_mean /= static_cast<double>(demos.size());
  std::vector<double> returns(static_cast<std::size_t>(m));
  parallel_for(returns.size(), [&](std::size_t j) {
    Rng rng(derive_seed(seed, "policy-eval", j));
    returns[j] = *rollout(env, policy, rng).gt_return;
  });
  for (double v : returns) r.policy_mean += v;
  r.policy_mean /= static_cast<double>(m);
  r.percent_of_best = percent_of(r.policy_mean, r.demo_best);
  r.percent_of_mean = percent_of(r.policy_mean, r.demo_mean);
  return r;
}

nlohmann::json report_json(const PolicyReport& r) {
  return {{"demo_mean", r.demo_mean},       {"demo_best", r.demo_best},
          {"policy_mean", r.policy_mean},   {"m", r.m},
          {"percent_of_best", r.percent_of_best}, {"percent_of_mean", r.percent_of_mean}};
}

void TestSplitConfig::validate() const {
  for (double e : etas)
    if (!(e >= 0.0 && e <= 1.0)) throw ValidationError("eval.test.etas must lie in [0,1]");
  if (per_eta < 0 || per_checkpoint < 0) throw ValidationError("eval.test counts must be >= 0");
  for (int c : checkpoint_iterations)
    if (c < 0) throw ValidationError("eval.test.checkpoint_iterations must be >= 0");
  if (!checkpoint_iterations.empty()) rl.validate();
}

std::vector<Trajectory> generate_test_split(const Env& env, const StochasticPolicy& policy,
                                            const TestSplitConfig& config, std::uint64_t seed) {
  config.validate();
  std::vector<Trajectory> out;
  const auto per_eta = static_cast<std::size_t>(config.per_eta);
  std::vector<Trajectory> mixed(config.etas.size() * per_eta);
  parallel_for(mixed.size(), [&](std::size_t k) {
    const double eta = config.etas[k / per_eta];
    Rng rng(derive_seed(seed, "test-eta", k));
    mixed[k] = rollout(env, as_mixture_sampler(env, policy, eta), rng);
    mixed[k].eta = eta;
  });
  out.insert(out.end(), mixed.begin(), mixed.end());

  if (config.checkpoint_iterations.empty() || config.per_checkpoint == 0) return out;
  std::vector<int> marks = config.checkpoint_iterations;
  std::sort(marks.begin(), marks.end());
  const int last = marks.back();
  Rng init(derive_seed(seed, "test-policy-init"));
  PolicyTrainer trainer(env,
                        StochasticPolicy::make(env, config.rl.policy_layers, config.rl.policy_width, init,
                                               config.rl.init_log_std),
                        config.rl, derive_seed(seed, "test-policy"));
  const RewardFn gt = ground_truth(env);
  std::size_t next = 0;
  for (int it = 0; it <= last; ++it) {
    while (next < marks.size() && marks[next] == it) {
      const double eta = last > 0 ? 1.0 - static_cast<double>(it) / last : 0.0;
      for (int j = 0; j < config.per_checkpoint; ++j) {
        Rng rng(derive_seed(seed, "test-checkpoint", next * 1000003u + static_cast<std::size_t>(j)));
        Trajectory t = rollout(env, as_sampler(env, trainer.policy()), rng);
        t.eta = eta;
        out.push_back(std::move(t));
      }
      ++next;
    }
    if (it < last) trainer.iterate(gt);
  }
  return out;
}

Summary summarize(std::vector<double> values) {
  if (values.empty()) throw ValidationError("summarize: no values");
  Summary s;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

}  // namespace s3rr
