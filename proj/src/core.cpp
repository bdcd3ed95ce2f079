#include "s3rr/core.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdio>

namespace s3rr {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

SpaceSpec SpaceSpec::box(Vector lo, Vector hi) {
  SpaceSpec s;
  s.kind = Kind::continuous;
  s.dim = static_cast<int>(lo.size());
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  s.validate();
  return s;
}

SpaceSpec SpaceSpec::finite(int cardinality) {
  SpaceSpec s;
  s.kind = Kind::discrete;
  s.dim = 1;
  s.cardinality = cardinality;
  s.validate();
  return s;
}

void SpaceSpec::validate() const {
  if (is_discrete()) {
    if (cardinality < 2) throw ValidationError("discrete space needs cardinality >= 2");
    return;
  }
  if (dim < 1) throw ValidationError("continuous space needs dim >= 1");
  if (lo.size() != dim || hi.size() != dim)
    throw ValidationError("continuous space bounds must match dim");
  for (int i = 0; i < dim; ++i)
    if (!(lo[i] < hi[i])) throw ValidationError("space bounds need lo < hi");
}

bool SpaceSpec::contains(const Vector& value) const {
  if (value.size() != value_dim()) return false;
  if (is_discrete()) {
    const double a = value[0];
    return a == std::floor(a) && a >= 0 && a < cardinality;
  }
  return (value.array() >= lo.array()).all() && (value.array() <= hi.array()).all();
}

Vector SpaceSpec::clip(const Vector& value) const {
  if (is_discrete()) return value;
  return value.cwiseMax(lo).cwiseMin(hi);
}

void Trajectory::validate() const {
  if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0)
    throw ValidationError("eta out of [0,1]");
  if (states.size() != actions.size())
    throw ValidationError("trajectory states and actions differ in length");
  if (!initial_rewards.empty() && initial_rewards.size() != states.size())
    throw ValidationError("trajectory initial_rewards length differs from states");
  for (const auto& s : states)
    if (!all_finite(s)) throw ValidationError("non-finite state entry");
  for (const auto& a : actions)
    if (!all_finite(a)) throw ValidationError("non-finite action entry");
  for (double r : initial_rewards)
    if (!std::isfinite(r)) throw ValidationError("non-finite initial reward");
  if (gt_return && !std::isfinite(*gt_return)) throw ValidationError("non-finite gt_return");
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::demo: return "demo";
    case Provenance::noise: return "noise";
    case Provenance::demo_count: return "demo_count";
    case Provenance::capacity: return "capacity";
    case Provenance::sparsity: return "sparsity";
    case Provenance::test: return "test";
  }
  return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
  for (auto p : {Provenance::demo, Provenance::noise, Provenance::demo_count,
                 Provenance::capacity, Provenance::sparsity, Provenance::test})
    if (to_string(p) == s) return p;
  throw ValidationError("unknown provenance '" + std::string(s) + "'");
}

void DegradationDataset::refresh_levels() {
  levels.clear();
  for (const auto& t : trajectories) levels.push_back(t.eta);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
}

void DegradationDataset::validate() const {
  const bool needs_levels = provenance != Provenance::demo && provenance != Provenance::test;
  if (needs_levels && levels.size() < 2) throw ValidationError(">=2 levels required");
  if (!std::is_sorted(levels.begin(), levels.end()) ||
      std::adjacent_find(levels.begin(), levels.end()) != levels.end())
    throw ValidationError("levels must be sorted and distinct");
  for (double l : levels)
    if (!std::isfinite(l) || l < 0.0 || l > 1.0) throw ValidationError("eta out of [0,1]");
  if (!controls.empty() && controls.size() != levels.size())
    throw ValidationError("controls must have one entry per level");
  std::vector<std::size_t> per_level(levels.size(), 0);
  for (const auto& t : trajectories) {
    t.validate();
    auto it = std::lower_bound(levels.begin(), levels.end(), t.eta);
    if (it == levels.end() || *it != t.eta)
      throw ValidationError("trajectory eta not among dataset levels");
    ++per_level[static_cast<std::size_t>(it - levels.begin())];
  }
  if (needs_levels)
    for (std::size_t n : per_level)
      if (n == 0) throw ValidationError("every level needs at least one trajectory");
}

bool SigmoidParams::finite() const {
  return std::isfinite(c) && std::isfinite(k) && std::isfinite(x0) && std::isfinite(y0);
}

double trajectory_return(const Trajectory& t) {
  if (t.initial_rewards.empty()) throw Error("trajectory_return: empty trajectory");
  double sum = 0.0;
  for (double r : t.initial_rewards) sum += r;
  return sum;
}

bool same_values(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.size() == 0 || a == b);
}

bool operator==(const SpaceSpec& a, const SpaceSpec& b) {
  return a.kind == b.kind && a.dim == b.dim && a.cardinality == b.cardinality &&
         same_values(a.lo, b.lo) && same_values(a.hi, b.hi);
}

bool operator==(const Trajectory& a, const Trajectory& b) {
  auto same_seq = [](const std::vector<Vector>& x, const std::vector<Vector>& y) {
    return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin(), same_values);
  };
  return a.eta == b.eta && same_seq(a.states, b.states) && same_seq(a.actions, b.actions) &&
         a.initial_rewards == b.initial_rewards && a.gt_return == b.gt_return;
}

bool operator==(const DegradationDataset& a, const DegradationDataset& b) {
  return a.env_id == b.env_id && a.trajectories == b.trajectories && a.levels == b.levels &&
         a.provenance == b.provenance && a.controls == b.controls && a.seed == b.seed &&
         a.scorer_digest == b.scorer_digest;
}

std::string format_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error("format_real failed");
  return std::string(buf, end);
}

std::string digest(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace s3rr
