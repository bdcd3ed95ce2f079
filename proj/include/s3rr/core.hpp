#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace s3rr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invariant breach on a domain object or config.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t record)
      : Error(what), record_(record) {}
  std::size_t record() const { return record_; }

 private:
  std::size_t record_;
};

// Training produced non-finite parameters.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

struct SpaceSpec {
  enum class Kind { continuous, discrete };

  Kind kind = Kind::continuous;
  int dim = 1;          // continuous only
  int cardinality = 0;  // discrete only
  Vector lo;
  Vector hi;

  static SpaceSpec box(Vector lo, Vector hi);
  static SpaceSpec finite(int cardinality);

  bool is_discrete() const { return kind == Kind::discrete; }
  // Width of the vector used to represent one element of the space.
  int value_dim() const { return is_discrete() ? 1 : dim; }
  void validate() const;
  bool contains(const Vector& value) const;
  Vector clip(const Vector& value) const;
};

// One rollout. states[t] is the state at which actions[t] was taken; the terminal
// state is not stored. Actions are stored as emitted by the policy (before
// clipping to the action box). Discrete actions are one-entry vectors holding
// the index.
struct Trajectory {
  double eta = 0.0;
  std::vector<Vector> states;
  std::vector<Vector> actions;
  std::vector<double> initial_rewards;
  std::optional<double> gt_return;

  std::size_t length() const { return states.size(); }
  void validate() const;
};

enum class Provenance { demo, noise, demo_count, capacity, sparsity, test };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct DegradationDataset {
  std::string env_id;
  std::vector<Trajectory> trajectories;
  std::vector<double> levels;
  Provenance provenance = Provenance::noise;
  // Control value (demo count, layer count, lambda or eta) per entry of levels.
  std::vector<double> controls;
  std::uint64_t seed = 0;
  std::string scorer_digest;

  // Recomputes levels as the sorted distinct etas of the trajectories.
  void refresh_levels();
  // Degradation provenances need at least two levels; demo and test sets do not.
  void validate() const;
};

struct SigmoidParams {
  double c = 0.0;
  double k = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;

  bool finite() const;
};

struct RunManifest {
  std::uint64_t seed = 0;
  std::string config_digest;
  // stage name -> (artifact path -> content digest)
  std::map<std::string, std::map<std::string, std::string>> stage_outputs;
  std::vector<std::string> warnings;
};

// Undiscounted sum of the per-step initial reward estimates.
double trajectory_return(const Trajectory& t);

// Exact equality including sizes (Eigen's == asserts on size mismatch).
bool same_values(const Vector& a, const Vector& b);
bool operator==(const SpaceSpec& a, const SpaceSpec& b);
bool operator==(const Trajectory& a, const Trajectory& b);
bool operator==(const DegradationDataset& a, const DegradationDataset& b);

// Shortest decimal that round-trips to the same double.
std::string format_real(double x);

// 64-bit FNV-1a, hex encoded.
std::string digest(std::string_view bytes);

}  // namespace s3rr
