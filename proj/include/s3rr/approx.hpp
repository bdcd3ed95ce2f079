#pragma once

// Fixed-topology tanh MLPs over a flat parameter vector, with exact
// backpropagation, an L1 penalty, and a bias-corrected Adam step.
//
// Parameter layout: for each affine layer in order, the weight matrix
// (out x in, column major) followed by the bias vector (out).

#include <cmath>
#include <cstddef>
#include <vector>

#include "s3rr/core.hpp"
#include "s3rr/rng.hpp"

namespace s3rr {

struct ApproximatorSpec {
  enum class Output { identity, logits };

  int input_dim = 1;
  int output_dim = 1;
  int hidden_layers = 0;
  int hidden_width = 1;
  Output output = Output::identity;

  struct Layer {
    int in;
    int out;
    std::size_t offset;  // start of the weight block
  };

  std::vector<Layer> layers() const {
    std::vector<Layer> out;
    std::size_t offset = 0;
    int in = input_dim;
    for (int l = 0; l <= hidden_layers; ++l) {
      const int width = (l == hidden_layers) ? output_dim : hidden_width;
      out.push_back({in, width, offset});
      offset += static_cast<std::size_t>(in + 1) * static_cast<std::size_t>(width);
      in = width;
    }
    return out;
  }

  // Sum over affine layers of (in + 1) * out.
  std::size_t param_count() const {
    const auto h = static_cast<std::size_t>(hidden_width);
    const auto i = static_cast<std::size_t>(input_dim);
    const auto o = static_cast<std::size_t>(output_dim);
    if (hidden_layers == 0) return (i + 1) * o;
    return (i + 1) * h + static_cast<std::size_t>(hidden_layers - 1) * (h + 1) * h + (h + 1) * o;
  }

  void validate() const {
    if (input_dim < 1 || output_dim < 1) throw ValidationError("approximator dims must be positive");
    if (hidden_layers < 0) throw ValidationError("hidden_layers must be >= 0");
    if (hidden_width < 1) throw ValidationError("hidden_width must be positive");
  }

  bool operator==(const ApproximatorSpec&) const = default;
};

namespace detail {

template <typename Scalar>
void check_dims(const ApproximatorSpec& spec, Eigen::Index params, Eigen::Index input) {
  if (static_cast<std::size_t>(params) != spec.param_count())
    throw Error("approximator: parameter vector has wrong length");
  if (input != spec.input_dim) throw Error("approximator: input dimension mismatch");
}

// Hidden activations h_0 = input, h_l = tanh(W_l h_{l-1} + b_l); returns output.
template <typename Scalar>
VectorX<Scalar> forward_cached(const ApproximatorSpec& spec,
                               const Eigen::Ref<const VectorX<Scalar>>& params,
                               const Eigen::Ref<const VectorX<Scalar>>& input,
                               std::vector<VectorX<Scalar>>& hidden) {
  using MapMat = Eigen::Map<const MatrixX<Scalar>>;
  using MapVec = Eigen::Map<const VectorX<Scalar>>;
  const auto layers = spec.layers();
  hidden.resize(layers.size());
  hidden[0] = input;
  VectorX<Scalar> z;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    MapMat W(params.data() + L.offset, L.out, L.in);
    MapVec b(params.data() + L.offset + static_cast<std::size_t>(L.out) * L.in, L.out);
    z.noalias() = W * hidden[l];
    z += b;
    if (l + 1 < layers.size()) hidden[l + 1] = z.array().tanh().matrix();
  }
  return z;
}

}  // namespace detail

template <typename Scalar>
VectorX<Scalar> forward(const ApproximatorSpec& spec,
                        const Eigen::Ref<const VectorX<Scalar>>& params,
                        const Eigen::Ref<const VectorX<Scalar>>& input) {
  detail::check_dims<Scalar>(spec, params.size(), input.size());
  std::vector<VectorX<Scalar>> hidden;
  return detail::forward_cached<Scalar>(spec, params, input, hidden);
}

// out += scale * d<upstream, forward(params, input)>/d params.
template <typename Scalar>
void accumulate_gradient(const ApproximatorSpec& spec,
                         const Eigen::Ref<const VectorX<Scalar>>& params,
                         const Eigen::Ref<const VectorX<Scalar>>& input,
                         const Eigen::Ref<const VectorX<Scalar>>& upstream,
                         Eigen::Ref<VectorX<Scalar>> out, Scalar scale = Scalar(1)) {
  detail::check_dims<Scalar>(spec, params.size(), input.size());
  if (upstream.size() != spec.output_dim) throw Error("approximator: upstream dimension mismatch");
  if (!upstream.allFinite()) throw Error("approximator: non-finite upstream gradient");
  if (out.size() != params.size()) throw Error("approximator: gradient buffer has wrong length");
  using MapMat = Eigen::Map<const MatrixX<Scalar>>;
  using OutMat = Eigen::Map<MatrixX<Scalar>>;
  using OutVec = Eigen::Map<VectorX<Scalar>>;

  std::vector<VectorX<Scalar>> hidden;
  detail::forward_cached<Scalar>(spec, params, input, hidden);
  const auto layers = spec.layers();
  VectorX<Scalar> delta = scale * upstream;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& L = layers[l];
    OutMat gW(out.data() + L.offset, L.out, L.in);
    OutVec gb(out.data() + L.offset + static_cast<std::size_t>(L.out) * L.in, L.out);
    gW.noalias() += delta * hidden[l].transpose();
    gb += delta;
    if (l > 0) {
      MapMat W(params.data() + L.offset, L.out, L.in);
      VectorX<Scalar> back = W.transpose() * delta;
      delta = (back.array() * (Scalar(1) - hidden[l].array().square())).matrix();
    }
  }
}

template <typename Scalar>
VectorX<Scalar> gradient(const ApproximatorSpec& spec,
                         const Eigen::Ref<const VectorX<Scalar>>& params,
                         const Eigen::Ref<const VectorX<Scalar>>& input,
                         const Eigen::Ref<const VectorX<Scalar>>& upstream) {
  VectorX<Scalar> g = VectorX<Scalar>::Zero(params.size());
  accumulate_gradient<Scalar>(spec, params, input, upstream, g);
  return g;
}

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer.
template <typename Scalar = double>
VectorX<Scalar> init_params(const ApproximatorSpec& spec, Rng& rng) {
  spec.validate();
  VectorX<Scalar> p(static_cast<Eigen::Index>(spec.param_count()));
  for (const auto& L : spec.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(L.in));
    const std::size_t n = static_cast<std::size_t>(L.in + 1) * L.out;
    for (std::size_t i = 0; i < n; ++i)
      p[static_cast<Eigen::Index>(L.offset + i)] = static_cast<Scalar>(rng.uniform(-bound, bound));
  }
  return p;
}

template <typename Scalar>
struct L1Penalty {
  Scalar value;
  VectorX<Scalar> subgradient;
};

// value = sum |p_i|, subgradient_i = sign(p_i) with sign(0) = 0.
template <typename Derived>
L1Penalty<typename Derived::Scalar> l1_penalty(const Eigen::MatrixBase<Derived>& params) {
  using Scalar = typename Derived::Scalar;
  const auto sign = [](Scalar x) { return Scalar((x > Scalar(0)) - (x < Scalar(0))); };
  return {params.template lpNorm<1>(), params.unaryExpr(sign)};
}

template <typename Scalar = double>
struct AdamState {
  Scalar step_size = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);
  VectorX<Scalar> m;
  VectorX<Scalar> v;
  long step = 0;

  AdamState() = default;
  AdamState(Eigen::Index n, Scalar lr)
      : step_size(lr), m(VectorX<Scalar>::Zero(n)), v(VectorX<Scalar>::Zero(n)) {}
};

// Minimizing step: params move against the gradient. A non-finite gradient
// throws and leaves params and state untouched.
template <typename Scalar>
void optimizer_step(AdamState<Scalar>& state, Eigen::Ref<VectorX<Scalar>> params,
                    const Eigen::Ref<const VectorX<Scalar>>& grad) {
  if (grad.size() != params.size()) throw Error("optimizer_step: shape mismatch");
  if (state.m.size() != params.size()) {
    state.m = VectorX<Scalar>::Zero(params.size());
    state.v = VectorX<Scalar>::Zero(params.size());
  }
  if (!grad.allFinite()) throw DivergenceError("optimizer_step: non-finite gradient, step rejected");
  if (!(grad.array() != Scalar(0)).any()) return;
  ++state.step;
  state.m = state.beta1 * state.m + (Scalar(1) - state.beta1) * grad;
  state.v = state.beta2 * state.v + (Scalar(1) - state.beta2) * grad.cwiseAbs2();
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, static_cast<Scalar>(state.step));
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, static_cast<Scalar>(state.step));
  params.array() -= state.step_size * (state.m.array() / c1) /
                    ((state.v.array() / c2).sqrt() + state.epsilon);
}

}  // namespace s3rr
