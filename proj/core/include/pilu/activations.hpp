#pragma once

// Piecewise-linear activations: the rectifier family, DoubleReLU and PiLU,
// with gradients for both the input and the adaptive parameters.
//
// PiLU(x)       = gamma + alpha * (x - gamma)   for x >  gamma
//               = gamma + beta  * (x - gamma)   for x <= gamma
// DoubleReLU(x) = x - alpha                     for x >  alpha
//               = 0                             for -alpha <= x <= alpha
//               = x + alpha                     for x < -alpha
//
// The PiLU form above is algebraically alpha*x + gamma*(1 - alpha); writing it
// around the knot makes f(gamma) == gamma hold exactly in floating point.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pilu/tensor.hpp"

namespace pilu {

enum class ActivationKind { Linear, ReLU, LReLU, PReLU, DoubleReLU, PiLU };

enum class SharingScheme { LayerWise, ChannelWise, NeuronWise };

/// Number of adaptive parameters per unit.
constexpr std::size_t arity(ActivationKind kind) noexcept {
    switch (kind) {
        case ActivationKind::PReLU: return 1;
        case ActivationKind::DoubleReLU: return 1;
        case ActivationKind::PiLU: return 3;
        default: return 0;
    }
}

inline constexpr double kLeakySlope = 0.01;

std::string_view to_string(ActivationKind kind) noexcept;
std::string_view to_string(SharingScheme scheme) noexcept;
/// Display name used in tables ("ReLU", "PiLU", ...).
std::string_view display_name(ActivationKind kind) noexcept;
std::optional<ActivationKind> parse_activation(std::string_view name);
std::optional<SharingScheme> parse_scheme(std::string_view name);

struct PiluParams {
    double alpha = 1.0;
    double beta = kLeakySlope;
    double gamma = 0.0;
    friend bool operator==(const PiluParams&, const PiluParams&) = default;
};

struct DoubleReluParams {
    double alpha = 0.5;
};

struct PreluParams {
    double delta = 0.25;
};

template <typename T>
struct PiluGrad {
    T dx, dalpha, dbeta, dgamma;
};

template <typename T>
struct DoubleReluGrad {
    T dx, dalpha;
};

template <typename T>
struct PreluGrad {
    T dx, ddelta;
};

// ---- scalar kernels ---------------------------------------------------------

template <typename T>
constexpr T pilu_forward(T x, T alpha, T beta, T gamma) noexcept {
    // Both pieces are computed unconditionally so the select compiles branch-free.
    const T above = gamma + alpha * (x - gamma);
    const T below = gamma + beta * (x - gamma);
    return x > gamma ? above : below;
}

template <typename T>
constexpr PiluGrad<T> pilu_backward(T x, T alpha, T beta, T gamma, T dy) noexcept {
    const bool above = x > gamma;
    const T slope = above ? alpha : beta;
    const T moment = dy * (x - gamma);
    return {dy * slope, above ? moment : T{0}, above ? T{0} : moment, dy * (T{1} - slope)};
}

template <typename T>
constexpr T double_relu_forward(T x, T alpha) noexcept {
    const T shifted_down = x - alpha;
    const T shifted_up = x + alpha;
    return x > alpha ? shifted_down : (x < -alpha ? shifted_up : T{0});
}

template <typename T>
constexpr DoubleReluGrad<T> double_relu_backward(T x, T alpha, T dy) noexcept {
    const bool above = x > alpha;
    const bool below = x < -alpha;
    return {above || below ? dy : T{0}, above ? -dy : (below ? dy : T{0})};
}

template <typename T>
constexpr T relu_forward(T x) noexcept {
    return x > T{0} ? x : T{0};
}

template <typename T>
constexpr T prelu_forward(T x, T delta) noexcept {
    const T scaled = delta * x;
    return x > T{0} ? x : scaled;
}

template <typename T>
constexpr PreluGrad<T> prelu_backward(T x, T delta, T dy) noexcept {
    const T scaled = dy * delta;
    const T moment = dy * x;
    return x > T{0} ? PreluGrad<T>{dy, T{0}} : PreluGrad<T>{scaled, moment};
}

inline double pilu_forward(double x, const PiluParams& p) noexcept {
    return pilu_forward(x, p.alpha, p.beta, p.gamma);
}
inline PiluGrad<double> pilu_backward(double x, const PiluParams& p, double dy) noexcept {
    return pilu_backward(x, p.alpha, p.beta, p.gamma, dy);
}
inline double double_relu_forward(double x, const DoubleReluParams& p) noexcept {
    return double_relu_forward(x, p.alpha);
}
inline DoubleReluGrad<double> double_relu_backward(double x, const DoubleReluParams& p, double dy) noexcept {
    return double_relu_backward(x, p.alpha, dy);
}

/// Linear, ReLU, LReLU (slope 0.01) and PReLU(delta). `delta` is ignored by
/// the non-parametric kinds. Throws for DoubleReLU and PiLU.
double rectifier_forward(double x, ActivationKind kind, double delta = 0.0);

/// Rectifier -> equivalent PiLU parameters. Throws std::invalid_argument for
/// kinds with no rectifier form (Linear, DoubleReLU, PiLU).
PiluParams as_pilu(ActivationKind kind, double delta = PreluParams{}.delta);

// ---- tensor-level activation with parameter sharing ------------------------

struct ActivationSpec {
    ActivationKind kind = ActivationKind::ReLU;
    SharingScheme scheme = SharingScheme::ChannelWise;
    /// Initial value of each adaptive parameter; empty selects the defaults
    /// (PReLU delta 0.25, DoubleReLU alpha 0.5, PiLU (1, 0.01, 0)).
    std::vector<double> init;
    bool trainable = true;

    std::vector<double> initial_values() const;
};

/// Parameter store shape for activations applied to examples of
/// `example_shape` (the layer output shape without the batch axis).
/// LayerWise: (arity); ChannelWise: (arity, C); NeuronWise: (arity, ...example_shape).
/// Arity-0 kinds get the empty shape (0).
Shape activation_param_shape(ActivationKind kind, SharingScheme scheme, const Shape& example_shape);

/// Names of the adaptive parameters in store-row order, e.g. {"alpha", "beta", "gamma"}.
std::vector<std::string> activation_param_labels(ActivationKind kind);

std::size_t activation_param_count(ActivationKind kind, SharingScheme scheme, const Shape& example_shape);

template <typename T>
Tensor<T> make_activation_params(const ActivationSpec& spec, const Shape& example_shape);

template <typename T>
struct ActivationCache {
    Tensor<T> input;
    Shape param_shape;
    bool valid = false;
};

template <typename T>
struct ActivationGrads {
    Tensor<T> dx;
    Tensor<T> dparams;
};

/// Applies the activation elementwise; each element uses the parameter set
/// selected by its layer / channel / neuron coordinate. `x` is batch-major
/// (first axis is the batch). When `cache` is non-null it receives what the
/// backward pass needs.
template <typename T>
Tensor<T> apply_activation(const Tensor<T>& x, const ActivationSpec& spec, const Tensor<T>& params,
                           ActivationCache<T>* cache = nullptr);

/// dparams[j, s] is the sum over every element routed to parameter set s of
/// that element's gradient with respect to parameter j.
template <typename T>
ActivationGrads<T> apply_activation_backward(const Tensor<T>& dy, const ActivationCache<T>& cache,
                                             const ActivationSpec& spec, const Tensor<T>& params);

/// Smallest distance from any element of `x` to a knot of the activation
/// (infinity for Linear). Used to keep finite-difference probes off kinks.
template <typename T>
double min_knot_distance(const Tensor<T>& x, const ActivationSpec& spec, const Tensor<T>& params);

/// Hash of which linear piece every element of `x` falls on. Two inputs
/// with equal signatures lie in the same differentiable region.
template <typename T>
std::uint64_t branch_signature(const Tensor<T>& x, const ActivationSpec& spec, const Tensor<T>& params);

/// Feasibility projection applied after each optimizer step (DoubleReLU alpha >= 0).
template <typename T>
void project_activation_params(ActivationKind kind, Tensor<T>& params);

}  // namespace pilu
