#include "pilu/activations.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <stdexcept>

namespace pilu {

std::string_view to_string(ActivationKind kind) noexcept {
    switch (kind) {
        case ActivationKind::Linear: return "linear";
        case ActivationKind::ReLU: return "relu";
        case ActivationKind::LReLU: return "lrelu";
        case ActivationKind::PReLU: return "prelu";
        case ActivationKind::DoubleReLU: return "double_relu";
        case ActivationKind::PiLU: return "pilu";
    }
    return "unknown";
}

std::string_view display_name(ActivationKind kind) noexcept {
    switch (kind) {
        case ActivationKind::Linear: return "Linear";
        case ActivationKind::ReLU: return "ReLU";
        case ActivationKind::LReLU: return "LReLU";
        case ActivationKind::PReLU: return "PReLU";
        case ActivationKind::DoubleReLU: return "DoubleReLU";
        case ActivationKind::PiLU: return "PiLU";
    }
    return "unknown";
}

std::string_view to_string(SharingScheme scheme) noexcept {
    switch (scheme) {
        case SharingScheme::LayerWise: return "layer";
        case SharingScheme::ChannelWise: return "channel";
        case SharingScheme::NeuronWise: return "neuron";
    }
    return "unknown";
}

std::optional<ActivationKind> parse_activation(std::string_view name) {
    for (auto kind : {ActivationKind::Linear, ActivationKind::ReLU, ActivationKind::LReLU, ActivationKind::PReLU,
                      ActivationKind::DoubleReLU, ActivationKind::PiLU}) {
        if (name == to_string(kind)) return kind;
    }
    return std::nullopt;
}

std::optional<SharingScheme> parse_scheme(std::string_view name) {
    for (auto scheme : {SharingScheme::LayerWise, SharingScheme::ChannelWise, SharingScheme::NeuronWise}) {
        if (name == to_string(scheme)) return scheme;
    }
    return std::nullopt;
}

double rectifier_forward(double x, ActivationKind kind, double delta) {
    switch (kind) {
        case ActivationKind::Linear: return x;
        case ActivationKind::ReLU: return relu_forward(x);
        case ActivationKind::LReLU: return prelu_forward(x, kLeakySlope);
        case ActivationKind::PReLU: return prelu_forward(x, delta);
        default: break;
    }
    throw std::invalid_argument("rectifier_forward: " + std::string(to_string(kind)) + " is not a rectifier");
}

PiluParams as_pilu(ActivationKind kind, double delta) {
    switch (kind) {
        case ActivationKind::ReLU: return {1.0, 0.0, 0.0};
        case ActivationKind::LReLU: return {1.0, kLeakySlope, 0.0};
        case ActivationKind::PReLU: return {1.0, delta, 0.0};
        default: break;
    }
    throw std::invalid_argument("as_pilu: " + std::string(to_string(kind)) + " has no PiLU rectifier form");
}

std::vector<double> ActivationSpec::initial_values() const {
    if (!init.empty()) {
        if (init.size() != arity(kind)) {
            throw std::invalid_argument("activation " + std::string(to_string(kind)) + " expects " +
                                        std::to_string(arity(kind)) + " initial values, got " +
                                        std::to_string(init.size()));
        }
        return init;
    }
    switch (kind) {
        case ActivationKind::PReLU: return {PreluParams{}.delta};
        case ActivationKind::DoubleReLU: return {DoubleReluParams{}.alpha};
        case ActivationKind::PiLU: {
            const PiluParams p;
            return {p.alpha, p.beta, p.gamma};
        }
        default: return {};
    }
}

Shape activation_param_shape(ActivationKind kind, SharingScheme scheme, const Shape& example_shape) {
    const std::size_t n = arity(kind);
    if (n == 0) return Shape{0};
    if (example_shape.empty()) throw std::invalid_argument("activation_param_shape: empty example shape");
    switch (scheme) {
        case SharingScheme::LayerWise: return {n};
        case SharingScheme::ChannelWise: return {n, example_shape.back()};
        case SharingScheme::NeuronWise: {
            Shape s{n};
            s.insert(s.end(), example_shape.begin(), example_shape.end());
            return s;
        }
    }
    return Shape{0};
}

std::vector<std::string> activation_param_labels(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::PReLU: return {"delta"};
        case ActivationKind::DoubleReLU: return {"alpha"};
        case ActivationKind::PiLU: return {"alpha", "beta", "gamma"};
        default: return {};
    }
}

std::size_t activation_param_count(ActivationKind kind, SharingScheme scheme, const Shape& example_shape) {
    if (arity(kind) == 0) return 0;
    return shape_size(activation_param_shape(kind, scheme, example_shape));
}

template <typename T>
Tensor<T> make_activation_params(const ActivationSpec& spec, const Shape& example_shape) {
    const auto values = spec.initial_values();
    if (values.empty()) return Tensor<T>();
    Tensor<T> params(activation_param_shape(spec.kind, spec.scheme, example_shape));
    const std::size_t sets = params.size() / values.size();
    for (std::size_t j = 0; j < values.size(); ++j) {
        std::fill_n(params.raw() + j * sets, sets, static_cast<T>(values[j]));
    }
    return params;
}

namespace {

struct Routing {
    std::size_t sets = 1;       // parameter sets per parameter
    std::size_t modulus = 1;    // element index -> set index is i % modulus (sets == 1: always 0)
};

Routing routing_for(const Shape& x_shape, const ActivationSpec& spec, const Shape& param_shape) {
    if (x_shape.size() < 2) {
        throw std::invalid_argument("apply_activation: input must be batch-major with rank >= 2, got " +
                                    shape_to_string(x_shape));
    }
    const Shape example(x_shape.begin() + 1, x_shape.end());
    const Shape expected = activation_param_shape(spec.kind, spec.scheme, example);
    if (param_shape != expected) {
        throw std::invalid_argument("apply_activation: parameter store " + shape_to_string(param_shape) +
                                    " does not match " + std::string(to_string(spec.scheme)) +
                                    "-wise shape " + shape_to_string(expected));
    }
    const std::size_t n = arity(spec.kind);
    if (n == 0) return {};
    const std::size_t sets = shape_size(param_shape) / n;
    return {sets, sets};
}

template <typename T, typename F>
void for_each_routed(std::size_t count, const Routing& r, F&& f) {
    if (r.sets == 1) {
        for (std::size_t i = 0; i < count; ++i) f(i, std::size_t{0});
        return;
    }
    for (std::size_t base = 0; base < count; base += r.modulus) {
        for (std::size_t s = 0; s < r.modulus; ++s) f(base + s, s);
    }
}

// f(i, s) writes dx[i] and returns the N parameter gradient terms of element i.
// A single shared set is summed in registers, in the same order as the per-set path.
template <std::size_t N, typename T, typename F>
void accumulate_routed(std::size_t count, const Routing& r, T* dp, F&& f) {
    if (r.sets == 1) {
        std::array<T, N> acc{};
        for (std::size_t i = 0; i < count; ++i) {
            const std::array<T, N> g = f(i, std::size_t{0});
            for (std::size_t k = 0; k < N; ++k) acc[k] += g[k];
        }
        for (std::size_t k = 0; k < N; ++k) dp[k] += acc[k];
        return;
    }
    for (std::size_t base = 0; base < count; base += r.modulus) {
        for (std::size_t s = 0; s < r.modulus; ++s) {
            const std::array<T, N> g = f(base + s, s);
            for (std::size_t k = 0; k < N; ++k) dp[k * r.sets + s] += g[k];
        }
    }
}

}  // namespace

template <typename T>
Tensor<T> apply_activation(const Tensor<T>& x, const ActivationSpec& spec, const Tensor<T>& params,
                           ActivationCache<T>* cache) {
    const Routing r = routing_for(x.shape(), spec, params.shape());
    Tensor<T> y(x.shape());
    const T* in = x.raw();
    T* out = y.raw();
    const T* p = params.raw();
    const std::size_t count = x.size();

    switch (spec.kind) {
        case ActivationKind::Linear:
            std::copy_n(in, count, out);
            break;
        case ActivationKind::ReLU:
            for (std::size_t i = 0; i < count; ++i) out[i] = relu_forward(in[i]);
            break;
        case ActivationKind::LReLU:
            for (std::size_t i = 0; i < count; ++i) out[i] = prelu_forward(in[i], static_cast<T>(kLeakySlope));
            break;
        case ActivationKind::PReLU:
            for_each_routed<T>(count, r, [&](std::size_t i, std::size_t s) { out[i] = prelu_forward(in[i], p[s]); });
            break;
        case ActivationKind::DoubleReLU:
            for_each_routed<T>(count, r,
                               [&](std::size_t i, std::size_t s) { out[i] = double_relu_forward(in[i], p[s]); });
            break;
        case ActivationKind::PiLU: {
            const T* alpha = p;
            const T* beta = p + r.sets;
            const T* gamma = p + 2 * r.sets;
            for_each_routed<T>(count, r, [&](std::size_t i, std::size_t s) {
                out[i] = pilu_forward(in[i], alpha[s], beta[s], gamma[s]);
            });
            break;
        }
    }

    if (cache) {
        cache->input = x;
        cache->param_shape = params.shape();
        cache->valid = true;
    }
    return y;
}

template <typename T>
ActivationGrads<T> apply_activation_backward(const Tensor<T>& dy, const ActivationCache<T>& cache,
                                             const ActivationSpec& spec, const Tensor<T>& params) {
    if (!cache.valid || cache.input.shape() != dy.shape() || cache.param_shape != params.shape()) {
        throw std::logic_error("apply_activation_backward: stale or mismatched activation cache");
    }
    const Routing r = routing_for(dy.shape(), spec, params.shape());
    ActivationGrads<T> g{Tensor<T>(dy.shape()), Tensor<T>::zeros_like(params)};
    const T* x = cache.input.raw();
    const T* up = dy.raw();
    T* dx = g.dx.raw();
    T* dp = g.dparams.raw();
    const T* p = params.raw();
    const std::size_t count = dy.size();

    switch (spec.kind) {
        case ActivationKind::Linear:
            std::copy_n(up, count, dx);
            break;
        case ActivationKind::ReLU:
            for (std::size_t i = 0; i < count; ++i) {
                const T u = up[i];
                dx[i] = x[i] > T{0} ? u : T{0};
            }
            break;
        case ActivationKind::LReLU:
            for (std::size_t i = 0; i < count; ++i) {
                const T u = up[i];
                const T leaked = static_cast<T>(kLeakySlope) * u;
                dx[i] = x[i] > T{0} ? u : leaked;
            }
            break;
        case ActivationKind::PReLU:
            accumulate_routed<1>(count, r, dp, [&](std::size_t i, std::size_t s) {
                const auto d = prelu_backward(x[i], p[s], up[i]);
                dx[i] = d.dx;
                return std::array<T, 1>{d.ddelta};
            });
            break;
        case ActivationKind::DoubleReLU:
            accumulate_routed<1>(count, r, dp, [&](std::size_t i, std::size_t s) {
                const auto d = double_relu_backward(x[i], p[s], up[i]);
                dx[i] = d.dx;
                return std::array<T, 1>{d.dalpha};
            });
            break;
        case ActivationKind::PiLU: {
            const T* alpha = p;
            const T* beta = p + r.sets;
            const T* gamma = p + 2 * r.sets;
            accumulate_routed<3>(count, r, dp, [&](std::size_t i, std::size_t s) {
                const auto d = pilu_backward(x[i], alpha[s], beta[s], gamma[s], up[i]);
                dx[i] = d.dx;
                return std::array<T, 3>{d.dalpha, d.dbeta, d.dgamma};
            });
            break;
        }
    }
    return g;
}

template <typename T>
double min_knot_distance(const Tensor<T>& x, const ActivationSpec& spec, const Tensor<T>& params) {
    const Routing r = routing_for(x.shape(), spec, params.shape());
    double best = std::numeric_limits<double>::infinity();
    const T* in = x.raw();
    const T* p = params.raw();
    auto consider = [&](double d) { best = std::min(best, std::abs(d)); };
    switch (spec.kind) {
        case ActivationKind::Linear: break;
        case ActivationKind::ReLU:
        case ActivationKind::LReLU:
        case ActivationKind::PReLU:
            for (std::size_t i = 0; i < x.size(); ++i) consider(in[i]);
            break;
        case ActivationKind::DoubleReLU:
            for_each_routed<T>(x.size(), r, [&](std::size_t i, std::size_t s) {
                consider(double(in[i]) - double(p[s]));
                consider(double(in[i]) + double(p[s]));
            });
            break;
        case ActivationKind::PiLU:
            for_each_routed<T>(x.size(), r, [&](std::size_t i, std::size_t s) {
                consider(double(in[i]) - double(p[2 * r.sets + s]));
            });
            break;
    }
    return best;
}

template <typename T>
std::uint64_t branch_signature(const Tensor<T>& x, const ActivationSpec& spec, const Tensor<T>& params) {
    const Routing r = routing_for(x.shape(), spec, params.shape());
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t code) { h = (h ^ code) * 1099511628211ull; };
    const T* in = x.raw();
    const T* p = params.raw();
    switch (spec.kind) {
        case ActivationKind::Linear: break;
        case ActivationKind::ReLU:
        case ActivationKind::LReLU:
        case ActivationKind::PReLU:
            for (std::size_t i = 0; i < x.size(); ++i) mix(in[i] > T{0});
            break;
        case ActivationKind::DoubleReLU:
            for_each_routed<T>(x.size(), r, [&](std::size_t i, std::size_t s) {
                mix(in[i] > p[s] ? 2u : (in[i] < -p[s] ? 0u : 1u));
            });
            break;
        case ActivationKind::PiLU:
            for_each_routed<T>(x.size(), r, [&](std::size_t i, std::size_t s) { mix(in[i] > p[2 * r.sets + s]); });
            break;
    }
    return h;
}

template <typename T>
void project_activation_params(ActivationKind kind, Tensor<T>& params) {
    if (kind != ActivationKind::DoubleReLU) return;
    for (auto& a : params.data()) a = std::max(a, T{0});
}

#define PILU_INSTANTIATE(T)                                                                                     \
    template Tensor<T> make_activation_params<T>(const ActivationSpec&, const Shape&);                         \
    template Tensor<T> apply_activation<T>(const Tensor<T>&, const ActivationSpec&, const Tensor<T>&,          \
                                           ActivationCache<T>*);                                               \
    template ActivationGrads<T> apply_activation_backward<T>(const Tensor<T>&, const ActivationCache<T>&,      \
                                                             const ActivationSpec&, const Tensor<T>&);         \
    template double min_knot_distance<T>(const Tensor<T>&, const ActivationSpec&, const Tensor<T>&);           \
    template std::uint64_t branch_signature<T>(const Tensor<T>&, const ActivationSpec&, const Tensor<T>&);      \
    template void project_activation_params<T>(ActivationKind, Tensor<T>&);

PILU_INSTANTIATE(float)
PILU_INSTANTIATE(double)

#undef PILU_INSTANTIATE

}  // namespace pilu
