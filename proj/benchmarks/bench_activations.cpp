#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pilu/activations.hpp"

namespace {

using pilu::ActivationKind;
using pilu::ActivationSpec;
using pilu::SharingScheme;
using pilu::Tensor;

std::vector<float> inputs(std::size_t n) {
    std::mt19937_64 rng(0);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

void BM_ScalarRelu(benchmark::State& state) {
    const auto x = inputs(static_cast<std::size_t>(state.range(0)));
    std::vector<float> y(x.size());
    for (auto _ : state) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = pilu::relu_forward(x[i]);
        benchmark::DoNotOptimize(y.data());
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScalarPrelu(benchmark::State& state) {
    const auto x = inputs(static_cast<std::size_t>(state.range(0)));
    std::vector<float> y(x.size());
    for (auto _ : state) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = pilu::prelu_forward(x[i], 0.25f);
        benchmark::DoNotOptimize(y.data());
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScalarDoubleRelu(benchmark::State& state) {
    const auto x = inputs(static_cast<std::size_t>(state.range(0)));
    std::vector<float> y(x.size());
    for (auto _ : state) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = pilu::double_relu_forward(x[i], 0.5f);
        benchmark::DoNotOptimize(y.data());
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScalarPilu(benchmark::State& state) {
    const auto x = inputs(static_cast<std::size_t>(state.range(0)));
    std::vector<float> y(x.size());
    for (auto _ : state) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = pilu::pilu_forward(x[i], 1.0f, 0.01f, 0.0f);
        benchmark::DoNotOptimize(y.data());
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_ScalarRelu)->RangeMultiplier(10)->Range(100, 100000);
BENCHMARK(BM_ScalarPrelu)->RangeMultiplier(10)->Range(100, 100000);
BENCHMARK(BM_ScalarDoubleRelu)->RangeMultiplier(10)->Range(100, 100000);
BENCHMARK(BM_ScalarPilu)->RangeMultiplier(10)->Range(100, 100000);

// Tensor path with parameter sharing: a (32, 30, 30, 16) batch, the first
// activation of the classifier.
void BM_TensorActivation(benchmark::State& state) {
    const auto kind = static_cast<ActivationKind>(state.range(0));
    const auto scheme = static_cast<SharingScheme>(state.range(1));
    const ActivationSpec spec{kind, scheme};
    const pilu::Shape example{30, 30, 16};
    const auto params = pilu::make_activation_params<float>(spec, example);
    Tensor<float> x({32, 30, 30, 16});
    const auto v = inputs(x.size());
    std::copy(v.begin(), v.end(), x.data().begin());
    pilu::ActivationCache<float> cache;
    Tensor<float> dy(x.shape());
    for (auto& d : dy.data()) d = 1.0f;
    for (auto _ : state) {
        auto y = pilu::apply_activation(x, spec, params, &cache);
        auto g = pilu::apply_activation_backward(dy, cache, spec, params);
        benchmark::DoNotOptimize(y.data().data());
        benchmark::DoNotOptimize(g.dparams.data().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
    state.SetLabel(pilu::activation_param_labels(kind).empty()
                       ? std::string(pilu::to_string(kind))
                       : std::string(pilu::to_string(kind)) + "/" + std::string(pilu::to_string(scheme)));
}

BENCHMARK(BM_TensorActivation)
    ->ArgsProduct({{static_cast<int>(ActivationKind::ReLU), static_cast<int>(ActivationKind::PReLU),
                    static_cast<int>(ActivationKind::DoubleReLU), static_cast<int>(ActivationKind::PiLU)},
                   {static_cast<int>(SharingScheme::LayerWise), static_cast<int>(SharingScheme::ChannelWise),
                    static_cast<int>(SharingScheme::NeuronWise)}})
    ->Unit(benchmark::kMicrosecond);

}  // namespace
