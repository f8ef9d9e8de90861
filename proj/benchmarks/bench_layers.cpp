#include <benchmark/benchmark.h>

#include "pilu/data.hpp"
#include "pilu/losses.hpp"
#include "pilu/model.hpp"

namespace {

using pilu::ActivationKind;

// One training step (forward, backward) of the classifier on a 32-image batch.
void BM_ModelStep(benchmark::State& state) {
    const auto kind = static_cast<ActivationKind>(state.range(0));
    pilu::Rng init = pilu::make_stream(0, pilu::Stream::Init);
    pilu::Rng drop = pilu::make_stream(0, pilu::Stream::Dropout);
    auto model = pilu::build_paper_model<float>(10, {kind}, init);
    const auto data = pilu::make_synthetic(64, 10, 0);
    std::vector<std::uint32_t> batch(data.train.begin(), data.train.begin() + 32);
    const auto x = data.images<float>(batch);
    const auto labels = data.labels_of(batch);
    const auto y = pilu::one_hot<float>(labels, 10);
    for (auto _ : state) {
        const auto p = model.forward(x, pilu::Mode::Train, &drop);
        auto dx = model.backward_from_logits(pilu::cross_entropy_logit_grad(p, y));
        benchmark::DoNotOptimize(dx.data().data());
    }
    state.SetLabel(std::string(pilu::to_string(kind)));
}

BENCHMARK(BM_ModelStep)
    ->Arg(static_cast<int>(ActivationKind::ReLU))
    ->Arg(static_cast<int>(ActivationKind::PiLU))
    ->Unit(benchmark::kMillisecond);

}  // namespace
