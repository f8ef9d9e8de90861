#include "pilu/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

#include "pilu/format.hpp"
#include "pilu/rng.hpp"

namespace pilu {

namespace {

// Makes the compiler assume `p` is read, so the kernel loop is not elided.
inline void escape(const void* p) { __asm__ __volatile__("" : : "g"(p) : "memory"); }

void run_kernel(ActivationKind kind, const float* x, float* y, std::size_t n) {
    constexpr float alpha = 1.0f, beta = 0.01f, gamma = 0.0f, delta = 0.25f, dead = 0.5f;
    switch (kind) {
        case ActivationKind::Linear:
            for (std::size_t i = 0; i < n; ++i) y[i] = x[i];
            break;
        case ActivationKind::ReLU:
            for (std::size_t i = 0; i < n; ++i) y[i] = relu_forward(x[i]);
            break;
        case ActivationKind::LReLU:
            for (std::size_t i = 0; i < n; ++i) y[i] = prelu_forward(x[i], static_cast<float>(kLeakySlope));
            break;
        case ActivationKind::PReLU:
            for (std::size_t i = 0; i < n; ++i) y[i] = prelu_forward(x[i], delta);
            break;
        case ActivationKind::DoubleReLU:
            for (std::size_t i = 0; i < n; ++i) y[i] = double_relu_forward(x[i], dead);
            break;
        case ActivationKind::PiLU:
            for (std::size_t i = 0; i < n; ++i) y[i] = pilu_forward(x[i], alpha, beta, gamma);
            break;
    }
    escape(y);
}

// Returns the batch duration in ns.
double time_batch(ActivationKind kind, const float* x, float* y, std::size_t n, std::size_t calls) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t c = 0; c < calls; ++c) {
        escape(x);
        run_kernel(kind, x, y, n);
    }
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::nano>(t1 - t0).count();
}

BenchResult measure(ActivationKind kind, std::size_t size, const BenchConfig& cfg) {
    Rng rng = make_stream(cfg.seed, Stream::Data);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<float> x(size), y(size);
    for (auto& v : x) v = u(rng);

    const std::size_t batches = std::max<std::size_t>(1, cfg.batches);
    std::size_t per_batch = std::max<std::size_t>(1, (cfg.iters + batches - 1) / batches);
    BenchResult r;
    r.kind = kind;
    r.size = size;

    // Warm-up: one batch, untimed.
    time_batch(kind, x.data(), y.data(), size, per_batch);

    for (;;) {
        std::vector<double> per_call;
        double total = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            const double ns = time_batch(kind, x.data(), y.data(), size, per_batch);
            total += ns;
            per_call.push_back(ns / static_cast<double>(per_batch));
        }
        std::nth_element(per_call.begin(), per_call.begin() + per_call.size() / 2, per_call.end());
        const double median = per_call[per_call.size() / 2];
        if (median * static_cast<double>(per_batch) < cfg.min_batch_ns && per_batch < (std::size_t{1} << 40)) {
            per_batch *= 2;
            r.flagged = true;
            continue;
        }
        r.iters = per_batch * batches;
        r.total_ns = total;
        r.per_call_ns = median;
        return r;
    }
}

}  // namespace

std::vector<BenchResult> bench_activations(const BenchConfig& cfg) {
    if (cfg.sizes.empty()) throw std::invalid_argument("bench: no sizes");
    if (cfg.iters == 0) throw std::invalid_argument("bench: iters must be >= 1");
    for (const auto s : cfg.sizes) {
        if (s == 0) throw std::invalid_argument("bench: sizes must be >= 1");
    }
    std::vector<BenchResult> out;
    std::map<std::size_t, double> relu_time;
    for (const auto size : cfg.sizes) {
        const auto relu = measure(ActivationKind::ReLU, size, cfg);
        relu_time[size] = relu.per_call_ns;
        for (const auto kind : cfg.kinds) {
            BenchResult r = kind == ActivationKind::ReLU ? relu : measure(kind, size, cfg);
            r.rel_to_relu = kind == ActivationKind::ReLU ? 1.0 : r.per_call_ns / relu_time[size];
            out.push_back(r);
        }
    }
    std::stable_sort(out.begin(), out.end(), [&](const BenchResult& a, const BenchResult& b) {
        const auto ia = std::find(cfg.kinds.begin(), cfg.kinds.end(), a.kind);
        const auto ib = std::find(cfg.kinds.begin(), cfg.kinds.end(), b.kind);
        return ia < ib;
    });
    return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: x values are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.slope * x[i] + f.intercept);
        sse += e * e;
    }
    f.r_squared = syy == 0.0 ? (sse == 0.0 ? 1.0 : 0.0) : 1.0 - sse / syy;
    return f;
}

LinearFit linear_fit(std::span<const BenchResult> results, ActivationKind kind) {
    std::vector<double> x, y;
    for (const auto& r : results) {
        if (r.kind != kind) continue;
        x.push_back(static_cast<double>(r.size));
        y.push_back(r.per_call_ns);
    }
    return linear_fit(x, y);
}

void write_bench_csv(std::span<const BenchResult> results, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "kind,size,iters,per_call_ns,rel_to_relu,flagged,path\n";
    for (const auto& r : results) {
        out << to_string(r.kind) << ',' << r.size << ',' << r.iters << ',' << format_double(r.per_call_ns) << ','
            << format_double(r.rel_to_relu) << ',' << (r.flagged ? "true" : "false") << ",scalar_layerwise_forward\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace pilu
