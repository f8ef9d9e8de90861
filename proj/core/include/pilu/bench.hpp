#pragma once

// Forward-pass timing of the scalar activation kernels across input sizes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pilu/activations.hpp"

namespace pilu {

struct BenchConfig {
    std::vector<std::size_t> sizes{100, 1000, 10000, 100000};
    std::size_t iters = 100000;
    std::vector<ActivationKind> kinds{ActivationKind::ReLU, ActivationKind::PReLU, ActivationKind::DoubleReLU,
                                      ActivationKind::PiLU};
    /// Timed batches; the reported per-call time is the median batch's.
    std::size_t batches = 9;
    std::uint64_t seed = 0;
    /// Batches shorter than this are re-run with doubled iterations (and flagged).
    double min_batch_ns = 20000.0;
};

struct BenchResult {
    ActivationKind kind = ActivationKind::ReLU;
    std::size_t size = 0;
    /// Calls actually timed (after any increase for timer resolution).
    std::size_t iters = 0;
    double total_ns = 0.0;
    /// Median over batches of (batch time / batch calls).
    double per_call_ns = 0.0;
    /// per_call_ns / per_call_ns of ReLU at the same size.
    double rel_to_relu = 0.0;
    /// Iterations had to be raised because batches were too short to time.
    bool flagged = false;
};

/// Times one forward pass over a pre-generated vector of `size` uniform
/// inputs in [-1, 1], with one parameter set per kind (the layer-wise path).
/// A warm-up pass precedes timing. ReLU is always measured so rel_to_relu
/// can be filled in; it is only returned if requested.
std::vector<BenchResult> bench_activations(const BenchConfig& cfg);

struct LinearFit {
    double slope = 0.0, intercept = 0.0, r_squared = 0.0;
};

/// Least-squares y = slope * x + intercept. r_squared is 1 when y is constant
/// and fitted exactly.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);
/// Fit of per_call_ns against size for the results of one kind.
LinearFit linear_fit(std::span<const BenchResult> results, ActivationKind kind);

/// Columns: kind,size,iters,per_call_ns,rel_to_relu,flagged,path.
void write_bench_csv(std::span<const BenchResult> results, const std::filesystem::path& path);

}  // namespace pilu
