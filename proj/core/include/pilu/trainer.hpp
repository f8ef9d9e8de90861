#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pilu/activations.hpp"
#include "pilu/data.hpp"
#include "pilu/model.hpp"
#include "pilu/optimizer.hpp"

namespace pilu {

enum class LogLevel { Metrics, Stats, Full };
std::string_view to_string(LogLevel level) noexcept;
std::optional<LogLevel> parse_log_level(std::string_view name);

struct TrainConfig {
    int epochs = 50;
    std::size_t batch_size = 32;
    /// L2 weight on the output-layer kernel.
    double l2_lambda = 1e-3;
    /// Use (lambda / 2) * sum(w^2) instead of lambda * sum(w^2).
    bool l2_half = false;
    std::uint64_t seed = 0;
    LogLevel log_level = LogLevel::Metrics;
    AdamConfig adam{};
    /// Batch size for the end-of-epoch evaluation passes (no effect on results).
    std::size_t eval_batch_size = 250;
};

struct RunInfo {
    std::string run_id;
    std::uint64_t seed = 0;
    ActivationKind activation = ActivationKind::ReLU;
    SharingScheme scheme = SharingScheme::ChannelWise;
    std::string dataset;
    std::size_t parameters = 0;

    friend bool operator==(const RunInfo&, const RunInfo&) = default;
};

struct MetricRow {
    int epoch = 0;
    Split split = Split::Train;
    double loss = 0.0;
    double accuracy = 0.0;
    double error = 0.0;

    friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

/// Per-parameter-tensor summary statistics at the end of an epoch.
struct TensorStats {
    double mean = 0.0, stddev = 0.0, l2 = 0.0;
    friend bool operator==(const TensorStats&, const TensorStats&) = default;
};

struct LayerStatsRow {
    int epoch = 0;
    std::string param;
    TensorStats value, grad;

    friend bool operator==(const LayerStatsRow&, const LayerStatsRow&) = default;
};

struct RunRecord {
    RunInfo info;
    std::vector<MetricRow> rows;
    std::vector<LayerStatsRow> layer_stats;
    std::optional<int> diverged_epoch;
    bool complete = false;

    /// Row of the last epoch for `split`, if any.
    const MetricRow* final_row(Split split) const;

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

template <typename T>
TensorStats tensor_stats(const Tensor<T>& t);

/// Loss (cross-entropy plus the L2 term) and accuracy over one split in eval mode.
template <typename T>
MetricRow evaluate(Model<T>& model, const Dataset& data, Split split, const TrainConfig& cfg, int epoch);

/// Observer invoked for every metric row / stats row as soon as it exists.
struct TrainCallbacks {
    std::function<void(const RunInfo&, const MetricRow&)> on_metric;
    std::function<void(const RunInfo&, const LayerStatsRow&)> on_stats;
};

/// Trains `model` for cfg.epochs epochs: each epoch shuffles the training
/// split with the run's shuffle stream, takes Adam steps over mini-batches
/// (the trailing partial batch included), then evaluates train, val and
/// test. A non-finite loss or gradient stops the run and records the epoch.
template <typename T>
RunRecord train_run(Model<T>& model, const Dataset& data, const TrainConfig& cfg, RunInfo info = {},
                    const TrainCallbacks& callbacks = {});

/// Builds the classifier for `activation` from the seed's init stream and trains it.
RunRecord train_paper_model(const Dataset& data, const ActivationSpec& activation, const TrainConfig& cfg,
                            RunInfo info = {}, const TrainCallbacks& callbacks = {});

}  // namespace pilu
