#pragma once

// Multi-seed sweeps, distribution summaries and activation comparisons.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pilu/activations.hpp"
#include "pilu/data.hpp"
#include "pilu/stats.hpp"
#include "pilu/trainer.hpp"

namespace pilu {

struct ExperimentConfig {
    /// cifar10, cifar100 or synthetic.
    std::string dataset = "cifar10";
    std::vector<ActivationSpec> activations;
    std::vector<std::uint64_t> seeds;
    /// Training settings shared by every run; the seed field is overridden per run.
    TrainConfig train;
    /// Stratified training subset size (0: the whole training split).
    std::size_t subset = 0;
    /// Fixed across runs so every seed sees the same subset.
    std::uint64_t subset_seed = 0;
    std::filesystem::path output_dir = "results";
    std::filesystem::path data_dir;
    std::size_t synthetic_size = 2000;
    std::size_t synthetic_classes = 10;
    std::uint64_t synthetic_seed = 0;
    std::size_t jobs = 1;

    /// 30 seeds (0..29) x 50 epochs on the full training split, ReLU, PReLU,
    /// DoubleReLU and PiLU, channel-wise.
    static ExperimentConfig full_preset();
    /// 5 seeds x 10 epochs on a 5,000-image stratified subset.
    static ExperimentConfig desk_scale_preset();

    /// Throws std::invalid_argument on empty/duplicate seeds or activations,
    /// non-positive epochs/batch size, or an unknown dataset.
    void validate() const;
};

/// Parses a JSON experiment file. Keys (all optional, defaulting to
/// `base`): dataset, activations, schemes, seeds (list, or a count n meaning
/// 0..n-1), epochs, batch_size, subset, subset_seed, output_dir, data_dir,
/// l2_lambda, l2_half, lr, log_level, jobs, synthetic_size, synthetic_classes.
/// Activations given by name are crossed with schemes; an activations entry
/// may instead be an object {"activation": name, "scheme": name}.
ExperimentConfig parse_experiment_config(const std::string& json_text, ExperimentConfig base = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path, ExperimentConfig base = {});
std::string experiment_config_json(const ExperimentConfig& cfg);

/// "pilu_channel_seed7".
std::string run_id(const ActivationSpec& activation, std::uint64_t seed);
/// "pilu/channel".
std::string activation_label(ActivationKind kind, SharingScheme scheme);

/// Loads (and subsets) the dataset named by the config.
Dataset load_experiment_dataset(const ExperimentConfig& cfg);

struct ExperimentResult {
    /// One record per (activation, seed), in config order.
    std::vector<RunRecord> records;
    std::size_t executed = 0, resumed = 0, diverged = 0, failed = 0;
    std::vector<std::string> errors;
};

using ProgressFn = std::function<void(const std::string& message)>;

/// Runs every (activation, seed) pair, `cfg.jobs` at a time. Each run logs to
/// output_dir/runs/<run_id>.jsonl; runs whose log is already complete are
/// read back instead of retrained unless `force` is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data, bool force = false,
                                const ProgressFn& progress = {});

struct MetricSummary {
    double mean = 0.0, std = 0.0, stderr_ = 0.0, min = 0.0, max = 0.0;
    /// Values ordered by seed.
    std::vector<double> values;
};

MetricSummary summarize_values(std::vector<double> values);

struct ActivationSummary {
    ActivationKind kind = ActivationKind::ReLU;
    SharingScheme scheme = SharingScheme::ChannelWise;
    std::string label;
    std::size_t parameters = 0;
    std::vector<std::uint64_t> seeds;
    MetricSummary loss, accuracy, error;
};

struct DistributionSummary {
    std::string dataset;
    std::vector<ActivationSummary> rows;

    const ActivationSummary* find(const std::string& label) const;
};

/// Final-epoch test metrics of every complete run, grouped by activation.
/// Rows are sorted by (activation, scheme) and values by seed, so the result
/// does not depend on the order of `records`.
DistributionSummary summarize(const std::vector<RunRecord>& records);

struct Comparison {
    std::string baseline, challenger;
    /// Challenger minus baseline mean accuracy, in percentage points.
    double delta_pp = 0.0;
    /// (baseline mean error - challenger mean error) / baseline mean error.
    double rel_err_improvement = 0.0;
    /// Challenger accuracies against baseline accuracies; NaN fields when
    /// either side has fewer than two seeds.
    TestResult welch, mann_whitney;
};

Comparison compare(const ActivationSummary& baseline, const ActivationSummary& challenger);
Comparison compare(const DistributionSummary& summary, const std::string& baseline, const std::string& challenger);

/// Every non-ReLU row against the ReLU row of the same scheme (any ReLU row
/// otherwise, or the first row when there is none).
std::vector<Comparison> default_comparisons(const DistributionSummary& summary);

struct ReportPaths {
    std::filesystem::path raw, summary, comparisons;
};

/// Writes raw_final_metrics.csv (one row per run), summary.csv (one row per
/// activation) and comparisons.csv into `dir`.
ReportPaths emit_report(const DistributionSummary& summary, const std::vector<RunRecord>& records,
                        const std::vector<Comparison>& comparisons, const std::filesystem::path& dir);

}  // namespace pilu
