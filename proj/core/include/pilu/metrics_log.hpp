#pragma once

// Line-delimited JSON run logs and their CSV export.
//
// Every line is one object with a "record" field:
//   metrics      run_id, seed, activation, scheme, dataset, epoch, split, loss, accuracy, error
//   layer_stats  run_id, epoch, param, value_{mean,std,l2}, grad_{mean,std,l2}
//   run_end      run identity plus parameters, complete, diverged_epoch
// A log without a run_end line belongs to an interrupted run.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pilu/trainer.hpp"

namespace pilu {

std::string metric_line(const RunInfo& info, const MetricRow& row);
std::string stats_line(const RunInfo& info, const LayerStatsRow& row);
std::string run_end_line(const RunRecord& record);

/// Appends records to one run's log, flushing after every line so an
/// interrupted run leaves a readable prefix.
class MetricsLogWriter {
public:
    /// Truncates an existing file.
    explicit MetricsLogWriter(const std::filesystem::path& path);

    void write(const RunInfo& info, const MetricRow& row);
    void write(const RunInfo& info, const LayerStatsRow& row);
    void finish(const RunRecord& record);

    /// Callbacks that stream rows into this writer.
    TrainCallbacks callbacks();

private:
    void put(const std::string& line);

    std::filesystem::path path_;
    std::ofstream out_;
};

/// Parses one run log. Throws std::runtime_error on malformed lines.
RunRecord read_run_log(const std::filesystem::path& path);

/// True when the log exists and ends its run with a run_end record.
bool run_log_complete(const std::filesystem::path& path);

/// Every *.jsonl log directly inside `dir`, sorted by file name.
std::vector<RunRecord> read_run_logs(const std::filesystem::path& dir);

/// CSV with header run_id,seed,activation,scheme,dataset,epoch,split,loss,accuracy,error.
void write_metrics_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path);

}  // namespace pilu
