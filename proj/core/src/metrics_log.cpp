#include "pilu/metrics_log.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pilu/format.hpp"

namespace pilu {

using nlohmann::json;

namespace {

json identity(const RunInfo& info) {
    return json{{"run_id", info.run_id},
                {"seed", info.seed},
                {"activation", to_string(info.activation)},
                {"scheme", to_string(info.scheme)},
                {"dataset", info.dataset}};
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw std::runtime_error("unknown split '" + s + "'");
}

void read_identity(const json& j, RunInfo& info) {
    info.run_id = j.at("run_id").get<std::string>();
    info.seed = j.at("seed").get<std::uint64_t>();
    const auto act = j.at("activation").get<std::string>();
    const auto scheme = j.at("scheme").get<std::string>();
    const auto kind = parse_activation(act);
    const auto sch = parse_scheme(scheme);
    if (!kind || !sch) throw std::runtime_error("unknown activation/scheme '" + act + "/" + scheme + "'");
    info.activation = *kind;
    info.scheme = *sch;
    info.dataset = j.at("dataset").get<std::string>();
}

}  // namespace

std::string metric_line(const RunInfo& info, const MetricRow& row) {
    json j = identity(info);
    j["record"] = "metrics";
    j["epoch"] = row.epoch;
    j["split"] = to_string(row.split);
    j["loss"] = row.loss;
    j["accuracy"] = row.accuracy;
    j["error"] = row.error;
    return j.dump();
}

std::string stats_line(const RunInfo& info, const LayerStatsRow& row) {
    json j{{"record", "layer_stats"}, {"run_id", info.run_id}, {"epoch", row.epoch}, {"param", row.param}};
    j["value_mean"] = row.value.mean;
    j["value_std"] = row.value.stddev;
    j["value_l2"] = row.value.l2;
    j["grad_mean"] = row.grad.mean;
    j["grad_std"] = row.grad.stddev;
    j["grad_l2"] = row.grad.l2;
    return j.dump();
}

std::string run_end_line(const RunRecord& record) {
    json j = identity(record.info);
    j["record"] = "run_end";
    j["parameters"] = record.info.parameters;
    j["complete"] = record.complete;
    j["diverged_epoch"] = record.diverged_epoch ? json(*record.diverged_epoch) : json(nullptr);
    return j.dump();
}

MetricsLogWriter::MetricsLogWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot write " + path.string());
}

void MetricsLogWriter::put(const std::string& line) {
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
}

void MetricsLogWriter::write(const RunInfo& info, const MetricRow& row) { put(metric_line(info, row)); }

void MetricsLogWriter::write(const RunInfo& info, const LayerStatsRow& row) { put(stats_line(info, row)); }

void MetricsLogWriter::finish(const RunRecord& record) { put(run_end_line(record)); }

TrainCallbacks MetricsLogWriter::callbacks() {
    return {[this](const RunInfo& info, const MetricRow& row) { write(info, row); },
            [this](const RunInfo& info, const LayerStatsRow& row) { write(info, row); }};
}

RunRecord read_run_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    RunRecord record;
    bool have_identity = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            const auto kind = j.at("record").get<std::string>();
            if (kind == "metrics") {
                if (!have_identity) {
                    read_identity(j, record.info);
                    have_identity = true;
                }
                MetricRow row;
                row.epoch = j.at("epoch").get<int>();
                row.split = parse_split(j.at("split").get<std::string>());
                row.loss = j.at("loss").get<double>();
                row.accuracy = j.at("accuracy").get<double>();
                row.error = j.at("error").get<double>();
                record.rows.push_back(row);
            } else if (kind == "layer_stats") {
                LayerStatsRow row;
                row.epoch = j.at("epoch").get<int>();
                row.param = j.at("param").get<std::string>();
                row.value = {j.at("value_mean").get<double>(), j.at("value_std").get<double>(),
                             j.at("value_l2").get<double>()};
                row.grad = {j.at("grad_mean").get<double>(), j.at("grad_std").get<double>(),
                            j.at("grad_l2").get<double>()};
                record.layer_stats.push_back(std::move(row));
            } else if (kind == "run_end") {
                read_identity(j, record.info);
                have_identity = true;
                record.info.parameters = j.at("parameters").get<std::size_t>();
                record.complete = j.at("complete").get<bool>();
                const auto& d = j.at("diverged_epoch");
                if (!d.is_null()) record.diverged_epoch = d.get<int>();
            } else {
                throw std::runtime_error("unknown record '" + kind + "'");
            }
        } catch (const json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return record;
}

bool run_log_complete(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return false;
    std::string line, last;
    while (std::getline(in, line)) {
        if (!line.empty()) last = line;
    }
    if (last.empty()) return false;
    const json j = json::parse(last, nullptr, false);
    return !j.is_discarded() && j.is_object() && j.value("record", "") == "run_end";
}

std::vector<RunRecord> read_run_logs(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<RunRecord> out;
    for (const auto& f : files) out.push_back(read_run_log(f));
    return out;
}

void write_metrics_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "run_id,seed,activation,scheme,dataset,epoch,split,loss,accuracy,error\n";
    for (const auto& r : records) {
        for (const auto& row : r.rows) {
            out << r.info.run_id << ',' << r.info.seed << ',' << to_string(r.info.activation) << ','
                << to_string(r.info.scheme) << ',' << r.info.dataset << ',' << row.epoch << ','
                << to_string(row.split) << ',' << format_double(row.loss) << ',' << format_double(row.accuracy)
                << ',' << format_double(row.error) << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace pilu
