#include "pilu/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "pilu/format.hpp"
#include "pilu/metrics_log.hpp"

namespace pilu {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
    std::vector<std::uint64_t> seeds(n);
    for (std::uint64_t i = 0; i < n; ++i) seeds[i] = i;
    return seeds;
}

std::vector<ActivationSpec> paper_activations(SharingScheme scheme) {
    std::vector<ActivationSpec> out;
    for (const auto kind : {ActivationKind::ReLU, ActivationKind::PReLU, ActivationKind::DoubleReLU, ActivationKind::PiLU}) {
        out.push_back(ActivationSpec{kind, scheme});
    }
    return out;
}

ActivationKind must_parse_activation(const std::string& name) {
    const auto k = parse_activation(name);
    if (!k) throw std::invalid_argument("unknown activation '" + name + "'");
    return *k;
}

SharingScheme must_parse_scheme(const std::string& name) {
    const auto s = parse_scheme(name);
    if (!s) throw std::invalid_argument("unknown scheme '" + name + "'");
    return *s;
}

}  // namespace

ExperimentConfig ExperimentConfig::full_preset() {
    ExperimentConfig cfg;
    cfg.activations = paper_activations(SharingScheme::ChannelWise);
    cfg.seeds = seed_range(30);
    cfg.train.epochs = 50;
    cfg.output_dir = "results/full";
    return cfg;
}

ExperimentConfig ExperimentConfig::desk_scale_preset() {
    ExperimentConfig cfg;
    cfg.activations = paper_activations(SharingScheme::ChannelWise);
    cfg.seeds = seed_range(5);
    cfg.train.epochs = 10;
    cfg.subset = 5000;
    cfg.output_dir = "results/desk";
    return cfg;
}

void ExperimentConfig::validate() const {
    if (dataset != "cifar10" && dataset != "cifar100" && dataset != "synthetic") {
        throw std::invalid_argument("unknown dataset '" + dataset + "' (expected cifar10, cifar100 or synthetic)");
    }
    if (activations.empty()) throw std::invalid_argument("no activations configured");
    if (seeds.empty()) throw std::invalid_argument("no seeds configured");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw std::invalid_argument("seeds must be distinct");
    }
    std::set<std::string> labels;
    for (const auto& a : activations) {
        if (!labels.insert(activation_label(a.kind, a.scheme)).second) {
            throw std::invalid_argument("duplicate activation " + activation_label(a.kind, a.scheme));
        }
    }
    if (train.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (train.batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
    if (jobs == 0) throw std::invalid_argument("jobs must be >= 1");
    if (dataset == "synthetic" && (synthetic_size == 0 || synthetic_classes < 2)) {
        throw std::invalid_argument("synthetic dataset needs size >= 1 and classes >= 2");
    }
}

ExperimentConfig parse_experiment_config(const std::string& json_text, ExperimentConfig cfg) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("experiment config: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
    try {
        if (j.contains("dataset")) cfg.dataset = j["dataset"].get<std::string>();
        const bool explicit_specs = j.contains("activations") && j["activations"].is_array() &&
                                    !j["activations"].empty() && j["activations"].front().is_object();
        if (explicit_specs) {
            cfg.activations.clear();
            for (const auto& a : j["activations"]) {
                ActivationSpec spec{must_parse_activation(a.at("activation").get<std::string>())};
                if (a.contains("scheme")) spec.scheme = must_parse_scheme(a["scheme"].get<std::string>());
                cfg.activations.push_back(spec);
            }
        } else if (j.contains("activations") || j.contains("schemes")) {
            std::vector<ActivationKind> kinds;
            std::vector<SharingScheme> schemes;
            if (j.contains("activations")) {
                for (const auto& a : j["activations"]) kinds.push_back(must_parse_activation(a.get<std::string>()));
            } else {
                for (const auto& a : cfg.activations) {
                    if (std::find(kinds.begin(), kinds.end(), a.kind) == kinds.end()) kinds.push_back(a.kind);
                }
            }
            if (j.contains("schemes")) {
                for (const auto& s : j["schemes"]) schemes.push_back(must_parse_scheme(s.get<std::string>()));
            } else {
                schemes.push_back(SharingScheme::ChannelWise);
            }
            cfg.activations.clear();
            for (const auto k : kinds) {
                for (const auto s : schemes) {
                    // Fixed rectifiers have no parameters to share; one entry suffices.
                    if (arity(k) == 0 && s != schemes.front()) continue;
                    cfg.activations.push_back(ActivationSpec{k, s});
                }
            }
        }
        if (j.contains("seeds")) {
            const auto& s = j["seeds"];
            if (s.is_number_unsigned()) {
                cfg.seeds = seed_range(s.get<std::uint64_t>());
            } else {
                cfg.seeds = s.get<std::vector<std::uint64_t>>();
            }
        }
        if (j.contains("epochs")) cfg.train.epochs = j["epochs"].get<int>();
        if (j.contains("batch_size")) cfg.train.batch_size = j["batch_size"].get<std::size_t>();
        if (j.contains("subset")) cfg.subset = j["subset"].get<std::size_t>();
        if (j.contains("subset_seed")) cfg.subset_seed = j["subset_seed"].get<std::uint64_t>();
        if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("data_dir")) cfg.data_dir = j["data_dir"].get<std::string>();
        if (j.contains("l2_lambda")) cfg.train.l2_lambda = j["l2_lambda"].get<double>();
        if (j.contains("l2_half")) cfg.train.l2_half = j["l2_half"].get<bool>();
        if (j.contains("lr")) cfg.train.adam.lr = j["lr"].get<double>();
        if (j.contains("log_level")) {
            const auto name = j["log_level"].get<std::string>();
            const auto level = parse_log_level(name);
            if (!level) throw std::invalid_argument("unknown log_level '" + name + "'");
            cfg.train.log_level = *level;
        }
        if (j.contains("jobs")) cfg.jobs = j["jobs"].get<std::size_t>();
        if (j.contains("synthetic_size")) cfg.synthetic_size = j["synthetic_size"].get<std::size_t>();
        if (j.contains("synthetic_classes")) cfg.synthetic_classes = j["synthetic_classes"].get<std::size_t>();
        if (j.contains("synthetic_seed")) cfg.synthetic_seed = j["synthetic_seed"].get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("experiment config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str(), std::move(base));
}

std::string experiment_config_json(const ExperimentConfig& cfg) {
    json acts = json::array();
    for (const auto& a : cfg.activations) {
        acts.push_back(json{{"activation", to_string(a.kind)}, {"scheme", to_string(a.scheme)}});
    }
    json j{{"dataset", cfg.dataset},
           {"activations", acts},
           {"seeds", cfg.seeds},
           {"epochs", cfg.train.epochs},
           {"batch_size", cfg.train.batch_size},
           {"subset", cfg.subset},
           {"subset_seed", cfg.subset_seed},
           {"output_dir", cfg.output_dir.string()},
           {"data_dir", cfg.data_dir.string()},
           {"l2_lambda", cfg.train.l2_lambda},
           {"l2_half", cfg.train.l2_half},
           {"lr", cfg.train.adam.lr},
           {"log_level", to_string(cfg.train.log_level)}};
    if (cfg.dataset == "synthetic") {
        j["synthetic_size"] = cfg.synthetic_size;
        j["synthetic_classes"] = cfg.synthetic_classes;
        j["synthetic_seed"] = cfg.synthetic_seed;
    }
    return j.dump(2);
}

std::string run_id(const ActivationSpec& activation, std::uint64_t seed) {
    return std::string(to_string(activation.kind)) + "_" + std::string(to_string(activation.scheme)) + "_seed" +
           std::to_string(seed);
}

std::string activation_label(ActivationKind kind, SharingScheme scheme) {
    return std::string(to_string(kind)) + "/" + std::string(to_string(scheme));
}

Dataset load_experiment_dataset(const ExperimentConfig& cfg) {
    Dataset data;
    if (cfg.dataset == "synthetic") {
        data = make_synthetic(cfg.synthetic_size, cfg.synthetic_classes, cfg.synthetic_seed);
    } else {
        if (cfg.data_dir.empty()) throw DataError("no data directory given for " + cfg.dataset);
        data = cfg.dataset == "cifar10" ? load_cifar10(cfg.data_dir) : load_cifar100(cfg.data_dir);
    }
    if (cfg.subset > 0 && cfg.subset < data.train.size()) data = subset(data, cfg.subset, cfg.subset_seed);
    return data;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data, bool force,
                                const ProgressFn& progress) {
    cfg.validate();
    const auto runs_dir = cfg.output_dir / "runs";
    std::filesystem::create_directories(runs_dir);

    struct Job {
        ActivationSpec activation;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& a : cfg.activations) {
        for (const auto seed : cfg.seeds) jobs.push_back({a, seed});
    }

    ExperimentResult result;
    result.records.resize(jobs.size());
    std::vector<int> outcome(jobs.size(), 0);  // 0 executed, 1 resumed, 2 failed
    std::vector<std::string> errors(jobs.size());
    std::mutex progress_mutex;
    auto report = [&](const std::string& msg) {
        if (!progress) return;
        std::lock_guard lock(progress_mutex);
        progress(msg);
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const auto& job = jobs[i];
            const auto id = run_id(job.activation, job.seed);
            const auto log_path = runs_dir / (id + ".jsonl");
            try {
                if (!force && run_log_complete(log_path)) {
                    result.records[i] = read_run_log(log_path);
                    outcome[i] = 1;
                    report(id + ": already complete, skipped");
                    continue;
                }
                TrainConfig train = cfg.train;
                train.seed = job.seed;
                RunInfo info;
                info.run_id = id;
                info.dataset = cfg.dataset;
                MetricsLogWriter log(log_path);
                auto record = train_paper_model(data, job.activation, train, info, log.callbacks());
                log.finish(record);
                const auto* test = record.final_row(Split::Test);
                if (record.diverged_epoch) {
                    report(id + ": diverged at epoch " + std::to_string(*record.diverged_epoch));
                } else if (test) {
                    report(id + ": test accuracy " + format_double(test->accuracy));
                }
                result.records[i] = std::move(record);
            } catch (const std::exception& e) {
                outcome[i] = 2;
                errors[i] = id + ": " + e.what();
                report(errors[i]);
            }
        }
    };

    const std::size_t workers = std::min(cfg.jobs, jobs.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    std::vector<RunRecord> kept;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        switch (outcome[i]) {
            case 0: ++result.executed; break;
            case 1: ++result.resumed; break;
            default:
                ++result.failed;
                result.errors.push_back(errors[i]);
                continue;
        }
        if (result.records[i].diverged_epoch) ++result.diverged;
        kept.push_back(std::move(result.records[i]));
    }
    result.records = std::move(kept);
    return result;
}

MetricSummary summarize_values(std::vector<double> values) {
    MetricSummary s;
    s.values = std::move(values);
    if (s.values.empty()) {
        s.mean = s.std = s.stderr_ = s.min = s.max = kNaN;
        return s;
    }
    s.mean = mean(s.values);
    s.std = sample_std(s.values);
    s.stderr_ = s.std / std::sqrt(static_cast<double>(s.values.size()));
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

const ActivationSummary* DistributionSummary::find(const std::string& label) const {
    for (const auto& r : rows) {
        if (r.label == label) return &r;
    }
    return nullptr;
}

DistributionSummary summarize(const std::vector<RunRecord>& records) {
    struct Final {
        std::uint64_t seed;
        double loss, accuracy, error;
    };
    std::map<std::pair<int, int>, std::vector<Final>> groups;
    std::map<std::pair<int, int>, std::size_t> parameters;
    DistributionSummary out;
    for (const auto& r : records) {
        const auto* test = r.final_row(Split::Test);
        if (!r.complete || !test) continue;
        if (out.dataset.empty()) out.dataset = r.info.dataset;
        const std::pair key{static_cast<int>(r.info.activation), static_cast<int>(r.info.scheme)};
        groups[key].push_back({r.info.seed, test->loss, test->accuracy, test->error});
        parameters[key] = r.info.parameters;
    }
    for (auto& [key, finals] : groups) {
        std::sort(finals.begin(), finals.end(), [](const Final& a, const Final& b) { return a.seed < b.seed; });
        ActivationSummary row;
        row.kind = static_cast<ActivationKind>(key.first);
        row.scheme = static_cast<SharingScheme>(key.second);
        row.label = activation_label(row.kind, row.scheme);
        row.parameters = parameters[key];
        std::vector<double> loss, acc, err;
        for (const auto& f : finals) {
            row.seeds.push_back(f.seed);
            loss.push_back(f.loss);
            acc.push_back(f.accuracy);
            err.push_back(f.error);
        }
        row.loss = summarize_values(std::move(loss));
        row.accuracy = summarize_values(std::move(acc));
        row.error = summarize_values(std::move(err));
        out.rows.push_back(std::move(row));
    }
    return out;
}

Comparison compare(const ActivationSummary& baseline, const ActivationSummary& challenger) {
    Comparison c;
    c.baseline = baseline.label;
    c.challenger = challenger.label;
    c.delta_pp = 100.0 * (challenger.accuracy.mean - baseline.accuracy.mean);
    c.rel_err_improvement = (baseline.error.mean - challenger.error.mean) / baseline.error.mean;
    const auto& x = challenger.accuracy.values;
    const auto& y = baseline.accuracy.values;
    if (x.size() >= 2 && y.size() >= 2) {
        c.welch = welch_t_test(x, y);
        c.mann_whitney = mann_whitney_u(x, y);
    } else {
        c.welch = c.mann_whitney = TestResult{kNaN, kNaN, kNaN, kNaN, false};
    }
    return c;
}

Comparison compare(const DistributionSummary& summary, const std::string& baseline, const std::string& challenger) {
    const auto* b = summary.find(baseline);
    const auto* c = summary.find(challenger);
    if (!b) throw std::invalid_argument("no runs for baseline " + baseline);
    if (!c) throw std::invalid_argument("no runs for challenger " + challenger);
    return compare(*b, *c);
}

std::vector<Comparison> default_comparisons(const DistributionSummary& summary) {
    std::vector<Comparison> out;
    if (summary.rows.empty()) return out;
    auto baseline_for = [&](const ActivationSummary& row) {
        const ActivationSummary* any_relu = nullptr;
        for (const auto& r : summary.rows) {
            if (r.kind != ActivationKind::ReLU) continue;
            if (r.scheme == row.scheme) return &r;
            if (!any_relu) any_relu = &r;
        }
        return any_relu ? any_relu : &summary.rows.front();
    };
    for (const auto& r : summary.rows) {
        const ActivationSummary* base = baseline_for(r);
        if (&r == base || r.kind == ActivationKind::ReLU) continue;
        out.push_back(compare(*base, r));
    }
    return out;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void put_stats(std::ostream& out, const MetricSummary& s) {
    out << ',' << format_double(s.mean) << ',' << format_double(s.std) << ',' << format_double(s.stderr_) << ','
        << format_double(s.min) << ',' << format_double(s.max);
}

}  // namespace

ReportPaths emit_report(const DistributionSummary& summary, const std::vector<RunRecord>& records,
                        const std::vector<Comparison>& comparisons, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    ReportPaths paths{dir / "raw_final_metrics.csv", dir / "summary.csv", dir / "comparisons.csv"};

    {
        // Sorted like the summary so the file is independent of record order.
        std::vector<const RunRecord*> sorted;
        for (const auto& r : records) {
            if (r.complete && r.final_row(Split::Test)) sorted.push_back(&r);
        }
        std::sort(sorted.begin(), sorted.end(), [](const RunRecord* a, const RunRecord* b) {
            return std::tuple(a->info.activation, a->info.scheme, a->info.seed) <
                   std::tuple(b->info.activation, b->info.scheme, b->info.seed);
        });
        auto out = open_csv(paths.raw);
        out << "run_id,activation,scheme,seed,epoch,loss,accuracy,error\n";
        for (const auto* r : sorted) {
            const auto* t = r->final_row(Split::Test);
            out << r->info.run_id << ',' << to_string(r->info.activation) << ',' << to_string(r->info.scheme) << ','
                << r->info.seed << ',' << t->epoch << ',' << format_double(t->loss) << ','
                << format_double(t->accuracy) << ',' << format_double(t->error) << '\n';
        }
    }
    {
        auto out = open_csv(paths.summary);
        out << "activation,scheme,model,runs";
        for (const char* m : {"accuracy", "error", "loss"}) {
            for (const char* s : {"mean", "std", "stderr", "min", "max"}) out << ',' << m << '_' << s;
        }
        out << ",parameters\n";
        for (const auto& r : summary.rows) {
            out << to_string(r.kind) << ',' << to_string(r.scheme) << ',' << display_name(r.kind) << ','
                << r.seeds.size();
            put_stats(out, r.accuracy);
            put_stats(out, r.error);
            put_stats(out, r.loss);
            out << ',' << r.parameters << '\n';
        }
    }
    {
        auto out = open_csv(paths.comparisons);
        out << "baseline,challenger,delta_pp,rel_err_improvement,welch_t,welch_df,welch_p_two_sided,"
               "welch_p_greater,mwu_u,mwu_p_two_sided,mwu_p_greater,mwu_exact\n";
        for (const auto& c : comparisons) {
            out << c.baseline << ',' << c.challenger << ',' << format_double(c.delta_pp) << ','
                << format_double(c.rel_err_improvement) << ',' << format_double(c.welch.statistic) << ','
                << format_double(c.welch.df) << ',' << format_double(c.welch.p_two_sided) << ','
                << format_double(c.welch.p_greater) << ',' << format_double(c.mann_whitney.statistic) << ','
                << format_double(c.mann_whitney.p_two_sided) << ',' << format_double(c.mann_whitney.p_greater)
                << ',' << (c.mann_whitney.exact ? "true" : "false") << '\n';
        }
    }
    return paths;
}

}  // namespace pilu
