#include "pilu_cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "pilu/bench.hpp"
#include "pilu/checkpoint.hpp"
#include "pilu/experiments.hpp"
#include "pilu/format.hpp"
#include "pilu/gradcheck.hpp"
#include "pilu/metrics_log.hpp"
#include "pilu/model.hpp"
#include "pilu/trainer.hpp"

namespace pilu::cli {

namespace fs = std::filesystem;

namespace {

/// Thrown for invalid flag values detected after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::map<std::string, ActivationKind> kActivationNames{
    {"linear", ActivationKind::Linear}, {"relu", ActivationKind::ReLU},
    {"lrelu", ActivationKind::LReLU},   {"prelu", ActivationKind::PReLU},
    {"double_relu", ActivationKind::DoubleReLU}, {"pilu", ActivationKind::PiLU}};

const std::map<std::string, SharingScheme> kSchemeNames{
    {"layer", SharingScheme::LayerWise}, {"channel", SharingScheme::ChannelWise}, {"neuron", SharingScheme::NeuronWise}};

ActivationKind activation_or_throw(const std::string& name) {
    const auto k = parse_activation(name);
    if (!k) throw UsageError("unknown activation '" + name + "' (expected relu, lrelu, prelu, double_relu, pilu)");
    return *k;
}

SharingScheme scheme_or_throw(const std::string& name) {
    const auto s = parse_scheme(name);
    if (!s) throw UsageError("unknown scheme '" + name + "' (expected layer, channel, neuron)");
    return *s;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

fs::path resolve_data_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kDataDirEnv)) return env;
    return {};
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
    return buf;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
    std::string dataset = "cifar10";
    std::string activation = "pilu";
    std::string scheme = "channel";
    std::uint64_t seed = 0;
    int epochs = 50;
    std::size_t batch_size = 32;
    std::size_t subset = 0;
    std::string data_dir;
    std::string out = "runs";
    std::string log_level = "metrics";
    bool l2_half = false;
    std::size_t synthetic_size = 2000;
    bool force = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    cfg.dataset = a.dataset;
    cfg.activations = {ActivationSpec{activation_or_throw(a.activation), scheme_or_throw(a.scheme)}};
    cfg.seeds = {a.seed};
    cfg.train.epochs = a.epochs;
    cfg.train.batch_size = a.batch_size;
    cfg.train.seed = a.seed;
    cfg.train.l2_half = a.l2_half;
    const auto level = parse_log_level(a.log_level);
    if (!level) throw UsageError("unknown log level '" + a.log_level + "' (expected metrics, stats, full)");
    cfg.train.log_level = *level;
    cfg.subset = a.subset;
    cfg.data_dir = resolve_data_dir(a.data_dir);
    cfg.synthetic_size = a.synthetic_size;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const auto& spec = cfg.activations.front();
    const auto id = run_id(spec, a.seed);
    const fs::path dir = a.out;
    const auto log_path = dir / (id + ".jsonl");
    const auto ckpt_path = dir / (id + ".ckpt");
    if (!a.force && run_log_complete(log_path) && fs::exists(ckpt_path)) {
        out << id << ": outputs already complete in " << dir.string() << " (use --force to retrain)\n";
        return kExitOk;
    }

    const Dataset data = load_experiment_dataset(cfg);
    if (cfg.train.batch_size > data.train.size()) throw UsageError("--batch-size exceeds the training split");

    Rng init = make_stream(a.seed, Stream::Init);
    auto model = build_paper_model<float>(data.num_classes, spec, init);
    RunInfo info;
    info.run_id = id;
    info.dataset = cfg.dataset;
    info.seed = a.seed;
    info.activation = spec.kind;
    info.scheme = spec.scheme;

    MetricsLogWriter log(log_path);
    auto callbacks = log.callbacks();
    auto write_metric = callbacks.on_metric;
    callbacks.on_metric = [&](const RunInfo& i, const MetricRow& row) {
        write_metric(i, row);
        if (row.split == Split::Test) {
            err << "epoch " << row.epoch << ": test loss " << format_double(row.loss) << ", accuracy "
                << percent(row.accuracy) << '\n';
        }
    };
    const auto record = train_run(model, data, cfg.train, info, callbacks);
    log.finish(record);
    write_metrics_csv({record}, dir / (id + ".csv"));
    save_checkpoint(model, ckpt_path, experiment_config_json(cfg));

    if (record.diverged_epoch) {
        err << id << ": diverged at epoch " << *record.diverged_epoch << '\n';
        return kExitFailure;
    }
    if (const auto* test = record.final_row(Split::Test)) {
        out << id << ": test loss " << format_double(test->loss) << ", accuracy " << percent(test->accuracy)
            << ", error " << percent(test->error) << '\n';
    }
    out << "metrics: " << log_path.string() << "\ncheckpoint: " << ckpt_path.string() << '\n';
    return kExitOk;
}

// ---- experiment / report ---------------------------------------------------

void print_summary(const DistributionSummary& summary, const std::vector<Comparison>& comparisons, std::ostream& out) {
    char line[200];
    std::snprintf(line, sizeof line, "%-20s %5s %18s %18s %10s %12s\n", "activation", "runs", "accuracy (+-std)",
                  "error (+-std)", "loss", "parameters");
    out << line;
    for (const auto& r : summary.rows) {
        std::snprintf(line, sizeof line, "%-20s %5zu %10.2f +- %4.2f %10.2f +- %4.2f %10.4f %12s\n", r.label.c_str(),
                      r.seeds.size(), 100 * r.accuracy.mean, 100 * r.accuracy.std, 100 * r.error.mean,
                      100 * r.error.std, r.loss.mean, group_thousands(r.parameters).c_str());
        out << line;
    }
    for (const auto& c : comparisons) {
        std::snprintf(line, sizeof line,
                      "%s vs %s: %+.2f pp, relative error improvement %.2f%%, Welch p(>) %.3g, Mann-Whitney p(>) %.3g\n",
                      c.challenger.c_str(), c.baseline.c_str(), c.delta_pp, 100 * c.rel_err_improvement,
                      c.welch.p_greater, c.mann_whitney.p_greater);
        out << line;
    }
}

struct ExperimentArgs {
    std::string config;
    bool desk_scale = false;
    std::optional<std::string> dataset, activations, schemes, seeds, data_dir, out;
    std::optional<int> epochs;
    std::optional<std::size_t> batch_size, subset, jobs, synthetic_size;
    bool force = false;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg = a.desk_scale ? ExperimentConfig::desk_scale_preset() : ExperimentConfig::full_preset();
    try {
        if (!a.config.empty()) cfg = load_experiment_config(a.config, cfg);
        if (a.dataset) cfg.dataset = *a.dataset;
        if (a.activations || a.schemes) {
            std::vector<ActivationKind> kinds;
            if (a.activations) {
                for (const auto& n : split_list(*a.activations)) kinds.push_back(activation_or_throw(n));
            } else {
                for (const auto& s : cfg.activations) {
                    if (std::find(kinds.begin(), kinds.end(), s.kind) == kinds.end()) kinds.push_back(s.kind);
                }
            }
            std::vector<SharingScheme> schemes{SharingScheme::ChannelWise};
            if (a.schemes) {
                schemes.clear();
                for (const auto& n : split_list(*a.schemes)) schemes.push_back(scheme_or_throw(n));
            }
            cfg.activations.clear();
            for (const auto k : kinds) {
                for (const auto s : schemes) {
                    if (arity(k) == 0 && s != schemes.front()) continue;
                    cfg.activations.push_back(ActivationSpec{k, s});
                }
            }
        }
        if (a.seeds) {
            const auto items = split_list(*a.seeds);
            cfg.seeds.clear();
            if (items.size() == 1) {
                // A single number is a count: seeds 0..n-1.
                const auto n = std::stoull(items.front());
                for (std::uint64_t s = 0; s < n; ++s) cfg.seeds.push_back(s);
            } else {
                for (const auto& s : items) cfg.seeds.push_back(std::stoull(s));
            }
        }
        if (a.epochs) cfg.train.epochs = *a.epochs;
        if (a.batch_size) cfg.train.batch_size = *a.batch_size;
        if (a.subset) cfg.subset = *a.subset;
        if (a.jobs) cfg.jobs = *a.jobs;
        if (a.synthetic_size) cfg.synthetic_size = *a.synthetic_size;
        if (a.out) cfg.output_dir = *a.out;
        if (a.data_dir) cfg.data_dir = *a.data_dir;
        if (cfg.data_dir.empty()) cfg.data_dir = resolve_data_dir("");
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const std::out_of_range& e) {
        throw UsageError(std::string("seed out of range: ") + e.what());
    }

    const Dataset data = load_experiment_dataset(cfg);
    if (cfg.train.batch_size > data.train.size()) throw UsageError("batch_size exceeds the training split");
    fs::create_directories(cfg.output_dir);
    {
        std::ofstream f(cfg.output_dir / "config.json");
        f << experiment_config_json(cfg) << '\n';
    }
    err << "running " << cfg.activations.size() * cfg.seeds.size() << " runs (" << cfg.activations.size()
        << " activations x " << cfg.seeds.size() << " seeds, " << cfg.train.epochs << " epochs, "
        << data.train.size() << " training images, " << cfg.jobs << " jobs)\n";
    const auto result = run_experiment(cfg, data, a.force, [&](const std::string& m) { err << m << '\n'; });

    write_metrics_csv(result.records, cfg.output_dir / "metrics.csv");
    const auto summary = summarize(result.records);
    const auto comparisons = default_comparisons(summary);
    const auto paths = emit_report(summary, result.records, comparisons, cfg.output_dir);
    print_summary(summary, comparisons, out);
    out << result.executed << " trained, " << result.resumed << " resumed, " << result.diverged << " diverged, "
        << result.failed << " failed\n";
    out << "summary: " << paths.summary.string() << "\ncomparisons: " << paths.comparisons.string() << '\n';
    for (const auto& e : result.errors) err << "error: " << e << '\n';
    return result.records.empty() ? kExitFailure : kExitOk;
}

int cmd_report(const std::string& in, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    fs::path runs = fs::path(in) / "runs";
    if (!fs::is_directory(runs)) runs = in;
    const auto records = read_run_logs(runs);
    if (records.empty()) {
        err << "no runs found in " << in << '\n';
        return kExitFailure;
    }
    const auto summary = summarize(records);
    if (summary.rows.empty()) {
        err << "no complete runs found in " << in << '\n';
        return kExitFailure;
    }
    const auto comparisons = default_comparisons(summary);
    const fs::path dest = out_dir.empty() ? fs::path(in) : fs::path(out_dir);
    write_metrics_csv(records, dest / "metrics.csv");
    const auto paths = emit_report(summary, records, comparisons, dest);
    print_summary(summary, comparisons, out);
    out << "summary: " << paths.summary.string() << "\ncomparisons: " << paths.comparisons.string() << '\n';
    return kExitOk;
}

// ---- bench -----------------------------------------------------------------

int cmd_bench(const std::string& sizes, std::size_t iters, const std::string& kinds, std::size_t batches,
              std::uint64_t seed, const std::string& out_path, std::ostream& out) {
    BenchConfig cfg;
    cfg.iters = iters;
    cfg.batches = batches;
    cfg.seed = seed;
    if (!sizes.empty()) {
        cfg.sizes.clear();
        try {
            for (const auto& s : split_list(sizes)) cfg.sizes.push_back(std::stoull(s));
        } catch (const std::exception&) {
            throw UsageError("--sizes must be a comma-separated list of positive integers");
        }
    }
    if (!kinds.empty()) {
        cfg.kinds.clear();
        for (const auto& k : split_list(kinds)) cfg.kinds.push_back(activation_or_throw(k));
    }
    std::vector<BenchResult> results;
    try {
        results = bench_activations(cfg);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %8s %10s %14s %12s\n", "kind", "size", "iters", "per_call_ns",
                  "rel_to_relu");
    out << line;
    for (const auto& r : results) {
        std::snprintf(line, sizeof line, "%-12s %8zu %10zu %14.1f %12.3f%s\n", std::string(to_string(r.kind)).c_str(),
                      r.size, r.iters, r.per_call_ns, r.rel_to_relu, r.flagged ? "  (iters raised)" : "");
        out << line;
    }
    if (cfg.sizes.size() >= 2) {
        for (const auto kind : cfg.kinds) {
            const auto fit = linear_fit(results, kind);
            std::snprintf(line, sizeof line, "%-12s slope %.4g ns/element, intercept %.4g ns, r^2 %.5f\n",
                          std::string(to_string(kind)).c_str(), fit.slope, fit.intercept, fit.r_squared);
            out << line;
        }
    }
    out << "timing path: scalar layer-wise forward, single thread\n";
    if (!out_path.empty()) {
        write_bench_csv(results, out_path);
        out << "csv: " << out_path << '\n';
    }
    return kExitOk;
}

// ---- gradcheck -------------------------------------------------------------

struct GradcheckArgs {
    std::string activation;
    bool full_model = false;
    std::string scheme = "channel";
    std::uint64_t seed = 0;
    std::optional<double> tolerance, step;
    std::size_t batch = 4;
    std::size_t max_entries = 40;
    std::size_t classes = 10;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
    const auto scheme = scheme_or_throw(a.scheme);
    GradCheckReport report;
    if (a.full_model) {
        const auto kind = a.activation.empty() ? ActivationKind::PiLU : activation_or_throw(a.activation);
        auto problem = make_gradcheck_problem({kind, scheme}, a.seed, a.batch, a.classes);
        GradCheckOptions opts;
        if (a.tolerance) opts.tolerance = *a.tolerance;
        if (a.step) opts.step = *a.step;
        opts.max_entries_per_tensor = a.max_entries;
        opts.seed = a.seed;
        report = gradient_check(problem.model, problem.x, problem.onehot, opts);
        out << "full model, " << to_string(kind) << "/" << to_string(scheme) << ", batch " << a.batch << ", seed "
            << a.seed << '\n';
    } else {
        if (a.activation.empty()) throw UsageError("gradcheck needs --activation NAME or --full-model");
        const auto kind = activation_or_throw(a.activation);
        report = activation_gradient_check(kind, scheme, a.seed, a.step.value_or(1e-6), a.tolerance.value_or(1e-6));
        out << "activation " << to_string(kind) << "/" << to_string(scheme) << ", seed " << a.seed << '\n';
    }
    out << report.table();
    if (!report.pass) {
        out << "FAIL:";
        for (const auto& name : report.failing()) out << ' ' << name;
        out << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

// ---- model-summary ---------------------------------------------------------

int cmd_model_summary(const std::string& dataset, const std::string& activation, const std::string& scheme,
                      std::ostream& out) {
    std::size_t classes = 0;
    if (dataset == "cifar10") classes = 10;
    else if (dataset == "cifar100") classes = 100;
    else throw UsageError("unknown dataset '" + dataset + "' (expected cifar10 or cifar100)");
    const ActivationSpec spec{activation_or_throw(activation), scheme_or_throw(scheme)};
    const auto model = build_paper_model<float>(classes, spec);
    out << display_name(spec.kind) << " (" << to_string(spec.scheme) << "), " << dataset << '\n';
    out << model_summary(model);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive piecewise-linear activations: training, experiments, benchmarks and checks", "pilu"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    const auto activation_check = CLI::IsMember(kActivationNames);
    const auto scheme_check = CLI::IsMember(kSchemeNames);
    const std::string data_help = std::string("Directory with the CIFAR binary files (default: $") + kDataDirEnv + ")";

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train one model and write its metrics log and checkpoint");
    train_cmd->add_option("--dataset", train.dataset, "cifar10, cifar100 or synthetic")
        ->check(CLI::IsMember({"cifar10", "cifar100", "synthetic"}))
        ->capture_default_str();
    train_cmd->add_option("--activation", train.activation)->check(activation_check)->capture_default_str();
    train_cmd->add_option("--scheme", train.scheme)->check(scheme_check)->capture_default_str();
    train_cmd->add_option("--seed", train.seed)->capture_default_str();
    train_cmd->add_option("--epochs", train.epochs)->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_option("--batch-size", train.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_option("--subset", train.subset, "Stratified training subset size (0: all)")->capture_default_str();
    train_cmd->add_option("--data-dir", train.data_dir, data_help);
    train_cmd->add_option("--out", train.out, "Output directory")->capture_default_str();
    train_cmd->add_option("--log-level", train.log_level, "metrics, stats or full")
        ->check(CLI::IsMember({"metrics", "stats", "full"}))
        ->capture_default_str();
    train_cmd->add_flag("--l2-half", train.l2_half, "Use (lambda/2)*sum(w^2) for the output-layer penalty");
    train_cmd->add_option("--synthetic-size", train.synthetic_size)->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_flag("--force", train.force, "Retrain even if outputs are complete");

    ExperimentArgs exp;
    auto* exp_cmd = app.add_subcommand("experiment", "Run a multi-seed sweep and write summary/comparison CSVs");
    exp_cmd->add_option("--config", exp.config, "JSON experiment config")->check(CLI::ExistingFile);
    exp_cmd->add_flag("--desk-scale", exp.desk_scale, "5 seeds x 10 epochs x 5,000-image subset");
    exp_cmd->add_option("--dataset", exp.dataset)->check(CLI::IsMember({"cifar10", "cifar100", "synthetic"}));
    exp_cmd->add_option("--activations", exp.activations, "Comma-separated activation names");
    exp_cmd->add_option("--schemes", exp.schemes, "Comma-separated sharing schemes");
    exp_cmd->add_option("--seeds", exp.seeds, "Seed count n (0..n-1) or comma-separated list");
    exp_cmd->add_option("--epochs", exp.epochs)->check(CLI::PositiveNumber);
    exp_cmd->add_option("--batch-size", exp.batch_size)->check(CLI::PositiveNumber);
    exp_cmd->add_option("--subset", exp.subset);
    exp_cmd->add_option("--synthetic-size", exp.synthetic_size)->check(CLI::PositiveNumber);
    exp_cmd->add_option("--jobs", exp.jobs, "Runs in flight")->check(CLI::PositiveNumber);
    exp_cmd->add_option("--data-dir", exp.data_dir, data_help);
    exp_cmd->add_option("--out", exp.out, "Output directory");
    exp_cmd->add_flag("--force", exp.force, "Retrain runs whose logs are already complete");

    std::string bench_sizes, bench_kinds, bench_out;
    std::size_t bench_iters = 100000, bench_batches = 9;
    std::uint64_t bench_seed = 0;
    auto* bench_cmd = app.add_subcommand("bench", "Time activation forward passes across input sizes");
    bench_cmd->add_option("--sizes", bench_sizes, "Comma-separated sizes (default 100,1000,10000,100000)");
    bench_cmd->add_option("--iters", bench_iters)->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--kinds", bench_kinds, "Comma-separated activations (default relu,prelu,double_relu,pilu)");
    bench_cmd->add_option("--batches", bench_batches, "Timed batches (median reported)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--seed", bench_seed)->capture_default_str();
    bench_cmd->add_option("--out", bench_out, "CSV output path");

    GradcheckArgs gc;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Compare analytic gradients with central finite differences");
    gc_cmd->add_option("--activation", gc.activation)->check(activation_check);
    gc_cmd->add_flag("--full-model", gc.full_model, "Check the whole classifier on a random batch");
    gc_cmd->add_option("--scheme", gc.scheme)->check(scheme_check)->capture_default_str();
    gc_cmd->add_option("--seed", gc.seed)->capture_default_str();
    gc_cmd->add_option("--tol", gc.tolerance, "Relative error tolerance (default 1e-6 activation, 1e-4 full model)");
    gc_cmd->add_option("--step", gc.step, "Finite-difference step");
    gc_cmd->add_option("--batch", gc.batch)->check(CLI::PositiveNumber)->capture_default_str();
    gc_cmd->add_option("--max-entries", gc.max_entries, "Probed entries per weight tensor (0: all)")
        ->capture_default_str();

    std::string report_in, report_out;
    auto* report_cmd = app.add_subcommand("report", "Rebuild summary/comparison CSVs from existing run logs");
    report_cmd->add_option("--in", report_in, "Experiment output directory")->required();
    report_cmd->add_option("--out", report_out, "Destination (default: --in)");

    std::string ms_dataset = "cifar10", ms_activation = "pilu", ms_scheme = "channel";
    auto* ms_cmd = app.add_subcommand("model-summary", "Print the layer table and parameter count");
    ms_cmd->add_option("--dataset", ms_dataset)->check(CLI::IsMember({"cifar10", "cifar100"}))->capture_default_str();
    ms_cmd->add_option("--activation", ms_activation)->check(activation_check)->capture_default_str();
    ms_cmd->add_option("--scheme", ms_scheme)->check(scheme_check)->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();  // program name
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\nrun with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (*train_cmd) return cmd_train(train, out, err);
        if (*exp_cmd) return cmd_experiment(exp, out, err);
        if (*bench_cmd) return cmd_bench(bench_sizes, bench_iters, bench_kinds, bench_batches, bench_seed, bench_out, out);
        if (*gc_cmd) return cmd_gradcheck(gc, out);
        if (*report_cmd) return cmd_report(report_in, report_out, out, err);
        if (*ms_cmd) return cmd_model_summary(ms_dataset, ms_activation, ms_scheme, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace pilu::cli
