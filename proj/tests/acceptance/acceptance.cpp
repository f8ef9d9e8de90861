// Acceptance suite. Prints one line per criterion:
//   criterion <n> (<name>): PASS|FAIL|SKIP  <details>  [<seconds>s]
// Exit status: 1 if any criterion failed, 77 if every selected criterion was
// skipped, 0 otherwise.
//
// Criteria 5 and 6 train on CIFAR and need --data-dir or PILU_DATA_DIR.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pilu/activations.hpp"
#include "pilu/bench.hpp"
#include "pilu/data.hpp"
#include "pilu/experiments.hpp"
#include "pilu/format.hpp"
#include "pilu/gradcheck.hpp"
#include "pilu/init.hpp"
#include "pilu/losses.hpp"
#include "pilu/metrics_log.hpp"
#include "pilu/model.hpp"
#include "pilu/optimizer.hpp"

namespace fs = std::filesystem;
using namespace pilu;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status = Status::Pass;
    std::string detail;
};

struct Options {
    std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9};
    fs::path data_dir;
    fs::path out_dir = "acceptance_results";
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
};

// Collects individual checks; the criterion passes when all of them do.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
    }
    void note(const std::string& text) { notes_.push_back(text); }
    Outcome outcome() const {
        Outcome o;
        o.status = failures_.empty() ? Status::Pass : Status::Fail;
        std::ostringstream s;
        const auto& items = failures_.empty() ? notes_ : failures_;
        for (std::size_t i = 0; i < items.size(); ++i) s << (i ? "; " : "") << items[i];
        o.detail = s.str();
        return o;
    }

private:
    std::vector<std::string> failures_, notes_;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
    return buf;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }
bool same_bits(float a, float b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// ---- 1: parameter counts ----------------------------------------------------

Outcome parameter_counts() {
    Checks c;
    const std::vector<ActivationKind> kinds{ActivationKind::ReLU, ActivationKind::PReLU, ActivationKind::DoubleReLU,
                                            ActivationKind::PiLU};
    const std::map<std::size_t, std::vector<std::size_t>> totals{{10, {35802, 35962, 35962, 36282}},
                                                                 {100, {41652, 41812, 41812, 42132}}};
    const std::vector<std::size_t> conv_counts{448, 2320, 4640, 9248, 18496};
    for (const auto& [classes, expected] : totals) {
        for (std::size_t k = 0; k < kinds.size(); ++k) {
            const auto model = build_paper_model<float>(classes, {kinds[k], SharingScheme::ChannelWise});
            const auto total = model.count_parameters();
            c.expect(total == expected[k], std::string(display_name(kinds[k])) + "/" + std::to_string(classes) +
                                               " total " + std::to_string(total) + " != " +
                                               std::to_string(expected[k]));
            std::vector<std::size_t> convs;
            std::size_t dense = 0;
            for (std::size_t i = 0; i < model.layer_count(); ++i) {
                std::size_t n = 0;
                for (const auto* p : model.layer(i).params()) n += p->value.size();
                if (model.layer(i).kind() == LayerKind::Conv2D) convs.push_back(n);
                if (model.layer(i).kind() == LayerKind::Dense) dense = n;
            }
            c.expect(convs == conv_counts, "conv layer counts differ");
            c.expect(dense == (classes == 10 ? 650u : 6500u), "dense count " + std::to_string(dense));
        }
        const double increase = static_cast<double>(expected[3] - expected[0]);
        c.note("classes " + std::to_string(classes) + ": PiLU adds " + fmt(increase, 6) + " (" +
               pct(increase / static_cast<double>(expected[0])) + ")");
        c.expect(expected[3] - expected[0] == 480, "PiLU increase is not 480");
    }
    const double r10 = std::round(10000.0 * 480.0 / 35802.0) / 100.0, r100 = std::round(10000.0 * 480.0 / 41652.0) / 100.0;
    c.expect(r10 == 1.34 && r100 == 1.15, "relative increases " + fmt(r10) + "%, " + fmt(r100) + "%");
    return c.outcome();
}

// ---- 2: rectifier generalization ------------------------------------------

template <typename T>
std::size_t rectifier_mismatches(std::size_t n, std::uint64_t seed) {
    Rng rng = make_stream(seed, Stream::Data);
    std::normal_distribution<double> normal(0.0, 2.0);
    std::uniform_real_distribution<double> slope(0.0, 1.0);
    const T delta = static_cast<T>(slope(rng));
    std::size_t bad = 0;
    for (std::size_t i = 0; i < n; ++i) {
        T x = static_cast<T>(normal(rng));
        // Spread magnitudes over a wide exponent range.
        if (i % 7 == 0) x *= static_cast<T>(std::ldexp(1.0, static_cast<int>(rng() % 200) - 100));
        const T relu = x > T{0} ? x : T{0};
        const T lrelu = x > T{0} ? x : static_cast<T>(kLeakySlope) * x;
        const T prelu = x > T{0} ? x : delta * x;
        bad += !same_bits(pilu_forward<T>(x, 1, 0, 0), relu);
        bad += !same_bits(pilu_forward<T>(x, 1, static_cast<T>(kLeakySlope), 0), lrelu);
        bad += !same_bits(pilu_forward<T>(x, 1, delta, 0), prelu);
    }
    return bad;
}

Outcome rectifier_generalization() {
    Checks c;
    const std::size_t n = 1'000'000;
    const auto bad_d = rectifier_mismatches<double>(n, 2);
    const auto bad_f = rectifier_mismatches<float>(n, 3);
    c.expect(bad_d == 0, std::to_string(bad_d) + " double mismatches");
    c.expect(bad_f == 0, std::to_string(bad_f) + " float mismatches");
    const auto relu = as_pilu(ActivationKind::ReLU), lrelu = as_pilu(ActivationKind::LReLU),
               prelu = as_pilu(ActivationKind::PReLU, 0.3);
    c.expect(relu == PiluParams{1, 0, 0} && lrelu == PiluParams{1, 0.01, 0} && prelu == PiluParams{1, 0.3, 0},
             "as_pilu parameters");
    c.note("3 x 10^6 comparisons in double and float, bit-identical");
    return c.outcome();
}

// ---- 3: gradient checks -----------------------------------------------------

Outcome gradient_checks() {
    Checks c;
    double worst = 0.0;
    for (const auto kind : {ActivationKind::PReLU, ActivationKind::DoubleReLU, ActivationKind::PiLU})
        for (const auto scheme : {SharingScheme::LayerWise, SharingScheme::ChannelWise, SharingScheme::NeuronWise})
            for (const std::uint64_t seed : {0u, 1u, 2u}) {
                const auto r = activation_gradient_check(kind, scheme, seed, 1e-6, 1e-6);
                for (const auto& e : r.entries) worst = std::max(worst, e.max_rel_error);
                c.expect(r.pass, "activation " + activation_label(kind, scheme) + " seed " + std::to_string(seed));
            }
    c.note("activation max rel err " + fmt(worst, 3));

    for (const auto kind : {ActivationKind::PiLU, ActivationKind::DoubleReLU}) {
        auto problem = make_gradcheck_problem({kind, SharingScheme::ChannelWise}, 7, 4);
        GradCheckOptions opts;
        opts.tolerance = 1e-4;
        opts.step = 1e-5;
        opts.max_entries_per_tensor = 40;
        opts.seed = 7;
        const auto r = gradient_check(problem.model, problem.x, problem.onehot, opts);
        double model_worst = 0.0;
        std::size_t checked = 0, skipped = 0;
        for (const auto& e : r.entries) {
            model_worst = std::max(model_worst, e.max_rel_error);
            checked += e.checked;
            skipped += e.skipped;
        }
        std::string failing;
        for (const auto& name : r.failing()) failing += " " + name;
        c.expect(r.pass, std::string(to_string(kind)) + " full model failing:" + failing);
        c.note(std::string(to_string(kind)) + " full model " + std::to_string(r.entries.size()) + " tensors, " +
               std::to_string(checked) + " probes (" + std::to_string(skipped) + " skipped at kinks), max rel err " +
               fmt(model_worst, 3));
    }
    return c.outcome();
}

// ---- 4: analytic invariants ------------------------------------------------

Outcome analytic_invariants() {
    Checks c;
    Rng rng = make_stream(4, Stream::Data);
    std::uniform_real_distribution<double> u(-3.0, 3.0), pos(0.0, 3.0);
    std::size_t knot = 0, jump = 0, odd = 0, ident = 0, dead = 0;
    for (int i = 0; i < 10000; ++i) {
        const double a = u(rng), b = u(rng), g = u(rng);
        knot += pilu_forward(g, a, b, g) != g;
        const double eps = 1e-9;
        const double bound = 2.0 * eps * std::max({std::abs(a), std::abs(b), 1.0});
        jump += std::abs(pilu_forward(g + eps, a, b, g) - g) > bound ||
                std::abs(pilu_forward(g - eps, a, b, g) - g) > bound;

        const double alpha = pos(rng), x = u(rng);
        // IEEE equality: the dead zone returns +0 on both sides, and -(+0) is -0.
        odd += double_relu_forward(-x, alpha) != -double_relu_forward(x, alpha);
        ident += !same_bits(double_relu_forward(x, 0.0), x);
        const double inside = alpha * (2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng) - 1.0);
        const auto d = double_relu_backward(inside, alpha, 1.0);
        dead += d.dx != 0.0 || d.dalpha != 0.0 || double_relu_forward(inside, alpha) != 0.0;
    }
    c.expect(knot == 0, std::to_string(knot) + " triples with f(gamma) != gamma");
    c.expect(jump == 0, std::to_string(jump) + " triples discontinuous at the knot");
    c.expect(odd == 0, std::to_string(odd) + " DoubleReLU oddness violations");
    c.expect(ident == 0, std::to_string(ident) + " DoubleReLU(alpha=0) identity violations");
    c.expect(dead == 0, std::to_string(dead) + " non-zero dead-zone values or derivatives");
    c.note("10^4 random triples: f(gamma)=gamma, continuity, oddness, identity at alpha=0, zero dead-zone derivative");
    return c.outcome();
}

// ---- 5 / 6: CIFAR runs -----------------------------------------------------

struct TableRow {
    ActivationKind kind;
    double accuracy;
};

const std::vector<TableRow> kCifar10Table{{ActivationKind::ReLU, 0.6654},
                                          {ActivationKind::PReLU, 0.7081},
                                          {ActivationKind::DoubleReLU, 0.6849},
                                          {ActivationKind::PiLU, 0.7274}};
const std::vector<TableRow> kCifar100Table{{ActivationKind::ReLU, 0.2726},
                                           {ActivationKind::PReLU, 0.3376},
                                           {ActivationKind::DoubleReLU, 0.3339},
                                           {ActivationKind::PiLU, 0.3681}};

ExperimentResult run_logged(const ExperimentConfig& cfg) {
    const Dataset data = load_experiment_dataset(cfg);
    auto progress = [](const std::string& m) { std::cerr << "  " << m << '\n'; };
    auto result = run_experiment(cfg, data, false, progress);
    const auto summary = summarize(result.records);
    emit_report(summary, result.records, default_comparisons(summary), cfg.output_dir);
    return result;
}

Outcome desk_scale(const Options& opt) {
    if (opt.data_dir.empty()) return {Status::Skip, "CIFAR-10 not available (set PILU_DATA_DIR or --data-dir)"};
    auto cfg = ExperimentConfig::desk_scale_preset();
    cfg.activations = {{ActivationKind::ReLU}, {ActivationKind::PiLU}};
    cfg.data_dir = opt.data_dir;
    cfg.output_dir = opt.out_dir / "desk";
    cfg.jobs = opt.jobs;
    const auto result = run_logged(cfg);
    Checks c;
    c.expect(result.failed == 0 && result.diverged == 0,
             std::to_string(result.failed) + " failed, " + std::to_string(result.diverged) + " diverged runs");
    const auto summary = summarize(result.records);
    const auto* relu = summary.find("relu/channel");
    const auto* pilu = summary.find("pilu/channel");
    if (!relu || !pilu) {
        c.expect(false, "missing runs");
        return c.outcome();
    }
    const auto cmp = compare(*relu, *pilu);
    c.expect(pilu->accuracy.mean > relu->accuracy.mean,
             "PiLU mean " + pct(pilu->accuracy.mean) + " does not exceed ReLU " + pct(relu->accuracy.mean));
    c.note("ReLU " + pct(relu->accuracy.mean) + ", PiLU " + pct(pilu->accuracy.mean) + ", delta " +
           fmt(cmp.delta_pp, 3) + " pp, Mann-Whitney one-sided p " + fmt(cmp.mann_whitney.p_greater, 3) +
           (cmp.mann_whitney.p_greater < 0.05 ? " (< 0.05)" : " (not < 0.05)"));
    return c.outcome();
}

void check_table(Checks& c, const std::string& dataset, const DistributionSummary& summary,
                 const std::vector<TableRow>& table) {
    std::map<ActivationKind, double> mean;
    for (const auto& row : table) {
        const auto* s = summary.find(activation_label(row.kind, SharingScheme::ChannelWise));
        if (!s) {
            c.expect(false, dataset + " missing " + std::string(to_string(row.kind)));
            continue;
        }
        mean[row.kind] = s->accuracy.mean;
        const double diff = 100.0 * (s->accuracy.mean - row.accuracy);
        c.expect(std::abs(diff) <= 2.0, dataset + " " + std::string(display_name(row.kind)) + " " +
                                            pct(s->accuracy.mean) + " vs " + pct(row.accuracy));
        c.note(dataset + " " + std::string(display_name(row.kind)) + " " + pct(s->accuracy.mean));
    }
    if (mean.size() != 4) return;
    const double relu = mean[ActivationKind::ReLU], prelu = mean[ActivationKind::PReLU],
                 dbl = mean[ActivationKind::DoubleReLU], pilu = mean[ActivationKind::PiLU];
    if (dataset == "cifar10") {
        c.expect(pilu > prelu && prelu > dbl && dbl > relu, "cifar10 ordering PiLU > PReLU > DoubleReLU > ReLU");
    } else {
        c.expect(pilu > prelu && pilu > dbl && std::min(prelu, dbl) > relu,
                 "cifar100 ordering PiLU > PReLU, DoubleReLU > ReLU");
    }
}

Outcome full_reproduction(const Options& opt) {
    if (opt.data_dir.empty()) return {Status::Skip, "CIFAR-10/100 not available (set PILU_DATA_DIR or --data-dir)"};
    Checks c;
    for (const auto& [dataset, table] :
         std::vector<std::pair<std::string, const std::vector<TableRow>*>>{{"cifar10", &kCifar10Table},
                                                                          {"cifar100", &kCifar100Table}}) {
        auto cfg = ExperimentConfig::full_preset();
        cfg.dataset = dataset;
        cfg.data_dir = opt.data_dir;
        cfg.output_dir = opt.out_dir / ("full_" + dataset);
        cfg.jobs = opt.jobs;
        const auto result = run_logged(cfg);
        c.expect(result.failed == 0, dataset + ": " + std::to_string(result.failed) + " failed runs");
        check_table(c, dataset, summarize(result.records), *table);
    }
    return c.outcome();
}

// ---- 7: derived statistics -------------------------------------------------

ActivationSummary table_summary(const std::string& label, double accuracy, double error) {
    ActivationSummary s;
    s.label = label;
    s.accuracy.mean = accuracy;
    s.error.mean = error;
    return s;
}

Outcome derived_statistics() {
    Checks c;
    const auto c10 = compare(table_summary("ReLU", 0.6654, 0.3346), table_summary("PiLU", 0.7274, 0.2726));
    const auto c100 = compare(table_summary("ReLU", 0.2726, 0.7274), table_summary("PiLU", 0.3681, 0.6319));
    const double r10 = std::round(10000.0 * c10.rel_err_improvement) / 100.0;
    const double r100 = std::round(10000.0 * c100.rel_err_improvement) / 100.0;
    c.expect(r10 == 18.53, "CIFAR-10 relative error improvement " + fmt(r10) + "%");
    c.expect(r100 == 13.13, "CIFAR-100 relative error improvement " + fmt(r100) + "%");
    c.expect(std::abs(c10.delta_pp - 6.2) < 1e-9, "CIFAR-10 delta " + fmt(c10.delta_pp) + " pp");
    c.expect(std::abs(c100.delta_pp - 9.55) < 1e-9, "CIFAR-100 delta " + fmt(c100.delta_pp) + " pp");
    c.note("CIFAR-10 " + fmt(100 * c10.rel_err_improvement, 6) + "% (" + fmt(c10.delta_pp, 4) + " pp), CIFAR-100 " +
           fmt(100 * c100.rel_err_improvement, 6) + "% (" + fmt(c100.delta_pp, 4) + " pp)");
    return c.outcome();
}

// ---- 8: benchmark ----------------------------------------------------------

Outcome benchmark_properties() {
    Checks c;
    BenchConfig cfg;
    const auto results = bench_activations(cfg);
    for (const auto kind : cfg.kinds) {
        const auto fit = linear_fit(results, kind);
        c.expect(fit.r_squared > 0.99, std::string(display_name(kind)) + " r^2 " + fmt(fit.r_squared, 5));
        std::string ratios;
        for (const auto& r : results)
            if (r.kind == kind) ratios += (ratios.empty() ? "" : "/") + fmt(r.rel_to_relu, 3);
        c.note(std::string(display_name(kind)) + " r^2 " + fmt(fit.r_squared, 5) + ", x ReLU " + ratios);
        if (kind == ActivationKind::ReLU) {
            bool unit = true;
            for (const auto& r : results)
                if (r.kind == kind) unit &= r.rel_to_relu == 1.0;
            c.expect(unit, "rel_to_relu(ReLU) != 1");
        }
    }
    std::size_t flagged = 0;
    for (const auto& r : results) flagged += r.flagged;
    if (flagged) c.note(std::to_string(flagged) + " timings flagged for raised iterations");
    return c.outcome();
}

// ---- 9: infrastructure oracles ---------------------------------------------

Outcome infrastructure() {
    Checks c;
    {
        Param<double> p;
        p.name = "w";
        p.value = Tensor<double>({2}, std::vector<double>{0.5, 0.5});
        p.grad = Tensor<double>({2}, std::vector<double>{1.0, -4.0});
        Adam<double> adam;
        std::vector<Param<double>*> list{&p};
        adam.step(list);
        const double e0 = 0.5 - 0.001 * 1.0 / (1.0 + 1e-7), e1 = 0.5 + 0.001 * 4.0 / (4.0 + 1e-7);
        c.expect(std::abs(p.value[0] - e0) < 1e-12 && std::abs(p.value[1] - e1) < 1e-12, "Adam first step");
    }
    {
        Tensor<double> probs({3, 10}), y({3, 10});
        for (auto& v : probs.data()) v = 0.1;
        y[2] = y[10 + 5] = y[20 + 9] = 1.0;
        const double ce = categorical_cross_entropy(probs, y);
        c.expect(std::abs(ce - std::log(10.0)) < 1e-12, "uniform cross-entropy " + format_double(ce));
    }
    {
        Rng rng = make_stream(9, Stream::Init);
        const auto t = glorot_normal(27, 16, rng, 1'000'000);
        double s = 0.0, ss = 0.0;
        for (const double v : t.data()) s += v;
        const double m = s / static_cast<double>(t.size());
        for (const double v : t.data()) ss += (v - m) * (v - m);
        const double sd = std::sqrt(ss / static_cast<double>(t.size() - 1));
        const double ratio = sd / glorot_normal_stddev(27, 16);
        c.expect(std::abs(ratio - 1.0) < 0.01, "Glorot std ratio " + fmt(ratio, 5));
        c.note("Glorot std " + fmt(sd, 5) + " vs " + fmt(glorot_normal_stddev(27, 16), 5));
    }
    {
        auto records = [](std::size_t count, std::size_t bytes, std::uint8_t fill) {
            return std::vector<std::uint8_t>(count * bytes, fill);
        };
        Dataset d10;
        d10.num_classes = 10;
        bool ok = parse_cifar_records(records(2, kCifar10RecordBytes, 0), CifarVariant::Cifar10, d10) == 2;
        try {
            parse_cifar_records(records(1, kCifar10RecordBytes + 1, 0), CifarVariant::Cifar10, d10);
            ok = false;
        } catch (const DataError&) {
        }
        Dataset d100;
        d100.num_classes = 100;
        ok &= parse_cifar_records(records(3, kCifar100RecordBytes, 0), CifarVariant::Cifar100, d100) == 3;
        try {
            parse_cifar_records(records(1, kCifar10RecordBytes, 0), CifarVariant::Cifar100, d100);
            ok = false;
        } catch (const DataError&) {
        }
        c.expect(ok, "CIFAR record sizes 3073/3074 not enforced");
        Dataset bright;
        bright.num_classes = 10;
        auto bytes = records(1, kCifar10RecordBytes, 255);
        bytes[0] = 1;
        bytes[1] = 0;
        parse_cifar_records(bytes, CifarVariant::Cifar10, bright);
        const auto img = bright.images<float>();
        const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
        c.expect(*lo == 0.0f && *hi == 1.0f, "pixel range [" + fmt(*lo) + ", " + fmt(*hi) + "]");
    }
    {
        const auto data = make_synthetic(300, 10, 1);
        TrainConfig cfg;
        cfg.epochs = 1;
        cfg.seed = 11;
        cfg.log_level = LogLevel::Stats;
        RunInfo info;
        info.run_id = "determinism";
        const auto a = train_paper_model(data, {ActivationKind::PiLU}, cfg, info);
        const auto b = train_paper_model(data, {ActivationKind::PiLU}, cfg, info);
        bool identical = a == b && a.rows.size() == b.rows.size();
        for (std::size_t i = 0; identical && i < a.rows.size(); ++i)
            identical = same_bits(a.rows[i].loss, b.rows[i].loss) && same_bits(a.rows[i].accuracy, b.rows[i].accuracy);
        identical &= run_end_line(a) == run_end_line(b);
        c.expect(identical, "same-seed runs differ");
    }
    c.note("Adam, cross-entropy, Glorot, CIFAR records, determinism");
    return c.outcome();
}

// ---- driver -----------------------------------------------------------------

struct Criterion {
    int id;
    const char* name;
    double budget_s;  // runtime limit; 0 for none
    std::function<Outcome(const Options&)> run;
};

std::vector<int> parse_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream s(text);
    for (std::string item; std::getline(s, item, ',');)
        if (!item.empty()) out.push_back(std::stoi(item));
    return out;
}

int usage() {
    std::cerr << "usage: pilu_acceptance [--criteria 1,2,...] [--data-dir DIR] [--out DIR] [--jobs N]\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    if (const char* env = std::getenv("PILU_DATA_DIR")) opt.data_dir = env;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (i + 1 >= argc) return usage();
        const std::string value = argv[++i];
        try {
            if (arg == "--criteria") opt.criteria = parse_list(value);
            else if (arg == "--data-dir") opt.data_dir = value;
            else if (arg == "--out") opt.out_dir = value;
            else if (arg == "--jobs") opt.jobs = std::stoul(value);
            else return usage();
        } catch (const std::exception&) {
            return usage();
        }
    }

    const std::vector<Criterion> all{
        {1, "parameter counts", 1.0, [](const Options&) { return parameter_counts(); }},
        {2, "rectifier generalization", 5.0, [](const Options&) { return rectifier_generalization(); }},
        {3, "gradient checks", 120.0, [](const Options&) { return gradient_checks(); }},
        {4, "analytic invariants", 5.0, [](const Options&) { return analytic_invariants(); }},
        {5, "desk-scale reproduction", 0.0, desk_scale},
        {6, "full reproduction", 0.0, full_reproduction},
        {7, "derived statistics", 1.0, [](const Options&) { return derived_statistics(); }},
        {8, "benchmark properties", 300.0, [](const Options&) { return benchmark_properties(); }},
        {9, "infrastructure oracles", 0.0, [](const Options&) { return infrastructure(); }},
    };

    int failed = 0, skipped = 0, ran = 0;
    for (const int id : opt.criteria) {
        const auto it = std::find_if(all.begin(), all.end(), [&](const Criterion& c) { return c.id == id; });
        if (it == all.end()) return usage();
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = it->run(opt);
        } catch (const std::exception& e) {
            o = {Status::Fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (o.status == Status::Pass && it->budget_s > 0 && secs > it->budget_s) {
            o.status = Status::Fail;
            o.detail += "; over the " + fmt(it->budget_s) + " s budget";
        }
        const char* label = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.2f", secs);
        std::cout << "criterion " << id << " (" << it->name << "): " << label << "  " << o.detail << "  [" << timing
                  << "s]" << std::endl;
        ++ran;
        failed += o.status == Status::Fail;
        skipped += o.status == Status::Skip;
    }
    if (failed) return 1;
    if (ran > 0 && skipped == ran) return 77;
    return 0;
}
