#include "pilu/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "pilu/data.hpp"
#include "pilu/losses.hpp"

namespace pilu {

std::vector<std::string> GradCheckReport::failing() const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
        if (!e.pass) out.push_back(e.name);
    }
    return out;
}

std::string GradCheckReport::table() const {
    std::string out;
    char line[200];
    std::snprintf(line, sizeof line, "%-24s %8s %8s %14s %14s %14s  %s\n", "parameter", "checked", "skipped",
                  "max_rel_err", "analytic", "numeric", "status");
    out += line;
    for (const auto& e : entries) {
        std::snprintf(line, sizeof line, "%-24s %8zu %8zu %14.3e %14.6e %14.6e  %s\n", e.name.c_str(), e.checked,
                      e.skipped, e.max_rel_error, e.analytic, e.numeric, e.pass ? "PASS" : "FAIL");
        out += line;
    }
    std::snprintf(line, sizeof line, "tolerance %.1e: %s\n", tolerance, pass ? "PASS" : "FAIL");
    out += line;
    return out;
}

namespace {

double rel_error(double a, double n, double floor) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

void finish(GradCheckReport& report) {
    report.pass = !report.entries.empty();
    for (auto& e : report.entries) {
        e.pass = e.checked > 0 && e.max_rel_error < report.tolerance;
        report.pass = report.pass && e.pass;
    }
}

struct Probe {
    std::string name;
    Param<double>* param;
    std::vector<std::size_t> indices;
};

}  // namespace

GradCheckReport gradient_check(Model<double>& model, const Tensor<double>& x, const Tensor<double>& onehot,
                               const GradCheckOptions& opts) {
    auto params = model.parameters();
    auto loss_at = [&]() {
        const auto probs = model.forward(x, Mode::Eval);
        double loss = categorical_cross_entropy(probs, onehot);
        for (const auto* p : params) {
            if (p->regularized) loss += l2_penalty(p->value, opts.l2_lambda, opts.l2_half).loss;
        }
        return loss;
    };

    // Analytic pass.
    const auto probs = model.forward(x, Mode::Eval);
    const std::uint64_t base_signature = model.branch_signature();
    model.backward_from_logits(cross_entropy_logit_grad(probs, onehot));
    for (auto* p : params) {
        if (!p->regularized) continue;
        const auto term = l2_penalty(p->value, opts.l2_lambda, opts.l2_half);
        for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] += term.grad[i];
    }
    if (opts.mutate_gradients) opts.mutate_gradients(model);
    std::vector<Tensor<double>> analytic;
    for (const auto* p : params) analytic.push_back(p->grad);

    Rng rng = make_stream(opts.seed, Stream::Sampling);
    std::vector<Probe> probes;
    std::vector<std::size_t> owner;  // probe -> index into params
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto* p = params[k];
        if (!p->row_labels.empty()) {
            const std::size_t rows = p->row_labels.size();
            const std::size_t per_row = p->value.size() / rows;
            for (std::size_t r = 0; r < rows; ++r) {
                std::vector<std::size_t> idx(per_row);
                std::iota(idx.begin(), idx.end(), r * per_row);
                probes.push_back({p->name + "." + p->row_labels[r], p, std::move(idx)});
                owner.push_back(k);
            }
            continue;
        }
        std::vector<std::size_t> idx(p->value.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        if (opts.max_entries_per_tensor > 0 && idx.size() > opts.max_entries_per_tensor) {
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(opts.max_entries_per_tensor);
            std::sort(idx.begin(), idx.end());
        }
        probes.push_back({p->name, p, std::move(idx)});
        owner.push_back(k);
    }

    GradCheckReport report;
    report.tolerance = opts.tolerance;
    for (std::size_t q = 0; q < probes.size(); ++q) {
        const auto& probe = probes[q];
        GradCheckEntry entry{probe.name};
        for (const std::size_t i : probe.indices) {
            double& w = probe.param->value[i];
            const double saved = w;
            w = saved + opts.step;
            const double plus = loss_at();
            const bool same_plus = model.branch_signature() == base_signature;
            w = saved - opts.step;
            const double minus = loss_at();
            const bool same_minus = model.branch_signature() == base_signature;
            w = saved;
            if (!same_plus || !same_minus) {
                ++entry.skipped;
                continue;
            }
            const double numeric = (plus - minus) / (2.0 * opts.step);
            const double a = analytic[owner[q]][i];
            const double err = rel_error(a, numeric, opts.denominator_floor);
            ++entry.checked;
            if (err >= entry.max_rel_error) {
                entry.max_rel_error = err;
                entry.analytic = a;
                entry.numeric = numeric;
            }
        }
        report.entries.push_back(std::move(entry));
    }
    finish(report);
    return report;
}

GradCheckReport activation_gradient_check(ActivationKind kind, SharingScheme scheme, std::uint64_t seed,
                                          double step, double tolerance) {
    Rng rng = make_stream(seed, Stream::Sampling);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    ActivationSpec spec{kind, scheme};
    const Shape example{3, 3, 2};
    auto params = make_activation_params<double>(spec, example);
    const std::size_t sets = arity(kind) ? params.size() / arity(kind) : 0;
    for (std::size_t s = 0; s < sets; ++s) {
        switch (kind) {
            case ActivationKind::PReLU: params[s] = 0.25 + 0.2 * u(rng); break;
            case ActivationKind::DoubleReLU: params[s] = 0.6 + 0.4 * u(rng); break;
            case ActivationKind::PiLU:
                params[s] = 1.2 + 0.6 * u(rng);
                params[sets + s] = 0.3 * u(rng);
                params[2 * sets + s] = 0.5 * u(rng);
                break;
            default: break;
        }
    }

    Tensor<double> x({1, 3, 3, 2});
    do {
        for (auto& v : x.data()) v = 2.0 * u(rng);
    } while (min_knot_distance(x, spec, params) <= 1e-3);
    Tensor<double> weights(x.shape());
    for (auto& v : weights.data()) v = u(rng);

    auto loss = [&](const Tensor<double>& in, const Tensor<double>& p) {
        const auto y = apply_activation(in, spec, p);
        double total = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) total += weights[i] * y[i];
        return total;
    };

    ActivationCache<double> cache;
    apply_activation(x, spec, params, &cache);
    const auto grads = apply_activation_backward(weights, cache, spec, params);

    GradCheckReport report;
    report.tolerance = tolerance;
    auto probe = [&](const std::string& name, Tensor<double>& target, std::size_t begin, std::size_t end,
                     const Tensor<double>& analytic) {
        GradCheckEntry entry{name};
        for (std::size_t i = begin; i < end; ++i) {
            const double saved = target[i];
            target[i] = saved + step;
            const double plus = loss(x, params);
            target[i] = saved - step;
            const double minus = loss(x, params);
            target[i] = saved;
            const double numeric = (plus - minus) / (2.0 * step);
            const double err = rel_error(analytic[i], numeric, 1e-6);
            ++entry.checked;
            if (err >= entry.max_rel_error) {
                entry.max_rel_error = err;
                entry.analytic = analytic[i];
                entry.numeric = numeric;
            }
        }
        report.entries.push_back(std::move(entry));
    };

    probe("input", x, 0, x.size(), grads.dx);
    const auto labels = activation_param_labels(kind);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        probe(std::string(to_string(kind)) + "." + labels[r], params, r * sets, (r + 1) * sets, grads.dparams);
    }
    finish(report);
    return report;
}

GradCheckProblem make_gradcheck_problem(const ActivationSpec& activation, std::uint64_t seed, std::size_t batch,
                                        std::size_t num_classes) {
    Rng init = make_stream(seed, Stream::Init);
    auto model = build_paper_model<double>(num_classes, activation, init);
    Rng rng = make_stream(seed, Stream::Sampling);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto* p : model.parameters()) {
        if (p->row_labels.empty()) continue;
        const std::size_t sets = p->value.size() / p->row_labels.size();
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const auto& label = p->row_labels[i / sets];
            double& v = p->value[i];
            if (label == "alpha" && activation.kind == ActivationKind::PiLU) v = 1.0 + 0.3 * u(rng);
            else if (label == "alpha") v = 0.05 + 0.04 * u(rng);
            else if (label == "beta") v = 0.2 * u(rng);
            else if (label == "gamma") v = 0.05 * u(rng);
            else if (label == "delta") v = 0.25 + 0.1 * u(rng);
        }
    }
    Rng data_rng = make_stream(seed, Stream::Data);
    std::uniform_real_distribution<double> pixel(0.0, 1.0);
    Tensor<double> x({batch, 32, 32, 3});
    for (auto& v : x.data()) v = pixel(data_rng);
    std::vector<std::uint16_t> labels(batch);
    for (auto& l : labels) l = static_cast<std::uint16_t>(data_rng() % num_classes);
    return {std::move(model), std::move(x), one_hot<double>(labels, num_classes)};
}

}  // namespace pilu
