#include "pilu/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "pilu/losses.hpp"

namespace pilu {

std::string_view to_string(LogLevel level) noexcept {
    switch (level) {
        case LogLevel::Metrics: return "metrics";
        case LogLevel::Stats: return "stats";
        case LogLevel::Full: return "full";
    }
    return "unknown";
}

std::optional<LogLevel> parse_log_level(std::string_view name) {
    for (auto level : {LogLevel::Metrics, LogLevel::Stats, LogLevel::Full}) {
        if (name == to_string(level)) return level;
    }
    return std::nullopt;
}

const MetricRow* RunRecord::final_row(Split split) const {
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        if (it->split == split) return &*it;
    }
    return nullptr;
}

template <typename T>
TensorStats tensor_stats(const Tensor<T>& t) {
    TensorStats s;
    if (t.empty()) return s;
    double sum = 0.0, sq = 0.0;
    for (const T v : t.data()) {
        sum += v;
        sq += double(v) * double(v);
    }
    const double n = static_cast<double>(t.size());
    s.mean = sum / n;
    s.stddev = std::sqrt(std::max(0.0, sq / n - s.mean * s.mean));
    s.l2 = std::sqrt(sq);
    return s;
}

namespace {

template <typename T>
double l2_loss(Model<T>& model, const TrainConfig& cfg) {
    double loss = 0.0;
    for (auto* p : model.parameters()) {
        if (p->regularized) loss += l2_penalty(p->value, cfg.l2_lambda, cfg.l2_half).loss;
    }
    return loss;
}

template <typename T>
void add_l2_grads(Model<T>& model, const TrainConfig& cfg) {
    for (auto* p : model.parameters()) {
        if (!p->regularized) continue;
        const auto term = l2_penalty(p->value, cfg.l2_lambda, cfg.l2_half);
        for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] += term.grad[i];
    }
}

}  // namespace

template <typename T>
MetricRow evaluate(Model<T>& model, const Dataset& data, Split split, const TrainConfig& cfg, int epoch) {
    const auto& indices = data.split(split);
    MetricRow row{epoch, split, 0.0, 0.0, 0.0};
    if (indices.empty()) return row;
    double loss_sum = 0.0, hit_sum = 0.0;
    const std::size_t step = std::max<std::size_t>(1, cfg.eval_batch_size);
    for (std::size_t start = 0; start < indices.size(); start += step) {
        const std::size_t count = std::min(step, indices.size() - start);
        const std::span<const std::uint32_t> batch(indices.data() + start, count);
        const auto x = data.images<T>(batch);
        const auto y = one_hot<T>(data.labels_of(batch), data.num_classes);
        const auto probs = model.forward(x, Mode::Eval);
        loss_sum += categorical_cross_entropy(probs, y) * static_cast<double>(count);
        hit_sum += accuracy(probs, y) * static_cast<double>(count);
    }
    const double n = static_cast<double>(indices.size());
    row.loss = loss_sum / n + l2_loss(model, cfg);
    row.accuracy = hit_sum / n;
    row.error = 1.0 - row.accuracy;
    return row;
}

template <typename T>
RunRecord train_run(Model<T>& model, const Dataset& data, const TrainConfig& cfg, RunInfo info,
                    const TrainCallbacks& callbacks) {
    if (cfg.epochs < 0) throw std::invalid_argument("train_run: epochs must be >= 0");
    if (cfg.batch_size == 0 || (cfg.epochs > 0 && cfg.batch_size > data.train.size())) {
        throw std::invalid_argument("train_run: batch size must be in [1, train size]");
    }
    info.parameters = model.count_parameters();
    RunRecord record;
    record.info = info;

    Rng shuffle_rng = make_stream(cfg.seed, Stream::Shuffle);
    Rng dropout_rng = make_stream(cfg.seed, Stream::Dropout);
    Adam<T> adam(cfg.adam);
    auto params = model.parameters();
    std::vector<std::uint32_t> order = data.train;

    auto emit = [&](const MetricRow& row) {
        record.rows.push_back(row);
        if (callbacks.on_metric) callbacks.on_metric(record.info, row);
    };

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        bool diverged = false;
        for (std::size_t start = 0; start < order.size() && !diverged; start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - start);
            const std::span<const std::uint32_t> batch(order.data() + start, count);
            const auto x = data.images<T>(batch);
            const auto y = one_hot<T>(data.labels_of(batch), data.num_classes);
            const auto probs = model.forward(x, Mode::Train, &dropout_rng);
            const double loss = categorical_cross_entropy(probs, y) + l2_loss(model, cfg);
            if (!std::isfinite(loss)) {
                diverged = true;
                break;
            }
            model.backward_from_logits(cross_entropy_logit_grad(probs, y));
            add_l2_grads(model, cfg);
            try {
                adam.step(params);
            } catch (const NonFiniteError&) {
                diverged = true;
                break;
            }
            model.project_parameters();
        }
        if (diverged) {
            record.diverged_epoch = epoch;
            return record;
        }

        for (const Split split : {Split::Train, Split::Val, Split::Test}) {
            const auto row = evaluate(model, data, split, cfg, epoch);
            if (!std::isfinite(row.loss)) {
                record.diverged_epoch = epoch;
                return record;
            }
            emit(row);
        }

        if (cfg.log_level != LogLevel::Metrics) {
            for (const auto* p : params) {
                LayerStatsRow stats{epoch, p->name, tensor_stats(p->value), tensor_stats(p->grad)};
                if (callbacks.on_stats) callbacks.on_stats(record.info, stats);
                record.layer_stats.push_back(std::move(stats));
            }
        }
    }
    record.complete = true;
    return record;
}

RunRecord train_paper_model(const Dataset& data, const ActivationSpec& activation, const TrainConfig& cfg,
                            RunInfo info, const TrainCallbacks& callbacks) {
    Rng init = make_stream(cfg.seed, Stream::Init);
    auto model = build_paper_model<float>(data.num_classes, activation, init);
    info.seed = cfg.seed;
    info.activation = activation.kind;
    info.scheme = activation.scheme;
    if (info.dataset.empty()) info.dataset = data.name;
    return train_run(model, data, cfg, std::move(info), callbacks);
}

#define PILU_INSTANTIATE(T)                                                                              \
    template TensorStats tensor_stats<T>(const Tensor<T>&);                                              \
    template MetricRow evaluate<T>(Model<T>&, const Dataset&, Split, const TrainConfig&, int);           \
    template RunRecord train_run<T>(Model<T>&, const Dataset&, const TrainConfig&, RunInfo, const TrainCallbacks&);

PILU_INSTANTIATE(float)
PILU_INSTANTIATE(double)

#undef PILU_INSTANTIATE

}  // namespace pilu
