#include "pilu/model.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "pilu/format.hpp"
#include "pilu/init.hpp"

namespace pilu {

template <typename T>
Model<T>::Model(Shape input_shape) : input_shape_(std::move(input_shape)), shapes_{input_shape_} {}

template <typename T>
Model<T>& Model<T>::add(std::unique_ptr<Layer<T>> layer) {
    shapes_.push_back(layer->output_shape(shapes_.back()));
    layers_.push_back(std::move(layer));
    return *this;
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& x, Mode mode, Rng* dropout_rng) {
    if (x.rank() != input_shape_.size() + 1 ||
        !std::equal(input_shape_.begin(), input_shape_.end(), x.shape().begin() + 1)) {
        throw std::invalid_argument("model input " + shape_to_string(x.shape()) + " does not match " +
                                    shape_to_string(input_shape_));
    }
    Tensor<T> h = x;
    for (auto& layer : layers_) h = layer->forward(h, mode, dropout_rng);
    return h;
}

template <typename T>
Tensor<T> Model<T>::backward(const Tensor<T>& doutput) {
    Tensor<T> g = doutput;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

template <typename T>
Tensor<T> Model<T>::backward_from_logits(const Tensor<T>& dlogits) {
    if (layers_.empty() || layers_.back()->kind() != LayerKind::Softmax) {
        throw std::logic_error("backward_from_logits: model does not end in softmax");
    }
    Tensor<T> g = dlogits;
    for (auto it = std::next(layers_.rbegin()); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

template <typename T>
std::vector<Param<T>*> Model<T>::parameters() {
    std::vector<Param<T>*> out;
    for (auto& layer : layers_) {
        auto p = layer->params();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

template <typename T>
std::vector<const Param<T>*> Model<T>::parameters() const {
    std::vector<const Param<T>*> out;
    for (const auto& layer : layers_) {
        auto p = std::as_const(*layer).params();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

template <typename T>
std::size_t Model<T>::count_parameters() const {
    std::size_t total = 0;
    for (const auto* p : parameters()) total += p->value.size();
    return total;
}

template <typename T>
void Model<T>::project_parameters() {
    for (auto& layer : layers_) layer->project();
}

template <typename T>
double Model<T>::kink_distance() const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& layer : layers_) d = std::min(d, layer->kink_distance());
    return d;
}

template <typename T>
void Model<T>::track_kinks(bool on) {
    for (auto& layer : layers_) layer->track_kinks(on);
}

template <typename T>
std::uint64_t Model<T>::branch_signature() const {
    std::uint64_t h = 0;
    for (const auto& layer : layers_) h = h * 0x9E3779B97F4A7C15ull + layer->branch_signature();
    return h;
}

namespace {

constexpr std::size_t kFilters[] = {16, 16, 32, 32, 64};

template <typename T>
Model<T> assemble(std::size_t num_classes, const ActivationSpec& activation, Rng* init_rng) {
    if (num_classes < 2) throw std::invalid_argument("build_paper_model: need at least 2 classes");
    Model<T> model(Shape{32, 32, 3});
    std::size_t channels = 3;
    for (std::size_t i = 0; i < std::size(kFilters); ++i) {
        const std::string id = std::to_string(i + 1);
        auto& conv = model.template emplace<Conv2DLayer<T>>("conv" + id, channels, kFilters[i]);
        if (init_rng) {
            const auto fans = conv_fans(conv.kernel().value.shape());
            glorot_normal_fill(conv.kernel().value, fans.in, fans.out, *init_rng);
        }
        model.template emplace<ActivationLayer<T>>("act" + id, activation, model.shapes().back());
        if (i == 0) model.template emplace<MaxPoolLayer<T>>();
        channels = kFilters[i];
    }
    model.template emplace<GlobalAvgPoolLayer<T>>();
    model.template emplace<DropoutLayer<T>>(0.5);
    auto& dense = model.template emplace<DenseLayer<T>>("output", channels, num_classes, true);
    if (init_rng) glorot_normal_fill(dense.kernel().value, channels, num_classes, *init_rng);
    model.template emplace<SoftmaxLayer<T>>();
    return model;
}

std::string size_label(const Shape& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out;
}

}  // namespace

template <typename T>
Model<T> build_paper_model(std::size_t num_classes, const ActivationSpec& activation, Rng& init_rng) {
    return assemble<T>(num_classes, activation, &init_rng);
}

template <typename T>
Model<T> build_paper_model(std::size_t num_classes, const ActivationSpec& activation) {
    return assemble<T>(num_classes, activation, nullptr);
}

template <typename T>
std::string model_summary(const Model<T>& model) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-12s %-36s %12s\n", "Input size", "Output size", "Layer", "Parameters");
    out += line;
    out += std::string(75, '-') + "\n";
    std::size_t conv_index = 0;
    for (std::size_t i = 0; i < model.layer_count(); ++i) {
        const auto& layer = model.layer(i);
        std::size_t count = 0;
        for (const auto* p : layer.params()) count += p->value.size();
        std::string label = layer.description();
        if (layer.kind() == LayerKind::Conv2D) label += " (Layer " + std::to_string(++conv_index) + ")";
        std::snprintf(line, sizeof line, "%-12s %-12s %-36s %12s\n", size_label(model.shapes()[i]).c_str(),
                      size_label(model.shapes()[i + 1]).c_str(), label.c_str(), group_thousands(count).c_str());
        out += line;
    }
    out += std::string(75, '-') + "\n";
    out += "Total parameters: " + group_thousands(model.count_parameters()) + "\n";
    return out;
}

template class Model<float>;
template class Model<double>;
template Model<float> build_paper_model<float>(std::size_t, const ActivationSpec&, Rng&);
template Model<double> build_paper_model<double>(std::size_t, const ActivationSpec&, Rng&);
template Model<float> build_paper_model<float>(std::size_t, const ActivationSpec&);
template Model<double> build_paper_model<double>(std::size_t, const ActivationSpec&);
template std::string model_summary<float>(const Model<float>&);
template std::string model_summary<double>(const Model<double>&);

}  // namespace pilu
