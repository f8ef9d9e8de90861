#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "pilu/activations.hpp"
#include "pilu/layers.hpp"
#include "pilu/rng.hpp"
#include "pilu/tensor.hpp"

namespace pilu {

/// Ordered layer stack over a fixed per-example input shape. Adding a layer
/// validates that it accepts the previous layer's output shape.
template <typename T>
class Model {
public:
    explicit Model(Shape input_shape);

    Model(Model&&) noexcept = default;
    Model& operator=(Model&&) noexcept = default;

    Model& add(std::unique_ptr<Layer<T>> layer);

    template <typename L, typename... Args>
    L& emplace(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *layer;
        add(std::move(layer));
        return ref;
    }

    /// Batch-major forward pass. `dropout_rng` is required in training mode
    /// when the model contains dropout.
    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* dropout_rng = nullptr);
    /// Back-propagates dL/d(output) through every layer.
    Tensor<T> backward(const Tensor<T>& doutput);
    /// Back-propagates dL/d(logits) through every layer below a trailing softmax.
    Tensor<T> backward_from_logits(const Tensor<T>& dlogits);

    std::vector<Param<T>*> parameters();
    std::vector<const Param<T>*> parameters() const;
    std::size_t count_parameters() const;

    void project_parameters();
    /// Minimum, over layers, of the distance of the last forward pass to a kink.
    double kink_distance() const;
    void track_kinks(bool on);
    /// Combined branch signature of every layer for the last forward pass.
    std::uint64_t branch_signature() const;

    const Shape& input_shape() const { return input_shape_; }
    /// Per-example shape after each layer; shapes()[0] is the input shape.
    const std::vector<Shape>& shapes() const { return shapes_; }
    std::size_t layer_count() const { return layers_.size(); }
    Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
    const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }

private:
    Shape input_shape_;
    std::vector<Shape> shapes_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
};

/// The five-conv classifier: five valid 3x3 convolutions (16, 16, 32, 32, 64
/// filters) each followed by the chosen activation, a 2x2 max pool after the
/// first, global average pooling, dropout 0.5, a dense output layer
/// (L2-regularized) and softmax. Weights are Glorot-normal, biases zero.
template <typename T>
Model<T> build_paper_model(std::size_t num_classes, const ActivationSpec& activation, Rng& init_rng);

/// Same architecture, all parameters zero. Used for counting and summaries.
template <typename T>
Model<T> build_paper_model(std::size_t num_classes, const ActivationSpec& activation);

template <typename T>
std::size_t count_parameters(const Model<T>& model) {
    return model.count_parameters();
}

/// Table with one row per layer: input size, output size, layer, parameters,
/// followed by the total.
template <typename T>
std::string model_summary(const Model<T>& model);

}  // namespace pilu
