#pragma once

// Layer kernels (free functions with explicit caches) and the Layer classes
// that wrap them for use inside a Model.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pilu/activations.hpp"
#include "pilu/rng.hpp"
#include "pilu/tensor.hpp"

namespace pilu {

enum class Mode { Train, Eval };

enum class LayerKind { Conv2D, MaxPool2x2, Activation, GlobalAvgPool, Dropout, Dense, Softmax };

/// A trainable tensor and the gradient written by the most recent backward pass.
template <typename T>
struct Param {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    /// Output-layer kernel only; receives the L2 penalty.
    bool regularized = false;
    /// Names of the leading-axis rows when they are distinct quantities
    /// (alpha / beta / gamma of a PiLU store); empty otherwise.
    std::vector<std::string> row_labels;
};

// ---- conv2d: valid 3x3 (any odd/even k) cross-correlation, stride 1 -------

template <typename T>
struct Conv2DCache {
    Shape input_shape;
    std::vector<T> patches;  // (n*oh*ow, kh*kw*cin) row-major
    bool valid = false;
};

template <typename T>
struct Conv2DGrads {
    Tensor<T> dx, dw, db;
};

/// x: (n, h, w, cin), w: (kh, kw, cin, cout), b: (cout) -> (n, h-kh+1, w-kw+1, cout).
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                         Conv2DCache<T>* cache = nullptr);

template <typename T>
Conv2DGrads<T> conv2d_backward(const Tensor<T>& dy, const Conv2DCache<T>& cache, const Tensor<T>& w);

// ---- 2x2 max pool, stride 2 -------------------------------------------------

struct MaxPoolCache {
    Shape input_shape;
    std::vector<std::size_t> argmax;  // flat input index per output element
    bool valid = false;
};

/// Odd spatial sizes drop the trailing row/column. Ties pick the first
/// window element in row-major order.
template <typename T>
Tensor<T> maxpool2x2_forward(const Tensor<T>& x, MaxPoolCache* cache = nullptr);

template <typename T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& dy, const MaxPoolCache& cache);

/// Smallest gap between a window maximum and its runner-up.
template <typename T>
double maxpool2x2_min_gap(const Tensor<T>& x);

// ---- dense ------------------------------------------------------------------

template <typename T>
struct DenseGrads {
    Tensor<T> dx, dw, db;
};

/// x: (n, in), w: (in, out), b: (out) -> x w + b.
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& dy, const Tensor<T>& x, const Tensor<T>& w);

// ---- softmax ----------------------------------------------------------------

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

/// Vector-Jacobian product of a row softmax given its output.
template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& dprobs, const Tensor<T>& probs);

// ---- inverted dropout -------------------------------------------------------

/// Training mode zeroes each element with probability p and scales the rest
/// by 1/(1-p); eval mode is the identity. `mask` receives the per-element
/// multiplier (0 or 1/(1-p)) when non-null.
template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& x, double p, Mode mode, Rng& rng, std::vector<T>* mask = nullptr);

// ---- layer objects ----------------------------------------------------------

template <typename T>
class Layer {
public:
    virtual ~Layer() = default;

    virtual LayerKind kind() const = 0;
    /// Row label in the model summary, e.g. "3x3, 16 CONV2D".
    virtual std::string description() const = 0;
    /// Per-example output shape for a per-example input shape; throws if the input does not fit.
    virtual Shape output_shape(const Shape& input) const = 0;

    virtual Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* rng) = 0;
    /// Returns dL/dx and overwrites the gradients of this layer's parameters.
    virtual Tensor<T> backward(const Tensor<T>& dy) = 0;

    virtual std::vector<Param<T>*> params() { return {}; }
    virtual std::vector<const Param<T>*> params() const { return {}; }
    /// Distance of the last forward input to the nearest non-differentiable point.
    virtual double kink_distance() const { return std::numeric_limits<double>::infinity(); }
    /// Feasibility projection after an optimizer step.
    virtual void project() {}
    /// Enables the bookkeeping kink_distance() needs where it is not free.
    virtual void track_kinks(bool) {}
    /// Identifies the linear region the last forward pass ran in (0 for smooth layers).
    virtual std::uint64_t branch_signature() const { return 0; }
};

template <typename T>
class Conv2DLayer final : public Layer<T> {
public:
    Conv2DLayer(std::string name, std::size_t in_channels, std::size_t filters, std::size_t kernel = 3);

    LayerKind kind() const override { return LayerKind::Conv2D; }
    std::string description() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* rng) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    std::vector<Param<T>*> params() override { return {&kernel_, &bias_}; }
    std::vector<const Param<T>*> params() const override { return {&kernel_, &bias_}; }

    Param<T>& kernel() { return kernel_; }
    Param<T>& bias() { return bias_; }

private:
    std::size_t in_channels_, filters_, size_;
    Param<T> kernel_, bias_;
    Conv2DCache<T> cache_;
};

template <typename T>
class MaxPoolLayer final : public Layer<T> {
public:
    LayerKind kind() const override { return LayerKind::MaxPool2x2; }
    std::string description() const override { return "2x2, Max Pool"; }
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* rng) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    double kink_distance() const override { return last_gap_; }
    void track_kinks(bool on) override { track_kinks_ = on; }
    std::uint64_t branch_signature() const override;

private:
    MaxPoolCache cache_;
    bool track_kinks_ = false;
    double last_gap_ = std::numeric_limits<double>::infinity();
};

template <typename T>
class ActivationLayer final : public Layer<T> {
public:
    /// `example_shape` is the per-example shape the activation is applied to.
    ActivationLayer(std::string name, ActivationSpec spec, const Shape& example_shape);

    LayerKind kind() const override { return LayerKind::Activation; }
    std::string description() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* rng) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    std::vector<Param<T>*> params() override;
    std::vector<const Param<T>*> params() const override;
    double kink_distance() const override;
    void project() override;
    std::uint64_t branch_signature() const override;

    const ActivationSpec& spec() const { return spec_; }
    Param<T>& store() { return params_; }

private:
    ActivationSpec spec_;
    Shape example_shape_;
    Param<T> params_;
    ActivationCache<T> cache_;
};

template <typename T>
class GlobalAvgPoolLayer final : public Layer<T> {
public:
    LayerKind kind() const override { return LayerKind::GlobalAvgPool; }
    std::string description() const override { return "Average Pooling 2D"; }
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* rng) override;
    Tensor<T> backward(const Tensor<T>& dy) override;

private:
    Shape4 input_{};
};

template <typename T>
class DropoutLayer final : public Layer<T> {
public:
    explicit DropoutLayer(double p);

    LayerKind kind() const override { return LayerKind::Dropout; }
    std::string description() const override;
    Shape output_shape(const Shape& input) const override { return input; }
    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* rng) override;
    Tensor<T> backward(const Tensor<T>& dy) override;

    double rate() const { return p_; }

private:
    double p_;
    std::vector<T> mask_;
    bool identity_ = true;
};

template <typename T>
class DenseLayer final : public Layer<T> {
public:
    DenseLayer(std::string name, std::size_t in_units, std::size_t out_units, bool regularized);

    LayerKind kind() const override { return LayerKind::Dense; }
    std::string description() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* rng) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    std::vector<Param<T>*> params() override { return {&kernel_, &bias_}; }
    std::vector<const Param<T>*> params() const override { return {&kernel_, &bias_}; }

    Param<T>& kernel() { return kernel_; }
    Param<T>& bias() { return bias_; }

private:
    std::size_t in_, out_;
    Param<T> kernel_, bias_;
    Tensor<T> input_;
};

template <typename T>
class SoftmaxLayer final : public Layer<T> {
public:
    LayerKind kind() const override { return LayerKind::Softmax; }
    std::string description() const override { return "SoftMax Activation Function"; }
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* rng) override;
    Tensor<T> backward(const Tensor<T>& dy) override;

private:
    Tensor<T> probs_;
};

}  // namespace pilu
