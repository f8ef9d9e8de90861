#pragma once

// Dense row-major N-dimensional array and the handful of primitives the
// layers need. Image tensors are channels-last: (n, h, w, c).

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pilu {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_to_string(const Shape& shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(shape[i]);
    }
    return out + ")";
}

/// Batch-major, channels-last view of a rank-4 shape.
struct Shape4 {
    std::size_t n = 0, h = 0, w = 0, c = 0;

    static Shape4 of(const Shape& shape) {
        if (shape.size() != 4) {
            throw std::invalid_argument("expected rank-4 shape, got " + shape_to_string(shape));
        }
        Shape4 s{shape[0], shape[1], shape[2], shape[3]};
        if (s.n == 0 || s.h == 0 || s.w == 0 || s.c == 0) {
            throw std::invalid_argument("rank-4 shape must be strictly positive: " + shape_to_string(shape));
        }
        return s;
    }

    Shape to_shape() const { return {n, h, w, c}; }
    std::size_t size() const { return n * h * w * c; }

    std::size_t offset(std::size_t b, std::size_t i, std::size_t j, std::size_t k) const {
        return ((b * h + i) * w + j) * c + k;
    }
};

template <typename T>
class Tensor {
public:
    using value_type = T;

    /// Empty tensor, shape (0). Used as the parameter store of arity-0 activations.
    Tensor() : shape_{0} {}

    explicit Tensor(Shape shape, T fill = T{}) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

    Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != shape_size(shape_)) {
            throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                        " does not match shape " + shape_to_string(shape_));
        }
    }

    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    T* raw() noexcept { return data_.data(); }
    const T* raw() const noexcept { return data_.data(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T& at(std::size_t b, std::size_t i, std::size_t j, std::size_t k) {
        return data_[Shape4::of(shape_).offset(b, i, j, k)];
    }
    const T& at(std::size_t b, std::size_t i, std::size_t j, std::size_t k) const {
        return data_[Shape4::of(shape_).offset(b, i, j, k)];
    }

    Tensor reshaped(Shape shape) const& { return Tensor(*this).reshaped(std::move(shape)); }
    Tensor reshaped(Shape shape) && {
        if (shape_size(shape) != data_.size()) {
            throw std::invalid_argument("cannot reshape " + shape_to_string(shape_) + " to " +
                                        shape_to_string(shape));
        }
        shape_ = std::move(shape);
        return std::move(*this);
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    template <typename U>
    Tensor<U> cast() const {
        return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <typename T, typename F>
Tensor<T> elementwise_map(const Tensor<T>& t, F&& f) {
    Tensor<T> out(t.shape());
    auto src = t.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
    return out;
}

/// Spatial mean per (example, channel): (n, h, w, c) -> (n, c).
template <typename T>
Tensor<T> reduce_mean_spatial(const Tensor<T>& t) {
    const auto s = Shape4::of(t.shape());
    Tensor<T> out({s.n, s.c});
    const auto x = t.data();
    auto y = out.data();
    const std::size_t plane = s.h * s.w;
    for (std::size_t b = 0; b < s.n; ++b) {
        T* row = y.data() + b * s.c;
        const T* src = x.data() + b * plane * s.c;
        for (std::size_t p = 0; p < plane; ++p) {
            for (std::size_t k = 0; k < s.c; ++k) row[k] += src[p * s.c + k];
        }
        for (std::size_t k = 0; k < s.c; ++k) row[k] /= static_cast<T>(plane);
    }
    return out;
}

/// Adjoint of reduce_mean_spatial: spreads dy[b, k] / (h*w) over the plane.
template <typename T>
Tensor<T> reduce_mean_spatial_backward(const Tensor<T>& dy, const Shape4& input) {
    if (dy.shape() != Shape{input.n, input.c}) {
        throw std::invalid_argument("reduce_mean_spatial_backward: gradient shape " + shape_to_string(dy.shape()));
    }
    Tensor<T> dx(input.to_shape());
    const std::size_t plane = input.h * input.w;
    const T scale = T{1} / static_cast<T>(plane);
    auto out = dx.data();
    for (std::size_t b = 0; b < input.n; ++b) {
        for (std::size_t p = 0; p < plane; ++p) {
            for (std::size_t k = 0; k < input.c; ++k) {
                out[(b * plane + p) * input.c + k] = dy[b * input.c + k] * scale;
            }
        }
    }
    return dx;
}

}  // namespace pilu
