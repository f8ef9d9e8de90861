#include "pilu/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace pilu {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using ConstRowVec = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;

std::string dims(const Shape& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out;
}

}  // namespace

// ---- conv2d -----------------------------------------------------------------

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Conv2DCache<T>* cache) {
    const auto s = Shape4::of(x.shape());
    if (w.rank() != 4 || w.dim(2) != s.c || b.shape() != Shape{w.dim(3)}) {
        throw std::invalid_argument("conv2d_forward: kernel " + shape_to_string(w.shape()) + " / bias " +
                                    shape_to_string(b.shape()) + " do not fit input " +
                                    shape_to_string(x.shape()));
    }
    const std::size_t kh = w.dim(0), kw = w.dim(1), cout = w.dim(3);
    if (s.h < kh || s.w < kw) {
        throw std::invalid_argument("conv2d_forward: input " + shape_to_string(x.shape()) +
                                    " smaller than kernel");
    }
    const std::size_t oh = s.h - kh + 1, ow = s.w - kw + 1;
    const std::size_t rows = s.n * oh * ow, cols = kh * kw * s.c;

    std::vector<T> patches(rows * cols);
    const T* in = x.raw();
    T* dst = patches.data();
    for (std::size_t bi = 0; bi < s.n; ++bi) {
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                for (std::size_t ki = 0; ki < kh; ++ki) {
                    const T* src = in + s.offset(bi, i + ki, j, 0);
                    dst = std::copy_n(src, kw * s.c, dst);
                }
            }
        }
    }

    Tensor<T> y({s.n, oh, ow, cout});
    MatMap<T> out(y.raw(), rows, cout);
    out.noalias() = ConstMatMap<T>(patches.data(), rows, cols) * ConstMatMap<T>(w.raw(), cols, cout);
    out.rowwise() += ConstRowVec<T>(b.raw(), cout);

    if (cache) {
        cache->input_shape = x.shape();
        cache->patches = std::move(patches);
        cache->valid = true;
    }
    return y;
}

template <typename T>
Conv2DGrads<T> conv2d_backward(const Tensor<T>& dy, const Conv2DCache<T>& cache, const Tensor<T>& w) {
    if (!cache.valid) throw std::logic_error("conv2d_backward: no cached forward pass");
    const auto s = Shape4::of(cache.input_shape);
    const std::size_t kh = w.dim(0), kw = w.dim(1), cout = w.dim(3);
    const std::size_t oh = s.h - kh + 1, ow = s.w - kw + 1;
    if (dy.shape() != Shape{s.n, oh, ow, cout}) {
        throw std::logic_error("conv2d_backward: gradient shape " + shape_to_string(dy.shape()) +
                               " does not match cached forward");
    }
    const std::size_t rows = s.n * oh * ow, cols = kh * kw * s.c;
    const ConstMatMap<T> grad(dy.raw(), rows, cout);
    const ConstMatMap<T> patches(cache.patches.data(), rows, cols);

    Conv2DGrads<T> g{Tensor<T>(cache.input_shape), Tensor<T>(w.shape()), Tensor<T>({cout})};
    MatMap<T>(g.dw.raw(), cols, cout).noalias() = patches.transpose() * grad;
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(g.db.raw(), cout) = grad.colwise().sum();

    RowMatrix<T> dpatches = grad * ConstMatMap<T>(w.raw(), cols, cout).transpose();
    T* dx = g.dx.raw();
    const T* src = dpatches.data();
    const std::size_t run = kw * s.c;
    for (std::size_t bi = 0; bi < s.n; ++bi) {
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                for (std::size_t ki = 0; ki < kh; ++ki) {
                    T* d = dx + s.offset(bi, i + ki, j, 0);
                    for (std::size_t t = 0; t < run; ++t) d[t] += src[t];
                    src += run;
                }
            }
        }
    }
    return g;
}

// ---- max pool -----------------------------------------------------------------

template <typename T>
Tensor<T> maxpool2x2_forward(const Tensor<T>& x, MaxPoolCache* cache) {
    const auto s = Shape4::of(x.shape());
    const std::size_t oh = s.h / 2, ow = s.w / 2;
    if (oh == 0 || ow == 0) throw std::invalid_argument("maxpool2x2_forward: input " + shape_to_string(x.shape()));
    Tensor<T> y({s.n, oh, ow, s.c});
    std::vector<std::size_t> arg(y.size());
    const T* in = x.raw();
    std::size_t o = 0;
    for (std::size_t b = 0; b < s.n; ++b) {
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                for (std::size_t k = 0; k < s.c; ++k, ++o) {
                    const std::size_t window[4] = {s.offset(b, 2 * i, 2 * j, k), s.offset(b, 2 * i, 2 * j + 1, k),
                                                   s.offset(b, 2 * i + 1, 2 * j, k),
                                                   s.offset(b, 2 * i + 1, 2 * j + 1, k)};
                    std::size_t best = window[0];
                    for (int t = 1; t < 4; ++t) {
                        if (in[window[t]] > in[best]) best = window[t];
                    }
                    y[o] = in[best];
                    arg[o] = best;
                }
            }
        }
    }
    if (cache) {
        cache->input_shape = x.shape();
        cache->argmax = std::move(arg);
        cache->valid = true;
    }
    return y;
}

template <typename T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& dy, const MaxPoolCache& cache) {
    if (!cache.valid || dy.size() != cache.argmax.size()) {
        throw std::logic_error("maxpool2x2_backward: stale or mismatched cache");
    }
    Tensor<T> dx(cache.input_shape);
    for (std::size_t o = 0; o < dy.size(); ++o) dx[cache.argmax[o]] += dy[o];
    return dx;
}

template <typename T>
double maxpool2x2_min_gap(const Tensor<T>& x) {
    const auto s = Shape4::of(x.shape());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < s.n; ++b) {
        for (std::size_t i = 0; i + 1 < s.h; i += 2) {
            for (std::size_t j = 0; j + 1 < s.w; j += 2) {
                for (std::size_t k = 0; k < s.c; ++k) {
                    double v[4] = {double(x[s.offset(b, i, j, k)]), double(x[s.offset(b, i, j + 1, k)]),
                                   double(x[s.offset(b, i + 1, j, k)]), double(x[s.offset(b, i + 1, j + 1, k)])};
                    std::sort(v, v + 4);
                    gap = std::min(gap, v[3] - v[2]);
                }
            }
        }
    }
    return gap;
}

// ---- dense ----------------------------------------------------------------------

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
    if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0) || b.shape() != Shape{w.dim(1)}) {
        throw std::invalid_argument("dense_forward: shapes " + shape_to_string(x.shape()) + " x " +
                                    shape_to_string(w.shape()) + " + " + shape_to_string(b.shape()));
    }
    const std::size_t n = x.dim(0), in = w.dim(0), out = w.dim(1);
    Tensor<T> y({n, out});
    MatMap<T> ym(y.raw(), n, out);
    ym.noalias() = ConstMatMap<T>(x.raw(), n, in) * ConstMatMap<T>(w.raw(), in, out);
    ym.rowwise() += ConstRowVec<T>(b.raw(), out);
    return y;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& dy, const Tensor<T>& x, const Tensor<T>& w) {
    const std::size_t n = x.dim(0), in = w.dim(0), out = w.dim(1);
    if (dy.shape() != Shape{n, out}) {
        throw std::logic_error("dense_backward: gradient shape " + shape_to_string(dy.shape()));
    }
    DenseGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(w.shape()), Tensor<T>({out})};
    const ConstMatMap<T> grad(dy.raw(), n, out);
    MatMap<T>(g.dx.raw(), n, in).noalias() = grad * ConstMatMap<T>(w.raw(), in, out).transpose();
    MatMap<T>(g.dw.raw(), in, out).noalias() = ConstMatMap<T>(x.raw(), n, in).transpose() * grad;
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(g.db.raw(), out) = grad.colwise().sum();
    return g;
}

// ---- softmax --------------------------------------------------------------------

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
    if (logits.rank() != 2) throw std::invalid_argument("softmax: expected (n, k), got " + shape_to_string(logits.shape()));
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    Tensor<T> p(logits.shape());
    for (std::size_t r = 0; r < n; ++r) {
        const T* in = logits.raw() + r * k;
        T* out = p.raw() + r * k;
        const T top = *std::max_element(in, in + k);
        T sum = 0;
        for (std::size_t c = 0; c < k; ++c) sum += out[c] = std::exp(in[c] - top);
        for (std::size_t c = 0; c < k; ++c) out[c] /= sum;
    }
    return p;
}

template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& dprobs, const Tensor<T>& probs) {
    if (dprobs.shape() != probs.shape()) throw std::logic_error("softmax_backward: shape mismatch");
    const std::size_t n = probs.dim(0), k = probs.dim(1);
    Tensor<T> dx(probs.shape());
    for (std::size_t r = 0; r < n; ++r) {
        const T* p = probs.raw() + r * k;
        const T* g = dprobs.raw() + r * k;
        T dot = 0;
        for (std::size_t c = 0; c < k; ++c) dot += g[c] * p[c];
        for (std::size_t c = 0; c < k; ++c) dx[r * k + c] = p[c] * (g[c] - dot);
    }
    return dx;
}

// ---- dropout --------------------------------------------------------------------

template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& x, double p, Mode mode, Rng& rng, std::vector<T>* mask) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout: rate must be in [0, 1)");
    if (mode == Mode::Eval || p == 0.0) {
        if (mask) mask->assign(x.size(), T{1});
        return x;
    }
    std::bernoulli_distribution keep(1.0 - p);
    const T scale = static_cast<T>(1.0 / (1.0 - p));
    Tensor<T> y(x.shape());
    std::vector<T> m(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        m[i] = keep(rng) ? scale : T{0};
        y[i] = x[i] * m[i];
    }
    if (mask) *mask = std::move(m);
    return y;
}

// ---- layer objects -----------------------------------------------------------------

template <typename T>
Conv2DLayer<T>::Conv2DLayer(std::string name, std::size_t in_channels, std::size_t filters, std::size_t kernel)
    : in_channels_(in_channels), filters_(filters), size_(kernel) {
    kernel_.name = name + ".kernel";
    kernel_.value = Tensor<T>({kernel, kernel, in_channels, filters});
    kernel_.grad = Tensor<T>::zeros_like(kernel_.value);
    bias_.name = name + ".bias";
    bias_.value = Tensor<T>({filters});
    bias_.grad = Tensor<T>::zeros_like(bias_.value);
}

template <typename T>
std::string Conv2DLayer<T>::description() const {
    return std::to_string(size_) + "x" + std::to_string(size_) + ", " + std::to_string(filters_) + " CONV2D";
}

template <typename T>
Shape Conv2DLayer<T>::output_shape(const Shape& input) const {
    if (input.size() != 3 || input[2] != in_channels_ || input[0] < size_ || input[1] < size_) {
        throw std::invalid_argument(description() + " cannot take input " + dims(input));
    }
    return {input[0] - size_ + 1, input[1] - size_ + 1, filters_};
}

template <typename T>
Tensor<T> Conv2DLayer<T>::forward(const Tensor<T>& x, Mode, Rng*) {
    return conv2d_forward(x, kernel_.value, bias_.value, &cache_);
}

template <typename T>
Tensor<T> Conv2DLayer<T>::backward(const Tensor<T>& dy) {
    auto g = conv2d_backward(dy, cache_, kernel_.value);
    kernel_.grad = std::move(g.dw);
    bias_.grad = std::move(g.db);
    return std::move(g.dx);
}

template <typename T>
Shape MaxPoolLayer<T>::output_shape(const Shape& input) const {
    if (input.size() != 3 || input[0] < 2 || input[1] < 2) {
        throw std::invalid_argument("2x2 max pool cannot take input " + dims(input));
    }
    return {input[0] / 2, input[1] / 2, input[2]};
}

template <typename T>
Tensor<T> MaxPoolLayer<T>::forward(const Tensor<T>& x, Mode, Rng*) {
    last_gap_ = track_kinks_ ? maxpool2x2_min_gap(x) : std::numeric_limits<double>::infinity();
    return maxpool2x2_forward(x, &cache_);
}

template <typename T>
Tensor<T> MaxPoolLayer<T>::backward(const Tensor<T>& dy) {
    return maxpool2x2_backward(dy, cache_);
}

template <typename T>
std::uint64_t MaxPoolLayer<T>::branch_signature() const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto idx : cache_.argmax) h = (h ^ idx) * 1099511628211ull;
    return h;
}

template <typename T>
ActivationLayer<T>::ActivationLayer(std::string name, ActivationSpec spec, const Shape& example_shape)
    : spec_(std::move(spec)), example_shape_(example_shape) {
    params_.name = name + "." + std::string(to_string(spec_.kind));
    params_.value = make_activation_params<T>(spec_, example_shape_);
    params_.grad = Tensor<T>::zeros_like(params_.value);
    params_.row_labels = activation_param_labels(spec_.kind);
}

template <typename T>
std::string ActivationLayer<T>::description() const {
    std::string out = std::string(display_name(spec_.kind)) + " Activation";
    if (arity(spec_.kind) > 0) out += " (" + std::string(to_string(spec_.scheme)) + "-wise)";
    return out;
}

template <typename T>
Shape ActivationLayer<T>::output_shape(const Shape& input) const {
    if (input != example_shape_) {
        throw std::invalid_argument(description() + " built for " + dims(example_shape_) + " got " + dims(input));
    }
    return input;
}

template <typename T>
Tensor<T> ActivationLayer<T>::forward(const Tensor<T>& x, Mode, Rng*) {
    return apply_activation(x, spec_, params_.value, &cache_);
}

template <typename T>
Tensor<T> ActivationLayer<T>::backward(const Tensor<T>& dy) {
    auto g = apply_activation_backward(dy, cache_, spec_, params_.value);
    if (spec_.trainable) {
        params_.grad = std::move(g.dparams);
    } else {
        params_.grad.fill(T{0});
    }
    return std::move(g.dx);
}

template <typename T>
std::vector<Param<T>*> ActivationLayer<T>::params() {
    if (arity(spec_.kind) == 0) return {};
    return {&params_};
}

template <typename T>
std::vector<const Param<T>*> ActivationLayer<T>::params() const {
    if (arity(spec_.kind) == 0) return {};
    return {&params_};
}

template <typename T>
double ActivationLayer<T>::kink_distance() const {
    if (!cache_.valid) return std::numeric_limits<double>::infinity();
    return min_knot_distance(cache_.input, spec_, params_.value);
}

template <typename T>
std::uint64_t ActivationLayer<T>::branch_signature() const {
    if (!cache_.valid) return 0;
    return pilu::branch_signature(cache_.input, spec_, params_.value);
}

template <typename T>
void ActivationLayer<T>::project() {
    project_activation_params(spec_.kind, params_.value);
}

template <typename T>
Shape GlobalAvgPoolLayer<T>::output_shape(const Shape& input) const {
    if (input.size() != 3) throw std::invalid_argument("global average pool expects (h, w, c), got " + dims(input));
    return {input[2]};
}

template <typename T>
Tensor<T> GlobalAvgPoolLayer<T>::forward(const Tensor<T>& x, Mode, Rng*) {
    input_ = Shape4::of(x.shape());
    return reduce_mean_spatial(x);
}

template <typename T>
Tensor<T> GlobalAvgPoolLayer<T>::backward(const Tensor<T>& dy) {
    return reduce_mean_spatial_backward(dy, input_);
}

template <typename T>
DropoutLayer<T>::DropoutLayer(double p) : p_(p) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout: rate must be in [0, 1)");
}

template <typename T>
std::string DropoutLayer<T>::description() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "Dropout(p=%g)", p_);
    return buf;
}

template <typename T>
Tensor<T> DropoutLayer<T>::forward(const Tensor<T>& x, Mode mode, Rng* rng) {
    identity_ = mode == Mode::Eval || p_ == 0.0;
    if (identity_) return x;
    if (!rng) throw std::invalid_argument("dropout in training mode needs a random stream");
    return dropout_forward(x, p_, mode, *rng, &mask_);
}

template <typename T>
Tensor<T> DropoutLayer<T>::backward(const Tensor<T>& dy) {
    if (identity_) return dy;
    if (dy.size() != mask_.size()) throw std::logic_error("dropout backward: stale mask");
    Tensor<T> dx(dy.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask_[i];
    return dx;
}

template <typename T>
DenseLayer<T>::DenseLayer(std::string name, std::size_t in_units, std::size_t out_units, bool regularized)
    : in_(in_units), out_(out_units) {
    kernel_.name = name + ".kernel";
    kernel_.value = Tensor<T>({in_units, out_units});
    kernel_.grad = Tensor<T>::zeros_like(kernel_.value);
    kernel_.regularized = regularized;
    bias_.name = name + ".bias";
    bias_.value = Tensor<T>({out_units});
    bias_.grad = Tensor<T>::zeros_like(bias_.value);
}

template <typename T>
std::string DenseLayer<T>::description() const {
    return std::to_string(out_) + ", Fully Connected";
}

template <typename T>
Shape DenseLayer<T>::output_shape(const Shape& input) const {
    if (input != Shape{in_}) throw std::invalid_argument(description() + " expects " + std::to_string(in_) + " inputs, got " + dims(input));
    return {out_};
}

template <typename T>
Tensor<T> DenseLayer<T>::forward(const Tensor<T>& x, Mode, Rng*) {
    input_ = x;
    return dense_forward(x, kernel_.value, bias_.value);
}

template <typename T>
Tensor<T> DenseLayer<T>::backward(const Tensor<T>& dy) {
    auto g = dense_backward(dy, input_, kernel_.value);
    kernel_.grad = std::move(g.dw);
    bias_.grad = std::move(g.db);
    return std::move(g.dx);
}

template <typename T>
Shape SoftmaxLayer<T>::output_shape(const Shape& input) const {
    if (input.size() != 1) throw std::invalid_argument("softmax expects a vector input, got " + dims(input));
    return input;
}

template <typename T>
Tensor<T> SoftmaxLayer<T>::forward(const Tensor<T>& x, Mode, Rng*) {
    probs_ = softmax(x);
    return probs_;
}

template <typename T>
Tensor<T> SoftmaxLayer<T>::backward(const Tensor<T>& dy) {
    return softmax_backward(dy, probs_);
}

#define PILU_INSTANTIATE(T)                                                                                     \
    template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Conv2DCache<T>*); \
    template Conv2DGrads<T> conv2d_backward<T>(const Tensor<T>&, const Conv2DCache<T>&, const Tensor<T>&);      \
    template Tensor<T> maxpool2x2_forward<T>(const Tensor<T>&, MaxPoolCache*);                                  \
    template Tensor<T> maxpool2x2_backward<T>(const Tensor<T>&, const MaxPoolCache&);                           \
    template double maxpool2x2_min_gap<T>(const Tensor<T>&);                                                    \
    template Tensor<T> dense_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                  \
    template DenseGrads<T> dense_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);             \
    template Tensor<T> softmax<T>(const Tensor<T>&);                                                            \
    template Tensor<T> softmax_backward<T>(const Tensor<T>&, const Tensor<T>&);                                 \
    template Tensor<T> dropout_forward<T>(const Tensor<T>&, double, Mode, Rng&, std::vector<T>*);               \
    template class Conv2DLayer<T>;                                                                               \
    template class MaxPoolLayer<T>;                                                                              \
    template class ActivationLayer<T>;                                                                           \
    template class GlobalAvgPoolLayer<T>;                                                                        \
    template class DropoutLayer<T>;                                                                              \
    template class DenseLayer<T>;                                                                                \
    template class SoftmaxLayer<T>;

PILU_INSTANTIATE(float)
PILU_INSTANTIATE(double)

#undef PILU_INSTANTIATE

}  // namespace pilu
