#include "pilu/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pilu {

namespace {

template <typename T>
void check_pair(const Tensor<T>& probs, const Tensor<T>& onehot, const char* what) {
    if (probs.rank() != 2 || probs.shape() != onehot.shape()) {
        throw std::invalid_argument(std::string(what) + ": probabilities " + shape_to_string(probs.shape()) +
                                    " vs targets " + shape_to_string(onehot.shape()));
    }
}

}  // namespace

template <typename T>
double categorical_cross_entropy(const Tensor<T>& probs, const Tensor<T>& onehot) {
    check_pair(probs, onehot, "categorical_cross_entropy");
    const std::size_t n = probs.dim(0);
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (onehot[i] != T{0}) {
            const double p = std::clamp(static_cast<double>(probs[i]), kProbabilityFloor, 1.0);
            total -= static_cast<double>(onehot[i]) * std::log(p);
        }
    }
    return total / static_cast<double>(n);
}

template <typename T>
Tensor<T> cross_entropy_logit_grad(const Tensor<T>& probs, const Tensor<T>& onehot) {
    check_pair(probs, onehot, "cross_entropy_logit_grad");
    const T inv_n = T{1} / static_cast<T>(probs.dim(0));
    Tensor<T> g(probs.shape());
    for (std::size_t i = 0; i < probs.size(); ++i) g[i] = (probs[i] - onehot[i]) * inv_n;
    return g;
}

template <typename T>
L2Term<T> l2_penalty(const Tensor<T>& kernel, double lambda, bool half) {
    L2Term<T> term{0.0, Tensor<T>(kernel.shape())};
    const double scale = half ? 0.5 * lambda : lambda;
    double sum = 0.0;
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        const double w = kernel[i];
        sum += w * w;
        term.grad[i] = static_cast<T>(2.0 * scale * w);
    }
    term.loss = scale * sum;
    return term;
}

template <typename T>
double accuracy(const Tensor<T>& probs, const Tensor<T>& onehot) {
    check_pair(probs, onehot, "accuracy");
    const std::size_t n = probs.dim(0), k = probs.dim(1);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < n; ++r) {
        const T* p = probs.raw() + r * k;
        const T* y = onehot.raw() + r * k;
        hits += std::max_element(p, p + k) - p == std::max_element(y, y + k) - y;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

#define PILU_INSTANTIATE(T)                                                              \
    template double categorical_cross_entropy<T>(const Tensor<T>&, const Tensor<T>&);    \
    template Tensor<T> cross_entropy_logit_grad<T>(const Tensor<T>&, const Tensor<T>&);  \
    template L2Term<T> l2_penalty<T>(const Tensor<T>&, double, bool);                    \
    template double accuracy<T>(const Tensor<T>&, const Tensor<T>&);

PILU_INSTANTIATE(float)
PILU_INSTANTIATE(double)

#undef PILU_INSTANTIATE

}  // namespace pilu
