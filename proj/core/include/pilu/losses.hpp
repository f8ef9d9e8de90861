#pragma once

#include "pilu/tensor.hpp"

namespace pilu {

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean over the batch of -log(p[true class]), probabilities clamped to [1e-12, 1].
template <typename T>
double categorical_cross_entropy(const Tensor<T>& probs, const Tensor<T>& onehot);

/// Gradient of the mean cross-entropy with respect to the softmax logits: (p - y) / n.
template <typename T>
Tensor<T> cross_entropy_logit_grad(const Tensor<T>& probs, const Tensor<T>& onehot);

template <typename T>
struct L2Term {
    double loss = 0.0;
    Tensor<T> grad;
};

/// lambda * sum(w^2) with gradient 2 * lambda * w; `half` selects the
/// (lambda / 2) * sum(w^2) convention instead.
template <typename T>
L2Term<T> l2_penalty(const Tensor<T>& kernel, double lambda, bool half = false);

/// Fraction of rows whose argmax equals the one-hot target.
template <typename T>
double accuracy(const Tensor<T>& probs, const Tensor<T>& onehot);

}  // namespace pilu
