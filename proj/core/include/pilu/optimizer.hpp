#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "pilu/layers.hpp"

namespace pilu {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
};

class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adam with bias-corrected moments:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
/// Moment state is created on the first step and keyed by position in the
/// parameter list, so the list must keep its order between steps.
template <typename T>
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    /// Throws NonFiniteError, naming the tensor, if any gradient is NaN/inf;
    /// no parameter is modified in that case.
    void step(std::span<Param<T>* const> params);

    std::size_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace pilu
