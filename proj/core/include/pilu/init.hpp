#pragma once

#include <cmath>
#include <cstddef>

#include "pilu/rng.hpp"
#include "pilu/tensor.hpp"

namespace pilu {

inline double glorot_normal_stddev(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
}

/// Fills `t` with N(0, 2 / (fan_in + fan_out)) samples.
template <typename T>
void glorot_normal_fill(Tensor<T>& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// Flat vector of `count` Glorot-normal samples.
template <typename T = double>
Tensor<T> glorot_normal(std::size_t fan_in, std::size_t fan_out, Rng& rng, std::size_t count = 0) {
    Tensor<T> t({count == 0 ? fan_in * fan_out : count});
    glorot_normal_fill(t, fan_in, fan_out, rng);
    return t;
}

/// Fan sizes of a (kh, kw, cin, cout) kernel: receptive field times channels.
struct Fans {
    std::size_t in, out;
};
Fans conv_fans(const Shape& kernel_shape);

}  // namespace pilu
