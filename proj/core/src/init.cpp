#include "pilu/init.hpp"

#include <random>
#include <stdexcept>

namespace pilu {

template <typename T>
void glorot_normal_fill(Tensor<T>& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    if (fan_in == 0 || fan_out == 0) throw std::invalid_argument("glorot_normal: fans must be positive");
    std::normal_distribution<double> dist(0.0, glorot_normal_stddev(fan_in, fan_out));
    for (auto& v : t.data()) v = static_cast<T>(dist(rng));
}

Fans conv_fans(const Shape& kernel_shape) {
    if (kernel_shape.size() != 4) throw std::invalid_argument("conv_fans: expected (kh, kw, cin, cout)");
    const std::size_t field = kernel_shape[0] * kernel_shape[1];
    return {field * kernel_shape[2], field * kernel_shape[3]};
}

template void glorot_normal_fill<float>(Tensor<float>&, std::size_t, std::size_t, Rng&);
template void glorot_normal_fill<double>(Tensor<double>&, std::size_t, std::size_t, Rng&);

}  // namespace pilu
