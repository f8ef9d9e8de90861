#include "pilu/optimizer.hpp"

#include <cmath>

namespace pilu {

template <typename T>
void Adam<T>::step(std::span<Param<T>* const> params) {
    for (const auto* p : params) {
        if (p->grad.shape() != p->value.shape()) {
            throw std::logic_error("adam: gradient shape of " + p->name + " does not match its value");
        }
        for (const T g : p->grad.data()) {
            if (!std::isfinite(g)) throw NonFiniteError("non-finite gradient in " + p->name);
        }
    }
    if (m_.empty()) {
        for (const auto* p : params) {
            m_.emplace_back(p->value.size(), 0.0);
            v_.emplace_back(p->value.size(), 0.0);
        }
    } else if (m_.size() != params.size()) {
        throw std::logic_error("adam: parameter list changed between steps");
    }

    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto value = params[k]->value.data();
        const auto grad = params[k]->grad.data();
        auto& m = m_[k];
        auto& v = v_[k];
        if (m.size() != value.size()) throw std::logic_error("adam: state shape mismatch for " + params[k]->name);
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = grad[i];
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            value[i] = static_cast<T>(value[i] - cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps));
        }
    }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace pilu
