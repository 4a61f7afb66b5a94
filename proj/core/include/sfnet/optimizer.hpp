#pragma once

#include <cmath>
#include <vector>

#include "sfnet/tensor.hpp"

namespace sfnet {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adaptive-moment optimizer state: first and second moment per parameter
/// tensor plus the shared step counter.
template <typename T>
struct AdamState {
    AdamConfig config;
    std::vector<TensorT<T>> m;
    std::vector<TensorT<T>> v;
    int64_t t = 0;

    template <typename Params>
    static AdamState init(const AdamConfig& cfg, const Params& params) {
        AdamState s;
        s.config = cfg;
        for (const auto& p : params) {
            s.m.push_back(TensorT<T>::zeros(p.tensor->shape()));
            s.v.push_back(TensorT<T>::zeros(p.tensor->shape()));
        }
        return s;
    }
};

/// One update:
///   t += 1
///   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
///   p -= lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps)
template <typename T, typename Params>
void adam_step(AdamState<T>& state, Params& params, const std::vector<TensorT<T>>& grads) {
    detail::require(params.size() == grads.size() && params.size() == state.m.size(),
                    "adam_step: parameter/gradient count mismatch");
    state.t += 1;
    const double b1 = state.config.beta1, b2 = state.config.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (size_t k = 0; k < params.size(); ++k) {
        TensorT<T>& p = *params[k].tensor;
        const TensorT<T>& g = grads[k];
        detail::require(p.same_shape(g), "adam_step: gradient shape mismatch");
        TensorT<T>& m = state.m[k];
        TensorT<T>& v = state.v[k];
        for (int64_t i = 0, n = p.numel(); i < n; ++i) {
            const double gi = static_cast<double>(g[i]);
            if (!std::isfinite(gi)) throw std::invalid_argument("adam_step: non-finite gradient");
            const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * gi;
            const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * gi * gi;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            const double m_hat = mi / c1;
            const double v_hat = vi / c2;
            p[i] = static_cast<T>(static_cast<double>(p[i]) -
                                  state.config.lr * m_hat / (std::sqrt(v_hat) + state.config.eps));
        }
    }
}

}  // namespace sfnet
