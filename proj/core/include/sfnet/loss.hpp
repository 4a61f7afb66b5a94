#pragma once

#include <cmath>

#include "sfnet/tensor.hpp"

namespace sfnet {

template <typename T>
struct HuberResult {
    double loss = 0.0;      // mean over the batch
    TensorT<T> grad_pred;   // d(mean loss)/d(pred), [N,1]
};

/// Huber loss on residuals a = target - pred, averaged over the batch:
///   L(a) = a^2/2                 for |a| <= delta
///        = delta*(|a| - delta/2) otherwise
/// The per-sample gradient w.r.t. the prediction is -a/N inside the
/// quadratic region and -delta*sign(a)/N outside it.
template <typename T>
HuberResult<T> huber_loss(const TensorT<T>& pred, const TensorT<T>& target, double delta) {
    detail::require(pred.same_shape(target), "huber_loss: shape mismatch");
    detail::require(delta > 0.0, "huber_loss: delta must be > 0");
    const int64_t n = pred.numel();
    HuberResult<T> r;
    r.grad_pred = TensorT<T>(pred.shape());
    double total = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double a = static_cast<double>(target[i]) - static_cast<double>(pred[i]);
        const double abs_a = std::fabs(a);
        double dl_da;  // d(per-sample loss)/da
        if (abs_a <= delta) {
            total += 0.5 * a * a;
            dl_da = a;
        } else {
            total += delta * (abs_a - 0.5 * delta);
            dl_da = a > 0 ? delta : -delta;
        }
        r.grad_pred[i] = static_cast<T>(-dl_da / static_cast<double>(n));
    }
    r.loss = total / static_cast<double>(n);
    return r;
}

}  // namespace sfnet
