#pragma once

#include <cmath>
#include <utility>

#include "sfnet/tensor.hpp"

namespace sfnet {

// ---------------------------------------------------------------------------
// 3x3 convolution, stride 1, "same" zero padding of 1. The operation is
// cross-correlation (no kernel flip).

template <typename T>
struct Conv2d {
    TensorT<T> weight;  // [C_out, C_in, 3, 3]
    TensorT<T> bias;    // [C_out]

    Conv2d() = default;
    Conv2d(int64_t out_channels, int64_t in_channels)
        : weight({out_channels, in_channels, 3, 3}), bias({out_channels}) {}

    int64_t out_channels() const { return weight.dim(0); }
    int64_t in_channels() const { return weight.dim(1); }
};

template <typename T>
struct Conv2dGrads {
    TensorT<T> weight;
    TensorT<T> bias;
    TensorT<T> input;
};

/// out[n,o,i,j] = bias[o] + sum_{c,u,v} w[o,c,u,v] * x[n,c,i+u-1,j+v-1],
/// out-of-range x taken as zero. Output spatial size equals input size.
template <typename T>
TensorT<T> conv2d_forward(const Conv2d<T>& layer, const TensorT<T>& x) {
    detail::require(x.rank() == 4, "conv2d: input must be rank-4");
    detail::require(x.dim(1) == layer.in_channels(), "conv2d: input channel mismatch");
    const int64_t N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t Co = layer.out_channels();
    TensorT<T> out({N, Co, H, W});
    const T* wp = layer.weight.data();
    const T* bp = layer.bias.data();
    for (int64_t n = 0; n < N; ++n) {
        for (int64_t o = 0; o < Co; ++o) {
            T* op = out.data() + (n * Co + o) * H * W;
            std::fill(op, op + H * W, bp[o]);
            for (int64_t c = 0; c < Ci; ++c) {
                const T* xp = x.data() + (n * Ci + c) * H * W;
                for (int64_t u = 0; u < 3; ++u) {
                    const int64_t i0 = std::max<int64_t>(0, 1 - u);
                    const int64_t i1 = std::min<int64_t>(H, H + 1 - u);
                    for (int64_t v = 0; v < 3; ++v) {
                        const T wv = wp[((o * Ci + c) * 3 + u) * 3 + v];
                        const int64_t j0 = std::max<int64_t>(0, 1 - v);
                        const int64_t j1 = std::min<int64_t>(W, W + 1 - v);
                        for (int64_t i = i0; i < i1; ++i) {
                            const T* xr = xp + (i + u - 1) * W + (j0 + v - 1);
                            T* orow = op + i * W + j0;
                            for (int64_t j = 0; j < j1 - j0; ++j) orow[j] += wv * xr[j];
                        }
                    }
                }
            }
        }
    }
    return out;
}

/// Analytic gradients of conv2d_forward with respect to weight, bias and
/// input, given d(loss)/d(out).
template <typename T>
Conv2dGrads<T> conv2d_backward(const Conv2d<T>& layer, const TensorT<T>& x,
                               const TensorT<T>& grad_out) {
    detail::require(x.rank() == 4 && grad_out.rank() == 4, "conv2d_backward: rank-4 expected");
    detail::require(x.dim(1) == layer.in_channels(), "conv2d_backward: input channel mismatch");
    const int64_t N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t Co = layer.out_channels();
    detail::require(grad_out.dim(0) == N && grad_out.dim(1) == Co && grad_out.dim(2) == H &&
                        grad_out.dim(3) == W,
                    "conv2d_backward: grad_out shape mismatch");

    Conv2dGrads<T> g{TensorT<T>({Co, Ci, 3, 3}), TensorT<T>({Co}), TensorT<T>(x.shape())};

    for (int64_t o = 0; o < Co; ++o) {
        double acc = 0.0;
        for (int64_t n = 0; n < N; ++n) {
            const T* gp = grad_out.data() + (n * Co + o) * H * W;
            for (int64_t i = 0; i < H * W; ++i) acc += static_cast<double>(gp[i]);
        }
        g.bias[o] = static_cast<T>(acc);
    }

    for (int64_t n = 0; n < N; ++n) {
        for (int64_t o = 0; o < Co; ++o) {
            const T* gp = grad_out.data() + (n * Co + o) * H * W;
            for (int64_t c = 0; c < Ci; ++c) {
                const T* xp = x.data() + (n * Ci + c) * H * W;
                T* gip = g.input.data() + (n * Ci + c) * H * W;
                for (int64_t u = 0; u < 3; ++u) {
                    const int64_t i0 = std::max<int64_t>(0, 1 - u);
                    const int64_t i1 = std::min<int64_t>(H, H + 1 - u);
                    for (int64_t v = 0; v < 3; ++v) {
                        const int64_t j0 = std::max<int64_t>(0, 1 - v);
                        const int64_t j1 = std::min<int64_t>(W, W + 1 - v);
                        const T wv = layer.weight.data()[((o * Ci + c) * 3 + u) * 3 + v];
                        T wacc = T(0);
                        for (int64_t i = i0; i < i1; ++i) {
                            const T* xr = xp + (i + u - 1) * W + (j0 + v - 1);
                            T* gir = gip + (i + u - 1) * W + (j0 + v - 1);
                            const T* gr = gp + i * W + j0;
                            for (int64_t j = 0; j < j1 - j0; ++j) {
                                wacc += gr[j] * xr[j];
                                gir[j] += wv * gr[j];
                            }
                        }
                        g.weight.data()[((o * Ci + c) * 3 + u) * 3 + v] += wacc;
                    }
                }
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// ReLU. The gradient at exactly zero is defined as zero.

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& x) {
    TensorT<T> out(x.shape());
    const T* px = x.data();
    T* po = out.data();
    for (int64_t i = 0, n = x.numel(); i < n; ++i) po[i] = px[i] > T(0) ? px[i] : T(0);
    return out;
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& x, const TensorT<T>& grad_out) {
    detail::require(x.same_shape(grad_out), "relu_backward: shape mismatch");
    TensorT<T> out(x.shape());
    const T* px = x.data();
    const T* pg = grad_out.data();
    T* po = out.data();
    for (int64_t i = 0, n = x.numel(); i < n; ++i) po[i] = px[i] > T(0) ? pg[i] : T(0);
    return out;
}

// ---------------------------------------------------------------------------
// 2x2 max pooling with stride 2. Winning positions are remembered as flat
// indices into the input; ties keep the first maximum in row-major window
// order.

template <typename T>
struct MaxPoolResult {
    TensorT<T> out;                // [N, C, H/2, W/2]
    std::vector<int64_t> argmax;   // flat input index per output element
    Shape input_shape;
};

template <typename T>
MaxPoolResult<T> maxpool2_forward(const TensorT<T>& x) {
    detail::require(x.rank() == 4, "maxpool2: input must be rank-4");
    const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    detail::require(H % 2 == 0 && W % 2 == 0, "maxpool2: H and W must be even");
    const int64_t Ho = H / 2, Wo = W / 2;
    MaxPoolResult<T> r{TensorT<T>({N, C, Ho, Wo}), {}, x.shape()};
    r.argmax.resize(static_cast<size_t>(N * C * Ho * Wo));
    const T* px = x.data();
    T* po = r.out.data();
    int64_t* pi = r.argmax.data();
    for (int64_t nc = 0; nc < N * C; ++nc) {
        const T* plane = px + nc * H * W;
        for (int64_t i = 0; i < Ho; ++i) {
            for (int64_t j = 0; j < Wo; ++j) {
                const int64_t base = (2 * i) * W + 2 * j;
                int64_t best = base;
                T bv = plane[base];
                const int64_t cand[3] = {base + 1, base + W, base + W + 1};
                for (int64_t k : cand) {
                    if (plane[k] > bv) {
                        bv = plane[k];
                        best = k;
                    }
                }
                po[(nc * Ho + i) * Wo + j] = bv;
                pi[(nc * Ho + i) * Wo + j] = nc * H * W + best;
            }
        }
    }
    return r;
}

template <typename T>
TensorT<T> maxpool2_backward(const MaxPoolResult<T>& fwd, const TensorT<T>& grad_out) {
    detail::require(fwd.out.same_shape(grad_out), "maxpool2_backward: grad_out shape mismatch");
    TensorT<T> grad_in(fwd.input_shape);
    const T* pg = grad_out.data();
    T* po = grad_in.data();
    for (int64_t i = 0, n = grad_out.numel(); i < n; ++i) po[fwd.argmax[static_cast<size_t>(i)]] += pg[i];
    return grad_in;
}

// ---------------------------------------------------------------------------
// Fully connected layer: y = x * W^T + b.

template <typename T>
struct Fc {
    TensorT<T> weight;  // [d_out, d_in]
    TensorT<T> bias;    // [d_out]

    Fc() = default;
    Fc(int64_t d_out, int64_t d_in) : weight({d_out, d_in}), bias({d_out}) {}

    int64_t d_out() const { return weight.dim(0); }
    int64_t d_in() const { return weight.dim(1); }
};

template <typename T>
struct FcGrads {
    TensorT<T> weight;
    TensorT<T> bias;
    TensorT<T> input;
};

template <typename T>
TensorT<T> fc_forward(const Fc<T>& layer, const TensorT<T>& x) {
    detail::require(x.rank() == 2, "fc: input must be rank-2");
    detail::require(x.dim(1) == layer.d_in(), "fc: input width mismatch");
    const int64_t N = x.dim(0), Di = layer.d_in(), Do = layer.d_out();
    TensorT<T> out({N, Do});
    const T* wp = layer.weight.data();
    const T* bp = layer.bias.data();
    for (int64_t n = 0; n < N; ++n) {
        const T* xr = x.data() + n * Di;
        T* orow = out.data() + n * Do;
        for (int64_t o = 0; o < Do; ++o) {
            const T* wr = wp + o * Di;
            T acc = bp[o];
            for (int64_t i = 0; i < Di; ++i) acc += wr[i] * xr[i];
            orow[o] = acc;
        }
    }
    return out;
}

/// grad_W = grad_out^T * x, grad_b = column sums of grad_out,
/// grad_x = grad_out * W.
template <typename T>
FcGrads<T> fc_backward(const Fc<T>& layer, const TensorT<T>& x, const TensorT<T>& grad_out) {
    detail::require(x.rank() == 2 && grad_out.rank() == 2, "fc_backward: rank-2 expected");
    detail::require(x.dim(1) == layer.d_in(), "fc_backward: input width mismatch");
    detail::require(grad_out.dim(0) == x.dim(0) && grad_out.dim(1) == layer.d_out(),
                    "fc_backward: grad_out shape mismatch");
    const int64_t N = x.dim(0), Di = layer.d_in(), Do = layer.d_out();
    FcGrads<T> g{TensorT<T>({Do, Di}), TensorT<T>({Do}), TensorT<T>({N, Di})};
    for (int64_t n = 0; n < N; ++n) {
        const T* xr = x.data() + n * Di;
        const T* gr = grad_out.data() + n * Do;
        T* gxr = g.input.data() + n * Di;
        for (int64_t o = 0; o < Do; ++o) {
            const T go = gr[o];
            g.bias[o] += go;
            T* gwr = g.weight.data() + o * Di;
            const T* wr = layer.weight.data() + o * Di;
            for (int64_t i = 0; i < Di; ++i) {
                gwr[i] += go * xr[i];
                gxr[i] += go * wr[i];
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Feature concatenation along the width axis; a's columns come first.

template <typename T>
TensorT<T> concat_forward(const TensorT<T>& a, const TensorT<T>& b) {
    detail::require(a.rank() == 2 && b.rank() == 2, "concat: rank-2 expected");
    detail::require(a.dim(0) == b.dim(0), "concat: batch size mismatch");
    const int64_t N = a.dim(0), P = a.dim(1), Q = b.dim(1);
    TensorT<T> out({N, P + Q});
    for (int64_t n = 0; n < N; ++n) {
        std::copy(a.data() + n * P, a.data() + (n + 1) * P, out.data() + n * (P + Q));
        std::copy(b.data() + n * Q, b.data() + (n + 1) * Q, out.data() + n * (P + Q) + P);
    }
    return out;
}

template <typename T>
std::pair<TensorT<T>, TensorT<T>> concat_backward(const TensorT<T>& grad_out, int64_t p,
                                                  int64_t q) {
    detail::require(grad_out.rank() == 2 && grad_out.dim(1) == p + q,
                    "concat_backward: width mismatch");
    const int64_t N = grad_out.dim(0);
    TensorT<T> ga({N, p}), gb({N, q});
    for (int64_t n = 0; n < N; ++n) {
        std::copy(grad_out.data() + n * (p + q), grad_out.data() + n * (p + q) + p,
                  ga.data() + n * p);
        std::copy(grad_out.data() + n * (p + q) + p, grad_out.data() + (n + 1) * (p + q),
                  gb.data() + n * q);
    }
    return {std::move(ga), std::move(gb)};
}

// ---------------------------------------------------------------------------
// Parameter initialization. Hidden layers use He-normal scaled by fan-in;
// the final output layer uses Xavier-uniform. Biases start at zero.

template <typename T>
void init_he_normal(Rng& rng, TensorT<T>& weight, int64_t fan_in) {
    const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (T& v : weight.values()) v = static_cast<T>(rng.next_normal(0.0, std));
}

template <typename T>
void init_xavier_uniform(Rng& rng, TensorT<T>& weight, int64_t fan_in, int64_t fan_out) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (T& v : weight.values()) v = static_cast<T>(rng.next_uniform(-a, a));
}

template <typename T>
void init_conv(Rng& rng, Conv2d<T>& layer) {
    init_he_normal(rng, layer.weight, layer.in_channels() * 9);
    std::fill(layer.bias.values().begin(), layer.bias.values().end(), T(0));
}

template <typename T>
void init_fc_hidden(Rng& rng, Fc<T>& layer) {
    init_he_normal(rng, layer.weight, layer.d_in());
    std::fill(layer.bias.values().begin(), layer.bias.values().end(), T(0));
}

template <typename T>
void init_fc_output(Rng& rng, Fc<T>& layer) {
    init_xavier_uniform(rng, layer.weight, layer.d_in(), layer.d_out());
    std::fill(layer.bias.values().begin(), layer.bias.values().end(), T(0));
}

}  // namespace sfnet
