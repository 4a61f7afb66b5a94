#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfnet {

using Shape = std::vector<int64_t>;

/// Dense real tensor of rank 1, 2 or 4, row-major with the last axis
/// fastest. Rank-4 layout is (batch N, channel C, height H, width W).
/// Values are owned; tensors behave as plain values and are safe to
/// share across threads once constructed.
template <typename T>
class TensorT {
public:
    TensorT() = default;

    explicit TensorT(Shape shape) : shape_(std::move(shape)) {
        data_.assign(static_cast<size_t>(checked_numel(shape_)), T(0));
    }

    TensorT(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (checked_numel(shape_) != static_cast<int64_t>(data_.size()))
            throw std::invalid_argument("tensor: data length does not match shape product");
    }

    static TensorT zeros(Shape shape) { return TensorT(std::move(shape)); }

    static TensorT ones(Shape shape) { return full(std::move(shape), T(1)); }

    static TensorT full(Shape shape, T value) {
        TensorT t(std::move(shape));
        std::fill(t.data_.begin(), t.data_.end(), value);
        return t;
    }

    const Shape& shape() const { return shape_; }
    int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
    int64_t dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }

    T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    T& operator()(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * shape_[1] + c)]; }
    const T& operator()(int64_t r, int64_t c) const {
        return data_[static_cast<size_t>(r * shape_[1] + c)];
    }

    T& operator()(int64_t n, int64_t c, int64_t h, int64_t w) {
        return data_[static_cast<size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
    }
    const T& operator()(int64_t n, int64_t c, int64_t h, int64_t w) const {
        return data_[static_cast<size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
    }

    bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

    /// Element count implied by a shape; rejects empty shapes, ranks other
    /// than 1/2/4 and non-positive dimensions.
    static int64_t checked_numel(const Shape& shape) {
        if (shape.size() != 1 && shape.size() != 2 && shape.size() != 4)
            throw std::invalid_argument("tensor: rank must be 1, 2 or 4, got rank " +
                                        std::to_string(shape.size()));
        int64_t n = 1;
        for (int64_t d : shape) {
            if (d < 1) throw std::invalid_argument("tensor: dimension sizes must be >= 1");
            n *= d;
        }
        return n;
    }

private:
    Shape shape_;
    std::vector<T> data_;
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

namespace detail {
inline void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise arithmetic. Shapes must match exactly; the only implicit
// broadcasting is tensor-scalar.

template <typename T, typename Op>
TensorT<T> elementwise(Op op, const TensorT<T>& a, const TensorT<T>& b) {
    detail::require(a.same_shape(b), "elementwise: shape mismatch");
    TensorT<T> out(a.shape());
    const T* pa = a.data();
    const T* pb = b.data();
    T* po = out.data();
    for (int64_t i = 0, n = a.numel(); i < n; ++i) po[i] = op(pa[i], pb[i]);
    return out;
}

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
    return elementwise([](T x, T y) { return x + y; }, a, b);
}

template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
    return elementwise([](T x, T y) { return x - y; }, a, b);
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
    return elementwise([](T x, T y) { return x * y; }, a, b);
}

template <typename T>
TensorT<T> scalar_add(T s, const TensorT<T>& a) {
    TensorT<T> out(a.shape());
    const T* pa = a.data();
    T* po = out.data();
    for (int64_t i = 0, n = a.numel(); i < n; ++i) po[i] = pa[i] + s;
    return out;
}

template <typename T>
TensorT<T> scalar_mul(T s, const TensorT<T>& a) {
    TensorT<T> out(a.shape());
    const T* pa = a.data();
    T* po = out.data();
    for (int64_t i = 0, n = a.numel(); i < n; ++i) po[i] = pa[i] * s;
    return out;
}

// ---------------------------------------------------------------------------
// Matrix product [m,k] x [k,n] -> [m,n]; accumulation in double.

template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
    detail::require(a.rank() == 2 && b.rank() == 2, "matmul: operands must be rank-2");
    detail::require(a.dim(1) == b.dim(0), "matmul: inner dimensions differ");
    const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    TensorT<T> out({m, n});
    const T* pa = a.data();
    const T* pb = b.data();
    T* po = out.data();
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int64_t l = 0; l < k; ++l)
                acc += static_cast<double>(pa[i * k + l]) * static_cast<double>(pb[l * n + j]);
            po[i * n + j] = static_cast<T>(acc);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Whole-tensor reductions over the flattened values. Variance uses the
// population convention (divide by N); median of an even count is the
// midpoint of the two central values.

template <typename T>
double sum(const TensorT<T>& t) {
    detail::require(!t.empty(), "reduce: empty tensor");
    double acc = 0.0;
    for (const T& v : t.values()) acc += static_cast<double>(v);
    return acc;
}

template <typename T>
double mean(const TensorT<T>& t) {
    return sum(t) / static_cast<double>(t.numel());
}

template <typename T>
double variance(const TensorT<T>& t) {
    const double m = mean(t);
    double acc = 0.0;
    for (const T& v : t.values()) {
        const double d = static_cast<double>(v) - m;
        acc += d * d;
    }
    return acc / static_cast<double>(t.numel());
}

template <typename T>
double median(const TensorT<T>& t) {
    detail::require(!t.empty(), "reduce: empty tensor");
    std::vector<double> v(t.values().begin(), t.values().end());
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// Reshape / flatten. Data order is always preserved bit for bit.

template <typename T>
TensorT<T> reshape(const TensorT<T>& t, Shape new_shape) {
    const int64_t n = TensorT<T>::checked_numel(new_shape);
    detail::require(n == t.numel(), "reshape: element count mismatch");
    return TensorT<T>(std::move(new_shape), std::vector<T>(t.values().begin(), t.values().end()));
}

/// [N,C,H,W] -> [N, C*H*W]; per-sample values stay in C-major, then H,
/// then W order.
template <typename T>
TensorT<T> flatten_samples(const TensorT<T>& t) {
    detail::require(t.rank() == 4, "flatten_samples: input must be rank-4");
    return reshape(t, {t.dim(0), t.dim(1) * t.dim(2) * t.dim(3)});
}

// ---------------------------------------------------------------------------
// Deterministic random source: xoshiro256** seeded through splitmix64.
// The generator algorithm is fixed so that a given seed produces the same
// stream on every platform. Normal deviates use the Box-Muller transform
// (pairs are generated together; the second value is cached).

class Rng {
public:
    struct State {
        uint64_t s[4];
        bool has_cached = false;
        double cached = 0.0;
    };

    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : state_.s) w = splitmix64(x);
    }

    /// Deterministic combination of a base seed and a stream/sample id,
    /// for independent per-item substreams.
    static uint64_t derive(uint64_t seed, uint64_t id) {
        uint64_t x = seed ^ (0x9e3779b97f4a7c15ull + id * 0xbf58476d1ce4e5b9ull);
        splitmix64(x);
        return splitmix64(x);
    }

    uint64_t next_u64() {
        uint64_t* s = state_.s;
        const uint64_t result = rotl(s[1] * 5, 7) * 9;
        const uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }

    /// Uniform integer in [0, n).
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

    double next_normal() {
        if (state_.has_cached) {
            state_.has_cached = false;
            return state_.cached;
        }
        const double u1 = 1.0 - next_uniform();  // (0, 1]
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
        state_.cached = r * std::sin(a);
        state_.has_cached = true;
        return r * std::cos(a);
    }

    double next_normal(double mean, double std) { return mean + std * next_normal(); }

    const State& state() const { return state_; }
    void set_state(const State& s) { state_ = s; }

private:
    static uint64_t splitmix64(uint64_t& x) {
        x += 0x9e3779b97f4a7c15ull;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    State state_;
};

template <typename T>
TensorT<T> rand_normal(Rng& rng, Shape shape, double mean, double std) {
    detail::require(std >= 0.0, "rand_normal: std must be >= 0");
    TensorT<T> t(std::move(shape));
    for (T& v : t.values()) v = static_cast<T>(rng.next_normal(mean, std));
    return t;
}

template <typename T>
TensorT<T> rand_uniform(Rng& rng, Shape shape, double lo, double hi) {
    detail::require(lo <= hi, "rand_uniform: lo must be <= hi");
    TensorT<T> t(std::move(shape));
    for (T& v : t.values()) v = static_cast<T>(rng.next_uniform(lo, hi));
    return t;
}

}  // namespace sfnet
