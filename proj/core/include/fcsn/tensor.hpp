#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcsn {

/// Multi-channel 1D sequence map: `data` is row-major [channels][length].
struct SeqMap {
    int channels = 0;
    int length = 0;
    std::vector<double> data;

    SeqMap() = default;
    SeqMap(int c, int l) : channels(c), length(l), data(static_cast<size_t>(c) * l, 0.0) {
        if (c <= 0 || l <= 0) throw std::invalid_argument("SeqMap: channels and length must be positive");
    }
    SeqMap(int c, int l, std::vector<double> d) : channels(c), length(l), data(std::move(d)) {
        if (c <= 0 || l <= 0) throw std::invalid_argument("SeqMap: channels and length must be positive");
        if (data.size() != static_cast<size_t>(c) * l)
            throw std::invalid_argument("SeqMap: data size does not match channels*length");
    }

    double& at(int c, int t) { return data[static_cast<size_t>(c) * length + t]; }
    double at(int c, int t) const { return data[static_cast<size_t>(c) * length + t]; }
    double* row(int c) { return data.data() + static_cast<size_t>(c) * length; }
    const double* row(int c) const { return data.data() + static_cast<size_t>(c) * length; }
    size_t size() const { return data.size(); }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Dense nd array of doubles, row-major.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        v.assign(count(shape), 0.0);
    }
    Tensor(std::vector<int> s, std::vector<double> values) : shape(std::move(s)), v(std::move(values)) {
        if (v.size() != count(shape)) throw std::invalid_argument("Tensor: value count does not match shape");
    }

    static size_t count(const std::vector<int>& s) {
        size_t n = 1;
        for (int d : s) {
            if (d <= 0) throw std::invalid_argument("Tensor: shape entries must be positive");
            n *= static_cast<size_t>(d);
        }
        return n;
    }

    size_t size() const { return v.size(); }
    double& operator[](size_t i) { return v[i]; }
    double operator[](size_t i) const { return v[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

/// Learnable array with its gradient and SGD momentum buffer, always in shape lockstep.
struct Param {
    Tensor value;
    Tensor grad;
    Tensor momentum;

    Param() = default;
    explicit Param(Tensor val) : value(std::move(val)), grad(value.shape), momentum(value.shape) {}

    void zero_grad() { std::fill(grad.v.begin(), grad.v.end(), 0.0); }
};

/// Per-video frame features, frame-major [frames][dim].
struct FeatureMatrix {
    int frames = 0;
    int dim = 0;
    std::vector<double> v;

    FeatureMatrix() = default;
    FeatureMatrix(int t, int d) : frames(t), dim(d), v(static_cast<size_t>(t) * d, 0.0) {
        if (t <= 0 || d <= 0) throw std::invalid_argument("FeatureMatrix: frames and dim must be positive");
    }

    double& at(int t, int d) { return v[static_cast<size_t>(t) * dim + d]; }
    double at(int t, int d) const { return v[static_cast<size_t>(t) * dim + d]; }
    double* frame(int t) { return v.data() + static_cast<size_t>(t) * dim; }
    const double* frame(int t) const { return v.data() + static_cast<size_t>(t) * dim; }
};

/// FeatureMatrix (frame-major TxD) to SeqMap (channel-major DxT).
inline SeqMap to_seqmap(const FeatureMatrix& f) {
    SeqMap m(f.dim, f.frames);
    for (int t = 0; t < f.frames; ++t)
        for (int d = 0; d < f.dim; ++d) m.at(d, t) = f.at(t, d);
    return m;
}

// Portable deterministic draws on top of the standards-fixed mt19937_64 engine.
// (std::uniform_real_distribution and friends are implementation-defined.)
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0, 1)
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

inline double normal_draw(std::mt19937_64& rng) {
    // Box-Muller; one value per call keeps the stream position obvious.
    double u1 = uniform_unit(rng);
    double u2 = uniform_unit(rng);
    while (u1 <= 0.0) u1 = uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Uniform integer in [0, n) without distribution-object portability issues.
inline uint64_t uniform_index(std::mt19937_64& rng, uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
    uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % n;
}

} // namespace fcsn
