#include "fcsn/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fcsn {

namespace {

int floor_div(int a, int b) { // b > 0
    return a >= 0 ? a / b : -((-a + b - 1) / b);
}

int ceil_div(int a, int b) { // b > 0
    return a >= 0 ? (a + b - 1) / b : -((-a) / b);
}

void check_conv_args(const SeqMap& x, const Tensor& w, const Tensor& b, const ConvSpec& spec, bool transposed) {
    spec.validate();
    if (w.shape != std::vector<int>{spec.out_channels, spec.in_channels, spec.kernel})
        throw std::invalid_argument("conv1d: weight shape does not match spec");
    int x_channels = transposed ? spec.out_channels : spec.in_channels;
    int b_channels = transposed ? spec.in_channels : spec.out_channels;
    if (x.channels != x_channels)
        throw std::invalid_argument("conv1d: input has " + std::to_string(x.channels) + " channels, spec expects " +
                                    std::to_string(x_channels));
    if (b.shape != std::vector<int>{b_channels})
        throw std::invalid_argument("conv1d: bias shape does not match spec");
}

} // namespace

void ConvSpec::validate() const {
    if (in_channels <= 0 || out_channels <= 0) throw std::invalid_argument("ConvSpec: channels must be positive");
    if (kernel <= 0) throw std::invalid_argument("ConvSpec: kernel must be positive");
    if (stride <= 0) throw std::invalid_argument("ConvSpec: stride must be positive");
    if (padding < 0) throw std::invalid_argument("ConvSpec: padding must be non-negative");
    if (dilation <= 0) throw std::invalid_argument("ConvSpec: dilation must be positive");
}

int ConvSpec::out_len(int in_len) const {
    return (in_len + 2 * padding - dilation * (kernel - 1) - 1) / stride + 1;
}

int ConvSpec::tconv_out_len(int in_len) const {
    return (in_len - 1) * stride - 2 * padding + dilation * (kernel - 1) + 1;
}

SeqMap conv1d_forward(const SeqMap& x, const Tensor& w, const Tensor& b, const ConvSpec& spec) {
    check_conv_args(x, w, b, spec, false);
    const int l_out = spec.out_len(x.length);
    if (l_out <= 0) throw std::invalid_argument("conv1d: non-positive output length");

    SeqMap y(spec.out_channels, l_out);
    const int k = spec.kernel, s = spec.stride, d = spec.dilation, p = spec.padding;
    for (int co = 0; co < spec.out_channels; ++co) {
        double* yrow = y.row(co);
        std::fill(yrow, yrow + l_out, b[co]);
        for (int ci = 0; ci < spec.in_channels; ++ci) {
            const double* xrow = x.row(ci);
            const double* wrow = &w.v[(static_cast<size_t>(co) * spec.in_channels + ci) * k];
            for (int j = 0; j < k; ++j) {
                const double wv = wrow[j];
                if (wv == 0.0) continue;
                const int base = j * d - p;
                const int t_lo = std::max(0, ceil_div(-base, s));
                const int t_hi = std::min(l_out - 1, floor_div(x.length - 1 - base, s));
                for (int t = t_lo; t <= t_hi; ++t) yrow[t] += wv * xrow[t * s + base];
            }
        }
    }
    return y;
}

ConvGrads conv1d_backward(const SeqMap& x, const Tensor& w, const ConvSpec& spec, const SeqMap& grad_y) {
    Tensor dummy_b({spec.out_channels});
    check_conv_args(x, w, dummy_b, spec, false);
    const int l_out = spec.out_len(x.length);
    if (grad_y.channels != spec.out_channels || grad_y.length != l_out)
        throw std::invalid_argument("conv1d_backward: grad_y shape mismatch");

    ConvGrads g{SeqMap(spec.in_channels, x.length), Tensor(w.shape), Tensor({spec.out_channels})};
    const int k = spec.kernel, s = spec.stride, d = spec.dilation, p = spec.padding;
    for (int co = 0; co < spec.out_channels; ++co) {
        const double* gyrow = grad_y.row(co);
        double acc = 0.0;
        for (int t = 0; t < l_out; ++t) acc += gyrow[t];
        g.grad_b[co] = acc;
        for (int ci = 0; ci < spec.in_channels; ++ci) {
            const double* xrow = x.row(ci);
            double* gxrow = g.grad_x.row(ci);
            const size_t w_off = (static_cast<size_t>(co) * spec.in_channels + ci) * k;
            for (int j = 0; j < k; ++j) {
                const int base = j * d - p;
                const int t_lo = std::max(0, ceil_div(-base, s));
                const int t_hi = std::min(l_out - 1, floor_div(x.length - 1 - base, s));
                const double wv = w.v[w_off + j];
                double wg = 0.0;
                for (int t = t_lo; t <= t_hi; ++t) {
                    const double gy = gyrow[t];
                    wg += gy * xrow[t * s + base];
                    gxrow[t * s + base] += wv * gy;
                }
                g.grad_w.v[w_off + j] = wg;
            }
        }
    }
    return g;
}

PoolResult maxpool1d_forward(const SeqMap& x, int window, int stride, int padding) {
    if (window <= 0 || stride <= 0) throw std::invalid_argument("maxpool1d: window and stride must be positive");
    if (padding < 0 || padding >= window) throw std::invalid_argument("maxpool1d: padding must be in [0, window)");
    if (window > x.length + 2 * padding) throw std::invalid_argument("maxpool1d: window larger than input");
    const int l_out = (x.length + 2 * padding - window) / stride + 1;

    PoolResult r{SeqMap(x.channels, l_out), PoolIndices{x.channels, x.length, l_out, {}}};
    r.idx.argmax.resize(static_cast<size_t>(x.channels) * l_out);
    for (int c = 0; c < x.channels; ++c) {
        const double* xrow = x.row(c);
        double* yrow = r.y.row(c);
        int* irow = r.idx.argmax.data() + static_cast<size_t>(c) * l_out;
        for (int q = 0; q < l_out; ++q) {
            const int start = q * stride - padding;
            const int lo = std::max(0, start);
            const int hi = std::min(x.length, start + window);
            int best = lo;
            double bestv = xrow[lo];
            for (int t = lo + 1; t < hi; ++t) {
                if (xrow[t] > bestv) {
                    bestv = xrow[t];
                    best = t;
                }
            }
            yrow[q] = bestv;
            irow[q] = best;
        }
    }
    return r;
}

SeqMap maxpool1d_backward(const PoolIndices& idx, const SeqMap& grad_y) {
    if (grad_y.channels != idx.channels || grad_y.length != idx.out_len)
        throw std::invalid_argument("maxpool1d_backward: grad_y shape mismatch");
    SeqMap gx(idx.channels, idx.in_len);
    for (int c = 0; c < idx.channels; ++c) {
        const int* irow = idx.argmax.data() + static_cast<size_t>(c) * idx.out_len;
        const double* gyrow = grad_y.row(c);
        double* gxrow = gx.row(c);
        for (int q = 0; q < idx.out_len; ++q) {
            const int t = irow[q];
            if (t < 0 || t >= idx.in_len) throw std::invalid_argument("maxpool1d_backward: index out of range");
            gxrow[t] += gyrow[q];
        }
    }
    return gx;
}

SeqMap tconv1d_forward(const SeqMap& x, const Tensor& w, const Tensor& b, const ConvSpec& spec) {
    check_conv_args(x, w, b, spec, true);
    const int l_out = spec.tconv_out_len(x.length);
    if (l_out <= 0) throw std::invalid_argument("tconv1d: non-positive output length");

    SeqMap y(spec.in_channels, l_out);
    const int k = spec.kernel, s = spec.stride, d = spec.dilation, p = spec.padding;
    for (int ci = 0; ci < spec.in_channels; ++ci) {
        double* yrow = y.row(ci);
        std::fill(yrow, yrow + l_out, b[ci]);
    }
    for (int co = 0; co < spec.out_channels; ++co) {
        const double* xrow = x.row(co);
        for (int ci = 0; ci < spec.in_channels; ++ci) {
            double* yrow = y.row(ci);
            const double* wrow = &w.v[(static_cast<size_t>(co) * spec.in_channels + ci) * k];
            for (int j = 0; j < k; ++j) {
                const double wv = wrow[j];
                if (wv == 0.0) continue;
                const int base = j * d - p;
                const int t_lo = std::max(0, ceil_div(-base, s));
                const int t_hi = std::min(x.length - 1, floor_div(l_out - 1 - base, s));
                for (int t = t_lo; t <= t_hi; ++t) yrow[t * s + base] += wv * xrow[t];
            }
        }
    }
    return y;
}

TconvGrads tconv1d_backward(const SeqMap& x, const Tensor& w, const ConvSpec& spec, const SeqMap& grad_y) {
    Tensor dummy_b({spec.in_channels});
    check_conv_args(x, w, dummy_b, spec, true);
    const int l_out = spec.tconv_out_len(x.length);
    if (grad_y.channels != spec.in_channels || grad_y.length != l_out)
        throw std::invalid_argument("tconv1d_backward: grad_y shape mismatch");

    TconvGrads g{SeqMap(spec.out_channels, x.length), Tensor(w.shape), Tensor({spec.in_channels})};
    const int k = spec.kernel, s = spec.stride, d = spec.dilation, p = spec.padding;
    for (int ci = 0; ci < spec.in_channels; ++ci) {
        const double* gyrow = grad_y.row(ci);
        double acc = 0.0;
        for (int t = 0; t < l_out; ++t) acc += gyrow[t];
        g.grad_b[ci] = acc;
    }
    for (int co = 0; co < spec.out_channels; ++co) {
        const double* xrow = x.row(co);
        double* gxrow = g.grad_x.row(co);
        for (int ci = 0; ci < spec.in_channels; ++ci) {
            const double* gyrow = grad_y.row(ci);
            const size_t w_off = (static_cast<size_t>(co) * spec.in_channels + ci) * k;
            for (int j = 0; j < k; ++j) {
                const int base = j * d - p;
                const int t_lo = std::max(0, ceil_div(-base, s));
                const int t_hi = std::min(x.length - 1, floor_div(l_out - 1 - base, s));
                const double wv = w.v[w_off + j];
                double wg = 0.0;
                for (int t = t_lo; t <= t_hi; ++t) {
                    const double gy = gyrow[t * s + base];
                    wg += xrow[t] * gy;
                    gxrow[t] += wv * gy;
                }
                g.grad_w.v[w_off + j] = wg;
            }
        }
    }
    return g;
}

std::vector<SeqMap> batchnorm1d_forward(const std::vector<SeqMap>& xs, const Tensor& gamma, const Tensor& beta,
                                        Mode mode, Tensor& running_mean, Tensor& running_var,
                                        double& batches_seen, double momentum, double eps, BNCache* cache) {
    if (xs.empty()) throw std::invalid_argument("batchnorm1d: empty batch");
    const int c = xs[0].channels;
    for (const SeqMap& x : xs)
        if (x.channels != c) throw std::invalid_argument("batchnorm1d: inconsistent channel counts in batch");
    if (gamma.shape != std::vector<int>{c} || beta.shape != std::vector<int>{c} ||
        running_mean.shape != std::vector<int>{c} || running_var.shape != std::vector<int>{c})
        throw std::invalid_argument("batchnorm1d: parameter shape mismatch");
    if (eps < 0.0) throw std::invalid_argument("batchnorm1d: eps must be non-negative");

    std::vector<double> mean(c, 0.0), var(c, 0.0);
    if (mode == Mode::Train) {
        size_t n = 0;
        for (const SeqMap& x : xs) n += static_cast<size_t>(x.length);
        for (int ch = 0; ch < c; ++ch) {
            double s = 0.0;
            for (const SeqMap& x : xs) {
                const double* row = x.row(ch);
                for (int t = 0; t < x.length; ++t) s += row[t];
            }
            mean[ch] = s / static_cast<double>(n);
            double s2 = 0.0;
            for (const SeqMap& x : xs) {
                const double* row = x.row(ch);
                for (int t = 0; t < x.length; ++t) {
                    const double dlt = row[t] - mean[ch];
                    s2 += dlt * dlt;
                }
            }
            var[ch] = s2 / static_cast<double>(n);
            running_mean[ch] = (1.0 - momentum) * running_mean[ch] + momentum * mean[ch];
            running_var[ch] = (1.0 - momentum) * running_var[ch] + momentum * var[ch];
        }
        batches_seen += 1.0;
    } else {
        if (batches_seen <= 0.0)
            throw std::logic_error("batchnorm1d: eval mode requested before any running statistics exist");
        for (int ch = 0; ch < c; ++ch) {
            mean[ch] = running_mean[ch];
            var[ch] = running_var[ch];
        }
    }

    std::vector<double> invstd(c);
    for (int ch = 0; ch < c; ++ch) invstd[ch] = 1.0 / std::sqrt(var[ch] + eps);

    std::vector<SeqMap> ys;
    ys.reserve(xs.size());
    if (cache) {
        cache->mode = mode;
        cache->mean = mean;
        cache->invstd = invstd;
        cache->xhat.clear();
        cache->xhat.reserve(xs.size());
    }
    for (const SeqMap& x : xs) {
        SeqMap y(x.channels, x.length);
        SeqMap xhat(x.channels, x.length);
        for (int ch = 0; ch < c; ++ch) {
            const double* row = x.row(ch);
            double* yrow = y.row(ch);
            double* hrow = xhat.row(ch);
            const double m = mean[ch], is = invstd[ch], g = gamma[ch], bt = beta[ch];
            for (int t = 0; t < x.length; ++t) {
                const double h = (row[t] - m) * is;
                hrow[t] = h;
                yrow[t] = g * h + bt;
            }
        }
        if (cache) cache->xhat.push_back(std::move(xhat));
        ys.push_back(std::move(y));
    }
    return ys;
}

BNGrads batchnorm1d_backward(const BNCache& cache, const Tensor& gamma, const std::vector<SeqMap>& grad_ys) {
    if (grad_ys.size() != cache.xhat.size())
        throw std::invalid_argument("batchnorm1d_backward: batch size mismatch");
    const int c = gamma.shape.at(0);
    BNGrads g;
    g.grad_gamma = Tensor({c});
    g.grad_beta = Tensor({c});
    size_t n = 0;
    for (size_t i = 0; i < grad_ys.size(); ++i) {
        if (grad_ys[i].channels != c || grad_ys[i].length != cache.xhat[i].length)
            throw std::invalid_argument("batchnorm1d_backward: grad shape mismatch");
        n += static_cast<size_t>(grad_ys[i].length);
    }

    std::vector<double> s1(c, 0.0), s2(c, 0.0);
    for (size_t i = 0; i < grad_ys.size(); ++i) {
        for (int ch = 0; ch < c; ++ch) {
            const double* gy = grad_ys[i].row(ch);
            const double* h = cache.xhat[i].row(ch);
            double a = 0.0, b2 = 0.0;
            for (int t = 0; t < grad_ys[i].length; ++t) {
                a += gy[t];
                b2 += gy[t] * h[t];
            }
            s1[ch] += a;
            s2[ch] += b2;
        }
    }
    for (int ch = 0; ch < c; ++ch) {
        g.grad_beta[ch] = s1[ch];
        g.grad_gamma[ch] = s2[ch];
    }

    g.grad_x.reserve(grad_ys.size());
    const double inv_n = 1.0 / static_cast<double>(n);
    for (size_t i = 0; i < grad_ys.size(); ++i) {
        SeqMap gx(c, grad_ys[i].length);
        for (int ch = 0; ch < c; ++ch) {
            const double* gy = grad_ys[i].row(ch);
            const double* h = cache.xhat[i].row(ch);
            double* out = gx.row(ch);
            const double scale = gamma[ch] * cache.invstd[ch];
            if (cache.mode == Mode::Train) {
                const double m1 = s1[ch] * inv_n, m2 = s2[ch] * inv_n;
                for (int t = 0; t < grad_ys[i].length; ++t) out[t] = scale * (gy[t] - m1 - h[t] * m2);
            } else {
                for (int t = 0; t < grad_ys[i].length; ++t) out[t] = scale * gy[t];
            }
        }
        g.grad_x.push_back(std::move(gx));
    }
    return g;
}

SeqMap relu(const SeqMap& x) {
    SeqMap y = x;
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    return y;
}

SeqMap relu_backward(const SeqMap& x, const SeqMap& grad_y) {
    if (x.channels != grad_y.channels || x.length != grad_y.length)
        throw std::invalid_argument("relu_backward: shape mismatch");
    SeqMap gx(x.channels, x.length);
    for (size_t i = 0; i < x.data.size(); ++i) gx.data[i] = x.data[i] > 0.0 ? grad_y.data[i] : 0.0;
    return gx;
}

DropoutResult dropout(const SeqMap& x, double rate, uint64_t seed, Mode mode) {
    if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0, 1)");
    DropoutResult r{x, SeqMap(x.channels, x.length)};
    if (mode == Mode::Eval || rate == 0.0) {
        std::fill(r.mask.data.begin(), r.mask.data.end(), 1.0);
        return r;
    }
    std::mt19937_64 rng(seed);
    const double scale = 1.0 / (1.0 - rate);
    for (size_t i = 0; i < x.data.size(); ++i) {
        const double m = uniform_unit(rng) >= rate ? scale : 0.0;
        r.mask.data[i] = m;
        r.y.data[i] = x.data[i] * m;
    }
    return r;
}

SeqMap dropout_backward(const SeqMap& mask, const SeqMap& grad_y) {
    if (mask.channels != grad_y.channels || mask.length != grad_y.length)
        throw std::invalid_argument("dropout_backward: shape mismatch");
    SeqMap gx(grad_y.channels, grad_y.length);
    for (size_t i = 0; i < gx.data.size(); ++i) gx.data[i] = grad_y.data[i] * mask.data[i];
    return gx;
}

SeqMap elementwise_add(const SeqMap& a, const SeqMap& b) {
    if (a.channels != b.channels || a.length != b.length)
        throw std::invalid_argument("elementwise_add: shape mismatch");
    SeqMap y = a;
    for (size_t i = 0; i < y.data.size(); ++i) y.data[i] += b.data[i];
    return y;
}

namespace {

struct LerpCoef {
    int i0, i1;
    double frac;
};

std::vector<LerpCoef> upsample_coefs(int in_len, int factor) {
    const int l_out = in_len * factor;
    std::vector<LerpCoef> cs(l_out);
    if (in_len == 1) {
        for (int t = 0; t < l_out; ++t) cs[t] = {0, 0, 0.0};
        return cs;
    }
    const double scale = static_cast<double>(in_len - 1) / static_cast<double>(l_out - 1);
    for (int t = 0; t < l_out; ++t) {
        const double pos = t * scale;
        int i0 = static_cast<int>(pos);
        if (i0 > in_len - 2) i0 = in_len - 2;
        cs[t] = {i0, i0 + 1, pos - i0};
    }
    return cs;
}

} // namespace

SeqMap bilinear_upsample1d(const SeqMap& x, int factor) {
    if (factor < 1) throw std::invalid_argument("bilinear_upsample1d: factor must be >= 1");
    const auto cs = upsample_coefs(x.length, factor);
    SeqMap y(x.channels, x.length * factor);
    for (int c = 0; c < x.channels; ++c) {
        const double* xrow = x.row(c);
        double* yrow = y.row(c);
        for (size_t t = 0; t < cs.size(); ++t)
            yrow[t] = (1.0 - cs[t].frac) * xrow[cs[t].i0] + cs[t].frac * xrow[cs[t].i1];
    }
    return y;
}

SeqMap bilinear_upsample1d_backward(const SeqMap& grad_y, int in_len, int factor) {
    if (factor < 1) throw std::invalid_argument("bilinear_upsample1d: factor must be >= 1");
    if (grad_y.length != in_len * factor)
        throw std::invalid_argument("bilinear_upsample1d_backward: grad length mismatch");
    const auto cs = upsample_coefs(in_len, factor);
    SeqMap gx(grad_y.channels, in_len);
    for (int c = 0; c < grad_y.channels; ++c) {
        const double* gyrow = grad_y.row(c);
        double* gxrow = gx.row(c);
        for (size_t t = 0; t < cs.size(); ++t) {
            gxrow[cs[t].i0] += (1.0 - cs[t].frac) * gyrow[t];
            gxrow[cs[t].i1] += cs[t].frac * gyrow[t];
        }
    }
    return gx;
}

} // namespace fcsn
