#include "fcsn/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fcsn/errors.hpp"

namespace fcsn {

ClassWeights class_weights(const std::vector<LabelSequence>& corpus_labels) {
    if (corpus_labels.empty()) throw std::invalid_argument("class_weights: empty corpus");
    size_t count[2] = {0, 0};
    size_t frames_where_present[2] = {0, 0};
    for (const LabelSequence& labels : corpus_labels) {
        size_t local[2] = {0, 0};
        for (uint8_t l : labels) {
            if (l > 1) throw std::invalid_argument("class_weights: label outside {0,1}");
            ++local[l];
        }
        for (int c = 0; c < 2; ++c) {
            count[c] += local[c];
            if (local[c] > 0) frames_where_present[c] += labels.size();
        }
    }
    for (int c = 0; c < 2; ++c)
        if (count[c] == 0)
            throw DataError("class_weights: class " + std::to_string(c) + " absent from the entire corpus");

    const double freq0 = static_cast<double>(count[0]) / static_cast<double>(frames_where_present[0]);
    const double freq1 = static_cast<double>(count[1]) / static_cast<double>(frames_where_present[1]);
    const double median = 0.5 * (freq0 + freq1); // median of two values
    return ClassWeights{median / freq0, median / freq1};
}

LossValue l_sum(const SeqMap& scores, const LabelSequence& labels, const ClassWeights& weights) {
    if (scores.channels != 2) throw std::invalid_argument("l_sum: scores must have 2 channels");
    if (static_cast<size_t>(scores.length) != labels.size())
        throw std::invalid_argument("l_sum: length mismatch between scores and labels");

    const int t_len = scores.length;
    LossValue out;
    out.grad = SeqMap(2, t_len);
    const double* s0 = scores.row(0);
    const double* s1 = scores.row(1);
    double* g0 = out.grad.row(0);
    double* g1 = out.grad.row(1);
    const double inv_t = 1.0 / static_cast<double>(t_len);

    double total = 0.0;
    for (int t = 0; t < t_len; ++t) {
        const uint8_t c = labels[t];
        if (c > 1) throw std::invalid_argument("l_sum: label outside {0,1}");
        const double w = c == 1 ? weights.w1 : weights.w0;
        const double m = std::max(s0[t], s1[t]);
        const double e0 = std::exp(s0[t] - m);
        const double e1 = std::exp(s1[t] - m);
        const double z = e0 + e1;
        const double lse = m + std::log(z);
        const double correct = c == 1 ? s1[t] : s0[t];
        total += w * (lse - correct);
        const double p0 = e0 / z;
        const double p1 = e1 / z;
        g0[t] = w * (p0 - (c == 0 ? 1.0 : 0.0)) * inv_t;
        g1[t] = w * (p1 - (c == 1 ? 1.0 : 0.0)) * inv_t;
    }
    out.value = total * inv_t;
    return out;
}

std::vector<int> select_keyframes(const SeqMap& scores, int y_count) {
    if (scores.channels != 2) throw std::invalid_argument("select_keyframes: scores must have 2 channels");
    if (y_count < 1 || y_count > scores.length)
        throw std::invalid_argument("select_keyframes: Y out of range [1, T]");

    // The keyframe probability is monotone in the score margin, so ranking by
    // margin gives the same order with exact tie behavior.
    const double* s0 = scores.row(0);
    const double* s1 = scores.row(1);
    std::vector<int> order(scores.length);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ma = s1[a] - s0[a];
        const double mb = s1[b] - s0[b];
        if (ma != mb) return ma > mb;
        return a < b;
    });
    order.resize(y_count);
    std::sort(order.begin(), order.end());
    return order;
}

int default_keyframe_count(int t) {
    return std::max(2, static_cast<int>(std::floor(0.15 * t + 0.5)));
}

LossValue l_div(const SeqMap& f) {
    const int d = f.channels, y = f.length;
    LossValue out;
    out.grad = SeqMap(d, y);
    if (y < 2) return out;

    std::vector<double> norm(y);
    for (int t = 0; t < y; ++t) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += f.at(k, t) * f.at(k, t);
        norm[t] = std::sqrt(s);
        if (norm[t] == 0.0) throw std::invalid_argument("l_div: zero-norm feature row");
    }

    const double scale = 1.0 / (static_cast<double>(y) * (y - 1));
    double total = 0.0;
    for (int t = 0; t < y; ++t) {
        for (int u = 0; u < y; ++u) {
            if (u == t) continue;
            double dot = 0.0;
            for (int k = 0; k < d; ++k) dot += f.at(k, t) * f.at(k, u);
            const double cos = dot / (norm[t] * norm[u]);
            total += cos;
            // d cos / d f_t for the ordered pair (t, u); the (u, t) pair covers f_u.
            const double a = 1.0 / (norm[t] * norm[u]);
            const double b = cos / (norm[t] * norm[t]);
            for (int k = 0; k < d; ++k) out.grad.at(k, t) += scale * (a * f.at(k, u) - b * f.at(k, t));
        }
    }
    out.value = total * scale;
    return out;
}

LossValue l_recon(const SeqMap& f, const SeqMap& x_sel) {
    if (f.channels != x_sel.channels || f.length != x_sel.length)
        throw std::invalid_argument("l_recon: shape mismatch");
    LossValue out;
    out.grad = SeqMap(f.channels, f.length);
    const double inv_n = 1.0 / static_cast<double>(f.size());
    double total = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
        const double diff = f.data[i] - x_sel.data[i];
        total += diff * diff;
        out.grad.data[i] = 2.0 * diff * inv_n;
    }
    out.value = total * inv_n;
    return out;
}

LossValue l_unsup(const SeqMap& f, const SeqMap& x_sel, double div_weight) {
    LossValue div = l_div(f);
    LossValue rec = l_recon(f, x_sel);
    LossValue out;
    out.value = div_weight * div.value + rec.value;
    out.grad = SeqMap(f.channels, f.length);
    for (size_t i = 0; i < out.grad.size(); ++i) out.grad.data[i] = div_weight * div.grad.data[i] + rec.grad.data[i];
    return out;
}

} // namespace fcsn
