#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fcsn/objective.hpp"
#include "fcsn/tensor.hpp"

namespace fcsn {

/// Partition of [0, T) into contiguous intervals via strictly increasing
/// interior change points.
struct Segmentation {
    int total_length = 0;
    std::vector<int> change_points; // each in (0, total_length)

    int num_intervals() const { return static_cast<int>(change_points.size()) + 1; }
    std::pair<int, int> interval(int i) const {
        const int begin = i == 0 ? 0 : change_points[i - 1];
        const int end = i == num_intervals() - 1 ? total_length : change_points[i];
        return {begin, end};
    }
    void validate() const;
};

/// Binary keyshot selection vector. `fallback_used` marks summaries produced
/// by the oversized-interval fallback rather than a clean knapsack solution.
struct Summary {
    std::vector<uint8_t> selection;
    bool fallback_used = false;

    int total_selected() const {
        int n = 0;
        for (uint8_t s : selection) n += s;
        return n;
    }
};

struct Budget {
    double fraction = 0.15;

    int capacity(int t) const;
};

struct KtsParams {
    double penalty = 1.0;
    int max_segments = -1; // -1: min(T-1, T/10 + 5)
};

/// Kernel temporal segmentation with a linear (dot-product) kernel.
/// Within-segment cost of [a,b) is sum_i K_ii - (1/(b-a)) sum_ij K_ij; the
/// optimal m change points for each m <= max_segments come from a dynamic
/// program, and the returned m minimizes cost(m) + penalty*m*(log(T/m)+1).
Segmentation kts_segment(const FeatureMatrix& features, int max_segments, double penalty);

/// Exact 0/1 knapsack. Among equal-value optima prefers smaller total weight,
/// then the lexicographically smallest index set. Returns sorted indices.
std::vector<int> knapsack_select(const std::vector<double>& values, const std::vector<int>& weights, int capacity);

/// Keyshot summary from frame scores: knapsack over intervals with summed
/// frame score as value and interval length as weight.
Summary scores_to_keyshot_summary(const std::vector<double>& scores, const Segmentation& seg, Budget budget);

/// One keyframe per selected interval at its highest-scoring frame.
LabelSequence keyshots_to_keyframes(const Summary& summary, const std::vector<double>& scores,
                                    const Segmentation& seg);

/// Keyshots from keyframes: knapsack over keyframe-bearing intervals with
/// keyframe density as value and length as weight. When no such interval fits
/// the budget the densest one is trimmed to capacity around its first
/// keyframe and the result is flagged.
Summary keyframes_to_keyshots(const LabelSequence& keyframes, const Segmentation& seg, Budget budget);

/// Full prediction path: per-frame argmax to keyframes (class 1 wins ties),
/// KTS on the features, then keyframes_to_keyshots.
Summary predict_summary(const SeqMap& scores, const FeatureMatrix& features, Budget budget, KtsParams kts);

} // namespace fcsn
