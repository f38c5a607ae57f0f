#pragma once

#include <cstdint>
#include <vector>

#include "fcsn/tensor.hpp"

namespace fcsn {

using LabelSequence = std::vector<uint8_t>;

/// Median-frequency balancing weights for the two classes (background, keyframe).
struct ClassWeights {
    double w0 = 1.0;
    double w1 = 1.0;
};

/// Scalar loss plus its gradient with respect to the differentiated argument.
/// For l_sum the gradient is wrt the 2xT score map; for the feature losses it
/// is wrt the DxY reconstructed-feature map.
struct LossValue {
    double value = 0.0;
    SeqMap grad;
};

/// freq_c = (#frames labeled c) / (total frames of videos where c is present),
/// weight_c = median_freq / freq_c. Computed once over the training corpus.
ClassWeights class_weights(const std::vector<LabelSequence>& corpus_labels);

/// Class-balanced softmax cross-entropy over frames. `scores` is 2xT
/// (channel = class), labels are per-frame 0/1.
LossValue l_sum(const SeqMap& scores, const LabelSequence& labels, const ClassWeights& weights);

/// Indices of the y_count frames with the largest keyframe probability,
/// ties to the lower index, returned sorted ascending.
std::vector<int> select_keyframes(const SeqMap& scores, int y_count);

/// Default selection size: max(2, round(0.15 * t)).
int default_keyframe_count(int t);

/// Mean pairwise cosine similarity over ordered pairs of the DxY feature
/// columns; 0 when fewer than two columns.
LossValue l_div(const SeqMap& f);

/// Mean squared error between reconstructed and input features (both DxY).
LossValue l_recon(const SeqMap& f, const SeqMap& x_sel);

/// div_weight * l_div + l_recon.
LossValue l_unsup(const SeqMap& f, const SeqMap& x_sel, double div_weight = 1.0);

} // namespace fcsn
