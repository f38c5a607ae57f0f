#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fcsn/tensor.hpp"

namespace fcsn {

enum class Mode { Train, Eval };

/// Geometry of a 1D convolution. For the transposed op the spec is read in the
/// convolution direction: tconv maps out_channels -> in_channels.
struct ConvSpec {
    int in_channels = 1;
    int out_channels = 1;
    int kernel = 1;
    int stride = 1;
    int padding = 0;
    int dilation = 1;

    void validate() const;
    int out_len(int in_len) const;       // floor((L + 2p - d(k-1) - 1)/s) + 1
    int tconv_out_len(int in_len) const; // (L-1)s - 2p + d(k-1) + 1
};

// ---- convolution ----

SeqMap conv1d_forward(const SeqMap& x, const Tensor& w, const Tensor& b, const ConvSpec& spec);

struct ConvGrads {
    SeqMap grad_x;
    Tensor grad_w;
    Tensor grad_b;
};
ConvGrads conv1d_backward(const SeqMap& x, const Tensor& w, const ConvSpec& spec, const SeqMap& grad_y);

// ---- max pooling ----

struct PoolIndices {
    int channels = 0;
    int in_len = 0;
    int out_len = 0;
    std::vector<int> argmax; // [channels][out_len], input time index of each window max
};

struct PoolResult {
    SeqMap y;
    PoolIndices idx;
};
/// First-occurrence tie break. `padding` extends the scan range without
/// contributing candidates (padded slots are absent, not -inf values).
PoolResult maxpool1d_forward(const SeqMap& x, int window, int stride, int padding = 0);
SeqMap maxpool1d_backward(const PoolIndices& idx, const SeqMap& grad_y);

// ---- transposed convolution ----

SeqMap tconv1d_forward(const SeqMap& x, const Tensor& w, const Tensor& b, const ConvSpec& spec);

struct TconvGrads {
    SeqMap grad_x;
    Tensor grad_w;
    Tensor grad_b;
};
TconvGrads tconv1d_backward(const SeqMap& x, const Tensor& w, const ConvSpec& spec, const SeqMap& grad_y);

// ---- batch normalization ----

struct BNCache {
    Mode mode = Mode::Train;
    std::vector<double> mean;   // per channel, as used for normalization
    std::vector<double> invstd;
    std::vector<SeqMap> xhat;
};

/// Statistics are taken per channel over every sample and time position of the
/// batch (biased variance). Train mode folds them into the running stats:
/// r <- (1-momentum)*r + momentum*batch_stat.
std::vector<SeqMap> batchnorm1d_forward(const std::vector<SeqMap>& xs, const Tensor& gamma, const Tensor& beta,
                                        Mode mode, Tensor& running_mean, Tensor& running_var,
                                        double& batches_seen, double momentum, double eps, BNCache* cache);

struct BNGrads {
    std::vector<SeqMap> grad_x;
    Tensor grad_gamma;
    Tensor grad_beta;
};
BNGrads batchnorm1d_backward(const BNCache& cache, const Tensor& gamma, const std::vector<SeqMap>& grad_ys);

// ---- pointwise ops ----

SeqMap relu(const SeqMap& x);
SeqMap relu_backward(const SeqMap& x, const SeqMap& grad_y);

struct DropoutResult {
    SeqMap y;
    SeqMap mask; // 0 or 1/(1-rate); all ones in eval mode
};
/// Inverted dropout: survivors are scaled by 1/(1-rate) at train time, eval is identity.
DropoutResult dropout(const SeqMap& x, double rate, uint64_t seed, Mode mode);
SeqMap dropout_backward(const SeqMap& mask, const SeqMap& grad_y);

SeqMap elementwise_add(const SeqMap& a, const SeqMap& b);

// ---- bilinear upsampling ----

/// Linear interpolation with the output endpoints pinned to the first/last
/// input sample centers; exact on linear ramps.
SeqMap bilinear_upsample1d(const SeqMap& x, int factor);
SeqMap bilinear_upsample1d_backward(const SeqMap& grad_y, int in_len, int factor);

// ---- finite-difference gradient checking ----

struct GradCheckGroup {
    std::string name;
    double* values = nullptr;      // parameter storage, perturbed in place
    const double* grads = nullptr; // analytic gradients for the same storage
    size_t count = 0;
};

struct GroupReport {
    std::string name;
    double max_rel_err = 0.0;
    size_t checked = 0;
    bool pass = true;
};

struct GradCheckReport {
    std::vector<GroupReport> groups;
    double step = 0.0;
    double tolerance = 0.0;
    bool pass = true;

    double max_rel_err() const;
    std::string summary() const;
};

/// Compares analytic gradients against central finite differences of `loss_fn`.
/// `backward_fn` must populate every group's gradient storage once; `loss_fn`
/// must be a pure forward evaluation. `samples_per_group` = 0 checks every
/// entry, otherwise a seeded subsample per group.
GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::function<void()>& backward_fn,
                           const std::vector<GradCheckGroup>& groups,
                           double step, double tolerance,
                           int samples_per_group = 0, uint64_t seed = 0);

} // namespace fcsn
