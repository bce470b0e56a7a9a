#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stav/ops.hpp"
#include "stav/profile.hpp"
#include "stav/video.hpp"

namespace stav {

// One temporal-segment sub-network:
//   layer1: c1 kernel groups, one 3-D kernel per input channel; the per-channel
//           responses and biases are summed before the tanh.
//   layer2: c1*c2 3-D kernels; kernel (i1, i2) lives at i1*c2 + i2 and is
//           applied to pooled map set i1 only.
//   layer3: (c1*c2)*c3 2-D kernels; kernel (s, k) lives at s*c3 + k and runs
//           over every temporal slice of pooled set s.
struct SubNetworkParams {
    std::vector<std::vector<ConvKernel3D>> layer1;
    std::vector<ConvKernel3D> layer2;
    std::vector<ConvKernel2D> layer3;
};

struct Classifier {
    std::vector<double> w;
    double b = 0.0;
};

struct ModelParams {
    ArchProfile profile;
    double dropout_rate = 0.0;  // also scales eval-mode activations by (1 - rate)
    std::vector<SubNetworkParams> subnets;  // one per segment
    Tensor fc_w;                            // (fc_out, concat_width)
    std::vector<double> fc_b;
    std::vector<Classifier> classifiers;    // one-vs-rest, one per class

    int classes() const { return static_cast<int>(classifiers.size()); }
    void validate() const;
};

enum class ParamGroup { conv, fc, classifier };

struct ParamRef {
    ParamGroup group;
    double* p;
};
// Every trainable scalar in declaration order: per subnet (layer1 kernel
// weights then bias, channel by channel; layer2; layer3), then fc weights and
// bias, then classifiers. Checkpoints, SGD updates, and finite-difference
// sweeps all walk this same order.
std::vector<ParamRef> param_refs(ModelParams& p);

// Zero-filled parameter block with the shapes the profile dictates.
ModelParams alloc_params(const ArchProfile& profile, int classes);
// Weights drawn uniform [-r, r], r = sqrt(6 / (fan_in + fan_out)) per layer;
// biases and classifiers start at zero.
ModelParams init_params(const ArchProfile& profile, int classes, std::uint64_t seed);
ModelParams zeros_like(const ModelParams& p);

enum class RunMode { train, eval };

struct ForwardOptions {
    RunMode mode = RunMode::eval;
    std::uint64_t dropout_seed = 0;  // used only in train mode
};

struct SubnetCache {
    std::vector<Tensor> input;                 // per channel, (h, w, m)
    std::vector<Tensor> l1;                    // c1 activations
    std::vector<PoolResult> pool1;             // c1
    std::vector<Tensor> l2;                    // c1*c2 activations
    std::vector<PoolResult> pool2;             // c1*c2
    std::vector<std::vector<Tensor>> slices;   // [set][slice] inputs to layer3
    std::vector<Tensor> l3;                    // [(set*c3 + k)*slices + t]
};

struct ForwardCache {
    std::vector<SubnetCache> subnets;
    std::vector<double> concat;       // post dropout / eval scaling
    std::vector<std::uint8_t> mask;   // empty in eval mode
    std::vector<double> feature;
    RunMode mode = RunMode::eval;
};

// Per-channel (h, w, m) stacks for segment j of assignment h.
std::vector<Tensor> gather_segment(const VideoSample& x, const ArchProfile& prof,
                                   const std::vector<int>& anchor_frames,
                                   const LatentAssignment& h, int j);

// channels: one (h, w, m) tensor per input channel. Output ordering: map set
// major, then 2-D kernel, then temporal slice (then spatial position when the
// final maps exceed 1x1).
std::vector<double> forward_subnet(const std::vector<Tensor>& channels,
                                   const SubNetworkParams& sp, const ArchProfile& prof,
                                   SubnetCache* cache = nullptr);

// phi(x; omega, h). Counts one evaluation per call (see forward_full_calls).
// The clip must carry at least the profile's channel count; extra trailing
// channels are ignored, so a gray-only profile accepts gray+depth clips.
std::vector<double> forward_full(const VideoSample& x, const LatentAssignment& h,
                                 const ModelParams& p, const ForwardOptions& opt,
                                 ForwardCache* cache = nullptr);

// Gradients of the network parameters for upstream d(loss)/d(feature);
// classifier entries of the result stay zero. Requires the cache produced by
// the matching forward_full call.
ModelParams backward_full(const ModelParams& p, const ForwardCache& cache,
                          std::span<const double> g_feature);

// w_c . z + b_c for every class; best_class is the argmax, lowest index wins ties.
struct ScoreResult {
    std::vector<double> scores;
    int best_class = 0;
};
ScoreResult score_feature(std::span<const double> feature,
                          const std::vector<Classifier>& classifiers);

std::uint64_t forward_full_calls();
void reset_forward_full_calls();

// Pre-training helpers: copy each first-channel 3-D kernel over the remaining
// channels, and redraw the fully connected stage from a fresh seed.
void duplicate_first_channel(ModelParams& p);
void rerandomize_fc(ModelParams& p, std::uint64_t seed);

}  // namespace stav
