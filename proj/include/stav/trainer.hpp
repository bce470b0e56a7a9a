#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stav/loss.hpp"
#include "stav/net.hpp"
#include "stav/video.hpp"

namespace stav {

// Alternating trainer: an assignment step fixes the latent segmentations at
// the ones currently scored best for the true class, then several epochs of
// mini-batch gradient descent lower the radius-margin objective at those
// fixed assignments. One-vs-rest classifiers share the network features; the
// radius term is counted once over the shared features, the margin and hinge
// terms once per class.
struct TrainConfig {
    LossConfig loss;
    double lr_classifier = 1e-2;
    double lr_cnn = 1e-3;
    int batch_size = 16;
    int inner_epochs = 5;
    int max_outer_iters = 50;
    double tol = 1e-4;  // relative objective change; +inf forces a single outer iteration
    double dropout = 0.0;
    int threads = 0;  // 0 = hardware concurrency
    std::uint64_t seed = 1;
    std::filesystem::path checkpoint_dir;  // empty: skip per-iteration checkpoints
};

struct LossRow {
    int iteration = 0;  // 0 = initial state
    double objective = 0.0;
    double hinge = 0.0;
    double radius = 0.0;
    double train_accuracy = 0.0;
};

// Summed true-class squared hinge immediately before/after one assignment
// step, both at the same (current) parameters. The step maximises each
// sample's true-class score, so `after <= before` always.
struct EStepTrace {
    double hinge_before = 0.0;
    double hinge_after = 0.0;
};

struct TrainResult {
    ModelParams params;                    // parameters with the best objective seen
    std::vector<LatentAssignment> latents; // final assignments
    std::vector<LossRow> history;          // row 0 plus one row per outer iteration
    std::vector<EStepTrace> estep_trace;   // one entry per assignment step after the first
    int outer_iterations = 0;
};

// Assignment step: per sample, the admissible assignment maximising the
// true-class score w_y . phi + b_y in eval mode; ties keep the
// lexicographically first assignment. Deterministic for any thread count.
std::vector<LatentAssignment> estimate_latents(const std::vector<VideoSample>& samples,
                                               const ModelParams& params, int threads,
                                               const std::vector<LatentAssignment>* previous = nullptr,
                                               EStepTrace* trace = nullptr);

// One simultaneous update on a batch: train-mode forwards, closed-form
// classifier gradients, feature gradients with the batch mean frozen at
// phi_bar, backpropagation through the network. `dropout_counter` labels each
// forward's dropout stream; returns the counter advanced past the batch.
// Throws train_error on a non-finite gradient.
std::uint64_t sgd_step(const std::vector<VideoSample>& samples,
                       const std::vector<LatentAssignment>& latents,
                       const std::vector<std::size_t>& batch, ModelParams& params,
                       const std::vector<double>& phi_bar, const TrainConfig& cfg,
                       double lr_classifier, double lr_cnn, std::uint64_t dropout_counter);

struct ObjectiveBreakdown {
    double objective = 0.0;
    double hinge = 0.0;       // lambda-weighted, summed over classes
    double radius = 0.0;      // eta-weighted, counted once
    double regularizer = 0.0; // sum of 1/2 |w_c|^2
    double accuracy = 0.0;    // argmax over class scores at the given latents
};
ObjectiveBreakdown objective_eval(const std::vector<VideoSample>& samples,
                                  const std::vector<LatentAssignment>& latents,
                                  const ModelParams& params, const LossConfig& loss,
                                  int threads);

// Eval-mode features of every sample at its assignment.
Features features_eval(const std::vector<VideoSample>& samples,
                       const std::vector<LatentAssignment>& latents, const ModelParams& params,
                       int threads);

TrainResult train_from(const std::vector<VideoSample>& samples, ModelParams initial,
                       const TrainConfig& cfg);
TrainResult train(const std::vector<VideoSample>& samples, const ArchProfile& profile,
                  int classes, const TrainConfig& cfg);

// "iteration,objective,hinge,radius,train_accuracy" rows.
std::string history_csv(const std::vector<LossRow>& history);

std::vector<double> softmax(const std::vector<double>& scores);

struct PretrainConfig {
    double lr = 1e-3;
    int epochs = 10;
    int batch_size = 16;
    int threads = 0;
    std::uint64_t seed = 1;
};

struct PretrainResult {
    ModelParams params;
    std::vector<double> ce_history;  // mean cross-entropy per epoch
};

// Cross-entropy pre-training at the fixed near-equal segmentation. The
// profile is typically the gray-only reduction of the target profile; clips
// with extra channels contribute their first plane.
PretrainResult pretrain_softmax(const std::vector<VideoSample>& samples,
                                const ArchProfile& profile, int classes,
                                const PretrainConfig& cfg);

// Expands a pre-trained model to `target` (same architecture, more input
// channels): layer-1 kernels are copied to every channel, deeper layers and
// the fully connected stage carry over, classifiers start at zero.
ModelParams expand_pretrained(const ModelParams& mono, const ArchProfile& target, int classes);

}  // namespace stav
