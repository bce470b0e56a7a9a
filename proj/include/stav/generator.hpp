#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stav/dataset.hpp"
#include "stav/profile.hpp"
#include "stav/segmentation.hpp"
#include "stav/video.hpp"

namespace stav {

// Synthetic activity clips with planted segment boundaries. A class is an
// ordered sequence of motifs, one per segment; the motif vocabulary is a
// bright comet-shaped blob sweeping vertically down the frame (motif 0) or up
// (motif 1) on a wrap-around axis, covering one full wrap per segment from a
// random per-segment starting height. The comet's dim tail trails opposite
// the motion, so direction is locally readable, and the same moving pattern
// appears at every height, which keeps it translation-invariant. Classes are
// distinct orderings of one shared motif multiset, so any single blob
// position (uniform over the axis) and any frame pair straddling a boundary
// (independent starting heights) carry no label information: only direction
// read from frames inside one segment does. Segment durations are drawn
// uniformly from the admissible assignments, so that evidence is only
// accessible through temporal alignment.
struct GeneratorConfig {
    ArchProfile profile = mini_profile();
    int classes = 2;
    int per_class = 40;       // train clips per class
    int per_class_val = 0;    // val clips per class
    int per_class_test = 10;  // test clips per class
    int frames_per_anchor = 2;
    int channels = 2;         // clips may carry more channels than the model uses
    double noise = 0.05;      // amplitude of uniform pixel noise
    std::uint64_t seed = 1;
};

struct PlantedSample {
    VideoSample video;
    LatentAssignment truth;       // the boundaries the renderer used
    std::vector<int> motifs;      // 0 = downward, 1 = upward, per segment
    std::vector<double> offsets;  // starting height of each segment, in wraps [0, 1)
};

// Distinct permutations of the shared motif multiset (floor(M/2) upward
// motifs among M), in lexicographic order; label picks one. Throws
// config_error when label >= max_generator_classes(segments).
std::vector<int> motif_sequence(int classes, int segments, int label);

// Number of distinct orderings available for a segment count.
int max_generator_classes(int segments);

// Blob centre for a motif at sweep phase in [0, 1), starting at `offset`
// wraps down the column: y = (offset +/- phase) * frame_h modulo frame_h,
// sign by motif direction; x is the centre column.
struct BlobPos {
    double x = 0.0;
    double y = 0.0;
};
BlobPos blob_position(const ArchProfile& profile, double offset, int motif, double phase);

// Deterministic in (cfg, label, stream): the per-sample generator state is
// seeded with mix_seed(cfg.seed, stream).
PlantedSample generate_sample(const GeneratorConfig& cfg, int label, std::uint64_t stream);

// Writes clips, one ".bounds" text sidecar per clip (planted starts, lengths,
// motifs, offsets, label), and "manifest.txt" into out_dir. Returns the
// manifest.
DatasetManifest generate_dataset(const GeneratorConfig& cfg,
                                 const std::filesystem::path& out_dir);

}  // namespace stav
