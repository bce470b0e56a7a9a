#pragma once

#include <cstdint>
#include <vector>

#include "stav/errors.hpp"

namespace stav {

// Temporal segmentation over a fixed anchor grid. A video is reduced to
// `anchors` evenly spaced key positions; an assignment splits those anchors
// into `segments` contiguous runs, one per sub-network, and each run is
// resampled to `frames_per_segment` frames.
struct SegmentationConfig {
    int anchors = 30;            // A
    int segments = 4;            // M
    int frames_per_segment = 9;  // m
    int min_len = 5;             // shortest admissible run, in anchors

    void validate() const;
};

// starts are 1-based over the anchor grid: starts[0] == 1,
// starts[j+1] == starts[j] + lengths[j], sum(lengths) == A.
struct LatentAssignment {
    std::vector<int> starts;
    std::vector<int> lengths;

    bool operator==(const LatentAssignment&) const = default;
};

bool valid_assignment(const LatentAssignment& h, const SegmentationConfig& cfg);

// All admissible assignments in lexicographic order of the lengths vector.
std::vector<LatentAssignment> enumerate_assignments(const SegmentationConfig& cfg);

// Closed-form count: compositions of A into M parts, each >= min_len.
std::uint64_t count_assignments(const SegmentationConfig& cfg);

// Even anchor grid: floor(a * frame_count / A) for a = 0..A-1.
std::vector<int> sample_anchor_frames(int frame_count, int anchors);

// Frame indices for segment j (0-based): anchors[s_j - 1 + floor(k*t_j/m)],
// k = 0..m-1. Repeats frames when the run is shorter than m.
std::vector<int> sample_segment_frames(const LatentAssignment& h, int j,
                                       const std::vector<int>& anchors, int m);

// The unique assignment with equal lengths; requires A % M == 0.
LatentAssignment equal_assignment(const SegmentationConfig& cfg);

// Lengths as equal as possible (first A % M segments one anchor longer);
// coincides with equal_assignment when A % M == 0. Used by pre-training,
// which fixes the segmentation instead of searching over it.
LatentAssignment near_equal_assignment(const SegmentationConfig& cfg);

}  // namespace stav
