#pragma once

#include <array>
#include <string>

#include "stav/segmentation.hpp"

namespace stav {

struct StageDims {
    int h = 0, w = 0, t = 0;
};

// Static architecture of one sub-network plus the segmentation grid.
// Stage chain (heights/widths shrink by valid convolution, pools floor):
//   (frame_h, frame_w, m) -conv k1-> -pool1-> -conv k2-> -pool2-> -conv k3 per slice->
struct ArchProfile {
    std::string name = "custom";
    int frame_h = 0, frame_w = 0;
    int channels = 2;
    int c1 = 0, c2 = 0, c3 = 0;
    std::array<int, 3> k1{};  // (h, w, t)
    std::array<int, 3> k2{};
    std::array<int, 2> k3{};  // (h, w)
    std::array<int, 2> pool1{};
    std::array<int, 2> pool2{};
    int fc_out = 0;
    SegmentationConfig seg;

    void validate() const;

    StageDims conv1_out() const;
    StageDims pool1_out() const;
    StageDims conv2_out() const;
    StageDims pool2_out() const;
    std::array<int, 2> conv3_out() const;  // per-slice spatial extents
    int slices() const { return pool2_out().t; }

    int map_sets() const { return c1 * c2; }
    int subnet_features() const;
    int concat_width() const { return seg.segments * subnet_features(); }
    int fc_weight_count() const { return fc_out * concat_width(); }
};

// "paper": the full-scale default. "mini": small frames/kernels for fast
// gradient checking and end-to-end tests.
ArchProfile paper_profile();
ArchProfile mini_profile();
ArchProfile profile_by_name(const std::string& name);

}  // namespace stav
