#include "stav/profile.hpp"

namespace stav {

namespace {
int floordiv_pos(int a, int b) { return a / b; }
}

void ArchProfile::validate() const {
    seg.validate();
    if (frame_h < 1 || frame_w < 1) throw config_error("profile: frame extents must be positive");
    if (channels != 1 && channels != 2) throw config_error("profile: channels must be 1 or 2");
    if (c1 < 1 || c2 < 1 || c3 < 1) throw config_error("profile: kernel counts must be positive");
    if (fc_out < 1) throw config_error("profile: fc width must be positive");
    for (int v : k1) {
        if (v < 1) throw config_error("profile: k1 extents must be positive");
    }
    for (int v : k2) {
        if (v < 1) throw config_error("profile: k2 extents must be positive");
    }
    if (k3[0] < 1 || k3[1] < 1) throw config_error("profile: k3 extents must be positive");
    if (pool1[0] < 1 || pool1[1] < 1 || pool2[0] < 1 || pool2[1] < 1) {
        throw config_error("profile: pooling windows must be positive");
    }

    const StageDims c1d = conv1_out();
    if (c1d.h < 1 || c1d.w < 1 || c1d.t < 1) {
        throw config_error("profile: first convolution collapses the input");
    }
    const StageDims p1d = pool1_out();
    if (p1d.h < 1 || p1d.w < 1) throw config_error("profile: first pooling collapses the maps");
    const StageDims c2d = conv2_out();
    if (c2d.h < 1 || c2d.w < 1 || c2d.t < 1) {
        throw config_error("profile: second convolution collapses the maps");
    }
    const StageDims p2d = pool2_out();
    if (p2d.h < 1 || p2d.w < 1) throw config_error("profile: second pooling collapses the maps");
    const auto c3d = conv3_out();
    if (c3d[0] < 1 || c3d[1] < 1) {
        throw config_error("profile: per-slice convolution collapses the maps");
    }
}

StageDims ArchProfile::conv1_out() const {
    return {frame_h - k1[0] + 1, frame_w - k1[1] + 1, seg.frames_per_segment - k1[2] + 1};
}

StageDims ArchProfile::pool1_out() const {
    const StageDims c = conv1_out();
    return {floordiv_pos(c.h, pool1[0]), floordiv_pos(c.w, pool1[1]), c.t};
}

StageDims ArchProfile::conv2_out() const {
    const StageDims p = pool1_out();
    return {p.h - k2[0] + 1, p.w - k2[1] + 1, p.t - k2[2] + 1};
}

StageDims ArchProfile::pool2_out() const {
    const StageDims c = conv2_out();
    return {floordiv_pos(c.h, pool2[0]), floordiv_pos(c.w, pool2[1]), c.t};
}

std::array<int, 2> ArchProfile::conv3_out() const {
    const StageDims p = pool2_out();
    return {p.h - k3[0] + 1, p.w - k3[1] + 1};
}

int ArchProfile::subnet_features() const {
    const auto s = conv3_out();
    return map_sets() * c3 * slices() * s[0] * s[1];
}

ArchProfile paper_profile() {
    ArchProfile p;
    p.name = "paper";
    p.frame_h = 80;
    p.frame_w = 60;
    p.channels = 2;
    p.c1 = 7;
    p.c2 = 5;
    p.c3 = 4;
    p.k1 = {9, 7, 3};
    p.k2 = {7, 7, 3};
    p.k3 = {6, 4};
    p.pool1 = {3, 3};
    p.pool2 = {3, 3};
    p.fc_out = 64;
    p.seg = SegmentationConfig{30, 4, 9, 5};
    p.validate();
    return p;
}

ArchProfile mini_profile() {
    ArchProfile p;
    p.name = "mini";
    p.frame_h = 8;
    p.frame_w = 6;
    p.channels = 2;
    p.c1 = 2;
    p.c2 = 2;
    p.c3 = 2;
    p.k1 = {3, 3, 2};
    p.k2 = {2, 2, 2};
    p.k3 = {2, 1};
    p.pool1 = {2, 2};
    p.pool2 = {1, 1};
    p.fc_out = 4;
    p.seg = SegmentationConfig{12, 3, 3, 3};
    p.validate();
    return p;
}

ArchProfile profile_by_name(const std::string& name) {
    if (name == "paper") return paper_profile();
    if (name == "mini") return mini_profile();
    throw config_error("unknown profile '" + name + "' (expected paper or mini)");
}

}  // namespace stav
