#include "stav/segmentation.hpp"

#include <string>

namespace stav {

void SegmentationConfig::validate() const {
    if (anchors < 1) throw config_error("anchors must be >= 1, got " + std::to_string(anchors));
    if (segments < 1) throw config_error("segments must be >= 1, got " + std::to_string(segments));
    if (frames_per_segment < 1) {
        throw config_error("frames_per_segment must be >= 1, got " + std::to_string(frames_per_segment));
    }
    if (min_len < 1) throw config_error("min segment length must be >= 1, got " + std::to_string(min_len));
    if (static_cast<long long>(segments) * min_len > anchors) {
        throw config_error("no admissible segmentation: " + std::to_string(segments) + " segments of >= " +
                           std::to_string(min_len) + " anchors exceed " + std::to_string(anchors) +
                           " anchors");
    }
}

bool valid_assignment(const LatentAssignment& h, const SegmentationConfig& cfg) {
    if (static_cast<int>(h.starts.size()) != cfg.segments ||
        static_cast<int>(h.lengths.size()) != cfg.segments) {
        return false;
    }
    int pos = 1;
    int total = 0;
    for (int j = 0; j < cfg.segments; ++j) {
        if (h.starts[j] != pos) return false;
        if (h.lengths[j] < cfg.min_len) return false;
        pos += h.lengths[j];
        total += h.lengths[j];
    }
    return total == cfg.anchors;
}

namespace {
void enumerate_rec(const SegmentationConfig& cfg, int j, int remaining,
                   std::vector<int>& lengths, std::vector<LatentAssignment>& out) {
    if (j == cfg.segments - 1) {
        if (remaining < cfg.min_len) return;
        lengths[j] = remaining;
        LatentAssignment h;
        h.lengths = lengths;
        h.starts.resize(lengths.size());
        int pos = 1;
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            h.starts[i] = pos;
            pos += lengths[i];
        }
        out.push_back(std::move(h));
        return;
    }
    const int tail_min = (cfg.segments - 1 - j) * cfg.min_len;
    for (int t = cfg.min_len; remaining - t >= tail_min; ++t) {
        lengths[j] = t;
        enumerate_rec(cfg, j + 1, remaining - t, lengths, out);
    }
}
}  // namespace

std::vector<LatentAssignment> enumerate_assignments(const SegmentationConfig& cfg) {
    cfg.validate();
    std::vector<LatentAssignment> out;
    std::vector<int> lengths(static_cast<std::size_t>(cfg.segments), 0);
    enumerate_rec(cfg, 0, cfg.anchors, lengths, out);
    return out;
}

std::uint64_t count_assignments(const SegmentationConfig& cfg) {
    cfg.validate();
    // stars and bars over the slack A - M*min_len: C(slack + M - 1, M - 1)
    const std::uint64_t slack = static_cast<std::uint64_t>(cfg.anchors) -
                                static_cast<std::uint64_t>(cfg.segments) * cfg.min_len;
    const std::uint64_t n = slack + cfg.segments - 1;
    const std::uint64_t k = static_cast<std::uint64_t>(cfg.segments) - 1;
    std::uint64_t c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;  // exact at each step: product of i consecutive ints
    }
    return c;
}

std::vector<int> sample_anchor_frames(int frame_count, int anchors) {
    if (frame_count < 1) throw config_error("frame_count must be >= 1, got " + std::to_string(frame_count));
    if (anchors < 1) throw config_error("anchors must be >= 1, got " + std::to_string(anchors));
    if (frame_count < anchors) {
        throw config_error("video with " + std::to_string(frame_count) +
                           " frames is shorter than the anchor grid (" + std::to_string(anchors) + ")");
    }
    std::vector<int> idx(static_cast<std::size_t>(anchors));
    for (int a = 0; a < anchors; ++a) {
        idx[static_cast<std::size_t>(a)] =
            static_cast<int>((static_cast<long long>(a) * frame_count) / anchors);
    }
    return idx;
}

std::vector<int> sample_segment_frames(const LatentAssignment& h, int j,
                                       const std::vector<int>& anchors, int m) {
    if (j < 0 || j >= static_cast<int>(h.lengths.size())) {
        throw config_error("segment index " + std::to_string(j) + " out of range");
    }
    const int s = h.starts[static_cast<std::size_t>(j)];
    const int t = h.lengths[static_cast<std::size_t>(j)];
    std::vector<int> frames(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const int off = static_cast<int>((static_cast<long long>(k) * t) / m);
        const std::size_t a = static_cast<std::size_t>(s - 1 + off);
        if (a >= anchors.size()) throw config_error("assignment overruns the anchor grid");
        frames[static_cast<std::size_t>(k)] = anchors[a];
    }
    return frames;
}

LatentAssignment equal_assignment(const SegmentationConfig& cfg) {
    cfg.validate();
    if (cfg.anchors % cfg.segments != 0) {
        throw config_error("equal segmentation needs anchors divisible by segments, got " +
                           std::to_string(cfg.anchors) + "/" + std::to_string(cfg.segments));
    }
    const int t = cfg.anchors / cfg.segments;
    if (t < cfg.min_len) {
        throw config_error("equal segmentation violates the minimum segment length");
    }
    LatentAssignment h;
    h.starts.resize(static_cast<std::size_t>(cfg.segments));
    h.lengths.assign(static_cast<std::size_t>(cfg.segments), t);
    for (int j = 0; j < cfg.segments; ++j) h.starts[static_cast<std::size_t>(j)] = 1 + j * t;
    return h;
}

LatentAssignment near_equal_assignment(const SegmentationConfig& cfg) {
    cfg.validate();
    const int base = cfg.anchors / cfg.segments;
    const int extra = cfg.anchors % cfg.segments;
    if (base < cfg.min_len) {
        throw config_error("near-equal segmentation violates the minimum segment length");
    }
    LatentAssignment h;
    h.starts.resize(static_cast<std::size_t>(cfg.segments));
    h.lengths.resize(static_cast<std::size_t>(cfg.segments));
    int start = 1;
    for (int j = 0; j < cfg.segments; ++j) {
        const int len = base + (j < extra ? 1 : 0);
        h.starts[static_cast<std::size_t>(j)] = start;
        h.lengths[static_cast<std::size_t>(j)] = len;
        start += len;
    }
    return h;
}

}  // namespace stav
