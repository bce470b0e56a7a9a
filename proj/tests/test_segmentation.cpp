#include <doctest.h>

#include <set>
#include <vector>

#include "stav/segmentation.hpp"

using namespace stav;

namespace {

// Independent oracle: count compositions by brute-force recursion over raw
// length tuples, no sharing with the enumeration under test.
std::uint64_t brute_count(int a, int m, int lmin) {
    if (m == 1) return a >= lmin ? 1 : 0;
    std::uint64_t total = 0;
    for (int t = lmin; t <= a; ++t) total += brute_count(a - t, m - 1, lmin);
    return total;
}

}  // namespace

TEST_CASE("anchor sampling is evenly spaced") {
    auto idx = sample_anchor_frames(60, 30);
    REQUIRE(idx.size() == 30);
    for (int a = 0; a < 30; ++a) CHECK(idx[std::size_t(a)] == 2 * a);

    auto idx2 = sample_anchor_frames(31, 30);
    CHECK(idx2.front() == 0);
    CHECK(idx2.back() == 31 * 29 / 30);
    for (std::size_t i = 1; i < idx2.size(); ++i) CHECK(idx2[i] >= idx2[i - 1]);

    // identity grid when frame_count == anchors
    auto idx3 = sample_anchor_frames(12, 12);
    for (int a = 0; a < 12; ++a) CHECK(idx3[std::size_t(a)] == a);

    CHECK_THROWS_AS(sample_anchor_frames(10, 30), config_error);
}

TEST_CASE("enumeration counts: closed form, brute force, and pinned values") {
    SegmentationConfig dflt{30, 4, 9, 5};
    CHECK(count_assignments(dflt) == 286);
    CHECK(enumerate_assignments(dflt).size() == 286);

    SegmentationConfig small{12, 3, 3, 3};
    CHECK(count_assignments(small) == 10);
    CHECK(enumerate_assignments(small).size() == 10);

    // forced single assignment when A == M * min_len
    SegmentationConfig tight{8, 2, 3, 4};
    auto forced = enumerate_assignments(tight);
    REQUIRE(forced.size() == 1);
    CHECK(forced[0].lengths == std::vector<int>{4, 4});

    for (int a = 1; a <= 20; ++a) {
        for (int m = 1; m <= 4; ++m) {
            for (int lmin = 1; lmin <= 5; ++lmin) {
                if (static_cast<long long>(m) * lmin > a) continue;
                SegmentationConfig cfg{a, m, 3, lmin};
                const auto want = brute_count(a, m, lmin);
                CAPTURE(a);
                CAPTURE(m);
                CAPTURE(lmin);
                CHECK(count_assignments(cfg) == want);
                CHECK(enumerate_assignments(cfg).size() == want);
            }
        }
    }

    CHECK_THROWS_AS(enumerate_assignments(SegmentationConfig{6, 3, 3, 3}), config_error);
}

TEST_CASE("enumerated assignments are valid, unique, lexicographic") {
    SegmentationConfig cfg{14, 3, 4, 3};
    auto all = enumerate_assignments(cfg);
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(valid_assignment(all[i], cfg));
        CHECK(all[i].starts.front() == 1);
        int sum = 0;
        for (int t : all[i].lengths) sum += t;
        CHECK(sum == cfg.anchors);
        CHECK(seen.insert(all[i].lengths).second);
        if (i > 0) CHECK(all[i - 1].lengths < all[i].lengths);
    }
}

TEST_CASE("segment frame sampling follows the floor rule") {
    // segment of 18 anchors sampled at 9 frames: every second anchor
    SegmentationConfig cfg{30, 2, 9, 5};
    LatentAssignment h{{1, 19}, {18, 12}};
    REQUIRE(valid_assignment(h, cfg));
    auto anchors = sample_anchor_frames(60, 30);
    auto frames = sample_segment_frames(h, 0, anchors, 9);
    REQUIRE(frames.size() == 9);
    for (int k = 0; k < 9; ++k) CHECK(frames[std::size_t(k)] == anchors[std::size_t(2 * k)]);

    // short segments repeat anchors rather than leaving the run
    LatentAssignment h2{{1, 6}, {5, 25}};
    auto f2 = sample_segment_frames(h2, 0, anchors, 9);
    REQUIRE(f2.size() == 9);
    std::set<int> uniq(f2.begin(), f2.end());
    CHECK(uniq.size() <= 5);
    for (int f : f2) {
        CHECK(f >= anchors[0]);
        CHECK(f <= anchors[4]);
    }

    // all sampled indices stay inside the segment for random assignments
    for (const auto& hh : enumerate_assignments(SegmentationConfig{12, 3, 3, 3})) {
        auto an = sample_anchor_frames(24, 12);
        for (int j = 0; j < 3; ++j) {
            auto fr = sample_segment_frames(hh, j, an, 3);
            const int lo = an[std::size_t(hh.starts[std::size_t(j)] - 1)];
            const int hi = an[std::size_t(hh.starts[std::size_t(j)] - 1 + hh.lengths[std::size_t(j)] - 1)];
            for (int f : fr) {
                CHECK(f >= lo);
                CHECK(f <= hi);
            }
        }
    }
}

TEST_CASE("equal assignment splits the grid evenly") {
    SegmentationConfig cfg{12, 3, 3, 3};
    auto h = equal_assignment(cfg);
    CHECK(h.lengths == std::vector<int>{4, 4, 4});
    CHECK(h.starts == std::vector<int>{1, 5, 9});
    CHECK(valid_assignment(h, cfg));

    CHECK_THROWS_AS(equal_assignment(SegmentationConfig{13, 3, 3, 3}), config_error);
}

TEST_CASE("validation rejects malformed assignments") {
    SegmentationConfig cfg{12, 3, 3, 3};
    CHECK_FALSE(valid_assignment(LatentAssignment{{1, 5, 9}, {4, 4, 3}}, cfg));   // wrong total
    CHECK_FALSE(valid_assignment(LatentAssignment{{1, 4, 9}, {4, 4, 4}}, cfg));   // broken chain
    CHECK_FALSE(valid_assignment(LatentAssignment{{1, 3, 10}, {2, 7, 3}}, cfg));  // below min_len
    CHECK_FALSE(valid_assignment(LatentAssignment{{1, 5}, {4, 8}}, cfg));         // wrong arity
}
