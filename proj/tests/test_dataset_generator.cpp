#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <set>

#include "stav/dataset.hpp"
#include "stav/errors.hpp"
#include "stav/generator.hpp"
#include "stav/profile.hpp"

using namespace stav;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* tag) {
    const fs::path dir = fs::temp_directory_path() / (std::string("stav_gen_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("manifest text round-trip") {
    DatasetManifest m;
    m.class_names = {"wave", "push away"};  // names may contain spaces
    m.generator = {{"seed", "7"}, {"note", "two words"}};
    m.entries = {{"clips/a 1.stav", 0, "train"}, {"b.stav", 1, "test"}, {"c.stav", 1, "val"}};

    const std::string text = manifest_to_text(m);
    const DatasetManifest r = manifest_from_text(text);
    REQUIRE(r.class_names == m.class_names);
    REQUIRE(r.generator == m.generator);
    REQUIRE(r.entries.size() == m.entries.size());
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        CHECK(r.entries[i].path == m.entries[i].path);
        CHECK(r.entries[i].label == m.entries[i].label);
        CHECK(r.entries[i].split == m.entries[i].split);
    }
    // Serialisation is stable.
    CHECK(manifest_to_text(r) == text);
}

TEST_CASE("manifest parsing accepts comments and rejects malformed text") {
    CHECK_NOTHROW(manifest_from_text("# leading comment\nstav-dataset 1\nclass 0 a # tail\n"));

    CHECK_THROWS_AS(manifest_from_text(""), config_error);
    CHECK_THROWS_AS(manifest_from_text("bogus 1\nclass 0 a\n"), config_error);
    CHECK_THROWS_AS(manifest_from_text("stav-dataset 9\n"), config_error);
    CHECK_THROWS_AS(manifest_from_text("stav-dataset 1\nwhatever x\n"), config_error);
    CHECK_THROWS_AS(manifest_from_text("stav-dataset 1\nclass 1 late\n"), config_error);
    CHECK_THROWS_AS(manifest_from_text("stav-dataset 1\nclass 0\n"), config_error);
    CHECK_THROWS_AS(manifest_from_text("stav-dataset 1\nclass 0 a\nsample train x b.stav\n"),
                    config_error);
    // Label outside the declared classes.
    CHECK_THROWS_AS(manifest_from_text("stav-dataset 1\nclass 0 a\nsample train 1 b.stav\n"),
                    config_error);
    // Unknown split tag.
    CHECK_THROWS_AS(manifest_from_text("stav-dataset 1\nclass 0 a\nsample dev 0 b.stav\n"),
                    config_error);
    // No classes at all.
    CHECK_THROWS_AS(manifest_from_text("stav-dataset 1\n"), config_error);
}

TEST_CASE("near-equal assignment splits the anchor grid evenly") {
    SegmentationConfig paper{30, 4, 9, 5};
    const LatentAssignment h = near_equal_assignment(paper);
    CHECK(h.lengths == std::vector<int>{8, 8, 7, 7});
    CHECK(h.starts == std::vector<int>{1, 9, 17, 24});
    CHECK(valid_assignment(h, paper));

    SegmentationConfig mini{12, 3, 3, 3};
    CHECK(near_equal_assignment(mini) == equal_assignment(mini));

    SegmentationConfig uneven{10, 3, 3, 3};
    const LatentAssignment u = near_equal_assignment(uneven);
    CHECK(u.lengths == std::vector<int>{4, 3, 3});
    CHECK(valid_assignment(u, uneven));
}

TEST_CASE("motif sequences share one multiset and differ only in order") {
    // Three segments: the distinct orderings of {ccw, ccw, cw}.
    CHECK(max_generator_classes(3) == 3);
    CHECK(motif_sequence(2, 3, 0) == std::vector<int>{0, 0, 1});
    CHECK(motif_sequence(2, 3, 1) == std::vector<int>{0, 1, 0});
    CHECK(motif_sequence(3, 3, 2) == std::vector<int>{1, 0, 0});

    // Paper-scale grid: four segments support six orderings.
    CHECK(max_generator_classes(4) == 6);
    const auto a = motif_sequence(3, 4, 0);
    const auto b = motif_sequence(3, 4, 1);
    const auto c = motif_sequence(3, 4, 2);
    CHECK(a != b);
    CHECK(a != c);
    CHECK(b != c);
    CHECK(std::multiset<int>(a.begin(), a.end()) == std::multiset<int>(b.begin(), b.end()));
    CHECK(std::multiset<int>(b.begin(), b.end()) == std::multiset<int>(c.begin(), c.end()));

    CHECK(max_generator_classes(1) == 1);
    CHECK(max_generator_classes(2) == 2);

    // More classes than orderings is rejected.
    CHECK_THROWS_AS(motif_sequence(4, 3, 3), config_error);
}

TEST_CASE("blob sweeps wrap around the column and opposite motifs mirror") {
    const ArchProfile prof = mini_profile();
    const double cx = (prof.frame_w - 1) * 0.5;
    const double h = prof.frame_h;
    for (double phase : {0.0, 0.17, 0.5, 0.83, 1.4}) {
        for (int motif : {0, 1}) {
            const BlobPos p = blob_position(prof, 0.3, motif, phase);
            CHECK(p.x == doctest::Approx(cx).epsilon(1e-12));
            CHECK(p.y >= 0.0);
            CHECK(p.y < h);
        }
        // The upward motif at phase t matches the downward one at phase -t.
        const BlobPos up = blob_position(prof, 0.3, 1, phase);
        const BlobPos down = blob_position(prof, 0.3, 0, -phase);
        CHECK(up.x == doctest::Approx(down.x).epsilon(1e-12));
        CHECK(up.y == doctest::Approx(down.y).epsilon(1e-12));
    }
    // The offset translates the sweep modulo the frame height.
    const BlobPos base = blob_position(prof, 0.1, 0, 0.2);
    const BlobPos shifted = blob_position(prof, 0.35, 0, 0.2);
    CHECK(std::remainder(shifted.y - base.y - 0.25 * h, h) == doctest::Approx(0.0).epsilon(1e-9));
    // A full wrap returns to the start; a quarter wrap moves the blob.
    const BlobPos p0 = blob_position(prof, 0.0, 0, 0.0);
    const BlobPos p1 = blob_position(prof, 0.0, 0, 0.25);
    const BlobPos p2 = blob_position(prof, 0.0, 0, 1.0);
    CHECK(std::abs(std::remainder(p1.y - p0.y, h)) > 0.5);
    CHECK(std::abs(std::remainder(p2.y - p0.y, h)) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("generated samples are deterministic, valid, and planted") {
    GeneratorConfig cfg;
    cfg.profile = mini_profile();
    cfg.seed = 99;

    const PlantedSample s1 = generate_sample(cfg, 1, 42);
    const PlantedSample s2 = generate_sample(cfg, 1, 42);
    CHECK(serialize_video(s1.video) == serialize_video(s2.video));
    CHECK(s1.truth == s2.truth);
    CHECK(s1.motifs == s2.motifs);
    CHECK(s1.offsets == s2.offsets);

    const PlantedSample s3 = generate_sample(cfg, 1, 43);
    CHECK(serialize_video(s1.video) != serialize_video(s3.video));

    CHECK(s1.video.frame_count == cfg.profile.seg.anchors * cfg.frames_per_anchor);
    CHECK(s1.video.height == cfg.profile.frame_h);
    CHECK(s1.video.width == cfg.profile.frame_w);
    CHECK(s1.video.channels == 2);
    CHECK(s1.video.label == 1);
    CHECK_NOTHROW(s1.video.validate());
    CHECK(valid_assignment(s1.truth, cfg.profile.seg));
    CHECK(s1.motifs == motif_sequence(cfg.classes, cfg.profile.seg.segments, 1));

    CHECK_THROWS_AS(generate_sample(cfg, 2, 0), config_error);
    CHECK_THROWS_AS(generate_sample(cfg, -1, 0), config_error);
}

TEST_CASE("the blob is visible against the background") {
    GeneratorConfig cfg;
    cfg.profile = mini_profile();
    cfg.noise = 0.0;  // exact background level away from the blob
    const PlantedSample s = generate_sample(cfg, 0, 7);
    REQUIRE(s.offsets.size() == size_t(cfg.profile.seg.segments));
    for (double off : s.offsets) {
        CHECK(off >= 0.0);
        CHECK(off < 1.0);
    }
    // Frame 0 is phase 0 of the first segment; the blob centre outshines the
    // point farthest from it (half a wrap down the column, opposite edge).
    const BlobPos pos = blob_position(cfg.profile, s.offsets[0], s.motifs[0], 0.0);
    const int h = cfg.profile.frame_h;
    const int bx = std::min(cfg.profile.frame_w - 1, std::max(0, int(pos.x + 0.5)));
    const int by = std::min(h - 1, std::max(0, int(pos.y + 0.5)));
    const int fx = pos.x < cfg.profile.frame_w / 2.0 ? cfg.profile.frame_w - 1 : 0;
    const int fy = (by + h / 2) % h;
    CHECK(s.video.at(0, 0, by, bx) > s.video.at(0, 0, fy, fx) + 0.3);
}

TEST_CASE("generate_dataset writes clips, sidecars and a loadable manifest") {
    const fs::path dir = fresh_dir("ds");
    GeneratorConfig cfg;
    cfg.profile = mini_profile();
    cfg.classes = 2;
    cfg.per_class = 3;
    cfg.per_class_val = 1;
    cfg.per_class_test = 2;
    cfg.seed = 5;

    const DatasetManifest m = generate_dataset(cfg, dir);
    CHECK(m.classes() == 2);
    CHECK(m.entries.size() == 2u * (3 + 1 + 2));
    REQUIRE(fs::exists(dir / "manifest.txt"));

    const DatasetManifest r = read_manifest(dir / "manifest.txt");
    CHECK(manifest_to_text(r) == manifest_to_text(m));

    const std::vector<VideoSample> train = load_split(r, dir, "train");
    REQUIRE(train.size() == 6);
    CHECK(train[0].label == 0);
    CHECK(train[3].label == 1);
    CHECK(load_split(r, dir, "val").size() == 2);
    CHECK(load_split(r, dir, "test").size() == 4);
    CHECK(load_split(r, dir, "").size() == 12);

    // Sidecar mirrors the planted truth of the same stream tag.
    const std::uint64_t stream = (std::uint64_t(1) << 40) | (std::uint64_t(0) << 20) | 1;
    const PlantedSample expect = generate_sample(cfg, 0, stream);
    const std::string bounds = slurp(dir / "train_c0_001.stav.bounds");
    std::ostringstream want;
    want << "starts";
    for (int v : expect.truth.starts) want << ' ' << v;
    CHECK(bounds.substr(0, want.str().size()) == want.str());
    CHECK(bounds.find("offsets ") != std::string::npos);
    CHECK(bounds.find("label 0") != std::string::npos);

    // Regeneration is byte-stable.
    const fs::path dir2 = fresh_dir("ds2");
    generate_dataset(cfg, dir2);
    CHECK(slurp(dir2 / "manifest.txt") == slurp(dir / "manifest.txt"));
    CHECK(slurp(dir2 / "test_c1_000.stav") == slurp(dir / "test_c1_000.stav"));

    // A clip whose embedded label disagrees with the manifest is rejected.
    VideoSample bad = read_video(dir / "train_c0_000.stav");
    bad.label = 1;
    write_video(dir / "train_c0_000.stav", bad);
    CHECK_THROWS_AS(load_split(r, dir, "train"), config_error);

    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("generator validates its configuration") {
    GeneratorConfig cfg;
    cfg.profile = mini_profile();
    cfg.classes = 0;
    CHECK_THROWS_AS(generate_sample(cfg, 0, 0), config_error);
    cfg.classes = 2;
    cfg.noise = -0.1;
    CHECK_THROWS_AS(generate_sample(cfg, 0, 0), config_error);
    cfg.noise = 0.05;
    cfg.frames_per_anchor = 0;
    CHECK_THROWS_AS(generate_sample(cfg, 0, 0), config_error);
    cfg.frames_per_anchor = 2;
    cfg.channels = 0;
    CHECK_THROWS_AS(generate_sample(cfg, 0, 0), config_error);
}

namespace {

// Per-frame blob height (in wraps) by the circular mean of row mass; the
// wrap-around axis makes a plain centroid meaningless at the seam.
std::vector<double> blob_track(const VideoSample& v) {
    constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
    std::vector<double> track(v.frame_count);
    for (int f = 0; f < v.frame_count; ++f) {
        std::complex<double> r{0.0, 0.0};
        for (int y = 0; y < v.height; ++y) {
            double mass = 0.0;
            for (int x = 0; x < v.width; ++x) mass += v.at(f, 0, y, x);
            r += mass * std::polar(1.0, kTwoPi * y / v.height);
        }
        track[f] = std::arg(r) / kTwoPi;
    }
    return track;
}

}  // namespace

TEST_CASE("planted boundaries are recoverable from the pixels alone") {
    // An oracle scorer that knows the generative law (one wrap per segment in
    // the motif's direction, offset free via the circular resultant) must
    // place every boundary within one anchor of the sidecar truth on at least
    // 80% of samples when it picks the best-scoring admissible assignment.
    constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
    GeneratorConfig cfg;
    cfg.profile = mini_profile();
    cfg.seed = 6;
    const auto candidates = enumerate_assignments(cfg.profile.seg);
    int ok = 0, tot = 0;
    for (int label = 0; label < 2; ++label) {
        const auto motifs = motif_sequence(2, cfg.profile.seg.segments, label);
        for (int i = 0; i < 30; ++i) {
            const PlantedSample s = generate_sample(cfg, label, 7000 + label * 100 + i);
            const std::vector<double> track = blob_track(s.video);
            const LatentAssignment* best = nullptr;
            double best_score = -1.0;
            for (const auto& cand : candidates) {
                double score = 0.0;
                for (std::size_t j = 0; j < cand.starts.size(); ++j) {
                    const double a0 = cand.starts[j] - 1;
                    const double t = cand.lengths[j];
                    const double dir = motifs[j] == 0 ? 1.0 : -1.0;
                    std::complex<double> r{0.0, 0.0};
                    for (int f = int(a0) * cfg.frames_per_anchor;
                         f < int(a0 + t) * cfg.frames_per_anchor; ++f) {
                        const double phase = (double(f) / cfg.frames_per_anchor - a0) / t;
                        r += std::polar(1.0, kTwoPi * (track[f] - dir * phase));
                    }
                    score += std::abs(r);
                }
                if (score > best_score) {
                    best_score = score;
                    best = &cand;
                }
            }
            REQUIRE(best != nullptr);
            bool good = true;
            for (std::size_t j = 0; j < best->starts.size(); ++j)
                if (std::abs(best->starts[j] - s.truth.starts[j]) > 1) good = false;
            ok += good;
            ++tot;
        }
    }
    CHECK(double(ok) / tot >= 0.8);
}
