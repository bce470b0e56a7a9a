#include "stav/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stav/errors.hpp"
#include "stav/rng.hpp"

namespace stav {

namespace {

void check_config(const GeneratorConfig& cfg) {
    cfg.profile.validate();
    if (cfg.classes < 1) throw config_error("generator needs at least one class");
    if (cfg.classes > max_generator_classes(cfg.profile.seg.segments))
        throw config_error("at most " +
                           std::to_string(max_generator_classes(cfg.profile.seg.segments)) +
                           " classes distinguishable with " +
                           std::to_string(cfg.profile.seg.segments) + " segments");
    if (cfg.channels < 1) throw config_error("generator needs at least one channel");
    if (cfg.frames_per_anchor < 1) throw config_error("frames_per_anchor must be positive");
    if (cfg.noise < 0.0) throw config_error("noise amplitude must be non-negative");
    if (cfg.per_class < 0 || cfg.per_class_val < 0 || cfg.per_class_test < 0)
        throw config_error("per-class clip counts must be non-negative");
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

std::vector<int> base_multiset(int segments) {
    // floor(M/2) clockwise motifs; sorted ascending so next_permutation walks
    // every distinct ordering lexicographically.
    std::vector<int> base(segments, 0);
    for (int j = segments - segments / 2; j < segments; ++j) base[j] = 1;
    return base;
}

}  // namespace

int max_generator_classes(int segments) {
    if (segments < 1) return 0;
    std::vector<int> perm = base_multiset(segments);
    int count = 1;
    while (std::next_permutation(perm.begin(), perm.end())) ++count;
    return count;
}

std::vector<int> motif_sequence(int classes, int segments, int label) {
    if (label < 0 || label >= classes)
        throw config_error("label " + std::to_string(label) + " outside [0, " +
                           std::to_string(classes) + ")");
    if (classes > max_generator_classes(segments))
        throw config_error("at most " + std::to_string(max_generator_classes(segments)) +
                           " classes distinguishable with " + std::to_string(segments) +
                           " segments");
    std::vector<int> perm = base_multiset(segments);
    for (int i = 0; i < label; ++i) std::next_permutation(perm.begin(), perm.end());
    return perm;
}

BlobPos blob_position(const ArchProfile& profile, double offset, int motif, double phase) {
    const double cx = (profile.frame_w - 1) * 0.5;
    const double direction = motif == 0 ? 1.0 : -1.0;
    double wraps = std::fmod(offset + direction * phase, 1.0);
    if (wraps < 0.0) wraps += 1.0;
    return {cx, wraps * profile.frame_h};
}

PlantedSample generate_sample(const GeneratorConfig& cfg, int label, std::uint64_t stream) {
    check_config(cfg);
    if (label < 0 || label >= cfg.classes)
        throw config_error("label " + std::to_string(label) + " outside [0, " +
                           std::to_string(cfg.classes) + ")");
    const SegmentationConfig& seg = cfg.profile.seg;
    std::mt19937_64 g(mix_seed(cfg.seed, stream));

    const std::vector<LatentAssignment> candidates = enumerate_assignments(seg);
    PlantedSample out;
    out.truth = candidates[uniform_index(g, candidates.size())];
    out.motifs = motif_sequence(cfg.classes, seg.segments, label);
    out.offsets.resize(seg.segments);
    for (double& o : out.offsets) o = uniform01(g);

    VideoSample& v = out.video;
    v.width = cfg.profile.frame_w;
    v.height = cfg.profile.frame_h;
    v.frame_count = seg.anchors * cfg.frames_per_anchor;
    v.channels = cfg.channels;
    v.label = label;
    {
        std::ostringstream id;
        id << "c" << label << "-s" << std::hex << stream;
        v.id = id.str();
    }
    v.pixels.assign(v.pixel_count(), 0.0);

    const double sigma = std::max(0.9, 0.14 * std::min(v.height, v.width));
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);

    for (int f = 0; f < v.frame_count; ++f) {
        // Continuous anchor coordinate of this frame, then the planted segment
        // that owns it and the sweep phase inside that segment.
        const double alpha = static_cast<double>(f) / cfg.frames_per_anchor;
        int j = seg.segments - 1;
        for (int q = 0; q < seg.segments; ++q) {
            const double a0 = out.truth.starts[q] - 1;
            if (alpha >= a0 && alpha < a0 + out.truth.lengths[q]) {
                j = q;
                break;
            }
        }
        const double a0 = out.truth.starts[j] - 1;
        const double phase = (alpha - a0) / out.truth.lengths[j];

        // The blob is a small comet: a bright head plus two dimmer lobes
        // trailing behind it along the sweep at fixed lags, so the motion
        // direction is visible in every single frame while the head position
        // itself stays uniformly distributed over the wrap-around axis.
        constexpr double kTrailLag = 0.12;  // wraps between comet lobes
        constexpr int kLobes = 3;
        BlobPos lobe_pos[kLobes];
        double lobe_amp[kLobes];
        for (int k = 0; k < kLobes; ++k) {
            lobe_pos[k] =
                blob_position(cfg.profile, out.offsets[j], out.motifs[j], phase - k * kTrailLag);
            lobe_amp[k] = k == 0 ? 1.0 : (k == 1 ? 0.5 : 0.25);
        }

        for (int c = 0; c < v.channels; ++c) {
            const double background = 0.15 + 0.10 * c;
            const double amplitude = 0.75 - 0.20 * c;
            for (int y = 0; y < v.height; ++y) {
                for (int x = 0; x < v.width; ++x) {
                    double blob = 0.0;
                    for (int k = 0; k < kLobes; ++k) {
                        const double dx = x - lobe_pos[k].x;
                        // Shortest vertical distance on the wrap-around axis.
                        const double dy = std::remainder(y - lobe_pos[k].y, double(v.height));
                        blob += lobe_amp[k] * std::exp(-(dx * dx + dy * dy) * inv2s2);
                    }
                    const double n = cfg.noise * (uniform01(g) - 0.5);
                    v.at(f, c, y, x) = clamp01(background + amplitude * blob + n);
                }
            }
        }
    }
    return out;
}

namespace {

std::string bounds_text(const PlantedSample& s) {
    std::ostringstream out;
    out.precision(17);
    out << "starts";
    for (int v : s.truth.starts) out << ' ' << v;
    out << "\nlengths";
    for (int v : s.truth.lengths) out << ' ' << v;
    out << "\nmotifs";
    for (int v : s.motifs) out << ' ' << v;
    out << "\noffsets";
    for (double v : s.offsets) out << ' ' << v;
    out << "\nlabel " << s.video.label << '\n';
    return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(io_errc::file_unreadable, "cannot open " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw io_error(io_errc::file_unreadable, "cannot write " + path.string());
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

DatasetManifest generate_dataset(const GeneratorConfig& cfg,
                                 const std::filesystem::path& out_dir) {
    check_config(cfg);
    std::filesystem::create_directories(out_dir);

    DatasetManifest m;
    for (int c = 0; c < cfg.classes; ++c) m.class_names.push_back("act" + std::to_string(c));
    m.generator = {
        {"profile", cfg.profile.name},
        {"classes", std::to_string(cfg.classes)},
        {"per_class", std::to_string(cfg.per_class)},
        {"per_class_val", std::to_string(cfg.per_class_val)},
        {"per_class_test", std::to_string(cfg.per_class_test)},
        {"frames_per_anchor", std::to_string(cfg.frames_per_anchor)},
        {"channels", std::to_string(cfg.channels)},
        {"noise", format_double(cfg.noise)},
        {"seed", std::to_string(cfg.seed)},
    };

    struct SplitSpec {
        const char* name;
        std::uint64_t tag;
        int count;
    };
    const SplitSpec splits[] = {{"train", 1, cfg.per_class},
                                {"val", 2, cfg.per_class_val},
                                {"test", 3, cfg.per_class_test}};
    for (const SplitSpec& sp : splits) {
        for (int c = 0; c < cfg.classes; ++c) {
            for (int i = 0; i < sp.count; ++i) {
                // Stream tags are unique across (split, class, index) so every
                // clip gets an independent deterministic stream.
                const std::uint64_t stream =
                    (sp.tag << 40) | (std::uint64_t(c) << 20) | std::uint64_t(i);
                PlantedSample s = generate_sample(cfg, c, stream);
                std::ostringstream stem;
                stem << sp.name << "_c" << c << "_"
                     << (i < 10 ? "00" : i < 100 ? "0" : "") << i;
                s.video.id = stem.str();
                const std::string file = stem.str() + ".stav";
                write_video(out_dir / file, s.video);
                write_text(out_dir / (file + ".bounds"), bounds_text(s));
                m.entries.push_back({file, c, sp.name});
            }
        }
    }
    write_manifest(out_dir / "manifest.txt", m);
    return m;
}

}  // namespace stav
