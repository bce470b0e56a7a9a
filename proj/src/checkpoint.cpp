#include "stav/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace stav {

namespace {

constexpr char kMagic[4] = {'L', 'S', 'N', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxField = 1u << 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
    const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct Cursor {
    const std::uint8_t* p;
    std::size_t left;

    std::uint32_t u32(const char* what) {
        if (left < 4) throw io_error(io_errc::truncated, std::string("header field ") + what);
        std::uint32_t v = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                          std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
        p += 4;
        left -= 4;
        return v;
    }
    double f64(const char* what) {
        if (left < 8) throw io_error(io_errc::truncated, std::string("field ") + what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
        p += 8;
        left -= 8;
        return std::bit_cast<double>(v);
    }
};

int header_int(Cursor& c, const char* what) {
    const std::uint32_t v = c.u32(what);
    if (v == 0 || v > kMaxField)
        throw io_error(io_errc::bad_header,
                       std::string(what) + " = " + std::to_string(v) + " is not plausible");
    return static_cast<int>(v);
}

// Guarded arithmetic for header-derived sizes: every intermediate count stays
// at or below the parameter ceiling, so downstream int math cannot overflow.
constexpr std::uint64_t kMaxParams = 1ull << 24;

std::uint64_t mulcap(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > kMaxParams / a)
        throw io_error(io_errc::bad_header, "declared model size is not plausible");
    return a * b;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const ModelParams& p) {
    p.validate();
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kVersion);

    const ArchProfile& a = p.profile;
    put_u32(out, static_cast<std::uint32_t>(a.name.size()));
    out.insert(out.end(), a.name.begin(), a.name.end());
    for (int v : {a.frame_h, a.frame_w, a.channels, a.c1, a.c2, a.c3, a.k1[0], a.k1[1],
                  a.k1[2], a.k2[0], a.k2[1], a.k2[2], a.k3[0], a.k3[1], a.pool1[0],
                  a.pool1[1], a.pool2[0], a.pool2[1], a.fc_out, a.seg.anchors,
                  a.seg.segments, a.seg.frames_per_segment, a.seg.min_len,
                  p.classes()})
        put_u32(out, static_cast<std::uint32_t>(v));
    put_f64(out, p.dropout_rate);

    // param_refs needs mutable access; the walk itself only reads.
    ModelParams& mp = const_cast<ModelParams&>(p);
    for (const ParamRef& r : param_refs(mp)) put_f64(out, *r.p);
    return out;
}

ModelParams parse_model(const std::uint8_t* data, std::size_t size) {
    Cursor c{data, size};
    if (c.left < 4 || std::memcmp(c.p, kMagic, 4) != 0)
        throw io_error(io_errc::bad_magic, "expected LSNM signature");
    c.p += 4;
    c.left -= 4;

    const std::uint32_t version = c.u32("version");
    if (version != kVersion)
        throw io_error(io_errc::bad_version, "version " + std::to_string(version) +
                                                 ", expected " + std::to_string(kVersion));

    const std::uint32_t name_len = c.u32("name_length");
    if (name_len > kMaxField) throw io_error(io_errc::bad_header, "implausible name length");
    if (c.left < name_len) throw io_error(io_errc::truncated, "profile name shorter than declared");
    std::string name(reinterpret_cast<const char*>(c.p), name_len);
    c.p += name_len;
    c.left -= name_len;

    ArchProfile a;
    a.name = std::move(name);
    a.frame_h = header_int(c, "frame_h");
    a.frame_w = header_int(c, "frame_w");
    a.channels = header_int(c, "channels");
    a.c1 = header_int(c, "c1");
    a.c2 = header_int(c, "c2");
    a.c3 = header_int(c, "c3");
    for (int i = 0; i < 3; ++i) a.k1[i] = header_int(c, "k1");
    for (int i = 0; i < 3; ++i) a.k2[i] = header_int(c, "k2");
    for (int i = 0; i < 2; ++i) a.k3[i] = header_int(c, "k3");
    for (int i = 0; i < 2; ++i) a.pool1[i] = header_int(c, "pool1");
    for (int i = 0; i < 2; ++i) a.pool2[i] = header_int(c, "pool2");
    a.fc_out = header_int(c, "fc_out");
    a.seg.anchors = header_int(c, "anchors");
    a.seg.segments = header_int(c, "segments");
    a.seg.frames_per_segment = header_int(c, "frames_per_segment");
    a.seg.min_len = header_int(c, "min_len");
    const int classes = header_int(c, "classes");
    const double dropout = c.f64("dropout_rate");
    if (!(dropout >= 0.0 && dropout < 1.0))
        throw io_error(io_errc::bad_header, "dropout_rate outside [0, 1)");

    // Bound the declared parameter count with overflow-checked arithmetic
    // before any profile math runs on the raw header values.
    {
        const std::uint64_t v1 = mulcap(mulcap(a.k1[0], a.k1[1]), a.k1[2]);
        const std::uint64_t v2 = mulcap(mulcap(a.k2[0], a.k2[1]), a.k2[2]);
        const std::uint64_t v3 = mulcap(a.k3[0], a.k3[1]);
        const std::uint64_t layer1 = mulcap(mulcap(a.c1, a.channels), v1 + 1);
        const std::uint64_t layer2 = mulcap(mulcap(a.c1, a.c2), v2 + 1);
        const std::uint64_t layer3 = mulcap(mulcap(mulcap(a.c1, a.c2), a.c3), v3 + 1);
        const std::int64_t c1h = a.frame_h - a.k1[0] + 1;
        const std::int64_t c1w = a.frame_w - a.k1[1] + 1;
        const std::int64_t c1t = std::int64_t(a.seg.frames_per_segment) - a.k1[2] + 1;
        if (c1h < 1 || c1w < 1 || c1t < 1)
            throw io_error(io_errc::bad_header, "first convolution collapses the input");
        const std::int64_t p1h = c1h / a.pool1[0], p1w = c1w / a.pool1[1];
        const std::int64_t c2h = p1h - a.k2[0] + 1;
        const std::int64_t c2w = p1w - a.k2[1] + 1;
        const std::int64_t c2t = c1t - a.k2[2] + 1;
        if (c2h < 1 || c2w < 1 || c2t < 1)
            throw io_error(io_errc::bad_header, "second convolution collapses the maps");
        const std::int64_t p2h = c2h / a.pool2[0], p2w = c2w / a.pool2[1];
        const std::int64_t o3h = p2h - a.k3[0] + 1;
        const std::int64_t o3w = p2w - a.k3[1] + 1;
        if (p2h < 1 || p2w < 1 || o3h < 1 || o3w < 1)
            throw io_error(io_errc::bad_header, "per-slice convolution collapses the maps");
        const std::uint64_t feat = mulcap(
            mulcap(mulcap(mulcap(mulcap(a.c1, a.c2), a.c3), std::uint64_t(c2t)),
                   std::uint64_t(o3h)),
            std::uint64_t(o3w));
        const std::uint64_t concat = mulcap(a.seg.segments, feat);
        const std::uint64_t fc = mulcap(a.fc_out, concat + 1);
        const std::uint64_t clf = mulcap(std::uint64_t(classes), std::uint64_t(a.fc_out) + 1);
        const std::uint64_t per_subnet = layer1 + layer2 + layer3;
        const std::uint64_t total = mulcap(a.seg.segments, per_subnet) + fc + clf;
        if (total > kMaxParams)
            throw io_error(io_errc::bad_header, "declared model size is not plausible");
    }

    try {
        a.validate();
    } catch (const config_error& e) {
        throw io_error(io_errc::bad_header, e.what());
    } catch (const shape_error& e) {
        throw io_error(io_errc::bad_header, e.what());
    }

    ModelParams p = alloc_params(a, classes);
    p.dropout_rate = dropout;

    const std::vector<ParamRef> refs = param_refs(p);
    if (c.left < refs.size() * 8)
        throw io_error(io_errc::truncated, "payload holds " + std::to_string(c.left / 8) +
                                               " of " + std::to_string(refs.size()) +
                                               " parameters");
    if (c.left > refs.size() * 8)
        throw io_error(io_errc::trailing_data,
                       std::to_string(c.left - refs.size() * 8) + " bytes past the payload");
    for (const ParamRef& r : refs) *r.p = c.f64("parameter");
    return p;
}

void save_model(const std::filesystem::path& path, const ModelParams& p) {
    const auto bytes = serialize_model(p);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error(io_errc::file_unreadable, "cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw io_error(io_errc::file_unreadable, "short write to " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw io_error(io_errc::file_unreadable, "cannot open " + path.string());
    const std::streamsize size = f.tellg();
    f.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    f.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!f) throw io_error(io_errc::file_unreadable, "short read from " + path.string());
    return parse_model(bytes.data(), bytes.size());
}

}  // namespace stav
