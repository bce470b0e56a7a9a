#include "stav/video.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace stav {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'A', 'V'};
constexpr std::uint32_t kVersion = 1;
// header dimensions above these values are treated as corruption
constexpr std::uint32_t kMaxExtent = 1u << 16;
constexpr std::uint64_t kMaxPixels = 1ull << 31;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
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
        std::uint32_t v = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
                          std::uint32_t(p[3]) << 24;
        p += 4;
        left -= 4;
        return v;
    }
    double f64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
        p += 8;
        left -= 8;
        return std::bit_cast<double>(v);
    }
};

}  // namespace

void VideoSample::validate() const {
    if (width <= 0 || height <= 0 || frame_count <= 0 || channels <= 0) {
        throw io_error(io_errc::bad_header, "non-positive dimensions in video sample");
    }
    if (pixels.size() != pixel_count()) {
        throw io_error(io_errc::bad_header, "pixel buffer size does not match dimensions");
    }
    for (double v : pixels) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw io_error(io_errc::pixel_out_of_range,
                           "pixel value " + std::to_string(v) + " outside [0, 1]");
        }
    }
}

std::vector<std::uint8_t> serialize_video(const VideoSample& v) {
    v.validate();
    std::vector<std::uint8_t> out;
    out.reserve(32 + v.id.size() + v.pixel_count() * 8);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(v.width));
    put_u32(out, static_cast<std::uint32_t>(v.height));
    put_u32(out, static_cast<std::uint32_t>(v.frame_count));
    put_u32(out, static_cast<std::uint32_t>(v.channels));
    put_u32(out, static_cast<std::uint32_t>(v.label));
    put_u32(out, static_cast<std::uint32_t>(v.id.size()));
    out.insert(out.end(), v.id.begin(), v.id.end());
    for (double px : v.pixels) put_f64(out, px);
    return out;
}

VideoSample parse_video(const std::uint8_t* data, std::size_t size) {
    Cursor c{data, size};
    if (c.left < 4 || std::memcmp(c.p, kMagic, 4) != 0) {
        throw io_error(io_errc::bad_magic, "expected STAV signature");
    }
    c.p += 4;
    c.left -= 4;

    const std::uint32_t version = c.u32("version");
    if (version != kVersion) {
        throw io_error(io_errc::bad_version, "version " + std::to_string(version) +
                                                 ", expected " + std::to_string(kVersion));
    }

    VideoSample v;
    const std::uint32_t width = c.u32("width");
    const std::uint32_t height = c.u32("height");
    const std::uint32_t frames = c.u32("frame_count");
    const std::uint32_t channels = c.u32("channels");
    const std::uint32_t label = c.u32("label");
    const std::uint32_t id_len = c.u32("id_length");

    if (width == 0 || height == 0 || frames == 0 || channels == 0) {
        throw io_error(io_errc::bad_header, "zero dimension in header");
    }
    if (width > kMaxExtent || height > kMaxExtent || frames > kMaxExtent || channels > 16) {
        throw io_error(io_errc::bad_header, "implausible dimensions in header");
    }
    const std::uint64_t n_pixels =
        std::uint64_t(width) * height * std::uint64_t(frames) * channels;
    if (n_pixels > kMaxPixels) {
        throw io_error(io_errc::bad_header, "pixel count overflows sanity limit");
    }
    if (id_len > kMaxExtent) {
        throw io_error(io_errc::bad_header, "implausible id length");
    }
    if (c.left < id_len) {
        throw io_error(io_errc::truncated, "id shorter than declared");
    }
    v.width = static_cast<int>(width);
    v.height = static_cast<int>(height);
    v.frame_count = static_cast<int>(frames);
    v.channels = static_cast<int>(channels);
    v.label = static_cast<int>(label);
    v.id.assign(reinterpret_cast<const char*>(c.p), id_len);
    c.p += id_len;
    c.left -= id_len;

    if (c.left < n_pixels * 8) {
        throw io_error(io_errc::truncated,
                       "payload holds " + std::to_string(c.left / 8) + " of " +
                           std::to_string(n_pixels) + " pixels");
    }
    if (c.left > n_pixels * 8) {
        throw io_error(io_errc::trailing_data,
                       std::to_string(c.left - n_pixels * 8) + " bytes past the payload");
    }
    v.pixels.resize(n_pixels);
    for (std::uint64_t i = 0; i < n_pixels; ++i) {
        const double px = c.f64();
        if (!(px >= 0.0 && px <= 1.0)) {
            throw io_error(io_errc::pixel_out_of_range,
                           "pixel " + std::to_string(i) + " = " + std::to_string(px));
        }
        v.pixels[i] = px;
    }
    return v;
}

void write_video(const std::filesystem::path& path, const VideoSample& v) {
    const auto bytes = serialize_video(v);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error(io_errc::file_unreadable, "cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw io_error(io_errc::file_unreadable, "short write to " + path.string());
}

VideoSample read_video(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw io_error(io_errc::file_unreadable, "cannot open " + path.string());
    const std::streamsize size = f.tellg();
    f.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    f.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!f) throw io_error(io_errc::file_unreadable, "short read from " + path.string());
    return parse_video(bytes.data(), bytes.size());
}

}  // namespace stav
