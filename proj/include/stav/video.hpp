#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stav/errors.hpp"

namespace stav {

// In-memory clip: pixels in [0, 1], frame-major with one plane per channel,
// i.e. pixels[((f * channels + c) * height + y) * width + x].
struct VideoSample {
    int width = 0;
    int height = 0;
    int frame_count = 0;
    int channels = 1;
    int label = 0;
    std::string id;
    std::vector<double> pixels;

    std::size_t plane_size() const { return std::size_t(height) * width; }
    std::size_t pixel_count() const {
        return std::size_t(frame_count) * channels * plane_size();
    }
    std::size_t index(int f, int c, int y, int x) const {
        return ((std::size_t(f) * channels + c) * height + y) * width + x;
    }
    double at(int f, int c, int y, int x) const { return pixels[index(f, c, y, x)]; }
    double& at(int f, int c, int y, int x) { return pixels[index(f, c, y, x)]; }

    void validate() const;  // throws io_error on malformed dimensions or pixels
};

// Binary clip format, version 1, everything little-endian:
//   "STAV" | u32 version | u32 width | u32 height | u32 frame_count |
//   u32 channels | u32 label | u32 id_length | id bytes | f64 pixel payload.
// Payload length must be exactly width*height*frame_count*channels doubles.
std::vector<std::uint8_t> serialize_video(const VideoSample& v);
VideoSample parse_video(const std::uint8_t* data, std::size_t size);

void write_video(const std::filesystem::path& path, const VideoSample& v);
VideoSample read_video(const std::filesystem::path& path);

}  // namespace stav
