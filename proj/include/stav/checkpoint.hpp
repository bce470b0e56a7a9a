#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stav/net.hpp"

namespace stav {

// Model checkpoint, version 1, everything little-endian:
//   "LSNM" | u32 version | u32 name_length | profile name bytes |
//   u32 architecture fields (frame_h, frame_w, channels, c1, c2, c3,
//   k1 h/w/t, k2 h/w/t, k3 h/w, pool1 h/w, pool2 h/w, fc_out, anchors,
//   segments, frames_per_segment, min_len, classes) |
//   f64 dropout_rate | f64 parameter payload.
// Parameters appear in declaration order (see param_refs); the payload length
// is fully determined by the header, so a well-formed file round-trips to an
// identical model and malformed input raises a typed io_error.
std::vector<std::uint8_t> serialize_model(const ModelParams& p);
ModelParams parse_model(const std::uint8_t* data, std::size_t size);

void save_model(const std::filesystem::path& path, const ModelParams& p);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace stav
