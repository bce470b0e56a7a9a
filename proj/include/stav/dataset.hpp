#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "stav/video.hpp"

namespace stav {

struct ManifestEntry {
    std::string path;   // relative to the manifest's own directory
    int label = 0;
    std::string split;  // train / val / test
};

// Line-based structured text:
//   stav-dataset 1
//   class <index> <name>
//   gen <key> <value>          (generator parameters, for reproducibility)
//   sample <split> <label> <relative path>
// '#' starts a comment; blank lines are ignored.
struct DatasetManifest {
    std::vector<std::string> class_names;
    std::vector<ManifestEntry> entries;
    std::vector<std::pair<std::string, std::string>> generator;

    int classes() const { return static_cast<int>(class_names.size()); }
    void validate() const;  // label ranges, known split tags, nonempty paths
};

std::string manifest_to_text(const DatasetManifest& m);
DatasetManifest manifest_from_text(const std::string& text);

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

// Reads every sample of one split ("" = all splits), resolving paths against
// `base` (normally the manifest's directory). Each clip's embedded label must
// agree with the manifest.
std::vector<VideoSample> load_split(const DatasetManifest& m, const std::filesystem::path& base,
                                    const std::string& split);

}  // namespace stav
