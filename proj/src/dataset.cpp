#include "stav/dataset.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "stav/errors.hpp"

namespace stav {

namespace {

constexpr const char* kHeader = "stav-dataset";
constexpr int kVersion = 1;

bool known_split(const std::string& s) { return s == "train" || s == "val" || s == "test"; }

std::vector<std::string> tokens_of(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string t;
    while (in >> t) out.push_back(t);
    return out;
}

// Byte offset where the k-th whitespace-separated token begins. The final
// field of a line is taken verbatim from there, so paths and class names may
// contain spaces.
std::size_t token_pos(const std::string& line, std::size_t k) {
    std::size_t i = 0;
    for (std::size_t t = 0;; ++t) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (t == k) return i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    }
}

std::string rest_from(const std::string& line, std::size_t token_index) {
    std::string rest = line.substr(token_pos(line, token_index));
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.pop_back();
    return rest;
}

}  // namespace

void DatasetManifest::validate() const {
    if (class_names.empty()) throw config_error("manifest declares no classes");
    for (const auto& e : entries) {
        if (e.label < 0 || e.label >= classes())
            throw config_error("manifest label " + std::to_string(e.label) + " outside [0, " +
                               std::to_string(classes()) + ") for " + e.path);
        if (!known_split(e.split)) throw config_error("unknown split tag '" + e.split + "'");
        if (e.path.empty()) throw config_error("manifest entry with empty path");
    }
}

std::string manifest_to_text(const DatasetManifest& m) {
    std::ostringstream out;
    out << kHeader << ' ' << kVersion << '\n';
    for (std::size_t i = 0; i < m.class_names.size(); ++i)
        out << "class " << i << ' ' << m.class_names[i] << '\n';
    for (const auto& [k, v] : m.generator) out << "gen " << k << ' ' << v << '\n';
    for (const auto& e : m.entries)
        out << "sample " << e.split << ' ' << e.label << ' ' << e.path << '\n';
    return out.str();
}

DatasetManifest manifest_from_text(const std::string& text) {
    DatasetManifest m;
    std::istringstream in(text);
    std::string line;
    bool saw_header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto toks = tokens_of(line);
        if (toks.empty()) continue;
        const std::string where = " (line " + std::to_string(lineno) + ")";
        if (!saw_header) {
            if (toks.size() != 2 || toks[0] != kHeader)
                throw config_error("manifest must start with '" + std::string(kHeader) + " " +
                                   std::to_string(kVersion) + "'" + where);
            if (toks[1] != std::to_string(kVersion))
                throw config_error("unsupported manifest version '" + toks[1] + "'" + where);
            saw_header = true;
            continue;
        }
        if (toks[0] == "class") {
            if (toks.size() < 3) throw config_error("class line needs an index and a name" + where);
            if (toks[1] != std::to_string(m.class_names.size()))
                throw config_error("class indices must be consecutive from 0" + where);
            m.class_names.push_back(rest_from(line, 2));
        } else if (toks[0] == "gen") {
            if (toks.size() < 3) throw config_error("gen line needs a key and a value" + where);
            m.generator.emplace_back(toks[1], rest_from(line, 2));
        } else if (toks[0] == "sample") {
            if (toks.size() < 4)
                throw config_error("sample line needs a split, a label and a path" + where);
            ManifestEntry e;
            e.split = toks[1];
            try {
                std::size_t used = 0;
                e.label = std::stoi(toks[2], &used);
                if (used != toks[2].size()) throw std::invalid_argument(toks[2]);
            } catch (const std::exception&) {
                throw config_error("sample label '" + toks[2] + "' is not an integer" + where);
            }
            e.path = rest_from(line, 3);
            m.entries.push_back(std::move(e));
        } else {
            throw config_error("unknown manifest directive '" + toks[0] + "'" + where);
        }
    }
    if (!saw_header) throw config_error("manifest is empty");
    m.validate();
    return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(io_errc::file_unreadable, "cannot open " + path.string());
    const std::string text = manifest_to_text(m);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw io_error(io_errc::file_unreadable, "cannot write " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(io_errc::file_unreadable, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return manifest_from_text(buf.str());
}

std::vector<VideoSample> load_split(const DatasetManifest& m, const std::filesystem::path& base,
                                    const std::string& split) {
    m.validate();
    std::vector<VideoSample> out;
    for (const auto& e : m.entries) {
        if (!split.empty() && e.split != split) continue;
        VideoSample v = read_video(base / e.path);
        if (v.label != e.label)
            throw config_error("label mismatch for " + e.path + ": file says " +
                               std::to_string(v.label) + ", manifest says " +
                               std::to_string(e.label));
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace stav
