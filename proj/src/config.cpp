#include "stav/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "stav/errors.hpp"

namespace stav {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        // "inf" is a legitimate tol (forces a single outer iteration).
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("value '" + value + "' for key '" + key + "' is not a number");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("value '" + value + "' for key '" + key + "' is not an integer");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size() || value.find('-') != std::string::npos)
            throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("value '" + value + "' for key '" + key +
                           "' is not a non-negative integer");
    }
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    const std::string k = trim(key);
    const std::string v = trim(value);
    if (k == "profile") {
        profile_by_name(v);  // rejects unknown names early
        cfg.profile = v;
    } else if (k == "seed") {
        cfg.seed = parse_u64(k, v);
    } else if (k == "threads") {
        cfg.threads = static_cast<int>(parse_int(k, v));
    } else if (k == "A") {
        cfg.A = static_cast<int>(parse_int(k, v));
    } else if (k == "M") {
        cfg.M = static_cast<int>(parse_int(k, v));
    } else if (k == "m") {
        cfg.m = static_cast<int>(parse_int(k, v));
    } else if (k == "L_min") {
        cfg.L_min = static_cast<int>(parse_int(k, v));
    } else if (k == "lambda") {
        cfg.lambda = parse_double(k, v);
    } else if (k == "eta") {
        cfg.eta = parse_double(k, v);
    } else if (k == "alpha") {
        cfg.alpha = parse_double(k, v);
    } else if (k == "variant") {
        const std::string lv = lower(v);
        if (lv != "l2" && lv != "l3")
            throw config_error("variant must be 'l2' or 'l3', got '" + v + "'");
        cfg.variant = lv;
    } else if (k == "lr_classifier") {
        cfg.lr_classifier = parse_double(k, v);
    } else if (k == "lr_cnn") {
        cfg.lr_cnn = parse_double(k, v);
    } else if (k == "batch_size") {
        cfg.batch_size = static_cast<int>(parse_int(k, v));
    } else if (k == "dropout") {
        cfg.dropout = parse_double(k, v);
    } else if (k == "tol") {
        cfg.tol = parse_double(k, v);
    } else if (k == "max_outer_iters") {
        cfg.max_outer_iters = static_cast<int>(parse_int(k, v));
    } else if (k == "inner_epochs") {
        cfg.inner_epochs = static_cast<int>(parse_int(k, v));
    } else if (k == "classes") {
        cfg.classes = static_cast<int>(parse_int(k, v));
    } else if (k == "per_class") {
        cfg.per_class = static_cast<int>(parse_int(k, v));
    } else if (k == "per_class_val") {
        cfg.per_class_val = static_cast<int>(parse_int(k, v));
    } else if (k == "per_class_test") {
        cfg.per_class_test = static_cast<int>(parse_int(k, v));
    } else if (k == "frames_per_anchor") {
        cfg.frames_per_anchor = static_cast<int>(parse_int(k, v));
    } else if (k == "noise") {
        cfg.noise = parse_double(k, v);
    } else if (k == "channels") {
        cfg.channels = static_cast<int>(parse_int(k, v));
    } else if (k == "pretrain_epochs") {
        cfg.pretrain_epochs = static_cast<int>(parse_int(k, v));
    } else if (k == "pretrain_lr") {
        cfg.pretrain_lr = parse_double(k, v);
    } else {
        throw config_error("unknown config key '" + k + "'");
    }
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("expected key = value on line " + std::to_string(lineno));
        try {
            apply_config_entry(base, t.substr(0, eq), t.substr(eq + 1));
        } catch (const config_error& e) {
            throw config_error(std::string(e.what()).substr(std::string("config error: ").size()) +
                               " (line " + std::to_string(lineno) + ")");
        }
    }
    return base;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(io_errc::file_unreadable, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), std::move(base));
}

std::string config_to_text(const RunConfig& cfg) {
    std::ostringstream out;
    out << "profile = " << cfg.profile << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "threads = " << cfg.threads << '\n';
    const ArchProfile prof = cfg.resolved_profile();
    out << "A = " << prof.seg.anchors << '\n';
    out << "M = " << prof.seg.segments << '\n';
    out << "m = " << prof.seg.frames_per_segment << '\n';
    out << "L_min = " << prof.seg.min_len << '\n';
    out << "lambda = " << format_double(cfg.lambda) << '\n';
    out << "eta = " << format_double(cfg.eta) << '\n';
    out << "alpha = " << format_double(cfg.alpha) << '\n';
    out << "variant = " << cfg.variant << '\n';
    out << "lr_classifier = " << format_double(cfg.lr_classifier) << '\n';
    out << "lr_cnn = " << format_double(cfg.lr_cnn) << '\n';
    out << "batch_size = " << cfg.batch_size << '\n';
    out << "dropout = " << format_double(cfg.dropout) << '\n';
    out << "tol = " << format_double(cfg.tol) << '\n';
    out << "max_outer_iters = " << cfg.max_outer_iters << '\n';
    out << "inner_epochs = " << cfg.inner_epochs << '\n';
    out << "classes = " << cfg.classes << '\n';
    out << "per_class = " << cfg.per_class << '\n';
    out << "per_class_val = " << cfg.per_class_val << '\n';
    out << "per_class_test = " << cfg.per_class_test << '\n';
    out << "frames_per_anchor = " << cfg.frames_per_anchor << '\n';
    out << "noise = " << format_double(cfg.noise) << '\n';
    out << "channels = " << cfg.channels << '\n';
    out << "pretrain_epochs = " << cfg.pretrain_epochs << '\n';
    out << "pretrain_lr = " << format_double(cfg.pretrain_lr) << '\n';
    return out.str();
}

ArchProfile RunConfig::resolved_profile() const {
    ArchProfile prof = profile_by_name(profile);
    if (A > 0) prof.seg.anchors = A;
    if (M > 0) prof.seg.segments = M;
    if (m > 0) prof.seg.frames_per_segment = m;
    if (L_min > 0) prof.seg.min_len = L_min;
    prof.validate();
    return prof;
}

LossConfig RunConfig::loss() const {
    LossConfig c;
    c.lambda = lambda;
    c.eta = eta;
    c.alpha = alpha;
    c.variant = variant == "l2" ? LossConfig::Variant::L2 : LossConfig::Variant::L3;
    return c;
}

}  // namespace stav
