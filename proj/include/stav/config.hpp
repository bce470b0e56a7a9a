#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "stav/loss.hpp"
#include "stav/profile.hpp"

namespace stav {

// Every tunable of the pipeline, filled in layers: built-in defaults, then a
// key=value config file, then command-line flags. `config_to_text` renders
// the fully resolved state for the per-run manifest.
struct RunConfig {
    std::string profile = "paper";
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency

    // Segmentation grid overrides; 0 keeps the profile's value.
    int A = 0;
    int M = 0;
    int m = 0;
    int L_min = 0;

    // Objective.
    double lambda = 1.0;
    double eta = 0.01;
    double alpha = 0.0;
    std::string variant = "l3";  // l2 | l3

    // Optimisation.
    double lr_classifier = 1e-2;
    double lr_cnn = 1e-3;
    int batch_size = 16;
    double dropout = 0.0;
    double tol = 1e-4;
    int max_outer_iters = 50;
    int inner_epochs = 5;

    // Clip generation.
    int classes = 2;
    int per_class = 40;
    int per_class_val = 0;
    int per_class_test = 10;
    int frames_per_anchor = 2;
    double noise = 0.05;
    int channels = 2;

    // Pre-training.
    int pretrain_epochs = 300;
    double pretrain_lr = 1e-2;

    // Profile with the A/M/m/L_min overrides applied (and validated).
    ArchProfile resolved_profile() const;
    LossConfig loss() const;
};

// Applies one key=value pair; unknown keys and unparsable values raise
// config_error.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

// key = value lines; '#' comments and blank lines ignored.
RunConfig parse_config_text(const std::string& text, RunConfig base);
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base);

// All keys in a fixed order, parseable by parse_config_text.
std::string config_to_text(const RunConfig& cfg);

}  // namespace stav
