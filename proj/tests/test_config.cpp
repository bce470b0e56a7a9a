#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "stav/config.hpp"
#include "stav/errors.hpp"

using namespace stav;

TEST_CASE("config defaults match the documented contract") {
    const RunConfig c;
    CHECK(c.profile == "paper");
    CHECK(c.lr_classifier == 1e-2);
    CHECK(c.lr_cnn == 1e-3);
    CHECK(c.batch_size == 16);
    CHECK(c.inner_epochs == 5);
    CHECK(c.tol == 1e-4);
    CHECK(c.max_outer_iters == 50);
    CHECK(c.lambda == 1.0);
    CHECK(c.eta == 0.01);
    CHECK(c.alpha == 0.0);
    CHECK(c.variant == "l3");
    CHECK(c.dropout == 0.0);
}

TEST_CASE("config text parsing handles comments, spacing and errors") {
    const std::string text =
        "# a comment\n"
        "profile = mini\n"
        "  lambda=2.5   # tail comment\n"
        "variant = L2\n"
        "tol = inf\n"
        "seed = 12345\n"
        "\n"
        "M = 3\n";
    const RunConfig c = parse_config_text(text, RunConfig{});
    CHECK(c.profile == "mini");
    CHECK(c.lambda == 2.5);
    CHECK(c.variant == "l2");
    CHECK(std::isinf(c.tol));
    CHECK(c.seed == 12345);
    CHECK(c.M == 3);

    CHECK_THROWS_AS(parse_config_text("nonsense\n", RunConfig{}), config_error);
    CHECK_THROWS_AS(parse_config_text("unknown_key = 1\n", RunConfig{}), config_error);
    CHECK_THROWS_AS(parse_config_text("lambda = abc\n", RunConfig{}), config_error);
    CHECK_THROWS_AS(parse_config_text("batch_size = 1.5\n", RunConfig{}), config_error);
    CHECK_THROWS_AS(parse_config_text("variant = l9\n", RunConfig{}), config_error);
    CHECK_THROWS_AS(parse_config_text("profile = huge\n", RunConfig{}), config_error);
    CHECK_THROWS_AS(parse_config_text("seed = -3\n", RunConfig{}), config_error);

    // Line numbers surface in diagnostics.
    try {
        parse_config_text("profile = mini\nbroken = 1\n", RunConfig{});
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("resolved profile applies the segmentation overrides") {
    RunConfig c;
    c.profile = "mini";
    const ArchProfile base = c.resolved_profile();
    CHECK(base.seg.anchors == 12);
    CHECK(base.seg.segments == 3);

    c.M = 1;
    c.L_min = 12;
    const ArchProfile ablation = c.resolved_profile();
    CHECK(ablation.seg.segments == 1);
    CHECK(ablation.seg.min_len == 12);

    c.M = 5;
    c.L_min = 4;  // 5 * 4 > 12 anchors: impossible
    CHECK_THROWS_AS(c.resolved_profile(), config_error);
}

TEST_CASE("config render and reparse is lossless") {
    RunConfig c;
    c.profile = "mini";
    c.eta = 0.125;
    c.alpha = 3.5;
    c.dropout = 0.25;
    c.tol = 1e-6;
    c.noise = 0.07;
    c.classes = 3;
    c.threads = 4;
    const std::string text = config_to_text(c);
    const RunConfig r = parse_config_text(text, RunConfig{});
    CHECK(config_to_text(r) == text);
    CHECK(r.eta == c.eta);
    CHECK(r.dropout == c.dropout);
    CHECK(r.classes == 3);
    CHECK(r.resolved_profile().seg.segments == c.resolved_profile().seg.segments);
}

TEST_CASE("loss mapping carries the objective settings") {
    RunConfig c;
    c.lambda = 2.0;
    c.eta = 0.3;
    c.alpha = 7.0;
    c.variant = "l2";
    const LossConfig l = c.loss();
    CHECK(l.lambda == 2.0);
    CHECK(l.eta == 0.3);
    CHECK(l.alpha == 7.0);
    CHECK(l.variant == LossConfig::Variant::L2);
    c.variant = "l3";
    CHECK(c.loss().variant == LossConfig::Variant::L3);
}

TEST_CASE("config file loading reports unreadable paths") {
    CHECK_THROWS_AS(load_config_file("/nonexistent/stav.cfg", RunConfig{}), io_error);

    const auto path = std::filesystem::temp_directory_path() / "stav_cfg_test.cfg";
    {
        std::ofstream out(path);
        out << "profile = mini\nnoise = 0.2\n";
    }
    const RunConfig c = load_config_file(path, RunConfig{});
    CHECK(c.profile == "mini");
    CHECK(c.noise == 0.2);
    std::filesystem::remove(path);
}
