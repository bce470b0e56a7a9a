// Command line front end for the latently segmented activity recogniser:
//   generate   synthesise a planted-boundary clip corpus
//   pretrain   cross-entropy warm start on the gray channel
//   train      alternating latent/gradient training
//   eval       metrics of a trained model on one split
//   predict    label a single clip
//   check-grad finite-difference audit of the analytic gradients
//   enumerate  count admissible segment assignments
// Every run writes the fully resolved configuration to <out>/run_manifest.txt.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "stav/checkpoint.hpp"
#include "stav/config.hpp"
#include "stav/dataset.hpp"
#include "stav/errors.hpp"
#include "stav/generator.hpp"
#include "stav/gradcheck.hpp"
#include "stav/predictor.hpp"
#include "stav/rng.hpp"
#include "stav/trainer.hpp"

namespace fs = std::filesystem;
using namespace stav;

namespace {

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(io_errc::file_unreadable, "cannot open " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw io_error(io_errc::file_unreadable, "cannot write " + path.string());
}

void write_run_manifest(const fs::path& out_dir, const std::string& command,
                        const RunConfig& rc) {
    fs::create_directories(out_dir);
    write_text_file(out_dir / "run_manifest.txt",
                    "# command: " + command + "\n" + config_to_text(rc));
}

TrainConfig train_config(const RunConfig& rc, const fs::path& checkpoint_dir) {
    TrainConfig tc;
    tc.loss = rc.loss();
    tc.lr_classifier = rc.lr_classifier;
    tc.lr_cnn = rc.lr_cnn;
    tc.batch_size = rc.batch_size;
    tc.inner_epochs = rc.inner_epochs;
    tc.max_outer_iters = rc.max_outer_iters;
    tc.tol = rc.tol;
    tc.dropout = rc.dropout;
    tc.threads = rc.threads;
    tc.seed = rc.seed;
    tc.checkpoint_dir = checkpoint_dir;
    return tc;
}

GeneratorConfig generator_config(const RunConfig& rc) {
    GeneratorConfig g;
    g.profile = rc.resolved_profile();
    g.classes = rc.classes;
    g.per_class = rc.per_class;
    g.per_class_val = rc.per_class_val;
    g.per_class_test = rc.per_class_test;
    g.frames_per_anchor = rc.frames_per_anchor;
    g.channels = rc.channels;
    g.noise = rc.noise;
    g.seed = rc.seed;
    return g;
}

std::string assignment_str(const LatentAssignment& h) {
    std::ostringstream out;
    out << "starts";
    for (int v : h.starts) out << ' ' << v;
    out << "  lengths";
    for (int v : h.lengths) out << ' ' << v;
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deep structured activity recognition over latent temporal segments"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string profile_flag;
    std::string out_dir = "stav_out";
    std::uint64_t seed_flag = 0;
    int threads_flag = -1;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--profile", profile_flag, "architecture profile")
        ->check(CLI::IsMember({"paper", "mini"}));
    app.add_option("--seed", seed_flag, "master random seed");
    app.add_option("--out", out_dir, "output directory (default stav_out)");
    app.add_option("--threads", threads_flag, "worker threads, 0 = hardware concurrency");

    CLI::App* cmd_generate = app.add_subcommand("generate", "synthesise a clip corpus");
    CLI::App* cmd_pretrain = app.add_subcommand("pretrain", "gray-channel warm start");
    CLI::App* cmd_train = app.add_subcommand("train", "train the full model");
    CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a trained model");
    CLI::App* cmd_predict = app.add_subcommand("predict", "label one clip");
    CLI::App* cmd_checkgrad = app.add_subcommand("check-grad", "audit analytic gradients");
    CLI::App* cmd_enumerate = app.add_subcommand("enumerate", "count admissible assignments");

    std::string data_dir, model_path, init_path, input_path, split = "test";
    cmd_pretrain->add_option("--data", data_dir, "dataset directory (with manifest.txt)")
        ->required();
    cmd_train->add_option("--data", data_dir, "dataset directory (with manifest.txt)")
        ->required();
    cmd_train->add_option("--init", init_path, "checkpoint to warm start from");
    cmd_eval->add_option("--data", data_dir, "dataset directory (with manifest.txt)")
        ->required();
    cmd_eval->add_option("--model", model_path, "model checkpoint")->required();
    cmd_eval->add_option("--split", split, "split to evaluate (default test)");
    cmd_predict->add_option("--model", model_path, "model checkpoint")->required();
    cmd_predict->add_option("--input", input_path, "clip to label")->required();

    int enum_A = 0, enum_M = 0, enum_m = 0, enum_Lmin = 0;
    cmd_enumerate->add_option("--A", enum_A, "anchor count");
    cmd_enumerate->add_option("--M", enum_M, "segment count");
    cmd_enumerate->add_option("--m", enum_m, "frames per segment (irrelevant to the count)");
    cmd_enumerate->add_option("--Lmin", enum_Lmin, "minimum segment length");

    CLI11_PARSE(app, argc, argv);

    try {
        // Precedence: defaults, then the config file, then explicit flags.
        RunConfig rc;
        if (app.count("--profile")) rc.profile = profile_flag;
        if (!config_path.empty()) rc = load_config_file(config_path, rc);
        if (app.count("--profile")) rc.profile = profile_flag;
        if (app.count("--seed")) rc.seed = seed_flag;
        if (app.count("--threads")) rc.threads = threads_flag;

        const fs::path out(out_dir);

        if (cmd_enumerate->parsed()) {
            SegmentationConfig seg = rc.resolved_profile().seg;
            if (cmd_enumerate->count("--A")) seg.anchors = enum_A;
            if (cmd_enumerate->count("--M")) seg.segments = enum_M;
            if (cmd_enumerate->count("--m")) seg.frames_per_segment = enum_m;
            if (cmd_enumerate->count("--Lmin")) seg.min_len = enum_Lmin;
            seg.validate();
            write_run_manifest(out, "enumerate", rc);
            std::cout << count_assignments(seg) << '\n';
            return 0;
        }

        if (cmd_checkgrad->parsed()) {
            write_run_manifest(out, "check-grad", rc);
            const GradCheckReport r = gradient_check(rc.resolved_profile(), rc.seed);
            const std::string summary = gradcheck_summary(r);
            std::cout << summary;
            write_text_file(out / "gradcheck.txt", summary);
            const bool ok = r.network_max < 1e-5 && r.classifier_max < 1e-8;
            std::cout << (ok ? "PASS" : "FAIL")
                      << " (network < 1e-5, classifier < 1e-8 required)\n";
            return ok ? 0 : 1;
        }

        if (cmd_generate->parsed()) {
            write_run_manifest(out, "generate", rc);
            const DatasetManifest m = generate_dataset(generator_config(rc), out);
            std::cout << "wrote " << m.entries.size() << " clips (" << m.classes()
                      << " classes) to " << out.string() << '\n';
            return 0;
        }

        if (cmd_pretrain->parsed()) {
            write_run_manifest(out, "pretrain", rc);
            const DatasetManifest m = read_manifest(fs::path(data_dir) / "manifest.txt");
            const std::vector<VideoSample> samples = load_split(m, data_dir, "train");

            const ArchProfile prof = rc.resolved_profile();
            ArchProfile gray = prof;
            gray.channels = 1;
            gray.name = prof.name + "-gray";

            PretrainConfig pc;
            pc.lr = rc.pretrain_lr;
            pc.epochs = rc.pretrain_epochs;
            pc.batch_size = rc.batch_size;
            pc.threads = rc.threads;
            pc.seed = rc.seed;
            const PretrainResult r = pretrain_softmax(samples, gray, m.classes(), pc);
            for (std::size_t e = 0; e < r.ce_history.size(); ++e)
                std::cout << "epoch " << e + 1 << ": cross-entropy " << r.ce_history[e] << '\n';

            const ModelParams full = expand_pretrained(r.params, prof, m.classes());
            save_model(out / "pretrained.lsnm", full);
            std::cout << "wrote " << (out / "pretrained.lsnm").string() << '\n';
            return 0;
        }

        if (cmd_train->parsed()) {
            write_run_manifest(out, "train", rc);
            const DatasetManifest m = read_manifest(fs::path(data_dir) / "manifest.txt");
            const std::vector<VideoSample> samples = load_split(m, data_dir, "train");

            const fs::path ckpt = out / "checkpoints";
            fs::create_directories(ckpt);
            const TrainConfig tc = train_config(rc, ckpt);

            TrainResult r;
            if (!init_path.empty()) {
                ModelParams initial = load_model(init_path);
                if (initial.classes() != m.classes())
                    throw config_error("warm-start checkpoint has " +
                                       std::to_string(initial.classes()) +
                                       " classes, dataset has " + std::to_string(m.classes()));
                r = train_from(samples, std::move(initial), tc);
            } else {
                r = train(samples, rc.resolved_profile(), m.classes(), tc);
            }

            write_text_file(out / "loss_history.csv", history_csv(r.history));
            save_model(out / "model.lsnm", r.params);
            const LossRow& last = r.history.back();
            std::cout << "outer iterations: " << r.outer_iterations << '\n'
                      << "final objective: " << last.objective << " (hinge " << last.hinge
                      << ", radius " << last.radius << ")\n"
                      << "train accuracy at final assignments: " << last.train_accuracy << '\n'
                      << "wrote " << (out / "model.lsnm").string() << " and "
                      << (out / "loss_history.csv").string() << '\n';
            return 0;
        }

        if (cmd_eval->parsed()) {
            write_run_manifest(out, "eval", rc);
            const DatasetManifest m = read_manifest(fs::path(data_dir) / "manifest.txt");
            const std::vector<VideoSample> samples = load_split(m, data_dir, split);
            if (samples.empty()) throw config_error("split '" + split + "' is empty");
            const ModelParams params = load_model(model_path);
            const Metrics metrics = evaluate(samples, params, rc.threads);
            write_text_file(out / "metrics.csv", metrics_csv(metrics, m.class_names));
            std::cout << metrics_table(metrics, m.class_names)
                      << "wrote " << (out / "metrics.csv").string() << '\n';
            return 0;
        }

        if (cmd_predict->parsed()) {
            write_run_manifest(out, "predict", rc);
            const VideoSample clip = read_video(input_path);
            const ModelParams params = load_model(model_path);
            const Prediction p = predict(clip, params, rc.threads);
            std::ostringstream report;
            report << "label " << p.label << '\n'
                   << "score " << p.score << '\n'
                   << assignment_str(p.assignment) << '\n';
            for (std::size_t c = 0; c < p.per_class_best.size(); ++c)
                report << "class " << c << " best " << p.per_class_best[c] << '\n';
            std::cout << report.str();
            write_text_file(out / "prediction.txt", report.str());
            return 0;
        }

        throw config_error("no subcommand dispatched");
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
}
