// Drives the installed command line binary through a complete pipeline:
// generate -> pretrain -> train (warm start) -> eval -> predict, plus the
// enumerate and check-grad entry points and the error paths.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef ACTIVITY_BIN
#error "ACTIVITY_BIN must point at the activity executable"
#endif

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(ACTIVITY_BIN) + " " + args + " 2>&1";
    std::FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
    const int status = pclose(pipe);
    r.exit_code = status >= 256 ? status / 256 : status;  // WEXITSTATUS without <sys/wait.h>
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(bool(in));
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

fs::path fresh_dir(const char* tag) {
    const fs::path dir = fs::temp_directory_path() / (std::string("stav_cli_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("enumerate prints the assignment count") {
    const fs::path dir = fresh_dir("enum");
    const RunResult r =
        run("enumerate --A 12 --M 3 --Lmin 3 --out " + (dir / "e").string());
    CHECK(r.exit_code == 0);
    CHECK(r.output == "10\n");
    CHECK(fs::exists(dir / "e" / "run_manifest.txt"));

    const RunResult paper = run("--profile paper enumerate --out " + (dir / "p").string());
    CHECK(paper.exit_code == 0);
    CHECK(paper.output == "286\n");
    fs::remove_all(dir);
}

TEST_CASE("check-grad on the mini profile reports success") {
    const fs::path dir = fresh_dir("cg");
    const RunResult r = run("--profile mini --seed 3 check-grad --out " + dir.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("network max rel err") != std::string::npos);
    CHECK(r.output.find("PASS") != std::string::npos);
    CHECK(fs::exists(dir / "gradcheck.txt"));
    fs::remove_all(dir);
}

TEST_CASE("the full pipeline runs and is reproducible") {
    const fs::path dir = fresh_dir("pipe");
    const fs::path cfg = dir / "run.cfg";
    {
        std::ofstream out(cfg);
        out << "profile = mini\n"
               "seed = 5\n"
               "per_class = 6\n"
               "per_class_test = 2\n"
               "max_outer_iters = 3\n"
               "inner_epochs = 2\n"
               "eta = 0.01\n"
               "tol = 0\n"
               "pretrain_epochs = 3\n";
    }
    const std::string base = "--config " + cfg.string();

    const fs::path data = dir / "data";
    RunResult r = run(base + " generate --out " + data.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("wrote 16 clips") != std::string::npos);
    CHECK(fs::exists(data / "manifest.txt"));
    CHECK(fs::exists(data / "train_c0_000.stav.bounds"));

    const fs::path pre = dir / "pre";
    r = run(base + " pretrain --data " + data.string() + " --out " + pre.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("cross-entropy") != std::string::npos);
    REQUIRE(fs::exists(pre / "pretrained.lsnm"));

    const fs::path run1 = dir / "run1";
    r = run(base + " train --data " + data.string() + " --init " +
            (pre / "pretrained.lsnm").string() + " --out " + run1.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("outer iterations: 3") != std::string::npos);
    REQUIRE(fs::exists(run1 / "model.lsnm"));
    REQUIRE(fs::exists(run1 / "loss_history.csv"));
    CHECK(fs::exists(run1 / "checkpoints" / "iter_003.lsnm"));
    CHECK(fs::exists(run1 / "run_manifest.txt"));

    // Same configuration, fresh output directory: bit-identical artifacts.
    const fs::path run2 = dir / "run2";
    r = run(base + " train --data " + data.string() + " --init " +
            (pre / "pretrained.lsnm").string() + " --out " + run2.string());
    CHECK(r.exit_code == 0);
    CHECK(slurp(run1 / "model.lsnm") == slurp(run2 / "model.lsnm"));
    CHECK(slurp(run1 / "loss_history.csv") == slurp(run2 / "loss_history.csv"));

    const fs::path ev = dir / "eval";
    r = run(base + " eval --data " + data.string() + " --model " +
            (run1 / "model.lsnm").string() + " --out " + ev.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("average") != std::string::npos);
    CHECK(fs::exists(ev / "metrics.csv"));

    const fs::path pr = dir / "pred";
    r = run(base + " predict --model " + (run1 / "model.lsnm").string() + " --input " +
            (data / "test_c1_000.stav").string() + " --out " + pr.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("label ") != std::string::npos);
    CHECK(r.output.find("starts ") != std::string::npos);
    CHECK(fs::exists(pr / "prediction.txt"));

    fs::remove_all(dir);
}

TEST_CASE("failures exit nonzero with a one-line diagnostic") {
    const fs::path dir = fresh_dir("fail");

    RunResult r = run("train --data " + (dir / "missing").string() + " --out " +
                      (dir / "o1").string());
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("file unreadable") != std::string::npos);

    const fs::path bad = dir / "bad.cfg";
    {
        std::ofstream out(bad);
        out << "bogus = 1\n";
    }
    r = run("--config " + bad.string() + " enumerate --out " + (dir / "o2").string());
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("unknown config key") != std::string::npos);

    r = run("--profile huge enumerate --out " + (dir / "o3").string());
    CHECK(r.exit_code != 0);

    r = run("enumerate --A 5 --M 3 --Lmin 3 --out " + (dir / "o4").string());
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("config error") != std::string::npos);

    // Corrupt checkpoint: typed error surfaces as the diagnostic.
    const fs::path fake = dir / "fake.lsnm";
    {
        std::ofstream out(fake, std::ios::binary);
        out << "not a checkpoint at all";
    }
    r = run("predict --model " + fake.string() + " --input nowhere.stav --out " +
            (dir / "o5").string());
    CHECK(r.exit_code != 0);

    fs::remove_all(dir);
}
