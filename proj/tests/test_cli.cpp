#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "opmm/cli.hpp"
#include "opmm/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "opmm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = opmm::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("opmm_cli_" + std::to_string(::getpid()) + "_" +
                                             std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
    static inline int counter_ = 0;
};

std::size_t count_lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Recording with fixation padding around two synthetic saccades (one each way).
void write_recording(const std::string& path) {
    const auto model = opmm::komogortsev9_spec();
    const auto work = opmm::synthetic_workload(model, 2, opmm::default_perturbation_plan(model));
    std::ofstream f(path);
    f << "timestamp_ms,position_deg,valid\n";
    double t = 0.0;
    double x = 0.0;
    auto hold = [&](int n) {
        for (int i = 0; i < n; ++i) f << t++ << ',' << x << ",1\n";
    };
    hold(100);
    for (std::size_t k = 0; k < work.size(); ++k) {
        const auto& s = work[k];
        const double sign = k % 2 ? -1.0 : 1.0;
        const double base = x;
        for (std::size_t i = 1; i < s.positions.size(); ++i) {
            x = base + sign * (s.positions[i] - s.positions.front());
            f << t++ << ',' << x << ",1\n";
        }
        hold(100);
    }
}

}  // namespace

TEST_CASE("simulate writes one row per sample") {
    const auto r = run({"simulate"});
    CHECK(r.code == opmm::kExitOk);
    CHECK(count_lines(r.out) == 48);
    CHECK(r.out.starts_with("t_ms,position_deg,velocity_dps\n0.000000,0.000000,0.000000\n"));

    const auto shifted = run({"simulate", "--model", "komogortsev9", "--initial", "5", "--duration", "10"});
    CHECK(shifted.code == 0);
    CHECK(count_lines(shifted.out) == 12);
    CHECK(shifted.out.find("\n0.000000,5.000000,") != std::string::npos);
}

TEST_CASE("simulate argument errors") {
    CHECK(run({"simulate", "--set", "J=-1"}).code == opmm::kExitInvalidArgument);
    CHECK(run({"simulate", "--set", "J"}).code == opmm::kExitInvalidArgument);
    CHECK(run({"simulate", "--set", "J=abc"}).code == opmm::kExitInvalidArgument);
    CHECK(run({"simulate", "--set", "NOPE=1"}).code == opmm::kExitInvalidArgument);
    CHECK(run({"simulate", "--model", "nosuch"}).code == opmm::kExitInvalidArgument);
    CHECK(run({"simulate", "--dt", "0"}).code == opmm::kExitInvalidArgument);
    CHECK(run({}).code == opmm::kExitInvalidArgument);
    CHECK(run({"frobnicate"}).code == opmm::kExitInvalidArgument);
    CHECK(run({"--help"}).code == opmm::kExitOk);
}

TEST_CASE("detect and estimate on a recording") {
    TempDir dir;
    const auto rec = dir.file("rec.csv");
    write_recording(rec);

    const auto detected = run({"detect", rec});
    REQUIRE(detected.code == 0);
    CHECK(count_lines(detected.out) == 3);

    const auto results = dir.file("out.csv");
    const auto est = run({"estimate", rec, "--model", "komogortsev9", "--out", results, "--workers", "2",
                          "--exit-reason"});
    REQUIRE(est.code == 0);
    CHECK(est.out.find("saccades:            2") != std::string::npos);
    std::ifstream in(results);
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "SacNo,OptErr,CPU_check,SE,LT,PE_ag,PE_ant,Vis,FV_ag,FV_ant,Inert,Step,exit_reason");
    std::getline(in, row);
    CHECK(row.starts_with("1,"));

    // Results on stdout push the summary to stderr.
    const auto to_stdout = run({"estimate", rec, "--model", "komogortsev9"});
    CHECK(to_stdout.code == 0);
    CHECK(to_stdout.out.starts_with("SacNo,OptErr,CPU_check,SE,LT,"));
    CHECK(to_stdout.err.find("saccades:") != std::string::npos);

    // Two files: ids continue across inputs.
    const auto both = run({"detect", rec, rec});
    CHECK(count_lines(both.out) == 5);
    CHECK(both.out.find("\n4,") != std::string::npos);
}

TEST_CASE("estimate exit codes") {
    TempDir dir;
    const auto flat = dir.file("flat.csv");
    {
        std::ofstream f(flat);
        f << "timestamp_ms,position_deg,valid\n";
        for (int t = 0; t < 50; ++t) f << t << ",1.0,1\n";
    }
    CHECK(run({"estimate", flat}).code == opmm::kExitEmptyPipeline);
    CHECK(run({"estimate", dir.file("missing.csv")}).code == opmm::kExitIo);

    const auto broken = dir.file("broken.csv");
    {
        std::ofstream f(broken);
        f << "timestamp_ms,position_deg,valid\n0,1,1\n1,x,1\n";
    }
    const auto r = run({"detect", broken});
    CHECK(r.code == opmm::kExitIo);
    CHECK(r.err.find(":3:") != std::string::npos);
    CHECK(run({"estimate", flat, "--tol-x", "-1"}).code == opmm::kExitInvalidArgument);
    CHECK(run({"estimate", flat, "--workers", "0"}).code == opmm::kExitInvalidArgument);
}

TEST_CASE("bench on a synthetic workload") {
    const auto r = run({"bench", "--synthetic", "3", "--model", "komogortsev9", "--workers", "1,2"});
    REQUIRE(r.code == 0);
    CHECK(r.out.starts_with("workers,n,wall_time_s,throughput_per_s,speedup,mean_residual_deg\n1,3,"));
    CHECK(count_lines(r.out) == 3);
    CHECK_FALSE(r.err.empty());
    CHECK(run({"bench"}).code == opmm::kExitInvalidArgument);
}
