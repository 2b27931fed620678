#include "opmm/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "opmm/error.hpp"
#include "opmm/estimation.hpp"
#include "opmm/plant_model.hpp"
#include "opmm/report.hpp"
#include "opmm/synthetic.hpp"
#include "opmm/trajectory_io.hpp"

namespace opmm {
namespace {

struct Options {
    std::string model = "komogortsev18";
    std::string out = "-";
    std::vector<std::string> inputs;
    std::size_t workers = 1;
    DetectionOptions detection;
    EstimationConfig estimation;
    bool exit_reason_column = false;

    // simulate
    std::vector<std::string> overrides;
    double duration = 46.0;
    double amplitude = 10.0;
    double dt = 1.0;
    double initial = 0.0;

    // bench
    std::size_t synthetic = 0;
    std::vector<std::size_t> worker_counts{1, 2, 4, 8};
};

// Writes to the file named by `path`, or to `fallback` for "-".
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (path == "-") {
            stream_ = &fallback;
        } else {
            file_.open(path, std::ios::binary);
            if (!file_) throw IoError("cannot open '" + path + "' for writing");
            stream_ = &file_;
        }
    }
    std::ostream& stream() { return *stream_; }
    bool is_stdout() const { return stream_ != &file_; }
    void finish() {
        stream_->flush();
        if (!*stream_) throw IoError("write failed");
    }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

void add_model(CLI::App* cmd, Options& o) {
    cmd->add_option("--model", o.model, "Plant model id")->capture_default_str();
}

void add_out(CLI::App* cmd, Options& o) {
    cmd->add_option("--out", o.out, "Output file ('-' for standard output)")->capture_default_str();
}

void add_detection(CLI::App* cmd, Options& o) {
    cmd->add_option("--ivt-threshold", o.detection.ivt_threshold, "I-VT velocity threshold (deg/s)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--min-amplitude", o.detection.min_amplitude, "Minimum saccade amplitude (deg)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--min-duration", o.detection.min_duration, "Minimum saccade duration (ms)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
}

void add_estimation(CLI::App* cmd, Options& o) {
    cmd->add_option("--tol-x", o.estimation.tol_x, "Simplex coordinate tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--tol-f", o.estimation.tol_f, "Simplex function-value tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-iters", o.estimation.max_iterations,
                    "Iteration cap per saccade (default 200 x parameters)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--time-budget", o.estimation.time_budget, "Wall-clock limit per saccade (s)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

std::shared_ptr<const ModelSpec> find_model(const std::string& id) {
    return ModelRegistry::global().lookup(id);
}

std::vector<SaccadeTrajectory> load_saccades(const Options& o) {
    std::vector<SaccadeTrajectory> all;
    int next_id = 1;
    for (const auto& path : o.inputs) {
        auto found = detect_saccades(load_recording(path), o.detection, next_id);
        for (const auto& s : found) next_id = std::max(next_id, s.saccade_id + 1);
        all.insert(all.end(), std::make_move_iterator(found.begin()),
                   std::make_move_iterator(found.end()));
    }
    return all;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const auto model = find_model(o.model);
    OpcVector opc = model->defaults;
    for (const auto& entry : o.overrides) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) throw InputError("--set expects NAME=VALUE, got '" + entry + "'");
        const std::size_t index = model->index_of(entry.substr(0, eq));
        try {
            std::size_t used = 0;
            const std::string text = entry.substr(eq + 1);
            opc.values[index] = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
        } catch (const std::logic_error&) {
            throw InputError("--set " + entry + ": value is not a number");
        }
    }
    const auto traj = simulate(*model, opc, o.duration, o.amplitude, o.dt, o.initial);

    Sink sink(o.out, out);
    auto& os = sink.stream();
    os << "t_ms,position_deg,velocity_dps\n";
    for (std::size_t k = 0; k < traj.positions.size(); ++k) {
        os << format_fixed6(static_cast<double>(k) * traj.dt) << ',' << format_fixed6(traj.positions[k])
           << ',' << format_fixed6(traj.velocities[k]) << '\n';
    }
    sink.finish();
    return kExitOk;
}

int cmd_detect(const Options& o, std::ostream& out) {
    const auto saccades = load_saccades(o);
    Sink sink(o.out, out);
    auto& os = sink.stream();
    os << "saccade_id,onset_ms,duration_ms,amplitude_deg,n_samples\n";
    for (const auto& s : saccades) {
        os << s.saccade_id << ',' << format_fixed6(s.onset_time) << ',' << format_fixed6(s.duration())
           << ',' << format_fixed6(s.amplitude()) << ',' << s.positions.size() << '\n';
    }
    sink.finish();
    return kExitOk;
}

int cmd_estimate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto model = find_model(o.model);
    o.estimation.validate();
    const auto saccades = load_saccades(o);
    if (saccades.empty()) {
        err << "no saccades left after detection and filtering\n";
        return kExitEmptyPipeline;
    }

    const auto started = std::chrono::steady_clock::now();
    const auto results = estimate_batch(saccades, *model, o.estimation, o.workers);
    const double wall = std::max(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(), 1e-9);

    Sink sink(o.out, out);
    write_results_csv(results, *model, sink.stream(), o.exit_reason_column);
    sink.finish();

    std::vector<double> errors;
    std::vector<std::size_t> counts;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].exit_reason == ExitReason::failed) {
            ++failed;
            err << "saccade " << results[i].saccade_id << ": " << results[i].error << '\n';
            continue;
        }
        errors.push_back(results[i].opt_err);
        counts.push_back(saccades[i].positions.size());
    }

    std::ostream& summary = sink.is_stdout() ? err : out;
    summary << "saccades:            " << results.size() << '\n'
            << "estimated:           " << errors.size() << '\n'
            << "failed:              " << failed << '\n'
            << "workers:             " << o.workers << '\n'
            << "wall time [s]:       " << format_fixed6(wall) << '\n'
            << "throughput [/s]:     " << format_fixed6(throughput(results.size(), wall)) << '\n';
    if (!errors.empty()) {
        summary << "mean residual [deg]: " << format_fixed6(accuracy(errors, counts)) << '\n';
    }
    return errors.empty() ? kExitEmptyPipeline : kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
    const auto model = find_model(o.model);
    o.estimation.validate();
    if (o.synthetic == 0 && o.inputs.empty()) {
        throw InputError("bench needs --synthetic N or input recordings");
    }
    const auto saccades = o.synthetic > 0
                              ? synthetic_workload(*model, o.synthetic, default_perturbation_plan(*model))
                              : load_saccades(o);
    if (saccades.empty()) {
        err << "no saccades to benchmark\n";
        return kExitEmptyPipeline;
    }
    const auto rows = benchmark(saccades, *model, o.estimation, o.worker_counts);
    write_benchmark_text(rows, o.out == "-" ? err : out);
    Sink sink(o.out, out);
    write_benchmark_csv(rows, sink.stream());
    sink.finish();
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Oculomotor plant simulation and parallel OPC estimation"};
    app.require_subcommand(1);

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one saccade and write its trajectory");
    add_model(simulate_cmd, o);
    add_out(simulate_cmd, o);
    simulate_cmd->add_option("--set", o.overrides, "Override a parameter, NAME=VALUE (repeatable)");
    simulate_cmd->add_option("--duration", o.duration, "Saccade duration (ms)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    simulate_cmd->add_option("--amplitude", o.amplitude, "Target amplitude (deg)")->capture_default_str();
    simulate_cmd->add_option("--dt", o.dt, "Integration step (ms)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    simulate_cmd->add_option("--initial", o.initial, "Initial eye position (deg)")->capture_default_str();

    auto* detect_cmd = app.add_subcommand("detect", "List the saccades found in recordings");
    detect_cmd->add_option("inputs", o.inputs, "Recording CSV files")->required();
    add_out(detect_cmd, o);
    add_detection(detect_cmd, o);

    auto* estimate_cmd = app.add_subcommand("estimate", "Estimate an OPC vector for every saccade");
    estimate_cmd->add_option("inputs", o.inputs, "Recording CSV files")->required();
    add_model(estimate_cmd, o);
    add_out(estimate_cmd, o);
    add_detection(estimate_cmd, o);
    add_estimation(estimate_cmd, o);
    estimate_cmd->add_option("--workers", o.workers, "Concurrent estimation tasks")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    estimate_cmd->add_flag("--exit-reason", o.exit_reason_column, "Append an exit_reason column");

    auto* bench_cmd = app.add_subcommand("bench", "Compare estimation throughput across worker counts");
    bench_cmd->add_option("inputs", o.inputs, "Recording CSV files");
    bench_cmd->add_option("--synthetic", o.synthetic, "Generate N synthetic saccades instead")
        ->check(CLI::PositiveNumber);
    add_model(bench_cmd, o);
    add_out(bench_cmd, o);
    add_detection(bench_cmd, o);
    add_estimation(bench_cmd, o);
    bench_cmd->add_option("--workers", o.worker_counts, "Worker counts, comma separated")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o_msg, e_msg;
        const int code = app.exit(e, o_msg, e_msg);
        out << o_msg.str();
        err << e_msg.str();
        return code == 0 ? kExitOk : kExitInvalidArgument;
    }

    try {
        if (*simulate_cmd) return cmd_simulate(o, out);
        if (*detect_cmd) return cmd_detect(o, out);
        if (*estimate_cmd) return cmd_estimate(o, out, err);
        if (*bench_cmd) return cmd_bench(o, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidArgument;
    } catch (const RegistryError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidArgument;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidArgument;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitInvalidArgument;
}

}  // namespace opmm
