#include "opmm/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "opmm/error.hpp"

namespace opmm {

double speedup(double t_reference_s, double t_candidate_s) {
    if (!(t_reference_s > 0.0) || !(t_candidate_s > 0.0)) {
        throw InputError("speedup needs positive run times");
    }
    return t_reference_s / t_candidate_s;
}

double throughput(std::size_t n, double wall_time_s) {
    if (!(wall_time_s > 0.0)) throw InputError("throughput needs a positive wall time");
    return static_cast<double>(n) / wall_time_s;
}

double accuracy(std::span<const double> per_saccade_errors,
                std::span<const std::size_t> per_saccade_sample_counts) {
    if (per_saccade_errors.empty()) throw InputError("accuracy needs at least one saccade");
    if (per_saccade_errors.size() != per_saccade_sample_counts.size()) {
        throw InputError("accuracy needs one sample count per error");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < per_saccade_errors.size(); ++i) {
        const std::size_t count = per_saccade_sample_counts[i];
        if (count < 1) throw InputError("sample counts must be at least 1");
        total += per_saccade_errors[i] / static_cast<double>(count);
    }
    return total / static_cast<double>(per_saccade_errors.size());
}

std::string format_fixed6(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 6);
    if (ec != std::errc{}) {
        // Only reachable for magnitudes beyond ~1e56.
        std::ostringstream os;
        os << std::fixed << std::setprecision(6) << value;
        return os.str();
    }
    return std::string(buf, end);
}

std::string results_header(const ModelSpec& model, bool with_exit_reason) {
    std::string line = "SacNo,OptErr,CPU_check";
    for (const auto& column : model.result_columns) {
        line += ',';
        line += column.label;
    }
    if (with_exit_reason) line += ",exit_reason";
    return line;
}

std::size_t write_results_csv(std::span<const EstimationResult> results, const ModelSpec& model,
                              std::ostream& sink, bool with_exit_reason) {
    for (const auto& r : results) {
        if (r.opc.model_id != model.model_id) {
            throw SchemaError("result for saccade " + std::to_string(r.saccade_id) + " comes from model '" +
                              r.opc.model_id + "', table is for '" + model.model_id + "'");
        }
        if (r.opc.values.size() != model.size()) {
            throw SchemaError("result for saccade " + std::to_string(r.saccade_id) +
                              " has the wrong parameter count");
        }
    }

    std::vector<const EstimationResult*> ordered;
    ordered.reserve(results.size());
    for (const auto& r : results) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto* a, const auto* b) { return a->saccade_id < b->saccade_id; });

    std::string out = results_header(model, with_exit_reason);
    out += '\n';
    for (const auto* r : ordered) {
        out += std::to_string(r->saccade_id);
        out += ',';
        out += format_fixed6(r->opt_err);
        out += ',';
        out += format_fixed6(r->cpu_check);
        for (const auto& column : model.result_columns) {
            out += ',';
            out += format_fixed6(r->opc.values[column.parameter]);
        }
        if (with_exit_reason) {
            out += ',';
            out += to_string(r->exit_reason);
        }
        out += '\n';
    }
    sink << out;
    if (!sink) throw IoError("failed to write results table");
    return out.size();
}

std::vector<BenchmarkRow> benchmark(std::span<const SaccadeTrajectory> saccades,
                                    const ModelSpec& model, const EstimationConfig& config,
                                    std::span<const std::size_t> worker_counts) {
    if (worker_counts.empty()) throw InputError("benchmark needs at least one worker count");
    using clock = std::chrono::steady_clock;

    std::vector<BenchmarkRow> rows;
    for (std::size_t workers : worker_counts) {
        const auto started = clock::now();
        const auto results = estimate_batch(saccades, model, config, workers);
        const double elapsed = std::chrono::duration<double>(clock::now() - started).count();

        BenchmarkRow row;
        row.stats.n_saccades = saccades.size();
        row.stats.wall_time = std::max(elapsed, 1e-9);
        row.stats.workers = workers;
        std::vector<double> errors;
        std::vector<std::size_t> counts;
        for (std::size_t i = 0; i < results.size(); ++i) {
            row.stats.per_saccade_errors.push_back(results[i].opt_err);
            if (results[i].exit_reason == ExitReason::failed) continue;
            errors.push_back(results[i].opt_err);
            counts.push_back(saccades[i].positions.size());
            row.residual_sum_deg += results[i].opt_err;
        }
        row.throughput_per_s = throughput(row.stats.n_saccades, row.stats.wall_time);
        row.mean_residual_deg = errors.empty() ? 0.0 : accuracy(errors, counts);
        rows.push_back(std::move(row));
    }

    auto reference = std::find_if(rows.begin(), rows.end(),
                                  [](const BenchmarkRow& r) { return r.stats.workers == 1; });
    const double t_ref = (reference != rows.end() ? *reference : rows.front()).stats.wall_time;
    for (auto& row : rows) row.speedup = speedup(t_ref, row.stats.wall_time);
    return rows;
}

void write_benchmark_csv(std::span<const BenchmarkRow> rows, std::ostream& sink) {
    sink << kBenchmarkHeader << '\n';
    for (const auto& r : rows) {
        sink << r.stats.workers << ',' << r.stats.n_saccades << ',' << format_fixed6(r.stats.wall_time)
             << ',' << format_fixed6(r.throughput_per_s) << ',' << format_fixed6(r.speedup) << ','
             << format_fixed6(r.mean_residual_deg) << '\n';
    }
}

void write_benchmark_text(std::span<const BenchmarkRow> rows, std::ostream& sink) {
    sink << std::left << std::setw(9) << "workers" << std::setw(8) << "n" << std::setw(14)
         << "wall [s]" << std::setw(16) << "throughput [/s]" << std::setw(10) << "speedup"
         << std::setw(20) << "mean residual [deg]" << "residual sum [deg]\n";
    for (const auto& r : rows) {
        sink << std::left << std::setw(9) << r.stats.workers << std::setw(8) << r.stats.n_saccades
             << std::setw(14) << format_fixed6(r.stats.wall_time) << std::setw(16)
             << format_fixed6(r.throughput_per_s) << std::setw(10) << format_fixed6(r.speedup)
             << std::setw(20) << format_fixed6(r.mean_residual_deg)
             << format_fixed6(r.residual_sum_deg) << '\n';
    }
}

}  // namespace opmm
