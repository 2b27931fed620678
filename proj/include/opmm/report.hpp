#pragma once

// Performance metrics, the results table writer and the worker-count benchmark.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "opmm/estimation.hpp"

namespace opmm {

inline constexpr const char* kBenchmarkHeader =
    "workers,n,wall_time_s,throughput_per_s,speedup,mean_residual_deg";

// t_reference / t_candidate.
double speedup(double t_reference_s, double t_candidate_s);
// Completed estimations per second.
double throughput(std::size_t n, double wall_time_s);
// Mean over saccades of opt_err / sample_count: the mean per-sample absolute residual (deg).
double accuracy(std::span<const double> per_saccade_errors,
                std::span<const std::size_t> per_saccade_sample_counts);

// Fixed notation with six decimals, e.g. 10.701933.
std::string format_fixed6(double value);

// Header line of the results table for `model`, without the newline.
std::string results_header(const ModelSpec& model, bool with_exit_reason = false);

// Writes the header and one row per result sorted by saccade id. Every real
// carries six decimals. With `with_exit_reason` an exit_reason column is
// appended. Returns the number of bytes written.
std::size_t write_results_csv(std::span<const EstimationResult> results, const ModelSpec& model,
                              std::ostream& sink, bool with_exit_reason = false);

struct RunStats {
    std::size_t n_saccades = 0;
    double wall_time = 0.0;  // s
    std::size_t workers = 1;
    std::vector<double> per_saccade_errors;
};

struct BenchmarkRow {
    RunStats stats;
    double throughput_per_s = 0.0;
    double speedup = 1.0;             // relative to the first configuration
    double mean_residual_deg = 0.0;   // accuracy()
    double residual_sum_deg = 0.0;    // raw sum of opt_err
};

// Runs estimate_batch once per worker count, in order, on identical input.
// Speedup is relative to the workers == 1 row when present, else to the first row.
std::vector<BenchmarkRow> benchmark(std::span<const SaccadeTrajectory> saccades,
                                    const ModelSpec& model, const EstimationConfig& config,
                                    std::span<const std::size_t> worker_counts);

void write_benchmark_csv(std::span<const BenchmarkRow> rows, std::ostream& sink);
void write_benchmark_text(std::span<const BenchmarkRow> rows, std::ostream& sink);

}  // namespace opmm
