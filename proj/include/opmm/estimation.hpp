#pragma once

// OPC estimation: trajectory-matching objective, per-saccade Nelder-Mead
// search, batch execution and the serial CPU_check re-validation.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "opmm/nelder_mead.hpp"
#include "opmm/plant_model.hpp"
#include "opmm/trajectory_io.hpp"

namespace opmm {

inline constexpr double kDefaultPenalty = 1e10;
// Relative tolerance between the optimizer's error and the serial re-check.
inline constexpr double kCpuCheckTolerance = 1e-9;

struct EstimationConfig {
    double tol_x = 1e-4;
    double tol_f = 1e-4;
    std::size_t max_iterations = 0;  // 0 selects 200 * (number of estimated parameters)
    double time_budget = 10.0;       // seconds per saccade
    double simplex_init_scale = 0.05;
    double penalty_base = kDefaultPenalty;

    // Throws InputError on a non-positive tolerance, budget or scale.
    void validate() const;
};

struct EstimationResult {
    int saccade_id = 0;
    double opt_err = 0.0;
    double cpu_check = 0.0;
    OpcVector opc;
    std::size_t iterations = 0;
    ExitReason exit_reason = ExitReason::failed;
    std::string error;  // set when exit_reason == failed

    bool operator==(const EstimationResult&) const = default;
};

// Sum over recorded samples of |simulated - recorded| in degrees. Candidates
// below a parameter floor return penalty_base * (1 + total violation) without
// simulating; a diverging simulation returns penalty_base.
double objective(std::span<const double> opc_values, const SaccadeTrajectory& saccade,
                 const ModelSpec& model, double penalty_base = kDefaultPenalty);

// Copy of `saccade` reflected about its first sample when it moves in the
// negative direction; unchanged otherwise.
SaccadeTrajectory as_positive_direction(const SaccadeTrajectory& saccade);

EstimationResult estimate_saccade(const SaccadeTrajectory& saccade, const ModelSpec& model,
                                  const EstimationConfig& config = {});

// Recomputes the objective for `result` on the calling thread and stores it in
// cpu_check. Throws ValidationError if it disagrees with opt_err.
EstimationResult cpu_check(EstimationResult result, const SaccadeTrajectory& saccade,
                           const ModelSpec& model, const EstimationConfig& config = {});

// OpenMP work-sharing over saccades with up to `workers` threads. Results are
// in input order and identical to estimate_batch_serial. Per-saccade failures
// are recorded in the result slot.
std::vector<EstimationResult> estimate_batch(std::span<const SaccadeTrajectory> saccades,
                                             const ModelSpec& model, const EstimationConfig& config,
                                             std::size_t workers);

// Reference: estimate_saccade mapped over the input on the calling thread.
std::vector<EstimationResult> estimate_batch_serial(std::span<const SaccadeTrajectory> saccades,
                                                    const ModelSpec& model,
                                                    const EstimationConfig& config);

}  // namespace opmm
