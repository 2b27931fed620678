#pragma once

// Deterministic synthetic saccade workloads (no random numbers).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "opmm/plant_model.hpp"
#include "opmm/trajectory_io.hpp"

namespace opmm {

// Saccade i perturbs parameters[i % P] by levels[(i / P) % L] (relative),
// uses durations_ms[i % D] and onsets_deg[i % O].
struct PerturbationPlan {
    std::vector<std::string> parameters;
    std::vector<double> levels;
    std::vector<double> durations_ms{46.0};
    std::vector<double> onsets_deg{0.0};
    double dt_ms = 1.0;
};

// Every estimated parameter in rotation with +-5%, +-10%, +-20%.
PerturbationPlan default_perturbation_plan(const ModelSpec& model);

// Ground-truth parameter vector of saccade `index` (placeholders resolved).
std::vector<double> perturbed_values(const ModelSpec& model, const PerturbationPlan& plan,
                                     std::size_t index);

// Simulated saccade whose landing position equals its own target amplitude,
// so the generating vector reproduces it with zero objective.
SaccadeTrajectory synthetic_saccade(const ModelSpec& model, std::span<const double> values,
                                    double duration_ms, double dt_ms, double onset_deg, int id);

std::vector<SaccadeTrajectory> synthetic_workload(const ModelSpec& model, std::size_t count,
                                                  const PerturbationPlan& plan);

}  // namespace opmm
