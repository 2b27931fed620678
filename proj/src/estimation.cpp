#include "opmm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "opmm/error.hpp"

namespace opmm {

void EstimationConfig::validate() const {
    if (!(tol_x > 0.0)) throw InputError("tol_x must be positive");
    if (!(tol_f > 0.0)) throw InputError("tol_f must be positive");
    if (!(time_budget > 0.0)) throw InputError("time budget must be positive");
    if (!(simplex_init_scale > 0.0)) throw InputError("simplex scale must be positive");
    if (!(penalty_base > 0.0)) throw InputError("penalty base must be positive");
}

double objective(std::span<const double> opc_values, const SaccadeTrajectory& saccade,
                 const ModelSpec& model, double penalty_base) {
    saccade.validate();
    const double violation = bound_violation(model, opc_values);
    if (violation > 0.0) return penalty_base * (1.0 + violation);

    const std::size_t n = saccade.positions.size();
    const double start = saccade.positions.front();
    const double duration = static_cast<double>(n - 1) * saccade.dt;
    const double target = saccade.positions.back() - start;
    try {
        const PlantParameters plant = model.to_plant(opc_values);
        const auto sim = simulate(plant, duration, target, saccade.dt, start);
        if (sim.positions.size() != n) return penalty_base;
        double err = 0.0;
        for (std::size_t k = 0; k < n; ++k) err += std::abs(sim.positions[k] - saccade.positions[k]);
        return std::isfinite(err) ? err : penalty_base;
    } catch (const DivergenceError&) {
        return penalty_base;
    } catch (const DomainError&) {
        return penalty_base;
    }
}

SaccadeTrajectory as_positive_direction(const SaccadeTrajectory& saccade) {
    SaccadeTrajectory out = saccade;
    if (out.positions.size() >= 2 && out.positions.back() < out.positions.front()) {
        const double origin = out.positions.front();
        for (double& p : out.positions) p = 2.0 * origin - p;
    }
    return out;
}

namespace {

// Nelder-Mead over the masked parameters; cpu_check is left unset.
EstimationResult search(const SaccadeTrajectory& saccade, const ModelSpec& model,
                        const EstimationConfig& config) {
    saccade.validate();
    config.validate();
    const SaccadeTrajectory work = as_positive_direction(saccade);

    std::vector<double> full =
        resolve_placeholders(model, model.defaults.values, work.duration(), work.dt);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (model.estimation_mask[i]) free.push_back(i);
    }

    EstimationResult result;
    result.saccade_id = saccade.saccade_id;
    if (free.empty()) {
        result.opt_err = objective(full, work, model, config.penalty_base);
        result.opc = {model.model_id, full};
        result.exit_reason = ExitReason::converged;
        return result;
    }

    std::vector<double> x0(free.size());
    for (std::size_t k = 0; k < free.size(); ++k) x0[k] = full[free[k]];

    std::vector<double> candidate = full;
    const Objective f = [&](std::span<const double> x) {
        for (std::size_t k = 0; k < free.size(); ++k) candidate[free[k]] = x[k];
        return objective(candidate, work, model, config.penalty_base);
    };

    NelderMeadOptions options;
    options.tol_x = config.tol_x;
    options.tol_f = config.tol_f;
    options.max_iterations = config.max_iterations;
    options.time_budget_s = config.time_budget;
    options.init_scale = config.simplex_init_scale;
    const NelderMeadResult nm = nelder_mead(f, x0, options);

    for (std::size_t k = 0; k < free.size(); ++k) full[free[k]] = nm.x[k];
    result.opt_err = nm.f;
    result.opc = {model.model_id, std::move(full)};
    result.iterations = nm.iterations;
    result.exit_reason = nm.exit_reason;
    return result;
}

EstimationResult failed_result(const SaccadeTrajectory& saccade, const ModelSpec& model,
                               const std::string& why) {
    EstimationResult r;
    r.saccade_id = saccade.saccade_id;
    r.opt_err = std::numeric_limits<double>::quiet_NaN();
    r.cpu_check = r.opt_err;
    r.opc = {model.model_id, std::vector<double>(model.size(), r.opt_err)};
    r.exit_reason = ExitReason::failed;
    r.error = why;
    return r;
}

EstimationResult guarded_search(const SaccadeTrajectory& saccade, const ModelSpec& model,
                                const EstimationConfig& config) {
    try {
        return search(saccade, model, config);
    } catch (const std::exception& e) {
        return failed_result(saccade, model, e.what());
    }
}

EstimationResult guarded_check(EstimationResult result, const SaccadeTrajectory& saccade,
                               const ModelSpec& model, const EstimationConfig& config) {
    if (result.exit_reason == ExitReason::failed) return result;
    try {
        return cpu_check(std::move(result), saccade, model, config);
    } catch (const std::exception& e) {
        return failed_result(saccade, model, e.what());
    }
}

}  // namespace

EstimationResult cpu_check(EstimationResult result, const SaccadeTrajectory& saccade,
                           const ModelSpec& model, const EstimationConfig& config) {
    const double recomputed =
        objective(result.opc.values, as_positive_direction(saccade), model, config.penalty_base);
    result.cpu_check = recomputed;
    const double scale = std::max(1.0, std::abs(result.opt_err));
    if (!(std::abs(result.opt_err - recomputed) / scale <= kCpuCheckTolerance)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "saccade " << result.saccade_id << ": optimizer error " << result.opt_err
            << " disagrees with serial check " << recomputed;
        throw ValidationError(result.saccade_id, msg.str());
    }
    return result;
}

EstimationResult estimate_saccade(const SaccadeTrajectory& saccade, const ModelSpec& model,
                                  const EstimationConfig& config) {
    return cpu_check(search(saccade, model, config), saccade, model, config);
}

std::vector<EstimationResult> estimate_batch(std::span<const SaccadeTrajectory> saccades,
                                             const ModelSpec& model, const EstimationConfig& config,
                                             std::size_t workers) {
    if (workers < 1) throw InputError("workers must be at least 1");
    config.validate();

    const auto n = static_cast<std::ptrdiff_t>(saccades.size());
    std::vector<EstimationResult> results(saccades.size());
    const int threads = static_cast<int>(std::min<std::size_t>(workers, 1024));

    // Each iteration writes only its own slot.
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        results[i] = guarded_search(saccades[i], model, config);
    }

    for (std::size_t i = 0; i < results.size(); ++i) {
        results[i] = guarded_check(std::move(results[i]), saccades[i], model, config);
    }
    return results;
}

std::vector<EstimationResult> estimate_batch_serial(std::span<const SaccadeTrajectory> saccades,
                                                    const ModelSpec& model,
                                                    const EstimationConfig& config) {
    config.validate();
    std::vector<EstimationResult> results;
    results.reserve(saccades.size());
    for (const auto& s : saccades) {
        results.push_back(guarded_check(guarded_search(s, model, config), s, model, config));
    }
    return results;
}

}  // namespace opmm
