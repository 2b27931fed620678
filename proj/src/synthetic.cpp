#include "opmm/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "opmm/error.hpp"

namespace opmm {

PerturbationPlan default_perturbation_plan(const ModelSpec& model) {
    PerturbationPlan plan;
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (model.estimation_mask[i]) plan.parameters.push_back(model.parameter_names[i]);
    }
    plan.levels = {0.05, -0.05, 0.10, -0.10, 0.20, -0.20};
    return plan;
}

namespace {

template <typename T>
const T& cycled(const std::vector<T>& items, std::size_t i) {
    return items[i % items.size()];
}

void check_plan(const PerturbationPlan& plan) {
    if (plan.durations_ms.empty() || plan.onsets_deg.empty()) {
        throw InputError("perturbation plan needs at least one duration and onset");
    }
    if (!(plan.dt_ms > 0.0)) throw InputError("perturbation plan needs a positive time step");
    if (plan.parameters.empty() != plan.levels.empty()) {
        throw InputError("perturbation plan needs both parameters and levels, or neither");
    }
}

}  // namespace

std::vector<double> perturbed_values(const ModelSpec& model, const PerturbationPlan& plan,
                                     std::size_t index) {
    check_plan(plan);
    const double duration = cycled(plan.durations_ms, index);
    auto values = resolve_placeholders(model, model.defaults.values, duration, plan.dt_ms);
    if (!plan.parameters.empty()) {
        const std::size_t p = plan.parameters.size();
        const std::size_t slot = model.index_of(cycled(plan.parameters, index));
        values[slot] *= 1.0 + plan.levels[(index / p) % plan.levels.size()];
    }
    return values;
}

SaccadeTrajectory synthetic_saccade(const ModelSpec& model, std::span<const double> values,
                                    double duration_ms, double dt_ms, double onset_deg, int id) {
    const PlantParameters plant = model.to_plant(values);
    auto landing = [&](double target) {
        return simulate(plant, duration_ms, target, dt_ms, 0.0).positions.back();
    };

    // Fixed point of target -> landing(target). The map is piecewise affine
    // (the antagonist floor switches regime), so a secant walk settles fast.
    double t0 = 0.0;
    double g0 = landing(t0) - t0;
    double t1 = landing(t0);
    double g1 = landing(t1) - t1;
    for (int iter = 0; iter < 60 && std::abs(g1) > 1e-13 * std::max(1.0, std::abs(t1)); ++iter) {
        const double slope = (g1 - g0);
        if (slope == 0.0) break;
        const double t2 = t1 - g1 * (t1 - t0) / slope;
        t0 = t1;
        g0 = g1;
        t1 = t2;
        g1 = landing(t1) - t1;
    }

    SaccadeTrajectory s;
    s.saccade_id = id;
    s.dt = dt_ms;
    s.positions = simulate(plant, duration_ms, t1, dt_ms, onset_deg).positions;
    return s;
}

std::vector<SaccadeTrajectory> synthetic_workload(const ModelSpec& model, std::size_t count,
                                                  const PerturbationPlan& plan) {
    check_plan(plan);
    std::vector<SaccadeTrajectory> out;
    out.reserve(count);
    double onset_time = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double duration = cycled(plan.durations_ms, i);
        auto s = synthetic_saccade(model, perturbed_values(model, plan, i), duration, plan.dt_ms,
                                   cycled(plan.onsets_deg, i), static_cast<int>(i + 1));
        s.onset_time = onset_time;
        onset_time += duration + 200.0;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace opmm
