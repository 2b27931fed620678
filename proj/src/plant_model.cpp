#include "opmm/plant_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

#include "opmm/error.hpp"

namespace opmm {

double per_saccade_placeholder() noexcept { return std::numeric_limits<double>::quiet_NaN(); }

bool is_placeholder(double value) noexcept { return std::isnan(value); }

std::size_t ModelSpec::index_of(std::string_view name) const {
    auto it = std::find(parameter_names.begin(), parameter_names.end(), name);
    if (it == parameter_names.end()) {
        throw RegistryError("model '" + model_id + "' has no parameter '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - parameter_names.begin());
}

double ModelSpec::value(const OpcVector& opc, std::string_view name) const {
    return opc.values.at(index_of(name));
}

void ModelSpec::validate() const {
    const std::size_t n = parameter_names.size();
    if (model_id.empty()) throw RegistryError("model id must not be empty");
    if (n == 0) throw RegistryError("model '" + model_id + "' has no parameters");
    std::set<std::string_view> seen;
    for (const auto& name : parameter_names) {
        if (!seen.insert(name).second) {
            throw RegistryError("model '" + model_id + "' repeats parameter '" + name + "'");
        }
    }
    if (defaults.values.size() != n || physical_lower_bounds.size() != n ||
        estimation_mask.size() != n) {
        throw RegistryError("model '" + model_id + "': defaults, bounds and mask need " +
                            std::to_string(n) + " entries");
    }
    if (defaults.model_id != model_id) {
        throw RegistryError("model '" + model_id + "': defaults carry id '" + defaults.model_id + "'");
    }
    for (double floor : physical_lower_bounds) {
        if (!(floor >= 0.0)) throw RegistryError("model '" + model_id + "': negative lower bound");
    }
    if (pulse_width_index && *pulse_width_index >= n) {
        throw RegistryError("model '" + model_id + "': pulse width index out of range");
    }
    for (const auto& column : result_columns) {
        if (column.parameter >= n) {
            throw RegistryError("model '" + model_id + "': result column '" + column.label +
                                "' points past the parameter list");
        }
    }
    if (!to_plant) throw RegistryError("model '" + model_id + "' has no plant mapping");
    if (!is_physical(*this, defaults.values)) {
        throw RegistryError("model '" + model_id + "': defaults are not physical");
    }
}

namespace {

bool placeholder_allowed(const ModelSpec& spec, std::size_t i) {
    return spec.pulse_width_index && *spec.pulse_width_index == i;
}

}  // namespace

double bound_violation(const ModelSpec& spec, std::span<const double> values) {
    if (values.size() != spec.size()) return std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (is_placeholder(v) && placeholder_allowed(spec, i)) continue;
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        const double floor = spec.physical_lower_bounds[i];
        if (v < floor) total += floor - v;
    }
    return total;
}

bool is_physical(const ModelSpec& spec, std::span<const double> values) {
    return bound_violation(spec, values) == 0.0;
}

std::vector<double> resolve_placeholders(const ModelSpec& spec, std::span<const double> values,
                                         double duration_ms, double dt_ms) {
    std::vector<double> out(values.begin(), values.end());
    if (spec.pulse_width_index && *spec.pulse_width_index < out.size() &&
        is_placeholder(out[*spec.pulse_width_index])) {
        out[*spec.pulse_width_index] = std::max(duration_ms - kPulseWidthLeadMs, dt_ms);
    }
    return out;
}

// Default 18-parameter values. Activation time constants and pulse values are reused by
// the 9-parameter model, which has no neural-signal parameters of its own.
namespace {

constexpr double kTauAcAg = 11.7;
constexpr double kTauAcAnt = 2.4;
constexpr double kTauDeAg = 2.0;
constexpr double kTauDeAnt = 1.9;
constexpr double kPulseAg = 55.0;
constexpr double kPulseAnt = 0.5;

}  // namespace

ModelSpec komogortsev18_spec() {
    ModelSpec spec;
    spec.model_id = "komogortsev18";
    spec.parameter_names = {"K_SE_AG",   "K_SE_ANT",   "K_LT_AG",   "K_LT_ANT",  "B_AG",
                            "B_ANT",     "B_P",        "N_C_AG",    "N_C_ANT",   "J",
                            "TAU_AC_AG", "TAU_AC_ANT", "TAU_DE_AG", "TAU_DE_ANT", "N_C_FIX",
                            "N_SAC_AG",  "N_SAC_ANT",  "PW"};
    spec.defaults = {spec.model_id,
                     {2.5, 2.5, 1.2, 1.2, 0.046, 0.022, 0.06, 0.8, 0.5, 0.000043, kTauAcAg, kTauAcAnt,
                      kTauDeAg, kTauDeAnt, 14.0, kPulseAg, kPulseAnt, per_saccade_placeholder()}};
    spec.physical_lower_bounds.assign(18, 0.0);
    spec.estimation_mask.assign(18, true);
    spec.pulse_width_index = 17;
    spec.result_columns = {{"SE_ag", 0},     {"SE_ant", 1},   {"LT_ag", 2},      {"LT_ant", 3},
                           {"PE_ag", 7},     {"PE_ant", 8},   {"Vis", 6},        {"FV_ag", 4},
                           {"FV_ant", 5},    {"Inert", 9},    {"Act_ag", 10},    {"Act_ant", 11},
                           {"Deact_ag", 12}, {"Deact_ant", 13}, {"Step", 14},    {"H_ag", 15},
                           {"H_ant", 16},    {"W", 17}};
    spec.to_plant = [](std::span<const double> v) {
        PlantParameters p;
        p.series_elasticity = {v[0], v[1]};
        p.length_tension = {v[2], v[3]};
        p.force_velocity = {v[4], v[5]};
        p.passive_viscosity = v[6];
        p.tension_slope = {v[7], v[8]};
        p.inertia = v[9];
        p.activation_tau = {v[10], v[11]};
        p.deactivation_tau = {v[12], v[13]};
        p.tension_intercept = v[14];
        p.pulse_height = {v[15], v[16]};
        p.pulse_width = v[17];
        return p;
    };
    return spec;
}

ModelSpec komogortsev9_spec() {
    ModelSpec spec;
    spec.model_id = "komogortsev9";
    spec.parameter_names = {"K_SE", "K_LT", "B_AG", "B_ANT", "B_P", "N_C_AG", "N_C_ANT", "J", "N_C_FIX"};
    spec.defaults = {spec.model_id, {2.5, 1.2, 0.046, 0.022, 0.06, 0.8, 0.5, 0.000043, 14.0}};
    spec.physical_lower_bounds.assign(9, 0.0);
    spec.estimation_mask.assign(9, true);
    spec.result_columns = {{"SE", 0},    {"LT", 1},     {"PE_ag", 5}, {"PE_ant", 6}, {"Vis", 4},
                           {"FV_ag", 2}, {"FV_ant", 3}, {"Inert", 7}, {"Step", 8}};
    spec.to_plant = [](std::span<const double> v) {
        PlantParameters p;
        p.series_elasticity = {v[0], v[0]};
        p.length_tension = {v[1], v[1]};
        p.force_velocity = {v[2], v[3]};
        p.passive_viscosity = v[4];
        p.tension_slope = {v[5], v[6]};
        p.inertia = v[7];
        p.activation_tau = {kTauAcAg, kTauAcAnt};
        p.deactivation_tau = {kTauDeAg, kTauDeAnt};
        p.tension_intercept = v[8];
        p.pulse_height = {kPulseAg, kPulseAnt};
        p.pulse_width = per_saccade_placeholder();
        return p;
    };
    return spec;
}

ModelRegistry::ModelRegistry() {
    register_model(komogortsev18_spec());
    register_model(komogortsev9_spec());
}

std::shared_ptr<const ModelSpec> ModelRegistry::register_model(ModelSpec spec) {
    spec.validate();
    std::unique_lock lock(mutex_);
    if (models_.contains(spec.model_id)) {
        throw RegistryError("model '" + spec.model_id + "' is already registered");
    }
    auto handle = std::make_shared<const ModelSpec>(std::move(spec));
    models_.emplace(handle->model_id, handle);
    return handle;
}

std::shared_ptr<const ModelSpec> ModelRegistry::lookup(std::string_view model_id) const {
    std::shared_lock lock(mutex_);
    auto it = models_.find(model_id);
    if (it == models_.end()) {
        throw RegistryError("unknown model '" + std::string(model_id) + "'");
    }
    return it->second;
}

OpcVector ModelRegistry::default_opc(std::string_view model_id) const {
    return lookup(model_id)->defaults;
}

std::vector<std::string> ModelRegistry::ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, spec] : models_) out.push_back(id);
    return out;
}

ModelRegistry& ModelRegistry::global() {
    static ModelRegistry registry;
    return registry;
}

OpcVector default_opc(std::string_view model_id) {
    return ModelRegistry::global().default_opc(model_id);
}

// ---------------------------------------------------------------------------
// Control signal

namespace {

bool plant_is_physical(const PlantParameters& p) {
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    for (std::size_t m : {kAgonist, kAntagonist}) {
        if (!ok(p.series_elasticity[m]) || !ok(p.length_tension[m]) || !ok(p.force_velocity[m]) ||
            !ok(p.tension_slope[m]) || !ok(p.activation_tau[m]) || !ok(p.deactivation_tau[m]) ||
            !ok(p.pulse_height[m])) {
            return false;
        }
    }
    return ok(p.passive_viscosity) && ok(p.inertia) && ok(p.tension_intercept) &&
           (is_placeholder(p.pulse_width) || ok(p.pulse_width));
}

void require_physical(const PlantParameters& p) {
    if (!plant_is_physical(p)) throw DomainError("non-physical parameter in plant coefficients");
}

PlantParameters checked_plant(const ModelSpec& spec, const OpcVector& opc) {
    if (opc.model_id != spec.model_id) {
        throw DomainError("parameter vector for '" + opc.model_id + "' used with model '" +
                          spec.model_id + "'");
    }
    if (opc.values.size() != spec.size()) {
        throw DomainError("model '" + spec.model_id + "' expects " + std::to_string(spec.size()) +
                          " parameters, got " + std::to_string(opc.values.size()));
    }
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double v = opc.values[i];
        if (is_placeholder(v) && placeholder_allowed(spec, i)) continue;
        if (!std::isfinite(v) || v < spec.physical_lower_bounds[i]) {
            std::ostringstream msg;
            msg << "non-physical parameter " << spec.parameter_names[i] << " = " << v;
            throw DomainError(msg.str());
        }
    }
    return spec.to_plant(opc.values);
}

}  // namespace

std::array<double, 2> step_levels(const PlantParameters& p, double theta) {
    const auto gain = [&](std::size_t m) {
        return p.series_elasticity[m] / (p.length_tension[m] + p.series_elasticity[m]);
    };
    const double g_ag = gain(kAgonist);
    const double g_ant = gain(kAntagonist);
    const double a = p.tension_slope[kAgonist] + p.length_tension[kAgonist];
    const double b = p.tension_slope[kAntagonist] + p.length_tension[kAntagonist];
    const double fix = p.tension_intercept;

    // Static tendon balance: g_ag * (n_ag - a*theta) == g_ant * (n_ant + b*theta).
    const double half_gap = (g_ant * (fix + b * theta) - g_ag * (fix - a * theta)) / (g_ag + g_ant);
    double n_ag = fix + half_gap;
    double n_ant = fix - half_gap;
    if (n_ant < kMinStepLevel) {
        n_ant = kMinStepLevel;
        n_ag = a * theta + g_ant * (n_ant + b * theta) / g_ag;
    }
    return {n_ag, n_ant};
}

std::size_t step_count(double duration_ms, double dt_ms) {
    const double ratio = duration_ms / dt_ms;
    // Absorb representation error so that 46 / 1 or 0.3 / 0.1 count exactly.
    const auto steps = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
    return std::max<std::size_t>(steps, 1);
}

double resolved_pulse_width(const PlantParameters& p, double duration_ms, double dt_ms) {
    if (is_placeholder(p.pulse_width)) return std::max(duration_ms - kPulseWidthLeadMs, dt_ms);
    return p.pulse_width;
}

ControlSignal build_control_signal(const PlantParameters& p, double saccade_duration_ms,
                                   double target_amplitude_deg, double dt_ms) {
    if (!(saccade_duration_ms > 0.0) || !std::isfinite(saccade_duration_ms)) {
        throw InputError("saccade duration must be positive");
    }
    if (!(dt_ms > 0.0) || !std::isfinite(dt_ms)) throw InputError("time step must be positive");
    if (!std::isfinite(target_amplitude_deg)) throw InputError("target amplitude must be finite");
    require_physical(p);

    const std::size_t steps = step_count(saccade_duration_ms, dt_ms);
    const double width = resolved_pulse_width(p, saccade_duration_ms, dt_ms);
    const auto pulse_steps =
        std::min<std::size_t>(static_cast<std::size_t>(std::llround(width / dt_ms)), steps);
    const auto post = step_levels(p, target_amplitude_deg);

    ControlSignal signal;
    signal.dt = dt_ms;
    signal.pulse_onset = 0;
    signal.pulse_offset = pulse_steps;
    signal.n_ag.resize(steps);
    signal.n_ant.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const bool pulse = signal.in_pulse(k);
        signal.n_ag[k] = pulse ? p.pulse_height[kAgonist] : post[kAgonist];
        signal.n_ant[k] = pulse ? p.pulse_height[kAntagonist] : post[kAntagonist];
    }
    return signal;
}

ControlSignal build_control_signal(const ModelSpec& spec, const OpcVector& opc,
                                   double saccade_duration_ms, double target_amplitude_deg,
                                   double dt_ms) {
    return build_control_signal(checked_plant(spec, opc), saccade_duration_ms, target_amplitude_deg,
                                dt_ms);
}

// ---------------------------------------------------------------------------
// Dynamics

bool PlantState::finite() const noexcept {
    return std::isfinite(theta) && std::isfinite(omega) && std::isfinite(x_ag) &&
           std::isfinite(x_ant) && std::isfinite(f_ag) && std::isfinite(f_ant);
}

PlantState operator+(const PlantState& a, const PlantState& b) noexcept {
    return {a.theta + b.theta, a.omega + b.omega, a.x_ag + b.x_ag,
            a.x_ant + b.x_ant, a.f_ag + b.f_ag,   a.f_ant + b.f_ant};
}

PlantState operator*(double s, const PlantState& a) noexcept {
    return {s * a.theta, s * a.omega, s * a.x_ag, s * a.x_ant, s * a.f_ag, s * a.f_ant};
}

PlantState fixation_state(const PlantParameters& p) {
    const auto rest = step_levels(p, 0.0);
    PlantState s;
    s.f_ag = rest[kAgonist];
    s.f_ant = rest[kAntagonist];
    s.x_ag = s.f_ag / (p.length_tension[kAgonist] + p.series_elasticity[kAgonist]);
    s.x_ant = s.f_ant / (p.length_tension[kAntagonist] + p.series_elasticity[kAntagonist]);
    return s;
}

PlantState plant_derivatives(const PlantState& s, double n_ag, double n_ant, bool in_pulse,
                             const PlantParameters& p) noexcept {
    constexpr double kPerMs = 1e-3;  // deg/s -> deg/ms

    // Local rotations: +theta for the agonist, -theta for the antagonist.
    const double tendon_ag = p.series_elasticity[kAgonist] * (s.x_ag - s.theta);
    const double tendon_ant = p.series_elasticity[kAntagonist] * (s.x_ant + s.theta);

    const double node_ag = s.f_ag - p.tension_slope[kAgonist] * s.theta -
                           p.length_tension[kAgonist] * s.x_ag - tendon_ag;
    const double node_ant = s.f_ant + p.tension_slope[kAntagonist] * s.theta -
                            p.length_tension[kAntagonist] * s.x_ant - tendon_ant;

    const double tau_ag = in_pulse ? p.activation_tau[kAgonist] : p.deactivation_tau[kAgonist];
    const double tau_ant = in_pulse ? p.activation_tau[kAntagonist] : p.deactivation_tau[kAntagonist];

    PlantState d;
    d.theta = s.omega * kPerMs;
    d.omega = (tendon_ag - tendon_ant - p.passive_viscosity * s.omega) / p.inertia * kPerMs;
    d.x_ag = node_ag / p.force_velocity[kAgonist] * kPerMs;
    d.x_ant = node_ant / p.force_velocity[kAntagonist] * kPerMs;
    d.f_ag = (n_ag - s.f_ag) / tau_ag;
    d.f_ant = (n_ant - s.f_ant) / tau_ant;
    return d;
}

double stiffness_bound(const PlantParameters& p) noexcept {
    constexpr double kPerMs = 1e-3;
    double rate = std::max(p.passive_viscosity / p.inertia,
                           std::sqrt((p.series_elasticity[kAgonist] + p.series_elasticity[kAntagonist]) /
                                     p.inertia));
    for (const Muscle m : {kAgonist, kAntagonist}) {
        rate = std::max(rate, (p.length_tension[m] + p.series_elasticity[m] + p.tension_slope[m]) /
                                  p.force_velocity[m]);
    }
    rate *= kPerMs;
    for (const Muscle m : {kAgonist, kAntagonist}) {
        rate = std::max({rate, 1.0 / p.activation_tau[m], 1.0 / p.deactivation_tau[m]});
    }
    return rate;
}

std::size_t rk4_substeps(const PlantParameters& p, double dt_ms) noexcept {
    const double needed = std::ceil(dt_ms * stiffness_bound(p) / kMaxStableStepRatio);
    if (!(needed > 1.0)) return 1;  // also catches NaN
    if (needed >= static_cast<double>(kMaxSubsteps)) return kMaxSubsteps;
    return static_cast<std::size_t>(needed);
}

SimulatedTrajectory simulate(const PlantParameters& p, const ControlSignal& control,
                             double initial_theta_deg) {
    if (!(control.dt > 0.0) || control.n_ag.empty() || control.n_ag.size() != control.n_ant.size()) {
        throw InputError("control signal needs a positive step and equal, non-empty channels");
    }
    require_physical(p);

    const double dt = control.dt;
    const std::size_t steps = control.size();
    const std::size_t substeps = rk4_substeps(p, dt);
    const double h = dt / static_cast<double>(substeps);
    SimulatedTrajectory out;
    out.dt = dt;
    out.positions.reserve(steps + 1);
    out.velocities.reserve(steps + 1);

    PlantState s = fixation_state(p);
    out.positions.push_back(initial_theta_deg + s.theta);
    out.velocities.push_back(s.omega);

    for (std::size_t k = 0; k < steps; ++k) {
        const double n_ag = control.n_ag[k];
        const double n_ant = control.n_ant[k];
        const bool pulse = control.in_pulse(k);
        auto f = [&](const PlantState& y) { return plant_derivatives(y, n_ag, n_ant, pulse, p); };

        for (std::size_t m = 0; m < substeps; ++m) {
            const PlantState k1 = f(s);
            const PlantState k2 = f(s + (0.5 * h) * k1);
            const PlantState k3 = f(s + (0.5 * h) * k2);
            const PlantState k4 = f(s + h * k3);
            s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }

        if (!s.finite()) {
            throw DivergenceError(k + 1, "plant state became non-finite at step " +
                                             std::to_string(k + 1));
        }
        out.positions.push_back(initial_theta_deg + s.theta);
        out.velocities.push_back(s.omega);
    }
    return out;
}

SimulatedTrajectory simulate(const PlantParameters& p, double duration_ms,
                             double target_amplitude_deg, double dt_ms, double initial_theta_deg) {
    return simulate(p, build_control_signal(p, duration_ms, target_amplitude_deg, dt_ms),
                    initial_theta_deg);
}

SimulatedTrajectory simulate(const ModelSpec& spec, const OpcVector& opc, double duration_ms,
                             double target_amplitude_deg, double dt_ms, double initial_theta_deg) {
    return simulate(checked_plant(spec, opc), duration_ms, target_amplitude_deg, dt_ms,
                    initial_theta_deg);
}

}  // namespace opmm
