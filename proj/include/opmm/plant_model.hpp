#pragma once

// Linear homeomorphic oculomotor plant: parameter models, pulse-step control
// and fixed-step RK4 simulation of a horizontal saccade.
//
// Units: stiffness g/deg, damping g*s/deg, inertia g*s^2/deg, forces g,
// time constants and time steps ms. Angular velocity is reported in deg/s.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace opmm {

enum Muscle : std::size_t { kAgonist = 0, kAntagonist = 1 };

// Marker stored in a parameter slot whose value is derived per saccade
// (the 18-parameter pulse width defaults to "saccade duration - 6 ms").
double per_saccade_placeholder() noexcept;
bool is_placeholder(double value) noexcept;

// Offset subtracted from the saccade duration to obtain the default pulse width.
inline constexpr double kPulseWidthLeadMs = 6.0;
// Lowest antagonist step level accepted when solving the post-saccade balance.
inline constexpr double kMinStepLevel = 0.01;

// Full set of coefficients the plant ODE consumes. Every registered model maps
// its own parameter vector onto this.
struct PlantParameters {
    std::array<double, 2> series_elasticity{};   // K_SE
    std::array<double, 2> length_tension{};      // K_LT
    std::array<double, 2> force_velocity{};      // B
    double passive_viscosity = 0.0;              // B_P
    std::array<double, 2> tension_slope{};       // N_C
    double inertia = 0.0;                        // J
    std::array<double, 2> activation_tau{};      // tau_AC, ms
    std::array<double, 2> deactivation_tau{};    // tau_DE, ms
    double tension_intercept = 0.0;              // N_C_FIX
    std::array<double, 2> pulse_height{};        // N_SAC
    double pulse_width = 0.0;                    // PW, ms; may be a placeholder
};

struct OpcVector {
    std::string model_id;
    std::vector<double> values;

    bool operator==(const OpcVector&) const = default;
};

// Column of the results table: printed label plus the parameter it shows.
struct ResultColumn {
    std::string label;
    std::size_t parameter;
};

struct ModelSpec {
    std::string model_id;
    std::vector<std::string> parameter_names;
    OpcVector defaults;
    std::vector<double> physical_lower_bounds;
    std::vector<bool> estimation_mask;
    // Parameter whose default may be the per-saccade placeholder.
    std::optional<std::size_t> pulse_width_index;
    std::vector<ResultColumn> result_columns;
    std::function<PlantParameters(std::span<const double>)> to_plant;

    std::size_t size() const noexcept { return parameter_names.size(); }
    std::size_t index_of(std::string_view name) const;
    double value(const OpcVector& opc, std::string_view name) const;
    // Throws RegistryError describing the first violated invariant.
    void validate() const;
};

bool is_physical(const ModelSpec& spec, std::span<const double> values);
// Sum over parameters of how far each value sits below its floor.
// Non-finite values (other than a permitted placeholder) count as infinite.
double bound_violation(const ModelSpec& spec, std::span<const double> values);

// Replaces a placeholder pulse width with max(duration - 6 ms, dt).
std::vector<double> resolve_placeholders(const ModelSpec& spec, std::span<const double> values,
                                         double duration_ms, double dt_ms);

ModelSpec komogortsev18_spec();
ModelSpec komogortsev9_spec();

// Write-once-at-startup, read-many table of plant models.
class ModelRegistry {
public:
    // Pre-registers the built-in "komogortsev18" and "komogortsev9" models.
    ModelRegistry();

    std::shared_ptr<const ModelSpec> register_model(ModelSpec spec);
    std::shared_ptr<const ModelSpec> lookup(std::string_view model_id) const;
    OpcVector default_opc(std::string_view model_id) const;
    std::vector<std::string> ids() const;

    static ModelRegistry& global();

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const ModelSpec>, std::less<>> models_;
};

OpcVector default_opc(std::string_view model_id);

struct ControlSignal {
    double dt = 0.0;
    std::vector<double> n_ag;
    std::vector<double> n_ant;
    std::size_t pulse_onset = 0;   // first step of the pulse
    std::size_t pulse_offset = 0;  // one past the last pulse step

    std::size_t size() const noexcept { return n_ag.size(); }
    bool in_pulse(std::size_t step) const noexcept {
        return step >= pulse_onset && step < pulse_offset;
    }
};

// Innervation levels that hold the plant at rest at rotation `theta` (deg,
// relative to saccade onset). Split about N_C_FIX; the antagonist level is
// floored at kMinStepLevel with the agonist re-solved to keep the balance.
std::array<double, 2> step_levels(const PlantParameters& p, double theta);

std::size_t step_count(double duration_ms, double dt_ms);
double resolved_pulse_width(const PlantParameters& p, double duration_ms, double dt_ms);

ControlSignal build_control_signal(const PlantParameters& p, double saccade_duration_ms,
                                   double target_amplitude_deg, double dt_ms);
ControlSignal build_control_signal(const ModelSpec& spec, const OpcVector& opc,
                                   double saccade_duration_ms, double target_amplitude_deg,
                                   double dt_ms);

// Plant state. theta is the rotation from saccade onset; x_ag / x_ant are the
// muscle-node displacements along each muscle's shortening direction.
struct PlantState {
    double theta = 0.0;  // deg
    double omega = 0.0;  // deg/s
    double x_ag = 0.0;   // deg
    double x_ant = 0.0;  // deg
    double f_ag = 0.0;   // g
    double f_ant = 0.0;  // g

    bool finite() const noexcept;
    bool operator==(const PlantState&) const = default;
};

PlantState operator+(const PlantState& a, const PlantState& b) noexcept;
PlantState operator*(double s, const PlantState& a) noexcept;

// Resting state at theta = 0 under fixation innervation step_levels(p, 0).
PlantState fixation_state(const PlantParameters& p);

// Time derivative of every field, per millisecond.
PlantState plant_derivatives(const PlantState& state, double n_ag, double n_ant, bool in_pulse,
                             const PlantParameters& p) noexcept;

struct SimulatedTrajectory {
    double dt = 0.0;
    std::vector<double> positions;   // deg
    std::vector<double> velocities;  // deg/s
};

// Upper estimate (per ms) of the fastest decay/oscillation rate of the plant,
// built from the globe, tendon-node and activation time constants.
double stiffness_bound(const PlantParameters& p) noexcept;

// Each control step is integrated with this many equal RK4 sub-steps, enough
// to keep h * stiffness_bound(p) <= kMaxStableStepRatio. The default plant at
// 1 ms sampling needs one.
inline constexpr double kMaxStableStepRatio = 1.8;
inline constexpr std::size_t kMaxSubsteps = 256;
std::size_t rk4_substeps(const PlantParameters& p, double dt_ms) noexcept;

// Integrates the plant over ceil(duration/dt) control steps starting from rest,
// holding the control over each step. Output has one more sample than steps;
// positions are offset by initial_theta. Throws DivergenceError (1-based step)
// when the state becomes non-finite.
SimulatedTrajectory simulate(const PlantParameters& p, const ControlSignal& control,
                             double initial_theta_deg);
SimulatedTrajectory simulate(const PlantParameters& p, double duration_ms,
                             double target_amplitude_deg, double dt_ms, double initial_theta_deg);
SimulatedTrajectory simulate(const ModelSpec& spec, const OpcVector& opc, double duration_ms,
                             double target_amplitude_deg, double dt_ms, double initial_theta_deg);

}  // namespace opmm
