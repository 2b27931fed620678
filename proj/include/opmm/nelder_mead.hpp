#pragma once

// Nelder-Mead simplex minimizer with the standard coefficients
// (reflection 1, expansion 2, contraction 0.5, shrink 0.5).

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace opmm {

enum class ExitReason { converged, max_iterations, time_budget, failed };

std::string_view to_string(ExitReason reason) noexcept;

struct SimplexState {
    std::vector<std::vector<double>> vertices;  // n + 1 points
    std::vector<double> fvals;                  // objective at each vertex
    std::size_t n = 0;

    const std::vector<double>& best() const { return vertices.front(); }
    double best_value() const { return fvals.front(); }
    // Stable ascending order on fvals; NaN sorts as +infinity.
    void sort();
};

struct NelderMeadOptions {
    double tol_x = 1e-4;
    double tol_f = 1e-4;
    std::size_t max_iterations = 0;  // 0 selects 200 * n
    double time_budget_s = 10.0;
    double init_scale = 0.05;
    // Called after the initial sort and after every iteration.
    std::function<void(const SimplexState&)> on_iteration;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    ExitReason exit_reason = ExitReason::max_iterations;
};

using Objective = std::function<double(std::span<const double>)>;

// Vertex 0 is x0; vertex i scales coordinate i-1 by (1 + scale), or sets it
// to scale * 0.00025 when that coordinate is zero. Function values are zero.
SimplexState initial_simplex(std::span<const double> x0, double scale);

NelderMeadResult nelder_mead(const Objective& f, std::span<const double> x0,
                             const NelderMeadOptions& options = {});

}  // namespace opmm
