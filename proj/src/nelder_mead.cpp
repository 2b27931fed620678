#include "opmm/nelder_mead.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "opmm/error.hpp"

namespace opmm {

std::string_view to_string(ExitReason reason) noexcept {
    switch (reason) {
        case ExitReason::converged: return "converged";
        case ExitReason::max_iterations: return "max_iterations";
        case ExitReason::time_budget: return "time_budget";
        case ExitReason::failed: return "failed";
    }
    return "failed";
}

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;
constexpr double kZeroStep = 0.00025;

double sanitize(double v) { return std::isnan(v) ? std::numeric_limits<double>::infinity() : v; }

// (1 + t) * centroid - t * worst
std::vector<double> along(const std::vector<double>& centroid, const std::vector<double>& worst,
                          double t) {
    std::vector<double> out(centroid.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 + t) * centroid[i] - t * worst[i];
    return out;
}

}  // namespace

void SimplexState::sort() {
    for (double& v : fvals) v = sanitize(v);
    std::vector<std::size_t> order(fvals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
    std::vector<std::vector<double>> v(vertices.size());
    std::vector<double> f(fvals.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        v[i] = std::move(vertices[order[i]]);
        f[i] = fvals[order[i]];
    }
    vertices = std::move(v);
    fvals = std::move(f);
}

SimplexState initial_simplex(std::span<const double> x0, double scale) {
    SimplexState s;
    s.n = x0.size();
    s.vertices.assign(s.n + 1, std::vector<double>(x0.begin(), x0.end()));
    s.fvals.assign(s.n + 1, 0.0);
    for (std::size_t i = 0; i < s.n; ++i) {
        double& c = s.vertices[i + 1][i];
        c = (c != 0.0) ? (1.0 + scale) * c : scale * kZeroStep;
    }
    return s;
}

NelderMeadResult nelder_mead(const Objective& f, std::span<const double> x0,
                             const NelderMeadOptions& options) {
    if (!(options.tol_x > 0.0) || !(options.tol_f > 0.0) || !(options.time_budget_s > 0.0)) {
        throw InputError("Nelder-Mead tolerances and time budget must be positive");
    }
    if (x0.empty()) throw InputError("Nelder-Mead needs at least one dimension");
    for (double v : x0) {
        if (!std::isfinite(v)) throw InputError("Nelder-Mead start point must be finite");
    }

    using clock = std::chrono::steady_clock;
    const auto started = clock::now();
    const std::size_t n = x0.size();
    const std::size_t max_iterations = options.max_iterations ? options.max_iterations : 200 * n;

    NelderMeadResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        return sanitize(f(x));
    };

    SimplexState s = initial_simplex(x0, options.init_scale);
    for (std::size_t i = 0; i <= n; ++i) s.fvals[i] = eval(s.vertices[i]);
    s.sort();
    if (options.on_iteration) options.on_iteration(s);

    auto converged = [&] {
        double fspread = 0.0;
        double xspread = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            fspread = std::max(fspread, std::abs(s.fvals[i] - s.fvals[0]));
            for (std::size_t j = 0; j < n; ++j) {
                xspread = std::max(xspread, std::abs(s.vertices[i][j] - s.vertices[0][j]));
            }
        }
        // A simplex whose values are all +inf has NaN spread; never converged.
        return fspread <= options.tol_f && xspread <= options.tol_x;
    };

    std::vector<double> centroid(n);
    while (true) {
        if (converged()) {
            result.exit_reason = ExitReason::converged;
            break;
        }
        if (result.iterations >= max_iterations) {
            result.exit_reason = ExitReason::max_iterations;
            break;
        }
        if (std::chrono::duration<double>(clock::now() - started).count() > options.time_budget_s) {
            result.exit_reason = ExitReason::time_budget;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += s.vertices[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto& worst = s.vertices[n];
        const auto xr = along(centroid, worst, kReflect);
        const double fr = eval(xr);
        bool shrink = false;

        if (fr < s.fvals[0]) {
            auto xe = along(centroid, worst, kReflect * kExpand);
            const double fe = eval(xe);
            if (fe < fr) {
                worst = std::move(xe);
                s.fvals[n] = fe;
            } else {
                worst = xr;
                s.fvals[n] = fr;
            }
        } else if (fr < s.fvals[n - 1]) {
            worst = xr;
            s.fvals[n] = fr;
        } else if (fr < s.fvals[n]) {
            auto xc = along(centroid, worst, kContract * kReflect);
            const double fc = eval(xc);
            if (fc <= fr) {
                worst = std::move(xc);
                s.fvals[n] = fc;
            } else {
                shrink = true;
            }
        } else {
            auto xcc = along(centroid, worst, -kContract);
            const double fcc = eval(xcc);
            if (fcc < s.fvals[n]) {
                worst = std::move(xcc);
                s.fvals[n] = fcc;
            } else {
                shrink = true;
            }
        }

        if (shrink) {
            const auto& best = s.vertices[0];
            for (std::size_t i = 1; i <= n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    s.vertices[i][j] = best[j] + kShrink * (s.vertices[i][j] - best[j]);
                }
                s.fvals[i] = eval(s.vertices[i]);
            }
        }

        ++result.iterations;
        s.sort();
        if (options.on_iteration) options.on_iteration(s);
    }

    result.x = s.vertices[0];
    result.f = s.fvals[0];
    return result;
}

}  // namespace opmm
