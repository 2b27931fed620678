#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "opmm/error.hpp"
#include "opmm/nelder_mead.hpp"
#include "reference_nelder_mead.hpp"

using namespace opmm;

namespace {

Objective wrap(double (*fn)(const std::vector<double>&)) {
    return [fn](std::span<const double> x) { return fn(std::vector<double>(x.begin(), x.end())); };
}

NelderMeadOptions tight(double tol, std::size_t max_iterations) {
    NelderMeadOptions o;
    o.tol_x = tol;
    o.tol_f = tol;
    o.max_iterations = max_iterations;
    o.time_budget_s = 1e6;
    return o;
}

}  // namespace

TEST_CASE("initial simplex construction") {
    const std::vector<double> x0{2.5, 1.2};
    const auto s = initial_simplex(x0, 0.05);
    REQUIRE(s.vertices.size() == 3);
    CHECK(s.vertices[0] == x0);
    CHECK(s.vertices[1][0] == doctest::Approx(2.625));
    CHECK(s.vertices[1][1] == 1.2);
    CHECK(s.vertices[2][0] == 2.5);
    CHECK(s.vertices[2][1] == doctest::Approx(1.26));

    const std::vector<double> zero{0.0};
    CHECK(initial_simplex(zero, 0.05).vertices[1][0] == doctest::Approx(0.0000125));
}

TEST_CASE("sphere and Rosenbrock minima") {
    const auto sphere = nelder_mead(wrap(reference::sphere), std::vector<double>{1.0, -2.0, 0.5},
                                    tight(1e-8, 2000));
    CHECK(sphere.exit_reason == ExitReason::converged);
    for (double v : sphere.x) CHECK(std::abs(v) < 1e-3);

    const auto rosen = nelder_mead(wrap(reference::rosenbrock), std::vector<double>{-1.2, 1.0},
                                   tight(1e-10, 400));
    CHECK(rosen.iterations <= 400);
    CHECK(rosen.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(rosen.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("constant objective converges once the simplex collapses") {
    const auto r = nelder_mead([](std::span<const double>) { return 7.0; },
                               std::vector<double>{1.0, 2.0}, tight(1e-6, 1000));
    CHECK(r.exit_reason == ExitReason::converged);
    CHECK(r.f == 7.0);
}

TEST_CASE("NaN objective values rank as worst") {
    SimplexState s;
    s.n = 2;
    s.vertices = {{0, 0}, {1, 0}, {0, 1}};
    s.fvals = {std::numeric_limits<double>::quiet_NaN(), 2.0, 1.0};
    s.sort();
    CHECK(s.fvals[0] == 1.0);
    CHECK(s.fvals[1] == 2.0);
    CHECK(s.vertices[2] == std::vector<double>{0, 0});

    // NaN away from the origin never wins.
    const auto r = nelder_mead(
        [](std::span<const double> x) {
            return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x[0] * x[0] + x[1] * x[1];
        },
        std::vector<double>{0.4, 0.3}, tight(1e-8, 2000));
    CHECK(std::isfinite(r.f));
    CHECK(r.f < 1e-6);
}

TEST_CASE("iteration cap and time budget") {
    const auto capped = nelder_mead(wrap(reference::rosenbrock), std::vector<double>{-1.2, 1.0},
                                    tight(1e-14, 5));
    CHECK(capped.exit_reason == ExitReason::max_iterations);
    CHECK(capped.iterations == 5);

    NelderMeadOptions defaults = tight(1e-300, 0);
    const auto auto_cap = nelder_mead(wrap(reference::sphere), std::vector<double>{1.0, 1.0, 1.0}, defaults);
    CHECK(auto_cap.iterations <= 600);

    NelderMeadOptions budget = tight(1e-300, 1000000);
    budget.time_budget_s = 1e-9;
    const auto timed = nelder_mead(wrap(reference::sphere), std::vector<double>{1.0, 1.0}, budget);
    CHECK(timed.exit_reason == ExitReason::time_budget);
}

TEST_CASE("invalid arguments") {
    CHECK_THROWS_AS(nelder_mead(wrap(reference::sphere), std::vector<double>{}), InputError);
    CHECK_THROWS_AS(nelder_mead(wrap(reference::sphere), std::vector<double>{NAN}), InputError);
    NelderMeadOptions bad;
    bad.tol_x = 0;
    CHECK_THROWS_AS(nelder_mead(wrap(reference::sphere), std::vector<double>{1.0}, bad), InputError);
}

TEST_CASE("matches the independent reference minimizer") {
    struct Case {
        double (*fn)(const std::vector<double>&);
        std::vector<double> x0;
    };
    std::vector<Case> cases;
    for (std::size_t n = 2; n <= 4; ++n) {
        cases.push_back({reference::sphere, std::vector<double>(n, 1.5)});
        std::vector<double> r(n, 1.0);
        r[0] = -1.2;
        cases.push_back({reference::rosenbrock, r});
    }
    cases.push_back({reference::powell_quartic, {3.0, -1.0, 0.0, 1.0}});

    for (const auto& c : cases) {
        const auto expected = reference::fminsearch(c.fn, c.x0, 1e-8, 1e-8, 2000);
        const auto got = nelder_mead(wrap(c.fn), c.x0, tight(1e-8, 2000));
        CHECK(got.iterations == expected.iterations);
        CHECK(got.f == doctest::Approx(expected.f).epsilon(1e-6));
        for (std::size_t i = 0; i < c.x0.size(); ++i) CHECK(std::abs(got.x[i] - expected.x[i]) < 1e-6);
    }
}

TEST_CASE("property: best value never increases and the simplex keeps n + 1 vertices") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = dim(rng);
        std::vector<double> x0(n);
        for (auto& v : x0) v = coord(rng);
        const auto fn = trial % 2 ? reference::rosenbrock : reference::sphere;

        double previous = std::numeric_limits<double>::infinity();
        bool ok = true;
        auto options = tight(1e-9, 500);
        options.on_iteration = [&](const SimplexState& s) {
            ok = ok && s.vertices.size() == n + 1 && s.fvals.size() == n + 1 && s.best_value() <= previous;
            for (std::size_t i = 1; i < s.fvals.size(); ++i) ok = ok && s.fvals[i - 1] <= s.fvals[i];
            previous = s.best_value();
        };
        nelder_mead(wrap(fn), x0, options);
        CHECK(ok);
    }
}
