#include <catch2/catch_amalgamated.hpp>

#include "jsde/solver.hpp"
#include "jsde/stats.hpp"

using namespace jsde;
using Catch::Approx;

namespace {

CoefficientSet zero_coeffs(int dim = 1) {
    CoefficientSet c;
    c.dimension = dim;
    return c;
}

NoiseRecord noise_for(const TimeGrid& grid, int dim, MarkedPointPattern pattern,
                      std::uint64_t seed, std::uint64_t stream) {
    return make_noise_record(grid, dim, std::move(pattern), {seed, stream, Substream::brownian});
}

MarkedPointPattern no_jumps(double horizon) {
    MarkedPointPattern p;
    p.horizon = horizon;
    return p;
}

} // namespace

TEST_CASE("time grid splices event times exactly once") {
    const auto g = make_time_grid(1.0, 0.25, {0.1, 0.5, 0.99});
    REQUIRE(g.nodes.front() == 0.0);
    REQUIRE(g.nodes.back() == 1.0);
    for (std::size_t i = 1; i < g.nodes.size(); ++i) REQUIRE(g.nodes[i] > g.nodes[i - 1]);
    // 0.5 collides with a uniform node and must appear once
    CHECK(std::count(g.nodes.begin(), g.nodes.end(), 0.5) == 1);
    CHECK(std::count(g.nodes.begin(), g.nodes.end(), 0.1) == 1);
    CHECK(g.nodes.size() == 7);
}

TEST_CASE("all-zero coefficients yield a constant path") {
    const auto grid = make_time_grid(1.0, 0.125);
    const auto noise = noise_for(grid, 1, no_jumps(1.0), 1, 0);
    const auto path = solve_strong(zero_coeffs(), noise, grid, {3.25}, {});
    for (const auto& s : path.states) REQUIRE(s[0] == 3.25);
    CHECK(path.jumps.empty());
    CHECK_FALSE(path.truncated);
}

TEST_CASE("linear drift converges at first order to the exponential") {
    CoefficientSet c;
    c.dimension = 1;
    c.drift = [](const Vec& z, Vec& o) { o.assign(1, -z[0]); };
    const double exact = std::exp(-1.0);

    auto terminal_error = [&](double dt) {
        const auto grid = make_time_grid(1.0, dt);
        const auto noise = noise_for(grid, 1, no_jumps(1.0), 2, 0);
        const auto path = solve_strong(c, noise, grid, {1.0}, {});
        return std::fabs(path.terminal()[0] - exact);
    };

    const double e1 = terminal_error(1.0 / 128);
    const double e2 = terminal_error(1.0 / 256);
    const double e3 = terminal_error(1.0 / 512);
    CHECK(e1 / e2 > 1.8);
    CHECK(e1 / e2 < 2.2);
    CHECK(e2 / e3 > 1.8);
    CHECK(e2 / e3 < 2.2);
}

TEST_CASE("Ornstein-Uhlenbeck terminal variance matches the closed form") {
    CoefficientSet c;
    c.dimension = 1;
    c.drift = [](const Vec& z, Vec& o) { o.assign(1, -z[0]); };
    c.diffusion = [](const Vec&, Mat& m) { m = Mat::identity(1); };

    const auto grid = make_time_grid(1.0, 1.0 / 256);
    std::vector<double> terminals;
    terminals.reserve(10000);
    for (int r = 0; r < 10000; ++r) {
        const auto noise = noise_for(grid, 1, no_jumps(1.0), 123, static_cast<std::uint64_t>(r));
        terminals.push_back(solve_strong(c, noise, grid, {0.0}, {}).terminal()[0]);
    }
    double s = 0.0, ss = 0.0;
    for (double x : terminals) {
        s += x;
        ss += x * x;
    }
    const double mean = s / terminals.size();
    const double var = ss / terminals.size() - mean * mean;
    const double expect = (1.0 - std::exp(-2.0)) / 2.0;
    // sample variance stderr ~ var * sqrt(2/n)
    const double tol = 3.0 * expect * std::sqrt(2.0 / terminals.size());
    INFO("var " << var << " expected " << expect);
    CHECK(std::fabs(var - expect) < tol);
}

TEST_CASE("jump-only path follows the hand-computed piecewise affine solution") {
    // zeta(z,u) = u, one jump of 0.3 at t = 0.5, nu uniform mass 2 on [0.2,0.6]
    const auto model = LevyMeasureModel::uniform_on_intervals({{0.2, 0.6}}, 2.0);
    const double mean_drift = model.quadrature([](const Vec& u) { return u[0]; }, MarkRegion::all());
    CHECK(mean_drift == Approx(0.8).epsilon(1e-12)); // 2 * 0.4

    CoefficientSet c;
    c.dimension = 1;
    c.jump = [](const Vec&, const Vec& u, Vec& o) { o.assign(1, u[0]); };
    c.jump_state_independent = true;

    MarkedPointPattern pattern;
    pattern.horizon = 1.0;
    pattern.times = {0.5};
    pattern.marks = {{0.3}};

    const auto grid = make_time_grid(1.0, 0.125, pattern.times);
    const auto noise = noise_for(grid, 1, pattern, 5, 0);
    JumpEnvironment env{&model, MarkRegion::all(), nullptr};
    const auto path = solve_jump_only(c, noise, grid, {1.0}, env);

    for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
        const double t = grid.nodes[k];
        const double expect = 1.0 - mean_drift * t + (t >= 0.5 ? 0.3 : 0.0);
        REQUIRE(path.states[k][0] == Approx(expect).margin(1e-12));
    }
    REQUIRE(path.jumps.size() == 1);
    CHECK(path.jumps[0].time == 0.5);
    CHECK(path.jumps[0].post[0] - path.jumps[0].pre[0] == Approx(0.3));
}

TEST_CASE("jump bookkeeping: post equals pre plus the jump map output, bit exactly") {
    const auto model = LevyMeasureModel::uniform_on_intervals({{-1.0, -0.1}, {0.1, 1.0}}, 1.0);
    CoefficientSet c;
    c.dimension = 1;
    c.drift = [](const Vec& z, Vec& o) { o.assign(1, -z[0]); };
    c.jump = [](const Vec& z, const Vec& u, Vec& o) { o.assign(1, u[0] * (1.0 + 0.1 * z[0])); };

    const StreamKey key{99, 42, Substream::jump_times};
    const auto pattern = sample_prm(model, MarkRegion::all(), 4.0, key);
    const auto grid = make_time_grid(4.0, 1.0 / 64, pattern.times);
    const auto noise = make_noise_record(grid, 1, pattern, key);
    JumpEnvironment env{&model, MarkRegion::all(), nullptr};
    const auto path = solve_strong(c, noise, grid, {0.5}, env);

    REQUIRE(path.jumps.size() == pattern.size());
    Vec out;
    for (const auto& j : path.jumps) {
        c.jump(j.pre, j.mark, out);
        REQUIRE(j.post[0] == j.pre[0] + out[0]);
        REQUIRE(path.states[j.node][0] == j.post[0]);
    }
}

TEST_CASE("strong and jump-only solutions coincide when the parent has no diffusion") {
    const auto model = LevyMeasureModel::uniform_on_intervals({{-1.0, -0.1}, {0.1, 1.0}}, 1.0);
    CoefficientSet c;
    c.dimension = 1;
    c.drift = [](const Vec& z, Vec& o) { o.assign(1, -0.5 * z[0]); };
    c.jump = [](const Vec&, const Vec& u, Vec& o) { o.assign(1, u[0]); };
    c.jump_state_independent = true;

    const StreamKey key{7, 3, Substream::jump_times};
    const auto pattern = sample_prm(model, MarkRegion::all(), 1.0, key);
    const auto grid = make_time_grid(1.0, 1.0 / 32, pattern.times);
    const auto noise = make_noise_record(grid, 1, pattern, key);
    JumpEnvironment env{&model, MarkRegion::all(), nullptr};

    const auto a = solve_strong(c, noise, grid, {2.0}, env);
    const auto b = solve_jump_only(c, noise, grid, {2.0}, env);
    for (std::size_t k = 0; k < grid.nodes.size(); ++k) REQUIRE(a.states[k][0] == b.states[k][0]);
}

TEST_CASE("skeleton equation with empty schedule and no coefficients is constant") {
    const auto grid = make_time_grid(1.0, 0.25);
    const auto path = solve_skeleton(zero_coeffs(), {}, grid, {0.7}, {});
    for (const auto& s : path.states) REQUIRE(s[0] == 0.7);
}

TEST_CASE("skeleton with a point-mass measure drifts linearly and jumps on schedule") {
    const auto model = LevyMeasureModel::discrete(MarkSpace{1}, {{{1.0}, 1.0}});
    CoefficientSet c;
    c.dimension = 1;
    c.jump = [](const Vec&, const Vec& u, Vec& o) { o.assign(1, u[0]); };
    c.jump_state_independent = true;
    JumpEnvironment env{&model, MarkRegion::all(), nullptr};

    SECTION("no schedule: straight line with slope -mass*mark") {
        const auto grid = make_time_grid(1.0, 0.125);
        const auto path = solve_skeleton(c, {}, grid, {0.25}, env);
        for (std::size_t k = 0; k < grid.nodes.size(); ++k)
            REQUIRE(path.states[k][0] == Approx(0.25 - grid.nodes[k]).margin(1e-12));
    }

    SECTION("one scheduled jump adds a unit step") {
        const auto grid = make_time_grid(1.0, 0.125, {0.5});
        const auto path = solve_skeleton(c, {{0.5, {1.0}}}, grid, {0.25}, env);
        for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
            const double t = grid.nodes[k];
            REQUIRE(path.states[k][0] ==
                    Approx(0.25 - t + (t >= 0.5 ? 1.0 : 0.0)).margin(1e-12));
        }
        CHECK(path.terminal()[0] == Approx(0.25 - 1.0 + 1.0).margin(1e-10));
    }

    SECTION("unordered schedule is rejected") {
        const auto grid = make_time_grid(1.0, 0.125, {0.5, 0.25});
        REQUIRE_THROWS_AS(solve_skeleton(c, {{0.5, {1.0}}, {0.25, {1.0}}}, grid, {0.0}, env),
                          ConfigError);
    }
}

TEST_CASE("blow-up is flagged, not fatal") {
    CoefficientSet c;
    c.dimension = 1;
    c.drift = [](const Vec& z, Vec& o) { o.assign(1, z[0] * z[0] * z[0]); }; // super-linear
    const auto grid = make_time_grid(8.0, 0.5);
    const auto noise = noise_for(grid, 1, no_jumps(8.0), 17, 0);
    const auto path = solve_strong(c, noise, grid, {4.0}, {});
    REQUIRE(path.truncated);
    REQUIRE(path.first_bad_node < path.states.size());
    for (const auto& s : path.states) REQUIRE(std::isfinite(s[0]));
}

TEST_CASE("dimension mismatch is a configuration error") {
    const auto grid = make_time_grid(1.0, 0.5);
    const auto noise = noise_for(grid, 2, no_jumps(1.0), 1, 0);
    REQUIRE_THROWS_AS(solve_strong(zero_coeffs(2), noise, grid, {1.0}, {}), ConfigError);
}

TEST_CASE("noise record: replayable, with increment variance equal to the interval length") {
    const auto grid = make_time_grid(1.0, 1.0 / 32, {0.205});
    MarkedPointPattern p;
    p.horizon = 1.0;
    const StreamKey key{314, 9, Substream::brownian};
    const auto a = make_noise_record(grid, 2, p, key);
    const auto b = make_noise_record(grid, 2, p, key);
    for (std::size_t k = 0; k < grid.intervals(); ++k)
        for (int i = 0; i < 2; ++i)
            REQUIRE(a.brownian[k][static_cast<std::size_t>(i)] ==
                    b.brownian[k][static_cast<std::size_t>(i)]);

    // pooled variance of normalized increments over replications
    double ss = 0.0;
    std::size_t n = 0;
    for (std::uint64_t r = 0; r < 2000; ++r) {
        const auto rec = make_noise_record(grid, 1, p, {314, r, Substream::brownian});
        for (std::size_t k = 0; k < grid.intervals(); ++k) {
            const double z = rec.brownian[k][0] / std::sqrt(grid.dt(k));
            ss += z * z;
            ++n;
        }
    }
    const double var = ss / static_cast<double>(n);
    REQUIRE(std::fabs(var - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("coefficient probes") {
    CoefficientSet c;
    c.dimension = 1;
    c.drift = [](const Vec& z, Vec& o) { o.assign(1, -2.5 * z[0]); };
    std::vector<Vec> states{{-1.0}, {0.0}, {0.5}, {2.0}};
    std::vector<Vec> marks{{0.5}, {1.0}};

    SECTION("finite coefficients pass") { REQUIRE_NOTHROW(probe_finiteness(c, states, marks)); }

    SECTION("non-finite output is flagged") {
        c.drift = [](const Vec& z, Vec& o) { o.assign(1, 1.0 / (z[0] - 0.5 + 0.0)); };
        CoefficientSet bad = c;
        bad.drift = [](const Vec&, Vec& o) {
            o.assign(1, std::numeric_limits<double>::infinity());
        };
        REQUIRE_THROWS_AS(probe_finiteness(bad, states, marks), ModelError);
    }

    SECTION("declared L1 consistent with the coefficient passes") {
        c.declared_lipschitz = LipschitzBounds{2.5, 10.0};
        REQUIRE_NOTHROW(probe_lipschitz(c, states, marks));
    }

    SECTION("understated L1 is caught by the difference quotients") {
        c.declared_lipschitz = LipschitzBounds{1.0, 10.0};
        REQUIRE_THROWS_AS(probe_lipschitz(c, states, marks), ModelError);
    }
}

TEST_CASE("moment estimate is stable under path-count doubling") {
    // standard example: xi = -z, eta = 1, zeta = u, annulus measure
    const auto model = LevyMeasureModel::uniform_on_intervals({{-1.0, -0.1}, {0.1, 1.0}}, 1.0);
    CoefficientSet c;
    c.dimension = 1;
    c.drift = [](const Vec& z, Vec& o) { o.assign(1, -z[0]); };
    c.diffusion = [](const Vec&, Mat& m) { m = Mat::identity(1); };
    c.jump = [](const Vec&, const Vec& u, Vec& o) { o.assign(1, u[0]); };
    c.jump_state_independent = true;
    JumpEnvironment env{&model, MarkRegion::all(), nullptr};

    auto sup_sq_mean = [&](int n_paths) {
        double acc = 0.0;
        for (int r = 0; r < n_paths; ++r) {
            const StreamKey key{31415, static_cast<std::uint64_t>(r), Substream::jump_times};
            const auto pattern = sample_prm(model, MarkRegion::all(), 1.0, key);
            const auto grid = make_time_grid(1.0, 1.0 / 64, pattern.times);
            const auto noise = make_noise_record(grid, 1, pattern, key);
            const auto path = solve_strong(c, noise, grid, {0.0}, env);
            double sup = 0.0;
            for (const auto& s : path.states) sup = std::max(sup, std::fabs(s[0]));
            acc += sup * sup;
        }
        return acc / n_paths;
    };

    const double a = sup_sq_mean(10000);
    const double b = sup_sq_mean(20000);
    REQUIRE(std::isfinite(a));
    INFO("E sup^2 at 1e4 paths " << a << ", at 2e4 paths " << b);
    CHECK(std::fabs(a - b) / a < 0.05);
}
