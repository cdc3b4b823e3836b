#include <catch2/catch_amalgamated.hpp>

#include "jsde/point_pattern.hpp"
#include "jsde/stats.hpp"

#include <cstring>

using namespace jsde;
using Catch::Approx;

namespace {

LevyMeasureModel uniform_12_mass2() {
    return LevyMeasureModel::uniform_on_intervals({{1.0, 2.0}}, 2.0);
}

} // namespace

TEST_CASE("empty region gives an empty pattern") {
    const auto m = uniform_12_mass2();
    const auto p = sample_prm(m, MarkRegion::none(), 1.0, {1, 2, Substream::jump_times});
    CHECK(p.size() == 0);
    CHECK(p.horizon == 1.0);
}

TEST_CASE("sample_prm rejects a nonpositive horizon") {
    const auto m = uniform_12_mass2();
    REQUIRE_THROWS_AS(sample_prm(m, MarkRegion::all(), 0.0, {1, 2, Substream::jump_times}),
                      ConfigError);
    REQUIRE_THROWS_AS(sample_prm(m, MarkRegion::all(), -1.0, {1, 2, Substream::jump_times}),
                      ConfigError);
}

TEST_CASE("count and mark laws of the sampled measure") {
    const auto m = uniform_12_mass2();
    const int reps = 100000;
    double count_sum = 0.0;
    double mark_sum = 0.0, mark_sq = 0.0;
    std::uint64_t n_marks = 0;
    for (int r = 0; r < reps; ++r) {
        const auto p = sample_prm(m, MarkRegion::all(), 1.0,
                                  {2025, static_cast<std::uint64_t>(r), Substream::jump_times});
        count_sum += static_cast<double>(p.size());
        for (const auto& u : p.marks) {
            mark_sum += u[0];
            mark_sq += u[0] * u[0];
            ++n_marks;
        }
        p.validate(m.space());
    }
    // mean count 2 within 3*sqrt(2/reps)
    CHECK(std::fabs(count_sum / reps - 2.0) < 3.0 * std::sqrt(2.0 / reps));
    // mark mean 1.5 within 3 stderr
    const double mark_mean = mark_sum / static_cast<double>(n_marks);
    const double mark_var = mark_sq / static_cast<double>(n_marks) - mark_mean * mark_mean;
    CHECK(std::fabs(mark_mean - 1.5) <
          3.0 * std::sqrt(mark_var / static_cast<double>(n_marks)));
}

TEST_CASE("event counts pass a chi-square test against the Poisson law") {
    const auto m = uniform_12_mass2();
    std::vector<std::uint64_t> counts;
    counts.reserve(10000);
    for (int r = 0; r < 10000; ++r)
        counts.push_back(
            sample_prm(m, MarkRegion::all(), 1.0, {7, static_cast<std::uint64_t>(r), Substream::jump_times})
                .size());
    const auto gof = poisson_chi_square_gof(counts, 2.0);
    INFO("chi2 = " << gof.statistic << " dof = " << gof.dof << " p = " << gof.p_value);
    REQUIRE(gof.p_value > 0.001);
}

TEST_CASE("identical keys give byte-identical patterns") {
    const auto m = uniform_12_mass2();
    const StreamKey key{99, 5, Substream::jump_times};
    const auto a = sample_prm(m, MarkRegion::all(), 3.0, key);
    const auto b = sample_prm(m, MarkRegion::all(), 3.0, key);
    REQUIRE(a.size() == b.size());
    REQUIRE(std::memcmp(a.times.data(), b.times.data(), a.times.size() * sizeof(double)) == 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        REQUIRE(std::memcmp(a.marks[i].data(), b.marks[i].data(), sizeof(double)) == 0);
}

TEST_CASE("thinning keeps almost everything at the upper boundary") {
    const auto m = uniform_12_mass2();
    // gather ~1e5 events across replications, lambda ~ 1
    const auto lam = [](const Vec&) { return 1.0 - 1e-12; };
    std::size_t total = 0, removed = 0;
    for (int r = 0; r < 50000; ++r) {
        const StreamKey key{4242, static_cast<std::uint64_t>(r), Substream::jump_times};
        const auto p = sample_prm(m, MarkRegion::all(), 1.0, key);
        const auto t = thin_to_tilted(p, lam, key);
        total += p.size();
        removed += p.size() - t.size();
    }
    REQUIRE(total > 90000);
    CHECK(removed == 0);
}

TEST_CASE("thinning halves the expected count at lambda one half") {
    const auto m = LevyMeasureModel::uniform_on_intervals({{1.0, 2.0}}, 4.0);
    const auto lam = [](const Vec&) { return 0.5; };
    double kept = 0.0, kept_sq = 0.0;
    const int reps = 100000;
    for (int r = 0; r < reps; ++r) {
        const StreamKey key{555, static_cast<std::uint64_t>(r), Substream::jump_times};
        const auto t = thin_to_tilted(sample_prm(m, MarkRegion::all(), 1.0, key), lam, key);
        kept += static_cast<double>(t.size());
        kept_sq += static_cast<double>(t.size()) * static_cast<double>(t.size());
    }
    const double mean = kept / reps;
    const double var = kept_sq / reps - mean * mean;
    CHECK(std::fabs(mean - 2.0) < 3.0 * std::sqrt(var / reps));
}

TEST_CASE("mark-dependent thinning matches the tilted mass") {
    // marks uniform on (0,1) with mass m, lambda(u) = u: kept rate = m/2
    const double mass = 3.0;
    const auto m = LevyMeasureModel::uniform_on_intervals({{0.0, 1.0}}, mass);
    const auto lam = [](const Vec& u) { return u[0]; };
    double kept = 0.0, kept_sq = 0.0;
    const int reps = 100000;
    for (int r = 0; r < reps; ++r) {
        const StreamKey key{808, static_cast<std::uint64_t>(r), Substream::jump_times};
        const auto t = thin_to_tilted(sample_prm(m, MarkRegion::all(), 1.0, key), lam, key);
        kept += static_cast<double>(t.size());
        kept_sq += static_cast<double>(t.size()) * static_cast<double>(t.size());
    }
    const double mean = kept / reps;
    const double var = kept_sq / reps - mean * mean;
    const double predicted = m.quadrature(lam, MarkRegion::all()); // = mass/2
    CHECK(predicted == Approx(mass / 2.0).epsilon(1e-12));
    CHECK(std::fabs(mean - predicted) < 3.0 * std::sqrt(var / reps));
}

TEST_CASE("thinning rejects lambda outside the open unit interval") {
    const auto m = uniform_12_mass2();
    const StreamKey key{31, 0, Substream::jump_times};
    MarkedPointPattern p;
    p.horizon = 1.0;
    p.times = {0.5};
    p.marks = {{1.5}};
    REQUIRE_THROWS_AS(thin_to_tilted(p, [](const Vec&) { return 1.0; }, key), ModelError);
    REQUIRE_THROWS_AS(thin_to_tilted(p, [](const Vec&) { return 0.0; }, key), ModelError);
    REQUIRE_THROWS_AS(thin_to_tilted(p, [](const Vec&) { return -0.2; }, key), ModelError);
}

TEST_CASE("compensated integral identities") {
    const auto m = uniform_12_mass2();
    const StreamKey key{6060, 1, Substream::jump_times};
    const auto p = sample_prm(m, MarkRegion::all(), 1.0, key);

    // zero integrand -> exactly zero
    const auto zero = [](double, const Vec&, Vec& o) { o.assign(1, 0.0); };
    CHECK(compensated_integral(p, zero, 1, m, MarkRegion::all(), 1.0)[0] == 0.0);

    // unit integrand -> k - m*T up to midpoint-rule roundoff
    const auto one = [](double, const Vec&, Vec& o) { o.assign(1, 1.0); };
    const double val = compensated_integral(p, one, 1, m, MarkRegion::all(), 1.0)[0];
    CHECK(val == Approx(static_cast<double>(p.size()) - 2.0).margin(1e-12));
}

TEST_CASE("compensated integral of a bounded integrand has mean zero") {
    const auto m = uniform_12_mass2();
    const auto f = [](double t, const Vec& u, Vec& o) { o.assign(1, std::sin(3.0 * t) + u[0]); };
    std::vector<double> vals;
    vals.reserve(10000);
    for (int r = 0; r < 10000; ++r) {
        const auto p = sample_prm(m, MarkRegion::all(), 1.0,
                                  {9090, static_cast<std::uint64_t>(r), Substream::jump_times});
        vals.push_back(compensated_integral(p, f, 1, m, MarkRegion::all(), 1.0)[0]);
    }
    const auto ms = mean_stderr(vals);
    INFO("mean " << ms.mean << " stderr " << ms.stderr_);
    CHECK(std::fabs(ms.mean) < 3.0 * ms.stderr_);
}

TEST_CASE("compensated integral against the tilted measure is centered") {
    // pattern thinned by lambda, compensator weighted by the same lambda
    const auto m = LevyMeasureModel::uniform_on_intervals({{0.1, 1.0}}, 2.0);
    const auto lam = [](const Vec& u) { return std::exp(-u[0]); };
    const auto f = [](double, const Vec& u, Vec& o) { o.assign(1, u[0] * u[0]); };
    std::vector<double> vals;
    for (int r = 0; r < 10000; ++r) {
        const StreamKey key{7171, static_cast<std::uint64_t>(r), Substream::jump_times};
        const auto tilted = thin_to_tilted(sample_prm(m, MarkRegion::all(), 1.0, key), lam, key);
        vals.push_back(compensated_integral(tilted, f, 1, m, MarkRegion::all(), 1.0, lam)[0]);
    }
    const auto ms = mean_stderr(vals);
    INFO("mean " << ms.mean << " stderr " << ms.stderr_);
    CHECK(std::fabs(ms.mean) < 3.0 * ms.stderr_);
}

TEST_CASE("compensated integral propagates non-finite integrand values") {
    const auto m = uniform_12_mass2();
    MarkedPointPattern p;
    p.horizon = 1.0;
    p.times = {0.25};
    p.marks = {{1.5}};
    const auto bad = [](double, const Vec&, Vec& o) {
        o.assign(1, std::numeric_limits<double>::quiet_NaN());
    };
    REQUIRE_THROWS_AS(compensated_integral(p, bad, 1, m, MarkRegion::all(), 1.0), NumericError);
}
