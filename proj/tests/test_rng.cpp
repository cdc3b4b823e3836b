#include <catch2/catch_amalgamated.hpp>

#include "jsde/rng.hpp"
#include "jsde/stats.hpp"

#include <vector>

using namespace jsde;

TEST_CASE("identical keys reproduce identical draws") {
    StreamKey key{12345, 7, Substream::brownian};
    CounterRng a(key);
    CounterRng b(key);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams decorrelate") {
    StreamKey key{12345, 0, Substream::brownian};
    CounterRng a(key);
    CounterRng b(key.with_stream(1));
    CounterRng c(key.with(Substream::jump_times));
    int equal_ab = 0, equal_ac = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64();
        if (x == b.next_u64()) ++equal_ab;
        if (x == c.next_u64()) ++equal_ac;
    }
    REQUIRE(equal_ab == 0);
    REQUIRE(equal_ac == 0);
}

TEST_CASE("uniform stays inside the open unit interval") {
    CounterRng rng({99, 0, Substream::thinning});
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal moments") {
    CounterRng rng({2024, 3, Substream::brownian});
    const int n = 200000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        ss += z * z;
    }
    const double mean = s / n;
    const double var = ss / n - mean * mean;
    REQUIRE(std::fabs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
    REQUIRE(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("poisson mean and variance") {
    CounterRng rng({5150, 1, Substream::jump_times});
    const double mean = 7.5;
    const int n = 100000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<double>(rng.poisson(mean));
        s += k;
        ss += k * k;
    }
    const double m = s / n;
    const double v = ss / n - m * m;
    REQUIRE(std::fabs(m - mean) < 3.0 * std::sqrt(mean / n));
    REQUIRE(std::fabs(v - mean) < 0.15);
}

TEST_CASE("poisson of nonpositive mean is zero") {
    CounterRng rng({1, 1, Substream::jump_times});
    REQUIRE(rng.poisson(0.0) == 0);
    REQUIRE(rng.poisson(-2.0) == 0);
}
