#pragma once

// Counter-based random streams. Every draw is a pure function of
// (seed, stream, substream, counter), so paths can be simulated in any
// order, on any number of threads, and still reproduce bit-for-bit.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace jsde {

// Named substreams keep the different random inputs of one path from
// aliasing each other when consumption counts change.
enum class Substream : std::uint64_t {
    brownian = 1,
    jump_times = 2,
    jump_marks = 3,
    thinning = 4,
    initial_condition = 5,
};

namespace detail {

// Stafford's "Mix13" variant of the SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

} // namespace detail

struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0; // typically the path index
    Substream substream = Substream::brownian;

    StreamKey with(Substream sub) const { return {seed, stream, sub}; }
    StreamKey with_stream(std::uint64_t s) const { return {seed, s, substream}; }
};

// SplitMix64 evaluated at an avalanched per-key base; equivalent to a
// keyed counter generator. Distinct keys give decorrelated sequences.
class CounterRng {
  public:
    explicit CounterRng(const StreamKey& key)
        : base_(detail::mix64(detail::mix64(key.seed + detail::golden) ^
                              detail::mix64(key.stream * 0xd6e8feb86659fd93ULL) ^
                              detail::mix64(static_cast<std::uint64_t>(key.substream) << 17))) {}

    std::uint64_t next_u64() { return detail::mix64(base_ + (++counter_) * detail::golden); }

    // uniform on the open interval (0,1); never returns an endpoint
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller (two uniforms per draw)
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double exponential() { return -std::log(uniform()); }

    // Poisson count by summing unit exponentials until the budget is
    // spent; exact for any mean and free of the e^-mean underflow.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        std::uint64_t k = 0;
        double acc = exponential();
        while (acc <= mean) {
            ++k;
            acc += exponential();
        }
        return k;
    }

  private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

} // namespace jsde
