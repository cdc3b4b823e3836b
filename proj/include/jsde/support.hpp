#pragma once

// Ball-hit frequency estimates of the terminal law's support, with exact
// binomial bounds. A positive lower bound is support evidence; zero hits
// only bound the probability at the tested resolution, never a disproof.

#include <cmath>
#include <functional>
#include <vector>

#include "jsde/path.hpp"
#include "jsde/stats.hpp"

namespace jsde {

struct BallQuery {
    Vec center;
    double radius = 0.25;
    double time = 1.0;
};

struct HitEstimate {
    BallQuery query;
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;
    double point_estimate = 0.0;
    double cp_lower = 0.0;
    double cp_upper = 1.0;
    std::uint64_t failed_paths = 0;
    bool valid = true; // false when more than 1% of paths failed
};

namespace detail {

inline bool in_ball(const Vec& state, const BallQuery& q) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double d = state[i] - q.center[i];
        d2 += d * d;
    }
    return d2 < q.radius * q.radius;
}

} // namespace detail

// Count hits over a precomputed terminal-state ensemble. Failed paths are
// reported via the separate count.
inline HitEstimate tally_hits(const std::vector<Vec>& terminals, std::uint64_t failed,
                              const BallQuery& query, double alpha) {
    if (!(query.radius > 0.0)) throw ConfigError("ball query needs a positive radius");
    HitEstimate est;
    est.query = query;
    est.failed_paths = failed;
    est.trials = terminals.size();
    for (const auto& s : terminals) {
        if (s.size() != query.center.size())
            throw ConfigError("ball query center dimension does not match the state");
        if (detail::in_ball(s, query)) ++est.hits;
    }
    if (est.trials == 0) throw ConfigError("hit estimate with no successful paths");
    est.point_estimate = static_cast<double>(est.hits) / static_cast<double>(est.trials);
    const auto b = clopper_pearson(est.hits, est.trials, alpha);
    est.cp_lower = b.lower;
    est.cp_upper = b.upper;
    est.valid = static_cast<double>(failed) <=
                0.01 * static_cast<double>(est.trials + failed);
    return est;
}

// One simulation pass, every ball tested against the shared ensemble.
// simulate(stream_id) returns the terminal state or an empty vector on
// solver failure.
inline std::vector<HitEstimate> scan_support(
    const std::function<Vec(std::uint64_t)>& simulate_terminal, std::size_t n_paths,
    const std::vector<BallQuery>& queries, double alpha) {
    std::vector<Vec> terminals;
    terminals.reserve(n_paths);
    std::uint64_t failed = 0;
    for (std::size_t p = 0; p < n_paths; ++p) {
        Vec t = simulate_terminal(p);
        if (t.empty()) {
            ++failed;
        } else {
            terminals.push_back(std::move(t));
        }
    }
    std::vector<HitEstimate> out;
    out.reserve(queries.size());
    for (const auto& q : queries) out.push_back(tally_hits(terminals, failed, q, alpha));
    return out;
}

inline HitEstimate estimate_hit_probability(
    const std::function<Vec(std::uint64_t)>& simulate_terminal, std::size_t n_paths,
    const BallQuery& query, double alpha) {
    if (n_paths < 100) throw ConfigError("hit probability estimate needs at least 100 paths");
    return scan_support(simulate_terminal, n_paths, {query}, alpha).front();
}

// ---------------------------------------------------------------------------
// Jump-reachability probe: draw marks from the normalized intensity and
// look for one that the jump map sends into the ball. A miss reports the
// best distance seen and is explicitly not a disproof.

struct ReachabilityReport {
    bool found = false;
    Vec witness_mark;
    std::size_t draws_used = 0;
    double min_distance = std::numeric_limits<double>::infinity();
};

inline ReachabilityReport check_reachability(const JumpFn& jump_map,
                                             const LevyMeasureModel& intensity,
                                             const MarkRegion& region, const Vec& state,
                                             const BallQuery& ball, std::size_t n_samples,
                                             const StreamKey& key) {
    ReachabilityReport rep;
    CounterRng rng(key.with(Substream::jump_marks));
    Vec out;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const Vec u = intensity.sample(region, rng);
        jump_map(state, u, out);
        if (out.size() != ball.center.size())
            throw ConfigError("reachability ball dimension does not match the jump image");
        double d2 = 0.0;
        for (std::size_t j = 0; j < out.size(); ++j) {
            const double d = out[j] - ball.center[j];
            d2 += d * d;
        }
        const double d = std::sqrt(d2);
        rep.min_distance = std::min(rep.min_distance, d);
        rep.draws_used = i + 1;
        if (d < ball.radius) {
            rep.found = true;
            rep.witness_mark = u;
            return rep;
        }
    }
    return rep;
}

} // namespace jsde
