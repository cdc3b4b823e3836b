#pragma once

// Cadlag solution trajectories and the replayable noise record that
// drives them.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "jsde/point_pattern.hpp"
#include "jsde/time_grid.hpp"

namespace jsde {

struct JumpRecord {
    double time = 0.0;
    std::size_t node = 0; // grid index carrying the post-jump state
    Vec pre;
    Vec post;
    Vec mark;
};

struct CadlagPath {
    TimeGrid grid;
    std::vector<Vec> states; // right limit at each node
    std::vector<JumpRecord> jumps;
    bool truncated = false;
    std::size_t first_bad_node = std::numeric_limits<std::size_t>::max();
    std::vector<std::string> warnings;

    const Vec& initial() const { return states.front(); }
    const Vec& terminal() const { return states.back(); }

    // value just before node k (differs from states[k] only at jump nodes)
    Vec left_limit(std::size_t k) const {
        for (const auto& j : jumps)
            if (j.node == k) return j.pre;
        return states[k];
    }

    bool is_jump_node(std::size_t k) const {
        for (const auto& j : jumps)
            if (j.node == k) return true;
        return false;
    }
};

// Brownian increments per grid interval plus the driving jump pattern.
struct NoiseRecord {
    std::vector<Vec> brownian; // size = grid.intervals(), each of dim >= d
    MarkedPointPattern pattern;
    StreamKey key;
};

// Draw the Gaussian increments for a grid; dim may exceed the state
// dimension (cylindrical noise uses a prefix per truncation level).
inline NoiseRecord make_noise_record(const TimeGrid& grid, int dim,
                                     MarkedPointPattern pattern, const StreamKey& key) {
    NoiseRecord out;
    out.pattern = std::move(pattern);
    out.key = key;
    out.brownian.resize(grid.intervals());
    CounterRng rng(key.with(Substream::brownian));
    for (std::size_t k = 0; k < grid.intervals(); ++k) {
        const double sd = std::sqrt(grid.dt(k));
        out.brownian[k].resize(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) out.brownian[k][static_cast<std::size_t>(i)] = sd * rng.normal();
    }
    return out;
}

} // namespace jsde
