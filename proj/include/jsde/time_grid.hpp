#pragma once

// Uniform time partitions with event times spliced in as extra nodes.

#include <algorithm>
#include <cmath>
#include <vector>

#include "jsde/mark_measure.hpp"

namespace jsde {

struct TimeGrid {
    std::vector<double> nodes; // 0 = t_0 < t_1 < ... < t_M = T

    double horizon() const { return nodes.back(); }
    std::size_t intervals() const { return nodes.size() - 1; }
    double dt(std::size_t k) const { return nodes[k + 1] - nodes[k]; }

    // index of the last node with time <= t
    std::size_t node_at_or_before(double t) const {
        auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
        return static_cast<std::size_t>(std::distance(nodes.begin(), it)) - 1;
    }
};

// Build the partition {0, dt, 2dt, ..., T} merged with extra_times; each
// extra time in (0,T) appears exactly once as a node.
inline TimeGrid make_time_grid(double horizon, double dt, const std::vector<double>& extra_times = {}) {
    if (!(horizon > 0.0)) throw ConfigError("time grid: horizon must be positive");
    if (!(dt > 0.0)) throw ConfigError("time grid: dt must be positive");
    TimeGrid g;
    const auto n_uniform = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    g.nodes.reserve(n_uniform + extra_times.size() + 1);
    for (std::size_t k = 0; k < n_uniform; ++k) g.nodes.push_back(static_cast<double>(k) * dt);
    g.nodes.push_back(horizon);
    for (double t : extra_times) {
        if (t > 0.0 && t < horizon) g.nodes.push_back(t);
    }
    std::sort(g.nodes.begin(), g.nodes.end());
    g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());
    return g;
}

} // namespace jsde
