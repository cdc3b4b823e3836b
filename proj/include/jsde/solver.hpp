#pragma once

// Strong-solution approximation of jump SDEs: explicit Euler-Maruyama
// between nodes with jump times spliced into the grid, and the
// deterministic skeleton equation with a prescribed jump schedule.
//
// Between nodes the compensated jump integral contributes the drift
// -quad(zeta(z,.) * w) evaluated at the current state; at a spliced jump
// node the state additionally gains zeta(pre, mark).

#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <vector>

#include "jsde/coefficients.hpp"
#include "jsde/path.hpp"

namespace jsde {

// What the solver needs to know about the driving measure beyond the
// sampled pattern: the intensity model for compensator quadrature, the
// active mark region, and an optional tilt weight (lambda for equations
// driven by the tilted measure, absent for plain nu).
struct JumpEnvironment {
    const LevyMeasureModel* intensity = nullptr;
    MarkRegion region = MarkRegion::none();
    std::function<double(const Vec&)> compensator_weight; // null => 1

    bool active() const { return intensity != nullptr && !intensity->empty() && !region.is_empty; }
};

namespace detail {

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

struct StepperOptions {
    bool use_diffusion = true;
};

// zero-allocation scratch reused across steps
struct SolverScratch {
    Vec drift, comp, diff_incr, jump_out, tmp;
    Mat diffusion;
};

inline void compensator_drift(const CoefficientSet& coeffs, const JumpEnvironment& env,
                              const Vec& state, Vec& out, SolverScratch& scratch) {
    if (!coeffs.has_jump() || !env.active()) {
        out.assign(state.size(), 0.0);
        return;
    }
    env.intensity->quadrature_vec(
        [&](const Vec& u, Vec& o) {
            coeffs.jump(state, u, o);
            if (env.compensator_weight) {
                const double w = env.compensator_weight(u);
                for (auto& x : o) x *= w;
            }
        },
        env.region, coeffs.dimension, out);
    (void)scratch;
}

inline CadlagPath euler_with_jumps(const CoefficientSet& coeffs, const NoiseRecord* noise,
                                   const std::vector<double>& jump_times,
                                   const std::vector<const Vec*>& jump_marks,
                                   const TimeGrid& grid, const Vec& initial,
                                   const JumpEnvironment& env, const StepperOptions& opt) {
    const int d = coeffs.dimension;
    if (static_cast<int>(initial.size()) != d)
        throw ConfigError("solver: initial state dimension mismatch");
    if (noise != nullptr && noise->brownian.size() != grid.intervals())
        throw ConfigError("solver: noise record does not match the grid");

    CadlagPath path;
    path.grid = grid;
    path.states.resize(grid.nodes.size());
    path.states[0] = initial;

    SolverScratch s;
    Vec state = initial;

    // cache the compensator when the jump map ignores the state
    Vec cached_comp;
    const bool cache_comp = coeffs.jump_state_independent;
    if (cache_comp) compensator_drift(coeffs, env, state, cached_comp, s);

    std::size_t next_jump = 0;
    for (std::size_t k = 0; k < grid.intervals(); ++k) {
        if (!path.truncated) {
            // all coefficients evaluated at the left endpoint (Ito scheme)
            const Vec& left = path.states[k];
            const double dt = grid.dt(k);
            if (coeffs.has_drift()) {
                coeffs.drift(left, s.drift);
            } else {
                s.drift.assign(state.size(), 0.0);
            }
            if (cache_comp) {
                s.comp = cached_comp;
            } else {
                compensator_drift(coeffs, env, left, s.comp, s);
            }
            for (int i = 0; i < d; ++i)
                state[static_cast<std::size_t>(i)] +=
                    (s.drift[static_cast<std::size_t>(i)] - s.comp[static_cast<std::size_t>(i)]) * dt;
            if (opt.use_diffusion && coeffs.has_diffusion() && noise != nullptr) {
                coeffs.diffusion(left, s.diffusion);
                s.diffusion.multiply(noise->brownian[k], s.diff_incr);
                for (int i = 0; i < d; ++i)
                    state[static_cast<std::size_t>(i)] += s.diff_incr[static_cast<std::size_t>(i)];
            }
        }

        // apply any jump scheduled exactly at the arriving node
        const double t_next = grid.nodes[k + 1];
        while (next_jump < jump_times.size() && jump_times[next_jump] <= t_next) {
            if (jump_times[next_jump] != t_next)
                throw ConfigError("solver: event time is not a grid node; splice jump times first");
            if (!path.truncated && coeffs.has_jump()) {
                JumpRecord rec;
                rec.time = t_next;
                rec.node = k + 1;
                rec.pre = state;
                rec.mark = *jump_marks[next_jump];
                coeffs.jump(state, rec.mark, s.jump_out);
                for (int i = 0; i < d; ++i)
                    state[static_cast<std::size_t>(i)] += s.jump_out[static_cast<std::size_t>(i)];
                rec.post = state;
                path.jumps.push_back(std::move(rec));
            }
            ++next_jump;
        }

        if (!path.truncated && !all_finite(state)) {
            path.truncated = true;
            path.first_bad_node = k + 1;
            state = path.states[k]; // freeze at the last finite value
        }
        path.states[k + 1] = state;
    }
    return path;
}

// events of the pattern that fall inside region, as parallel arrays
inline void select_events(const MarkedPointPattern& pattern, const MarkSpace& space,
                          const MarkRegion& region, std::vector<double>& times,
                          std::vector<const Vec*>& marks) {
    times.clear();
    marks.clear();
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (region.contains_norm(space.norm(pattern.marks[i]))) {
            times.push_back(pattern.times[i]);
            marks.push_back(&pattern.marks[i]);
        }
    }
}

} // namespace detail

// Full equation: drift + diffusion + compensated jumps over env.region.
inline CadlagPath solve_strong(const CoefficientSet& coeffs, const NoiseRecord& noise,
                               const TimeGrid& grid, const Vec& initial,
                               const JumpEnvironment& env) {
    std::vector<double> times;
    std::vector<const Vec*> marks;
    if (env.active())
        detail::select_events(noise.pattern, env.intensity->space(), env.region, times, marks);
    return detail::euler_with_jumps(coeffs, &noise, times, marks, grid, initial, env, {true});
}

// First auxiliary equation: same drift and jumps restricted to env.region,
// no continuous diffusion. Shares a NoiseRecord with solve_strong so the
// two approximations are coupled path by path.
inline CadlagPath solve_jump_only(const CoefficientSet& coeffs, const NoiseRecord& noise,
                                  const TimeGrid& grid, const Vec& initial,
                                  const JumpEnvironment& env) {
    std::vector<double> times;
    std::vector<const Vec*> marks;
    if (env.active())
        detail::select_events(noise.pattern, env.intensity->space(), env.region, times, marks);
    CadlagPath path =
        detail::euler_with_jumps(coeffs, &noise, times, marks, grid, initial, env, {false});
    if (coeffs.declared_lipschitz && env.active()) {
        // The small-mark bound L1 * |u| < 1 is a proof device; violating it
        // only costs the contraction argument, not solvability.
        const double l1 = coeffs.declared_lipschitz->l1;
        const MarkSpace& space = env.intensity->space();
        for (const Vec* u : marks) {
            if (l1 * space.norm(*u) >= 1.0) {
                path.warnings.push_back("small-mark bound violated: L1*|u| >= 1 for a mark in U");
                break;
            }
        }
    }
    return path;
}

struct ScheduledJump {
    double time;
    Vec mark;
};

// Second auxiliary (skeleton) equation: deterministic flow of
//   dz = [xi(z) - quad_U(zeta(z,.))] dt
// with the scheduled jumps applied at their instants. Consumes no
// randomness. Schedule times must appear as grid nodes.
inline CadlagPath solve_skeleton(const CoefficientSet& coeffs,
                                 const std::vector<ScheduledJump>& schedule, const TimeGrid& grid,
                                 const Vec& initial, const JumpEnvironment& env) {
    std::vector<double> times;
    std::vector<const Vec*> marks;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (i > 0 && !(schedule[i].time > schedule[i - 1].time))
            throw ConfigError("skeleton schedule times must be strictly increasing");
        times.push_back(schedule[i].time);
        marks.push_back(&schedule[i].mark);
    }
    JumpEnvironment plain = env;
    plain.compensator_weight = nullptr; // skeleton drift is against nu itself
    return detail::euler_with_jumps(coeffs, nullptr, times, marks, grid, initial, plain, {false});
}

} // namespace jsde
