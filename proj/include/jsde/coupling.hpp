#pragma once

// Coupled simulations probing how close the full solution stays to its
// jump-only truncation over short horizons, and how close the truncated
// solution stays to the deterministic skeleton when the first jump is
// conditioned to land near a prescribed (time, mark).

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "jsde/solver.hpp"
#include "jsde/stats.hpp"

namespace jsde {

struct DistancePoint {
    double horizon = 0.0;
    double mean_sq_sup = 0.0;
    double stderr_ = 0.0;
};

struct CoupledCurveOptions {
    double dt = 1.0 / 256;
    std::size_t n_paths = 10000;
    Vec initial;
};

// Monte Carlo estimate of E sup_{s<=t_n} |Z_s - Z^U_s|^2 for each horizon,
// where Z and Z^U share the same Brownian record and jump pattern. The
// horizons must be given in decreasing order; one simulation over the
// largest horizon serves all of them.
inline std::vector<DistancePoint> coupled_distance_curve(
    const CoefficientSet& coeffs, const LevyMeasureModel& intensity, const MarkRegion& full_region,
    const MarkRegion& region_u, const std::vector<double>& horizons, const CoupledCurveOptions& opt,
    const StreamKey& key, std::size_t* failed_paths = nullptr) {
    if (horizons.empty()) throw ConfigError("coupled_distance_curve: no horizons");
    for (std::size_t i = 1; i < horizons.size(); ++i)
        if (!(horizons[i] < horizons[i - 1]))
            throw ConfigError("coupled_distance_curve: horizons must decrease");

    const double t_max = horizons.front();
    std::vector<std::vector<double>> sup_sq(horizons.size());
    for (auto& v : sup_sq) v.reserve(opt.n_paths);
    std::size_t failures = 0;

    JumpEnvironment env_full{&intensity, full_region, nullptr};
    JumpEnvironment env_u{&intensity, region_u, nullptr};

    for (std::size_t p = 0; p < opt.n_paths; ++p) {
        const StreamKey path_key = key.with_stream(key.stream + p);
        const auto pattern = sample_prm(intensity, full_region, t_max, path_key);
        const auto grid = make_time_grid(t_max, opt.dt, pattern.times);
        const auto noise = make_noise_record(grid, coeffs.dimension, pattern, path_key);

        const auto z = solve_strong(coeffs, noise, grid, opt.initial, env_full);
        const auto zu = solve_jump_only(coeffs, noise, grid, opt.initial, env_u);
        if (z.truncated || zu.truncated) {
            ++failures;
            continue;
        }

        // running sup of the squared distance, sampled at each horizon
        double running = 0.0;
        std::vector<double> per_horizon(horizons.size(), 0.0);
        std::size_t hi = horizons.size() - 1; // horizons sorted decreasing; close smallest first
        bool done = false;
        for (std::size_t k = 0; k < grid.nodes.size() && !done; ++k) {
            const double t = grid.nodes[k];
            while (t > horizons[hi]) {
                per_horizon[hi] = running;
                if (hi == 0) {
                    done = true;
                    break;
                }
                --hi;
            }
            if (done) break;
            double d2 = 0.0;
            for (int i = 0; i < coeffs.dimension; ++i) {
                const double d = z.states[k][static_cast<std::size_t>(i)] -
                                 zu.states[k][static_cast<std::size_t>(i)];
                d2 += d * d;
            }
            running = std::max(running, d2);
        }
        if (!done) {
            // grid ends exactly at the largest horizon; close the rest
            for (std::size_t j = 0; j <= hi; ++j) per_horizon[j] = running;
        }
        for (std::size_t j = 0; j < horizons.size(); ++j) sup_sq[j].push_back(per_horizon[j]);
    }

    if (failed_paths != nullptr) *failed_paths = failures;
    std::vector<DistancePoint> out;
    out.reserve(horizons.size());
    for (std::size_t j = 0; j < horizons.size(); ++j) {
        const auto ms = mean_stderr(sup_sq[j]);
        out.push_back({horizons[j], ms.mean, ms.stderr_});
    }
    return out;
}

// Envelope a*(e^{b t} - 1) implied by the linear integral inequality
//   u(t) <= alpha t + beta int_0^t u(r) dr
// with constants assembled from the declared Lipschitz metadata:
//   beta  = 4 L1^2 (T + 4 nu(U)),  alpha = 16 L2 (C_m + 1),
//   C_m   = (4 E|g|^2 + 4 (T+4) T L2) e^{4 (T+4) L2 T}.
struct GronwallEnvelope {
    double a = 0.0;
    double b = 0.0;
    double at(double t) const { return a * (std::exp(b * t) - 1.0); }
};

inline GronwallEnvelope coupling_envelope(const LipschitzBounds& lip, double horizon,
                                          double mass_u, double initial_second_moment) {
    GronwallEnvelope env;
    const double l1 = lip.l1, l2 = lip.l2, t = horizon;
    const double cm = (4.0 * initial_second_moment + 4.0 * (t + 4.0) * t * l2) *
                      std::exp(4.0 * (t + 4.0) * l2 * t);
    const double alpha = 16.0 * l2 * (cm + 1.0);
    env.b = 4.0 * l1 * l1 * (t + 4.0 * mass_u);
    env.a = alpha / env.b;
    return env;
}

// ---------------------------------------------------------------------------
// Conditioned first-jump coupling.

struct ConditionedCouplingReport {
    double max_sup_distance = 0.0;   // over qualifying accepted paths
    double acceptance_rate = 0.0;    // of the first-jump window event
    double acceptance_stderr = 0.0;
    std::size_t n_attempts = 0;
    std::size_t n_accepted = 0;
    std::size_t n_excluded_late_jump = 0; // accepted but second jump before t_n
    double epsilon = 0.0;
};

struct ConditionedCouplingOptions {
    double s1 = 0.2;          // scheduled first-jump time
    Vec u1;                   // scheduled first-jump mark
    double epsilon = 0.1;     // window width for time and mark
    double horizon = 0.25;    // t_n, the comparison horizon (>= s1)
    double dt = 1.0 / 256;
    std::size_t n_accepted = 200;
    double min_acceptance_rate = 1e-4;
    Vec initial;
};

// Repeatedly draws the truncated equation, keeps paths whose first jump
// lands in (s1 - eps, s1) with mark within eps of u1, and measures the
// distance to the skeleton run with schedule {(s1, u1)}. The distance sup
// skips the nodes strictly between the two jump instants, where the paths
// are momentarily out of phase by a whole jump; accepted paths whose
// second jump arrives before the horizon are excluded from the distance
// statistic (but still count toward the acceptance rate).
inline ConditionedCouplingReport conditioned_coupling_test(const CoefficientSet& coeffs,
                                                           const LevyMeasureModel& intensity,
                                                           const MarkRegion& region_u,
                                                           const ConditionedCouplingOptions& opt,
                                                           const StreamKey& key) {
    if (!(opt.s1 > 0.0) || !(opt.horizon >= opt.s1))
        throw ConfigError("conditioned coupling: need 0 < s1 <= horizon");
    if (!(intensity.mass(region_u) > 0.0))
        throw ConfigError("conditioned coupling: region must carry positive mass");

    ConditionedCouplingReport rep;
    rep.epsilon = opt.epsilon;
    const MarkSpace& space = intensity.space();

    const std::size_t max_attempts = static_cast<std::size_t>(
        std::ceil(static_cast<double>(opt.n_accepted) / opt.min_acceptance_rate));

    JumpEnvironment env{&intensity, region_u, nullptr};

    for (std::size_t attempt = 0; attempt < max_attempts && rep.n_accepted < opt.n_accepted;
         ++attempt) {
        const StreamKey path_key = key.with_stream(key.stream + attempt);
        const auto pattern = sample_prm(intensity, region_u, opt.horizon, path_key);
        ++rep.n_attempts;

        if (pattern.size() == 0) continue;
        const double tau1 = pattern.times.front();
        if (!(opt.s1 - tau1 > 0.0 && opt.s1 - tau1 < opt.epsilon)) continue;
        Vec diff = pattern.marks.front();
        if (diff.size() != opt.u1.size())
            throw ConfigError("conditioned coupling: scheduled mark dimension mismatch");
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= opt.u1[i];
        if (!(space.norm(diff) < opt.epsilon)) continue;
        ++rep.n_accepted;

        if (pattern.size() > 1 && pattern.times[1] <= opt.horizon) {
            ++rep.n_excluded_late_jump;
            continue;
        }

        std::vector<double> extras = pattern.times;
        extras.push_back(opt.s1);
        const auto grid = make_time_grid(opt.horizon, opt.dt, extras);
        const auto noise = make_noise_record(grid, coeffs.dimension, pattern, path_key);

        const auto zu = solve_jump_only(coeffs, noise, grid, opt.initial, env);
        const auto skel = solve_skeleton(coeffs, {{opt.s1, opt.u1}}, grid, opt.initial, env);

        const double lo = std::min(tau1, opt.s1), hi = std::max(tau1, opt.s1);
        double sup = 0.0;
        for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
            const double t = grid.nodes[k];
            if (t >= lo && t < hi) continue; // out-of-phase sliver between the jumps
            double d2 = 0.0;
            for (int i = 0; i < coeffs.dimension; ++i) {
                const double d = zu.states[k][static_cast<std::size_t>(i)] -
                                 skel.states[k][static_cast<std::size_t>(i)];
                d2 += d * d;
            }
            sup = std::max(sup, std::sqrt(d2));
        }
        rep.max_sup_distance = std::max(rep.max_sup_distance, sup);
    }

    rep.acceptance_rate = static_cast<double>(rep.n_accepted) / static_cast<double>(rep.n_attempts);
    rep.acceptance_stderr = std::sqrt(rep.acceptance_rate * (1.0 - rep.acceptance_rate) /
                                      static_cast<double>(rep.n_attempts));
    if (rep.n_accepted < opt.n_accepted) {
        std::ostringstream msg;
        msg << "conditioned coupling: acceptance rate " << rep.acceptance_rate << " below floor "
            << opt.min_acceptance_rate << " after " << rep.n_attempts
            << " attempts; widen epsilon (currently " << opt.epsilon << ")";
        throw ModelError(msg.str());
    }
    return rep;
}

} // namespace jsde
