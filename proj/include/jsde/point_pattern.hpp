#pragma once

// Realizations of Poisson random measures on [0,T] x marks: sampling with
// a given intensity, thinning to a tilted intensity lambda(u)*nu(du), and
// compensated integrals against a pattern.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <vector>

#include "jsde/mark_measure.hpp"
#include "jsde/rng.hpp"

namespace jsde {

// A finite, time-sorted set of (time, mark) jump events on (0, T].
struct MarkedPointPattern {
    double horizon = 0.0;
    MarkRegion region = MarkRegion::all();
    std::vector<double> times;
    std::vector<Vec> marks;

    std::size_t size() const { return times.size(); }

    void validate(const MarkSpace& space) const {
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!(times[i] > 0.0) || !(times[i] <= horizon))
                throw ConfigError("pattern event time outside (0, T]");
            if (i > 0 && !(times[i] > times[i - 1]))
                throw ConfigError("pattern event times must be strictly increasing");
            if (!region.contains_norm(space.norm(marks[i])))
                throw ConfigError("pattern mark outside its declared region");
        }
    }
};

// Draw a pattern with intensity dt nu(du) on the given region: the event
// count is Poisson(T * mass), times are sorted uniforms, marks are i.i.d.
// from the normalized restriction. Exact time collisions are resolved by
// redrawing the later time.
inline MarkedPointPattern sample_prm(const LevyMeasureModel& intensity, const MarkRegion& region,
                                     double horizon, const StreamKey& key) {
    if (!(horizon > 0.0)) throw ConfigError("sample_prm: horizon must be positive");
    const double m = intensity.empty() ? 0.0 : intensity.mass(region);
    if (!std::isfinite(m) || m < 0.0)
        throw ConfigError("sample_prm: region mass must be finite and nonnegative");

    MarkedPointPattern out;
    out.horizon = horizon;
    out.region = region;
    if (m == 0.0) return out;

    CounterRng time_rng(key.with(Substream::jump_times));
    const std::uint64_t n = time_rng.poisson(m * horizon);
    out.times.resize(n);
    for (auto& t : out.times) t = horizon * time_rng.uniform();
    std::sort(out.times.begin(), out.times.end());
    for (std::size_t i = 1; i < out.times.size();) {
        if (out.times[i] == out.times[i - 1]) {
            out.times[i] = horizon * time_rng.uniform();
            std::sort(out.times.begin(), out.times.end());
            i = 1;
        } else {
            ++i;
        }
    }

    CounterRng mark_rng(key.with(Substream::jump_marks));
    out.marks.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.marks.push_back(intensity.sample(region, mark_rng));
    return out;
}

// Independent thinning: keep each event with probability lambda(mark).
// The result is a realization with compensator lambda(u) dt nu(du).
inline MarkedPointPattern thin_to_tilted(const MarkedPointPattern& pattern,
                                         const std::function<double(const Vec&)>& lambda_fn,
                                         const StreamKey& key) {
    MarkedPointPattern out;
    out.horizon = pattern.horizon;
    out.region = pattern.region;
    CounterRng rng(key.with(Substream::thinning));
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        const double lam = lambda_fn(pattern.marks[i]);
        if (!(lam > 0.0) || !(lam < 1.0)) {
            std::ostringstream msg;
            msg << "thin_to_tilted: lambda outside (0,1) at mark (";
            for (std::size_t j = 0; j < pattern.marks[i].size(); ++j)
                msg << (j ? "," : "") << pattern.marks[i][j];
            msg << "): " << lam;
            throw ModelError(msg.str());
        }
        if (rng.uniform() < lam) {
            out.times.push_back(pattern.times[i]);
            out.marks.push_back(pattern.marks[i]);
        }
    }
    return out;
}

// Integral of f against the compensated measure up to horizon_t:
//   sum_{tau_i <= t} f(tau_i, u_i)  -  int_0^t quad(f(s,.) * weight) ds.
// The deterministic part uses the composite midpoint rule with n_time_steps
// panels; weight defaults to 1 (pass the tilting lambda for N_lambda).
inline Vec compensated_integral(const MarkedPointPattern& pattern,
                                const std::function<void(double, const Vec&, Vec&)>& integrand,
                                int out_dim, const LevyMeasureModel& compensator,
                                const MarkRegion& region, double horizon_t,
                                const std::function<double(const Vec&)>& weight = {},
                                int n_time_steps = 64) {
    if (horizon_t > pattern.horizon + 1e-12)
        throw ConfigError("compensated_integral: horizon exceeds pattern horizon");
    Vec out(static_cast<std::size_t>(out_dim), 0.0);
    Vec tmp(out.size());
    for (std::size_t i = 0; i < pattern.size() && pattern.times[i] <= horizon_t; ++i) {
        integrand(pattern.times[i], pattern.marks[i], tmp);
        for (double v : tmp)
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << "compensated_integral: non-finite integrand at t=" << pattern.times[i];
                throw NumericError(msg.str());
            }
        for (int j = 0; j < out_dim; ++j) out[j] += tmp[j];
    }
    const double dt = horizon_t / n_time_steps;
    Vec inner(out.size());
    for (int k = 0; k < n_time_steps; ++k) {
        const double s = (k + 0.5) * dt;
        compensator.quadrature_vec(
            [&](const Vec& u, Vec& o) {
                integrand(s, u, o);
                if (weight) {
                    const double w = weight(u);
                    for (auto& x : o) x *= w;
                }
            },
            region, out_dim, inner);
        for (int j = 0; j < out_dim; ++j) out[j] -= dt * inner[j];
    }
    return out;
}

} // namespace jsde
