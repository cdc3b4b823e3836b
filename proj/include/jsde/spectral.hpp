#pragma once

// Galerkin truncation of a diagonal-operator evolution equation to its
// first n eigenmodes, exponential-Euler (mild solution) stepping, and the
// level-vs-reference convergence study.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "jsde/solver.hpp"
#include "jsde/stats.hpp"

namespace jsde {

// Eigenvalues of -A, strictly increasing and positive. The all-zero
// spectrum is admitted as an explicit testing relaxation so the mild
// stepper can be cross-checked against the plain Euler solver.
struct Spectrum {
    std::vector<double> eigenvalues;
    bool testing_relaxation = false;

    std::size_t capacity() const { return eigenvalues.size(); }

    void validate() const {
        if (testing_relaxation) return;
        double prev = 0.0;
        for (double l : eigenvalues) {
            if (!(l > prev)) throw ConfigError("spectrum must be strictly increasing and positive");
            prev = l;
        }
    }

    static Spectrum power_law(std::size_t n, double scale, double exponent) {
        Spectrum s;
        s.eigenvalues.reserve(n);
        for (std::size_t j = 1; j <= n; ++j)
            s.eigenvalues.push_back(scale * std::pow(static_cast<double>(j), exponent));
        s.validate();
        return s;
    }

    static Spectrum zero_relaxation(std::size_t n) {
        Spectrum s;
        s.eigenvalues.assign(n, 0.0);
        s.testing_relaxation = true;
        return s;
    }

    // A restricted to the first n modes, as a dense diagonal matrix
    Mat operator_matrix(int n) const {
        Mat a(n, n);
        for (int i = 0; i < n; ++i) a(i, i) = -eigenvalues[static_cast<std::size_t>(i)];
        return a;
    }
};

// Coefficient callbacks on coordinate vectors; the level passes vectors of
// its own length and expects outputs of at least that length.
struct SequenceCoefficients {
    std::function<void(const Vec&, Vec&)> drift;            // b
    std::function<void(const Vec&, Mat&)> diffusion;        // sigma (n x n leading block)
    std::function<void(const Vec&, const Vec&, Vec&)> jump; // f
    bool jump_state_independent = false;
};

struct GalerkinSystem {
    int level = 0;
    Spectrum spectrum; // entries 1..level are active
    CoefficientSet coeffs;
};

// Build the level-n system: A_n = diag(-l_1..-l_n), b_n/sigma_n/f_n are
// the leading blocks of the callbacks evaluated on n-dimensional states.
inline GalerkinSystem project_coefficients(const SequenceCoefficients& seq,
                                           const Spectrum& spectrum, int n) {
    if (n <= 0 || static_cast<std::size_t>(n) > spectrum.capacity())
        throw ConfigError("project_coefficients: level exceeds spectrum capacity");
    spectrum.validate();

    GalerkinSystem sys;
    sys.level = n;
    sys.spectrum = spectrum;
    sys.coeffs.dimension = n;
    sys.coeffs.jump_state_independent = seq.jump_state_independent;
    const auto check = [n](std::size_t got, const char* what) {
        if (got < static_cast<std::size_t>(n))
            throw ConfigError(std::string("sequence coefficient '") + what +
                              "' returned fewer than n coordinates");
    };
    if (seq.drift)
        sys.coeffs.drift = [seq, n, check](const Vec& x, Vec& out) {
            seq.drift(x, out);
            check(out.size(), "b");
            out.resize(static_cast<std::size_t>(n));
        };
    if (seq.diffusion)
        sys.coeffs.diffusion = [seq, n](const Vec& x, Mat& out) {
            seq.diffusion(x, out);
            if (out.rows < n || out.cols < n)
                throw ConfigError("sequence coefficient 'sigma' returned a block smaller than n");
            if (out.rows != n) {
                Mat lead(n, n);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) lead(i, j) = out(i, j);
                out = lead;
            }
        };
    if (seq.jump)
        sys.coeffs.jump = [seq, n, check](const Vec& x, const Vec& u, Vec& out) {
            seq.jump(x, u, out);
            check(out.size(), "f");
            out.resize(static_cast<std::size_t>(n));
        };
    return sys;
}

// Exponential-Euler step of the mild formulation: the nonlinearities are
// frozen at the left endpoint, the semigroup factor e^{-l_j dt} is applied
// exactly, and jumps entering at spliced nodes are damped by the following
// intervals' factors.
inline CadlagPath solve_mild(const GalerkinSystem& sys, const NoiseRecord& noise,
                             const TimeGrid& grid, const Vec& initial,
                             const JumpEnvironment& env) {
    const int d = sys.coeffs.dimension;
    if (static_cast<int>(initial.size()) != d)
        throw ConfigError("solve_mild: initial state dimension mismatch");
    if (noise.brownian.size() != grid.intervals())
        throw ConfigError("solve_mild: noise record does not match the grid");

    std::vector<double> jump_times;
    std::vector<const Vec*> jump_marks;
    if (env.active())
        detail::select_events(noise.pattern, env.intensity->space(), env.region, jump_times,
                              jump_marks);

    CadlagPath path;
    path.grid = grid;
    path.states.resize(grid.nodes.size());
    path.states[0] = initial;

    Vec state = initial, drift, comp, diff_incr, jump_out;
    Mat sig;
    detail::SolverScratch scratch;

    Vec cached_comp;
    if (sys.coeffs.jump_state_independent)
        detail::compensator_drift(sys.coeffs, env, state, cached_comp, scratch);

    std::size_t next_jump = 0;
    for (std::size_t k = 0; k < grid.intervals(); ++k) {
        if (!path.truncated) {
            const Vec& left = path.states[k];
            const double dt = grid.dt(k);
            if (sys.coeffs.has_drift()) {
                sys.coeffs.drift(left, drift);
            } else {
                drift.assign(state.size(), 0.0);
            }
            if (sys.coeffs.jump_state_independent) {
                comp = cached_comp;
            } else {
                detail::compensator_drift(sys.coeffs, env, left, comp, scratch);
            }
            for (int i = 0; i < d; ++i)
                state[static_cast<std::size_t>(i)] +=
                    (drift[static_cast<std::size_t>(i)] - comp[static_cast<std::size_t>(i)]) * dt;
            if (sys.coeffs.has_diffusion()) {
                sys.coeffs.diffusion(left, sig);
                sig.multiply(noise.brownian[k], diff_incr);
                for (int i = 0; i < d; ++i)
                    state[static_cast<std::size_t>(i)] += diff_incr[static_cast<std::size_t>(i)];
            }
            for (int i = 0; i < d; ++i)
                state[static_cast<std::size_t>(i)] *=
                    std::exp(-sys.spectrum.eigenvalues[static_cast<std::size_t>(i)] * dt);
        }

        const double t_next = grid.nodes[k + 1];
        while (next_jump < jump_times.size() && jump_times[next_jump] <= t_next) {
            if (jump_times[next_jump] != t_next)
                throw ConfigError("solve_mild: event time is not a grid node; splice jump times first");
            if (!path.truncated && sys.coeffs.has_jump()) {
                JumpRecord rec;
                rec.time = t_next;
                rec.node = k + 1;
                rec.pre = state;
                rec.mark = *jump_marks[next_jump];
                sys.coeffs.jump(state, rec.mark, jump_out);
                for (int i = 0; i < d; ++i)
                    state[static_cast<std::size_t>(i)] += jump_out[static_cast<std::size_t>(i)];
                rec.post = state;
                path.jumps.push_back(std::move(rec));
            }
            ++next_jump;
        }

        if (!path.truncated && !detail::all_finite(state)) {
            path.truncated = true;
            path.first_bad_node = k + 1;
            state = path.states[k];
        }
        path.states[k + 1] = state;
    }
    return path;
}

struct ConvergencePoint {
    int level = 0;
    double mean_sq_error = 0.0;
    double stderr_ = 0.0;
};

struct GalerkinStudyOptions {
    double horizon = 1.0;
    double dt = 1.0 / 128;
    std::size_t n_paths = 1000;
    std::function<Vec(int level, CounterRng&)> initial; // by level, zero-padded
};

// Monte Carlo mean-square distance of each truncation level to a common
// reference level, all levels driven by the same Brownian coordinates and
// jump pattern per path (lower levels read prefixes of the increments).
inline std::vector<ConvergencePoint> galerkin_convergence(
    const SequenceCoefficients& seq, const Spectrum& spectrum, const LevyMeasureModel& intensity,
    const MarkRegion& region, const LambdaFn& tilt, const std::vector<int>& levels,
    int reference_level, const GalerkinStudyOptions& opt, const StreamKey& key) {
    for (int n : levels)
        if (n >= reference_level)
            throw ConfigError("galerkin_convergence: reference level must exceed probed levels");

    std::vector<GalerkinSystem> systems;
    systems.reserve(levels.size());
    for (int n : levels) systems.push_back(project_coefficients(seq, spectrum, n));
    const GalerkinSystem ref = project_coefficients(seq, spectrum, reference_level);

    std::vector<std::vector<double>> sq_err(levels.size());
    for (auto& v : sq_err) v.reserve(opt.n_paths);

    for (std::size_t p = 0; p < opt.n_paths; ++p) {
        const StreamKey path_key = key.with_stream(key.stream + p);
        auto pattern = sample_prm(intensity, region, opt.horizon, path_key);
        if (tilt) pattern = thin_to_tilted(pattern, tilt, path_key);
        const auto grid = make_time_grid(opt.horizon, opt.dt, pattern.times);
        const auto noise = make_noise_record(grid, reference_level, pattern, path_key);

        CounterRng init_rng(path_key.with(Substream::initial_condition));
        const Vec x0_ref = opt.initial ? opt.initial(reference_level, init_rng)
                                       : Vec(static_cast<std::size_t>(reference_level), 0.0);

        JumpEnvironment env{&intensity, region, tilt};
        const auto x_ref = solve_mild(ref, noise, grid, x0_ref, env);

        for (std::size_t li = 0; li < levels.size(); ++li) {
            const int n = levels[li];
            Vec x0(x0_ref.begin(), x0_ref.begin() + n);
            const auto x_n = solve_mild(systems[li], noise, grid, x0, env);
            double d2 = 0.0;
            for (int i = 0; i < reference_level; ++i) {
                const double xi = i < n ? x_n.terminal()[static_cast<std::size_t>(i)] : 0.0;
                const double d = xi - x_ref.terminal()[static_cast<std::size_t>(i)];
                d2 += d * d;
            }
            sq_err[li].push_back(d2);
        }
    }

    std::vector<ConvergencePoint> out;
    out.reserve(levels.size());
    for (std::size_t li = 0; li < levels.size(); ++li) {
        const auto ms = mean_stderr(sq_err[li]);
        out.push_back({levels[li], ms.mean, ms.stderr_});
    }
    return out;
}

} // namespace jsde
