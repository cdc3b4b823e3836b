#pragma once

// Log-density of the combined drift/jump change of measure along a
// simulated path, the path-independence gap it leaves against a scalar
// potential, and pointwise residuals of the compatibility conditions
// linking the tilt (rho, lambda) to that potential.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "jsde/scalar_field.hpp"
#include "jsde/solver.hpp"
#include "jsde/stats.hpp"

namespace jsde {

// Running log Lambda_t with its four constituents kept separately:
//   log Lambda = -term1 - 0.5*term2 - term3 - term4
//   term1 = int <rho(X), dW>          (left-endpoint Ito sums)
//   term2 = int |rho(X)|^2 ds
//   term3 = sum log lambda(u_i) over retained jumps
//   term4 = int quad((1-lambda) nu) ds
struct DensityRecord {
    std::vector<double> times;
    std::vector<double> log_density;
    std::vector<double> term1, term2, term3, term4;
    std::size_t first_bad_node = std::numeric_limits<std::size_t>::max();

    bool flagged() const { return first_bad_node != std::numeric_limits<std::size_t>::max(); }
};

inline DensityRecord accumulate_log_density(const CadlagPath& path, const NoiseRecord& noise,
                                            const RhoFn& rho, const LambdaFn& lambda_fn,
                                            const LevyMeasureModel& intensity,
                                            const MarkRegion& region) {
    const std::size_t n = path.grid.nodes.size();
    if (noise.brownian.size() + 1 != n)
        throw ConfigError("accumulate_log_density: path and noise use different grids");

    DensityRecord rec;
    rec.times = path.grid.nodes;
    rec.log_density.assign(n, 0.0);
    rec.term1.assign(n, 0.0);
    rec.term2.assign(n, 0.0);
    rec.term3.assign(n, 0.0);
    rec.term4.assign(n, 0.0);

    // lambda is a function of the mark alone, so the tail compensator rate
    // is a constant of the run
    double tail_rate = 0.0;
    if (!intensity.empty() && lambda_fn)
        tail_rate = intensity.quadrature([&](const Vec& u) { return 1.0 - lambda_fn(u); }, region);

    // map jump nodes to marks
    std::size_t next_jump = 0;
    Vec rho_val;
    double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double dt = path.grid.dt(k);
        if (rho) {
            rho(path.states[k], rho_val);
            double dot = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < rho_val.size(); ++i) {
                dot += rho_val[i] * noise.brownian[k][i];
                sq += rho_val[i] * rho_val[i];
            }
            t1 += dot;
            t2 += sq * dt;
        }
        t4 += tail_rate * dt;
        const double t_next = path.grid.nodes[k + 1];
        while (next_jump < noise.pattern.size() && noise.pattern.times[next_jump] <= t_next) {
            if (noise.pattern.times[next_jump] == t_next && lambda_fn) {
                const double lam = lambda_fn(noise.pattern.marks[next_jump]);
                if (!(lam > 0.0) || !(lam < 1.0))
                    throw ModelError("accumulate_log_density: lambda outside (0,1) at a jump mark");
                t3 += std::log(lam);
            }
            ++next_jump;
        }
        rec.term1[k + 1] = t1;
        rec.term2[k + 1] = t2;
        rec.term3[k + 1] = t3;
        rec.term4[k + 1] = t4;
        const double ld = -t1 - 0.5 * t2 - t3 - t4;
        rec.log_density[k + 1] = ld;
        if (!std::isfinite(ld) && !rec.flagged()) rec.first_bad_node = k + 1;
    }
    return rec;
}

struct GapResult {
    double sup_gap = 0.0;
    double argmax_time = 0.0;
};

// sup over nodes of |log Lambda_t - (v(X_0) - v(X_t))|
inline GapResult path_independence_gap(const CadlagPath& path, const DensityRecord& record,
                                       const ScalarField& v) {
    if (record.times.size() != path.grid.nodes.size())
        throw ConfigError("path_independence_gap: record and path are not aligned");
    const double v0 = v.value(path.states.front());
    GapResult out;
    for (std::size_t k = 0; k < path.grid.nodes.size(); ++k) {
        const double target = v0 - v.value(path.states[k]);
        const double gap = std::fabs(record.log_density[k] - target);
        if (gap > out.sup_gap) {
            out.sup_gap = gap;
            out.argmax_time = path.grid.nodes[k];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Residual of the stationarity equation tying v to the model:
//   0.5 Tr(sigma sigma^T Hess v)(x) + 0.5 |sigma^T grad v(x)|^2
//   + <x, A grad v(x)>
//   + int [ e^{dv} - 1 - <f(x,u), grad v(x)> e^{dv} ] nu(du),
// with dv = v(x + f(x,u)) - v(x).

struct PideResidual {
    double value = 0.0;
    double diffusion_term = 0.0; // 0.5 Tr(...)
    double drift_term = 0.0;     // 0.5 |sigma^T grad v|^2
    double linear_term = 0.0;    // <x, A grad v>
    double jump_term = 0.0;      // mark integral
    bool quadrature_converged = true;
};

inline PideResidual pide_residual(const ScalarField& v, const Mat& a_op,
                                  const DiffusionFn& sigma, const JumpFn& f,
                                  const LevyMeasureModel& intensity, const MarkRegion& region,
                                  const Vec& x) {
    PideResidual out;
    Vec grad;
    v.gradient(x, grad);

    if (sigma) {
        Mat sig;
        sigma(x, sig);
        out.diffusion_term = 0.5 * v.trace_hessian(x, sig.times_transpose());
        Vec sg;
        sig.multiply_transposed(grad, sg);
        double sq = 0.0;
        for (double c : sg) sq += c * c;
        out.drift_term = 0.5 * sq;
    }

    if (a_op.rows > 0) {
        Vec ag;
        a_op.multiply(grad, ag);
        for (std::size_t i = 0; i < ag.size(); ++i) out.linear_term += x[i] * ag[i];
    }

    if (f && !intensity.empty()) {
        const double vx = v.value(x);
        const auto integrand = [&](const Vec& u) {
            Vec shift;
            f(x, u, shift);
            Vec y = x;
            for (std::size_t i = 0; i < y.size(); ++i) y[i] += shift[i];
            const double ev = std::exp(v.value(y) - vx);
            double fg = 0.0;
            for (std::size_t i = 0; i < shift.size(); ++i) fg += shift[i] * grad[i];
            return ev - 1.0 - fg * ev;
        };
        out.jump_term = intensity.quadrature(integrand, region);
        if (!intensity.is_discrete()) {
            LevyMeasureModel refined = intensity;
            refined.set_quadrature_nodes(2 * intensity.quadrature_node_count());
            const double again = refined.quadrature(integrand, region);
            const double scale = std::max({1.0, std::fabs(out.jump_term), std::fabs(again)});
            out.quadrature_converged = std::fabs(again - out.jump_term) <= 1e-6 * scale;
            out.jump_term = again;
        }
    }

    out.value = out.diffusion_term + out.drift_term + out.linear_term + out.jump_term;
    return out;
}

// ---------------------------------------------------------------------------
// Max residuals of the two pointwise compatibility conditions and the
// stationarity residual at each sample point.

struct ConsistencyReport {
    double e1_max_residual = 0.0;
    Vec e1_argmax;
    double e2_max_residual = 0.0;
    Vec e2_argmax;
    double e2_x_dependence_spread = 0.0; // diagnostic: how x-dependent the jump potential is
    std::vector<std::pair<Vec, double>> e3_residuals;
    bool e2_structural_violation = false; // lambda left (0,1) at a probed mark
};

inline ConsistencyReport check_consistency(const ScalarField& v, const DiffusionFn& sigma,
                                           const RhoFn& rho, const JumpFn& f,
                                           const LambdaFn& lambda_fn,
                                           const std::vector<Vec>& sample_points,
                                           const LevyMeasureModel& intensity,
                                           const MarkRegion& region, const Mat& a_op = {}) {
    ConsistencyReport rep;
    Vec grad, rho_val, sg, shift;
    Mat sig;

    std::vector<Vec> probe_marks;
    if (!intensity.empty()) {
        if (intensity.is_discrete()) {
            for (const auto& a : intensity.atoms())
                if (region.contains_norm(intensity.space().norm(a.mark)))
                    probe_marks.push_back(a.mark);
        } else {
            // sample the continuous support with a fixed lattice of draws
            CounterRng rng({424242, 0, Substream::jump_marks});
            for (int i = 0; i < 64; ++i) probe_marks.push_back(intensity.sample(region, rng));
        }
    }

    std::vector<double> e2_values_per_mark(probe_marks.size(),
                                           std::numeric_limits<double>::quiet_NaN());
    for (const auto& x : sample_points) {
        if (rho && sigma) {
            v.gradient(x, grad);
            sigma(x, sig);
            sig.multiply_transposed(grad, sg);
            rho(x, rho_val);
            double d2 = 0.0;
            for (std::size_t i = 0; i < sg.size(); ++i)
                d2 += (rho_val[i] - sg[i]) * (rho_val[i] - sg[i]);
            const double r = std::sqrt(d2);
            if (r > rep.e1_max_residual) {
                rep.e1_max_residual = r;
                rep.e1_argmax = x;
            }
        }
        if (f && lambda_fn) {
            const double vx = v.value(x);
            for (std::size_t mi = 0; mi < probe_marks.size(); ++mi) {
                const Vec& u = probe_marks[mi];
                f(x, u, shift);
                Vec y = x;
                for (std::size_t i = 0; i < y.size(); ++i) y[i] += shift[i];
                const double implied = std::exp(v.value(y) - vx);
                const double lam = lambda_fn(u);
                if (!(lam > 0.0) || !(lam < 1.0)) rep.e2_structural_violation = true;
                const double r = std::fabs(lam - implied);
                if (r > rep.e2_max_residual) {
                    rep.e2_max_residual = r;
                    rep.e2_argmax = x;
                }
                if (std::isnan(e2_values_per_mark[mi])) {
                    e2_values_per_mark[mi] = implied;
                } else {
                    rep.e2_x_dependence_spread = std::max(
                        rep.e2_x_dependence_spread, std::fabs(implied - e2_values_per_mark[mi]));
                }
            }
        }
        rep.e3_residuals.emplace_back(
            x, pide_residual(v, a_op, sigma, f, intensity, region, x).value);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Discretized chain-rule identity along a solved path. Evaluates the six
// constituents of the expansion of v(X_0) - v(X_t) with the quadratures
// used elsewhere (midpoint in time on the interpolated path, mark
// quadrature against the compensator, jump sums at pre-states) and
// reports the sup deviation from the direct endpoint difference.

inline GapResult ito_decomposition_gap(const CadlagPath& path, const NoiseRecord& noise,
                                       const ScalarField& v, const CoefficientSet& coeffs,
                                       const Mat& a_op, const JumpEnvironment& env) {
    const std::size_t n = path.grid.nodes.size();
    if (noise.brownian.size() + 1 != n)
        throw ConfigError("ito_decomposition_gap: path and noise use different grids");

    // node -> jump lookup
    std::vector<const JumpRecord*> jump_at(n, nullptr);
    for (const auto& j : path.jumps) jump_at[j.node] = &j;

    const double v0 = v.value(path.states.front());
    double acc = 0.0; // running sum of all six terms
    GapResult out;

    Vec grad, tmp, sg, xmid, left;
    Mat sig;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double dt = path.grid.dt(k);
        const Vec& x0 = path.states[k];

        // midpoint of the continuous segment (left limit at k+1)
        left = jump_at[k + 1] != nullptr ? jump_at[k + 1]->pre : path.states[k + 1];
        xmid.resize(x0.size());
        for (std::size_t i = 0; i < x0.size(); ++i) xmid[i] = 0.5 * (x0[i] + left[i]);

        v.gradient(xmid, grad);

        // 1: -<A x, grad v> ds
        if (a_op.rows > 0) {
            a_op.multiply(grad, tmp);
            double s = 0.0;
            for (std::size_t i = 0; i < tmp.size(); ++i) s += xmid[i] * tmp[i];
            acc -= s * dt;
        }
        // 2: -<b, grad v> ds
        if (coeffs.has_drift()) {
            coeffs.drift(xmid, tmp);
            double s = 0.0;
            for (std::size_t i = 0; i < tmp.size(); ++i) s += tmp[i] * grad[i];
            acc -= s * dt;
        }
        // 3: -<sigma^T grad v, dW> at the left endpoint
        if (coeffs.has_diffusion()) {
            Vec gl;
            v.gradient(x0, gl);
            coeffs.diffusion(x0, sig);
            sig.multiply_transposed(gl, sg);
            double s = 0.0;
            for (std::size_t i = 0; i < sg.size(); ++i) s += sg[i] * noise.brownian[k][i];
            acc -= s;
            // 6: -0.5 Tr(sigma sigma^T Hess v) ds at the midpoint
            coeffs.diffusion(xmid, sig);
            acc -= 0.5 * v.trace_hessian(xmid, sig.times_transpose()) * dt;
        }
        // 4+5 compensators: the dv pieces of -[dv - <f,grad v>] w nu ds
        // (term 4) and +[dv] w nu ds (term 5) cancel pointwise, leaving
        // +<f, grad v> w nu ds
        if (coeffs.has_jump() && env.active()) {
            const double comp = env.intensity->quadrature(
                [&](const Vec& u) {
                    Vec shift;
                    coeffs.jump(xmid, u, shift);
                    double fg = 0.0;
                    for (std::size_t i = 0; i < shift.size(); ++i) fg += shift[i] * grad[i];
                    const double w = env.compensator_weight ? env.compensator_weight(u) : 1.0;
                    return fg * w;
                },
                env.region);
            acc += comp * dt;
        }
        // 5 jump sum: -(v(pre + f(pre,u)) - v(pre))
        if (const JumpRecord* j = jump_at[k + 1]; j != nullptr) {
            acc -= v.value(j->post) - v.value(j->pre);
        }

        const double target = v0 - v.value(path.states[k + 1]);
        const double gap = std::fabs(target - acc);
        if (gap > out.sup_gap) {
            out.sup_gap = gap;
            out.argmax_time = path.grid.nodes[k + 1];
        }
    }
    return out;
}

} // namespace jsde
