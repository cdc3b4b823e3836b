#pragma once

// Coefficient bundle of a jump SDE: drift, diffusion, and jump map, plus
// optional declared Lipschitz metadata and numerical probes for it.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "jsde/mark_measure.hpp"
#include "jsde/rng.hpp"

namespace jsde {

// Dense row-major matrix, just big enough for d x d coefficient blocks.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    static Mat identity(int n, double scale = 1.0) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = scale;
        return m;
    }

    // out = this * v (uses the first `cols` entries of v)
    void multiply(const Vec& v, Vec& out) const {
        out.assign(static_cast<std::size_t>(rows), 0.0);
        for (int i = 0; i < rows; ++i) {
            double s = 0.0;
            for (int j = 0; j < cols; ++j) s += (*this)(i, j) * v[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = s;
        }
    }

    // out = this^T * v
    void multiply_transposed(const Vec& v, Vec& out) const {
        out.assign(static_cast<std::size_t>(cols), 0.0);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                out[static_cast<std::size_t>(j)] += (*this)(i, j) * v[static_cast<std::size_t>(i)];
    }

    Mat times_transpose() const { // this * this^T
        Mat m(rows, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < rows; ++j) {
                double s = 0.0;
                for (int k = 0; k < cols; ++k) s += (*this)(i, k) * (*this)(j, k);
                m(i, j) = s;
            }
        return m;
    }
};

using DriftFn = std::function<void(const Vec&, Vec&)>;
using DiffusionFn = std::function<void(const Vec&, Mat&)>;
using JumpFn = std::function<void(const Vec&, const Vec&, Vec&)>;
using RhoFn = std::function<void(const Vec&, Vec&)>;
using LambdaFn = std::function<double(const Vec&)>; // jump-intensity tilt, mark -> (0,1)

struct LipschitzBounds {
    double l1 = 0.0; // coefficient increments
    double l2 = 0.0; // linear growth of squared magnitudes
};

struct CoefficientSet {
    int dimension = 1;
    DriftFn drift;         // null means zero
    DiffusionFn diffusion; // null means zero
    JumpFn jump;           // null means zero
    std::optional<LipschitzBounds> declared_lipschitz;

    // set by scenario builders when the jump map ignores the state; lets
    // solvers cache the compensator quadrature
    bool jump_state_independent = false;

    bool has_drift() const { return static_cast<bool>(drift); }
    bool has_diffusion() const { return static_cast<bool>(diffusion); }
    bool has_jump() const { return static_cast<bool>(jump); }
};

// Probe the three maps on a fuzzing grid; throws on non-finite output.
inline void probe_finiteness(const CoefficientSet& c, const std::vector<Vec>& states,
                             const std::vector<Vec>& marks) {
    Vec out;
    Mat mat;
    for (const auto& z : states) {
        if (c.has_drift()) {
            c.drift(z, out);
            for (double v : out)
                if (!std::isfinite(v)) throw ModelError("drift returned a non-finite value");
        }
        if (c.has_diffusion()) {
            c.diffusion(z, mat);
            for (double v : mat.a)
                if (!std::isfinite(v)) throw ModelError("diffusion returned a non-finite value");
        }
        if (c.has_jump()) {
            for (const auto& u : marks) {
                c.jump(z, u, out);
                for (double v : out)
                    if (!std::isfinite(v)) throw ModelError("jump map returned a non-finite value");
            }
        }
    }
}

// Sampled difference-quotient check of the declared constants. Quotients
// may not exceed the declaration by more than tolerance (default 1%).
inline void probe_lipschitz(const CoefficientSet& c, const std::vector<Vec>& states,
                            const std::vector<Vec>& marks, double tolerance = 0.01) {
    if (!c.declared_lipschitz) return;
    const double l1 = c.declared_lipschitz->l1 * (1.0 + tolerance);
    Vec a, b, tmp;
    Mat ma, mb;
    const auto vec_dist = [](const Vec& x, const Vec& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        return std::sqrt(s);
    };
    for (std::size_t i = 0; i + 1 < states.size(); ++i) {
        const Vec& z1 = states[i];
        const Vec& z2 = states[i + 1];
        const double dz = vec_dist(z1, z2);
        if (dz == 0.0) continue;
        double incr = 0.0;
        if (c.has_drift()) {
            c.drift(z1, a);
            c.drift(z2, b);
            incr += vec_dist(a, b);
        }
        if (c.has_diffusion()) {
            c.diffusion(z1, ma);
            c.diffusion(z2, mb);
            double s = 0.0;
            for (std::size_t k = 0; k < ma.a.size(); ++k) s += (ma.a[k] - mb.a[k]) * (ma.a[k] - mb.a[k]);
            incr += std::sqrt(s);
        }
        if (incr > l1 * dz)
            throw ModelError("drift/diffusion difference quotient exceeds declared L1");
        if (c.has_jump()) {
            for (const auto& u : marks) {
                const double nu = euclidean_norm(u);
                if (nu == 0.0) continue;
                c.jump(z1, u, a);
                c.jump(z2, u, b);
                if (vec_dist(a, b) > l1 * dz * nu)
                    throw ModelError("jump-map state quotient exceeds declared L1");
            }
        }
    }
}

} // namespace jsde
