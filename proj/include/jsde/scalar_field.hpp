#pragma once

// C^2 scalar fields v with analytic gradient and Hessian contraction,
// plus the finite-difference self-checks every registered field must pass
// before an experiment may use it.

#include <cmath>
#include <functional>
#include <vector>

#include "jsde/coefficients.hpp"

namespace jsde {

struct ScalarField {
    std::function<double(const Vec&)> value;
    std::function<void(const Vec&, Vec&)> gradient;
    // x, M -> Tr(M * Hessian(v))(x)
    std::function<double(const Vec&, const Mat&)> trace_hessian;

    bool valid() const { return value && gradient && trace_hessian; }
};

inline ScalarField linear_field(Vec slope) {
    ScalarField f;
    f.value = [slope](const Vec& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < slope.size(); ++i) s += slope[i] * x[i];
        return s;
    };
    f.gradient = [slope](const Vec&, Vec& g) { g = slope; };
    f.trace_hessian = [](const Vec&, const Mat&) { return 0.0; };
    return f;
}

// v(x) = 0.5 x^T Q x + <b, x>, Q symmetric
inline ScalarField quadratic_field(Mat q, Vec b) {
    ScalarField f;
    f.value = [q, b](const Vec& x) {
        double s = 0.0;
        for (int i = 0; i < q.rows; ++i) {
            s += b[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            for (int j = 0; j < q.cols; ++j)
                s += 0.5 * q(i, j) * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
        }
        return s;
    };
    f.gradient = [q, b](const Vec& x, Vec& g) {
        g = b;
        for (int i = 0; i < q.rows; ++i)
            for (int j = 0; j < q.cols; ++j)
                g[static_cast<std::size_t>(i)] += q(i, j) * x[static_cast<std::size_t>(j)];
    };
    f.trace_hessian = [q](const Vec&, const Mat& m) {
        double s = 0.0;
        for (int i = 0; i < q.rows; ++i)
            for (int j = 0; j < q.cols; ++j) s += m(i, j) * q(j, i);
        return s;
    };
    return f;
}

// 1-D field v(x) = slope*x + amp*sin(2*pi*x); the sinusoid keeps
// v(x+1) - v(x) constant, so unit jumps stay compatible with a
// mark-only tilting function.
inline ScalarField linear_periodic_field(double slope, double amp) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    ScalarField f;
    f.value = [=](const Vec& x) { return slope * x[0] + amp * std::sin(two_pi * x[0]); };
    f.gradient = [=](const Vec& x, Vec& g) {
        g.assign(1, slope + amp * two_pi * std::cos(two_pi * x[0]));
    };
    f.trace_hessian = [=](const Vec& x, const Mat& m) {
        return m(0, 0) * (-amp * two_pi * two_pi * std::sin(two_pi * x[0]));
    };
    return f;
}

// Central-difference verification of gradient and Hessian contraction on
// a probe set. Tolerance per component: max(1e-6, 1e-4 * |analytic|).
inline void validate_scalar_field(const ScalarField& f, const std::vector<Vec>& probes,
                                  double h = 1e-5) {
    if (!f.valid()) throw ConfigError("scalar field is missing a callback");
    Vec grad, gp, gm;
    for (const auto& x : probes) {
        const auto d = x.size();
        f.gradient(x, grad);
        Vec xp = x, xm = x;
        for (std::size_t i = 0; i < d; ++i) {
            xp[i] = x[i] + h;
            xm[i] = x[i] - h;
            const double fd = (f.value(xp) - f.value(xm)) / (2.0 * h);
            xp[i] = x[i];
            xm[i] = x[i];
            const double tol = std::max(1e-6, 1e-4 * std::fabs(grad[i]));
            if (std::fabs(fd - grad[i]) > tol)
                throw ModelError("scalar field gradient disagrees with finite differences");
        }
        // Hessian via differences of the analytic gradient, contracted with
        // identity and with a fixed asymmetric test matrix
        Mat hess(static_cast<int>(d), static_cast<int>(d));
        for (std::size_t j = 0; j < d; ++j) {
            xp[j] = x[j] + h;
            xm[j] = x[j] - h;
            f.gradient(xp, gp);
            f.gradient(xm, gm);
            for (std::size_t i = 0; i < d; ++i)
                hess(static_cast<int>(i), static_cast<int>(j)) = (gp[i] - gm[i]) / (2.0 * h);
            xp[j] = x[j];
            xm[j] = x[j];
        }
        Mat test = Mat::identity(static_cast<int>(d));
        for (int rep = 0; rep < 2; ++rep) {
            double fd_tr = 0.0;
            for (int i = 0; i < test.rows; ++i)
                for (int j = 0; j < test.cols; ++j) fd_tr += test(i, j) * hess(j, i);
            const double an = f.trace_hessian(x, test);
            const double tol = std::max(1e-5, 1e-4 * std::fabs(an));
            if (std::fabs(fd_tr - an) > tol)
                throw ModelError("scalar field Hessian contraction disagrees with finite differences");
            // second pass with off-diagonal weight
            for (int i = 0; i < test.rows; ++i)
                for (int j = 0; j < test.cols; ++j) test(i, j) = 0.25 * (i + 1) + 0.5 * (i == j) + 0.125 * j;
        }
    }
}

} // namespace jsde
