#pragma once

// Small statistics toolbox: regularized incomplete beta/gamma functions,
// exact (Clopper-Pearson) binomial bounds, a Poisson chi-square
// goodness-of-fit test, and running-moment helpers used by the Monte
// Carlo reports.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace jsde {

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Continued fraction for the regularized incomplete beta (modified
// Lentz). Converges quickly for x < (a+1)/(a+b+2).
inline double beta_cf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 1e-15;
    constexpr double tiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

} // namespace detail

// I_x(a,b), the regularized incomplete beta function.
inline double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw NumericError("reg_inc_beta: a,b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::beta_cf(a, b, x) / a;
    }
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Quantile of Beta(a,b) by bisection on the monotone CDF.
inline double beta_quantile(double p, double a, double b) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (reg_inc_beta(a, b, mid) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-16 * std::max(1.0, mid)) break;
    }
    return 0.5 * (lo + hi);
}

// Regularized lower incomplete gamma P(a,x): series for x < a+1,
// continued fraction for the complement otherwise.
inline double reg_inc_gamma_p(double a, double x) {
    if (!(a > 0.0)) throw NumericError("reg_inc_gamma_p: a must be positive");
    if (x <= 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16)
                return sum * std::exp(-x + a * std::log(x) - lg);
        }
        throw NumericError("incomplete gamma series did not converge");
    }
    // Lentz continued fraction for Q(a,x)
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) {
            const double q = std::exp(-x + a * std::log(x) - lg) * h;
            return 1.0 - q;
        }
    }
    throw NumericError("incomplete gamma continued fraction did not converge");
}

inline double chi_square_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    return 1.0 - reg_inc_gamma_p(0.5 * dof, 0.5 * x);
}

inline double poisson_pmf(double mean, std::uint64_t k) {
    if (mean <= 0.0) return k == 0 ? 1.0 : 0.0;
    const double kd = static_cast<double>(k);
    return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

// ---------------------------------------------------------------------------
// Clopper-Pearson exact binomial confidence bounds (two-sided, level 1-alpha).

struct BinomialBounds {
    double lower = 0.0;
    double upper = 1.0;
};

inline BinomialBounds clopper_pearson(std::uint64_t hits, std::uint64_t trials, double alpha) {
    if (trials == 0) throw NumericError("clopper_pearson: zero trials");
    if (hits > trials) throw NumericError("clopper_pearson: hits > trials");
    const double k = static_cast<double>(hits);
    const double n = static_cast<double>(trials);
    BinomialBounds out;
    out.lower = (hits == 0) ? 0.0 : beta_quantile(alpha / 2.0, k, n - k + 1.0);
    out.upper = (hits == trials) ? 1.0 : beta_quantile(1.0 - alpha / 2.0, k + 1.0, n - k);
    return out;
}

// ---------------------------------------------------------------------------
// Pearson chi-square goodness of fit of observed counts vs Poisson(mean).
// Cells with small expected mass are lumped into the right tail so every
// cell has expectation >= min_expected.

struct GofResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

inline GofResult poisson_chi_square_gof(const std::vector<std::uint64_t>& counts, double mean,
                                        double min_expected = 5.0) {
    if (counts.empty()) throw NumericError("poisson_chi_square_gof: no data");
    const double n = static_cast<double>(counts.size());
    std::uint64_t k_hi = *std::max_element(counts.begin(), counts.end());
    // extend the range until the pmf tail beyond it is negligible
    while (poisson_pmf(mean, k_hi + 1) * n > 1e-3 && k_hi < 100000) ++k_hi;

    std::vector<double> obs_raw(static_cast<std::size_t>(k_hi) + 1, 0.0);
    for (std::uint64_t c : counts) obs_raw[std::min(c, k_hi)] += 1.0;
    std::vector<double> exp_raw(obs_raw.size(), 0.0);
    double used = 0.0;
    for (std::uint64_t k = 0; k < k_hi; ++k) {
        exp_raw[k] = n * poisson_pmf(mean, k);
        used += exp_raw[k];
    }
    exp_raw[k_hi] = std::max(n - used, 0.0); // whole remaining tail

    // greedy merge of consecutive counts so each bin carries at least
    // min_expected expected entries
    std::vector<double> observed, expected;
    double o = 0.0, e = 0.0;
    for (std::size_t k = 0; k < exp_raw.size(); ++k) {
        o += obs_raw[k];
        e += exp_raw[k];
        if (e >= min_expected) {
            observed.push_back(o);
            expected.push_back(e);
            o = e = 0.0;
        }
    }
    if (e > 0.0 || o > 0.0) {
        if (expected.empty()) {
            observed.push_back(o);
            expected.push_back(std::max(e, 1e-12));
        } else {
            observed.back() += o; // fold the ragged tail into the last bin
            expected.back() += e;
        }
    }
    if (expected.size() < 2) throw NumericError("chi-square test needs at least two bins");

    GofResult res;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const double diff = observed[i] - expected[i];
        res.statistic += diff * diff / expected[i];
    }
    res.dof = static_cast<int>(expected.size()) - 1;
    res.p_value = chi_square_sf(res.statistic, res.dof);
    return res;
}

// ---------------------------------------------------------------------------
// Ensemble summaries.

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr out;
    out.n = xs.size();
    if (xs.empty()) return out;
    double s = 0.0;
    for (double x : xs) s += x;
    out.mean = s / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - out.mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(xs.size() - 1);
    out.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
    return out;
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw NumericError("median of empty sample");
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double hi = xs[mid];
    if (xs.size() % 2 == 1) return hi;
    std::nth_element(xs.begin(), xs.begin() + mid - 1, xs.end());
    return 0.5 * (xs[mid - 1] + hi);
}

} // namespace jsde
