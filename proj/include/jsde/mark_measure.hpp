#pragma once

// Mark-space measures for the jump noise: a finite-activity model of the
// intensity measure nu with sampling, region masses, and quadrature of
// integrands against nu. Two concrete shapes cover the scenario formats:
// a discrete atom list (any dimension) and a piecewise-uniform density on
// a union of 1-D intervals. Regions are norm bands, which is enough to
// express the truncation region U0 and any small-jump cutoff U.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsde/rng.hpp"
#include "jsde/stats.hpp"

namespace jsde {

using Vec = std::vector<double>;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double euclidean_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Region of marks selected by their norm: { u : lo <= |u| < hi, u != 0 }.
// The origin is never inside a region, matching the convention that the
// simulated mark set excludes zero-size jumps.
struct MarkRegion {
    double norm_lo = 0.0;
    double norm_hi = std::numeric_limits<double>::infinity();
    bool is_empty = false;

    static MarkRegion all() { return {}; }
    static MarkRegion none() { return {0.0, 0.0, true}; }
    static MarkRegion norm_band(double lo, double hi) {
        if (!(lo >= 0.0) || !(hi >= lo)) throw ConfigError("norm band requires 0 <= lo <= hi");
        return {lo, hi, false};
    }

    bool contains_norm(double n) const {
        if (is_empty) return false;
        return n > 0.0 && n >= norm_lo && n < norm_hi;
    }
};

struct MarkSpace {
    int dimension = 1;
    std::function<double(const Vec&)> norm = euclidean_norm;
    MarkRegion truncation = MarkRegion::all(); // the simulated region U0
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) {
        nodes.resize(n);
        weights.resize(n);
        const int m = (n + 1) / 2;
        for (int i = 0; i < m; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (x * p0 - p1) / (x * x - 1.0);
                const double dx = p0 / pp;
                x -= dx;
                if (std::fabs(dx) < 1e-15) break;
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
    }
};

struct Interval {
    double lo, hi;
    double length() const { return hi - lo; }
};

// intersect [a,b] with the two-sided norm band {lo <= |u| < hi}
inline void intersect_with_band(double a, double b, const MarkRegion& r,
                                std::vector<Interval>& out) {
    if (r.is_empty) return;
    const double lo = r.norm_lo, hi = r.norm_hi;
    const auto push = [&](double x, double y) {
        x = std::max(x, a);
        y = std::min(y, b);
        if (y > x) out.push_back({x, y});
    };
    push(-hi, -std::max(lo, 0.0));                    // negative side
    push(std::max(lo, std::numeric_limits<double>::min()), hi); // positive side
}

} // namespace detail

// A finite-mass intensity measure on the mark space.
class LevyMeasureModel {
  public:
    struct Atom {
        Vec mark;
        double weight;
    };

    static LevyMeasureModel discrete(MarkSpace space, std::vector<Atom> atoms) {
        LevyMeasureModel m;
        m.space_ = std::move(space);
        m.atoms_ = std::move(atoms);
        for (const auto& a : m.atoms_) {
            if (static_cast<int>(a.mark.size()) != m.space_.dimension)
                throw ConfigError("atom dimension mismatch");
            if (!(a.weight >= 0.0) || !std::isfinite(a.weight))
                throw ConfigError("atom weight must be finite and nonnegative");
        }
        return m;
    }

    // constant density on a union of disjoint 1-D intervals, scaled so the
    // total mass over all pieces equals total_mass
    static LevyMeasureModel uniform_on_intervals(std::vector<std::pair<double, double>> pieces,
                                                 double total_mass, int quadrature_nodes = 64) {
        if (pieces.empty()) throw ConfigError("uniform measure needs at least one interval");
        if (!(total_mass > 0.0)) throw ConfigError("total mass must be positive");
        double len = 0.0;
        for (auto& [a, b] : pieces) {
            if (!(b > a)) throw ConfigError("interval must have positive length");
            len += b - a;
        }
        LevyMeasureModel m;
        m.space_.dimension = 1;
        m.space_.norm = [](const Vec& v) { return std::fabs(v[0]); };
        m.pieces_ = std::move(pieces);
        m.density_ = total_mass / len;
        m.gl_nodes_ = quadrature_nodes;
        m.rebuild_quadrature();
        return m;
    }

    const MarkSpace& space() const { return space_; }
    MarkSpace& space() { return space_; }
    bool is_discrete() const { return !atoms_.empty() || pieces_.empty(); }
    bool empty() const { return atoms_.empty() && pieces_.empty(); }
    const std::vector<Atom>& atoms() const { return atoms_; }

    double mass(const MarkRegion& region) const {
        if (region.is_empty || empty()) return 0.0;
        if (is_discrete()) {
            double s = 0.0;
            for (const auto& a : atoms_)
                if (region.contains_norm(space_.norm(a.mark))) s += a.weight;
            return s;
        }
        double len = 0.0;
        std::vector<detail::Interval> segs;
        for (const auto& [a, b] : pieces_) {
            segs.clear();
            detail::intersect_with_band(a, b, region, segs);
            for (const auto& s : segs) len += s.length();
        }
        return len * density_;
    }

    // integral of f against nu restricted to region
    double quadrature(const std::function<double(const Vec&)>& f, const MarkRegion& region) const {
        if (region.is_empty || empty()) return 0.0;
        if (is_discrete()) {
            double s = 0.0;
            for (const auto& a : atoms_)
                if (region.contains_norm(space_.norm(a.mark))) s += a.weight * f(a.mark);
            return s;
        }
        const detail::GaussLegendre& gl = gauss();
        double s = 0.0;
        Vec u(1);
        std::vector<detail::Interval> segs;
        for (const auto& [a, b] : pieces_) {
            segs.clear();
            detail::intersect_with_band(a, b, region, segs);
            for (const auto& seg : segs) {
                const double half = 0.5 * seg.length();
                const double mid = 0.5 * (seg.lo + seg.hi);
                double acc = 0.0;
                for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                    u[0] = mid + half * gl.nodes[i];
                    acc += gl.weights[i] * f(u);
                }
                s += acc * half * density_;
            }
        }
        return s;
    }

    // vector-valued quadrature, accumulated into out (resized to dim)
    void quadrature_vec(const std::function<void(const Vec&, Vec&)>& f, const MarkRegion& region,
                        int out_dim, Vec& out) const {
        out.assign(static_cast<std::size_t>(out_dim), 0.0);
        if (region.is_empty || empty()) return;
        Vec tmp(static_cast<std::size_t>(out_dim));
        if (is_discrete()) {
            for (const auto& a : atoms_) {
                if (!region.contains_norm(space_.norm(a.mark))) continue;
                f(a.mark, tmp);
                for (int i = 0; i < out_dim; ++i) out[i] += a.weight * tmp[i];
            }
            return;
        }
        const detail::GaussLegendre& gl = gauss();
        Vec u(1);
        std::vector<detail::Interval> segs;
        for (const auto& [a, b] : pieces_) {
            segs.clear();
            detail::intersect_with_band(a, b, region, segs);
            for (const auto& seg : segs) {
                const double half = 0.5 * seg.length();
                const double mid = 0.5 * (seg.lo + seg.hi);
                for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                    u[0] = mid + half * gl.nodes[i];
                    f(u, tmp);
                    const double w = gl.weights[i] * half * density_;
                    for (int j = 0; j < out_dim; ++j) out[j] += w * tmp[j];
                }
            }
        }
    }

    // one draw from nu restricted to region, normalized
    Vec sample(const MarkRegion& region, CounterRng& rng) const {
        const double m = mass(region);
        if (!(m > 0.0)) throw ConfigError("cannot sample from a region of zero mass");
        if (is_discrete()) {
            const double target = rng.uniform() * m;
            double acc = 0.0;
            const Atom* last = nullptr;
            for (const auto& a : atoms_) {
                if (!region.contains_norm(space_.norm(a.mark))) continue;
                last = &a;
                acc += a.weight;
                if (target < acc) return a.mark;
            }
            return last->mark;
        }
        // inverse CDF on total arclength: one uniform selects both the
        // piece and the position inside it
        std::vector<detail::Interval> segs;
        std::vector<detail::Interval> all;
        for (const auto& [a, b] : pieces_) {
            segs.clear();
            detail::intersect_with_band(a, b, region, segs);
            all.insert(all.end(), segs.begin(), segs.end());
        }
        double total = 0.0;
        for (const auto& s : all) total += s.length();
        double target = rng.uniform() * total;
        for (const auto& s : all) {
            if (target < s.length() || &s == &all.back())
                return {s.lo + std::min(target, s.length())};
            target -= s.length();
        }
        throw NumericError("uniform mark sampling fell through");
    }

    int quadrature_node_count() const { return gl_nodes_; }
    void set_quadrature_nodes(int n) {
        if (n < 2) throw ConfigError("need at least 2 quadrature nodes");
        gl_nodes_ = n;
        rebuild_quadrature();
    }

  private:
    // built eagerly so concurrent readers never mutate the model
    void rebuild_quadrature() { gauss_ = std::make_shared<detail::GaussLegendre>(gl_nodes_); }

    const detail::GaussLegendre& gauss() const { return *gauss_; }

    MarkSpace space_;
    std::vector<Atom> atoms_;                      // discrete part
    std::vector<std::pair<double, double>> pieces_; // continuous part
    double density_ = 0.0;
    int gl_nodes_ = 64;
    std::shared_ptr<detail::GaussLegendre> gauss_;
};

} // namespace jsde
