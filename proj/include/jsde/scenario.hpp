#pragma once

// Scenario configuration: JSON model declarations resolved into callable
// coefficients, validation of every declared component, and the shared
// one-path simulation entry used by all ensemble experiments.

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jsde/girsanov.hpp"
#include "jsde/parallel.hpp"
#include "jsde/solver.hpp"
#include "jsde/spectral.hpp"

namespace jsde {

using Json = nlohmann::json;

struct Execution {
    std::size_t n_paths = 1000;
    double dt = 1.0 / 256;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    int threads = 1;
    double alpha = 0.001;
};

// Fully resolved model block of a scenario.
struct BuiltModel {
    CoefficientSet coeffs;
    LevyMeasureModel levy;              // empty when the scenario has no jumps
    MarkRegion region = MarkRegion::all();
    LambdaFn lambda;                    // non-null => dynamics driven by the tilted measure
    RhoFn rho;
    ScalarField v;                      // optional; valid() tells
    std::function<Vec(CounterRng&)> initial;
    std::optional<Spectrum> spectrum;   // spectral scenarios
    SequenceCoefficients sequence;      // spectral scenarios
    double rho_bound = 1e3;             // enforced along simulated paths

    bool has_jumps() const { return !levy.empty() && coeffs.has_jump(); }
    JumpEnvironment environment() const {
        JumpEnvironment env;
        if (!levy.empty()) {
            env.intensity = &levy;
            env.region = region;
            env.compensator_weight = lambda;
        }
        return env;
    }
};

struct Scenario {
    std::string name;
    std::string description;
    std::string exercises; // which mathematical statement the run probes
    BuiltModel model;
    Json experiment;
    Execution exec;
};

// ---------------------------------------------------------------------------
// Builders for the named coefficient forms.

namespace build {

inline Vec as_vec(const Json& j) {
    if (j.is_number()) return {j.get<double>()};
    return j.get<Vec>();
}

// shared 1-D linear interpolation through sorted (x, y) points
inline std::function<double(double)> interp1d(const Json& points) {
    std::vector<double> xs, ys;
    for (const auto& p : points) {
        xs.push_back(p.at(0).get<double>());
        ys.push_back(p.at(1).get<double>());
    }
    if (xs.size() < 2) throw ConfigError("tabulated function needs at least two points");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw ConfigError("tabulated abscissae must increase");
    return [xs, ys](double x) {
        std::size_t i = 1;
        while (i + 1 < xs.size() && xs[i] < x) ++i;
        const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return ys[i - 1] + t * (ys[i] - ys[i - 1]);
    };
}

inline DriftFn drift(const Json& j, int dim) {
    const std::string type = j.value("type", "zero");
    if (type == "zero") return nullptr;
    if (type == "linear") {
        const double rate = j.at("rate").get<double>();
        return [rate](const Vec& z, Vec& o) {
            o.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) o[i] = rate * z[i];
        };
    }
    if (type == "constant") {
        Vec value = as_vec(j.at("value"));
        if (static_cast<int>(value.size()) != dim) throw ConfigError("drift value dimension mismatch");
        return [value](const Vec&, Vec& o) { o = value; };
    }
    if (type == "affine") {
        const double rate = j.at("rate").get<double>();
        Vec offset = as_vec(j.at("offset"));
        return [rate, offset](const Vec& z, Vec& o) {
            o.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) o[i] = rate * z[i] + offset[i];
        };
    }
    if (type == "tabulated") {
        if (dim != 1) throw ConfigError("tabulated drift is 1-D only");
        const auto f = interp1d(j.at("points"));
        return [f](const Vec& z, Vec& o) { o.assign(1, f(z[0])); };
    }
    throw ConfigError("unknown drift type: " + type);
}

inline DiffusionFn diffusion(const Json& j, int dim) {
    const std::string type = j.value("type", "zero");
    if (type == "zero") return nullptr;
    if (type == "constant") {
        const double value = j.at("value").get<double>();
        const Mat m = Mat::identity(dim, value);
        return [m](const Vec&, Mat& o) { o = m; };
    }
    if (type == "diagonal") {
        Vec diag = as_vec(j.at("value"));
        if (static_cast<int>(diag.size()) != dim) throw ConfigError("diagonal diffusion size mismatch");
        Mat m(dim, dim);
        for (int i = 0; i < dim; ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
        return [m](const Vec&, Mat& o) { o = m; };
    }
    if (type == "tabulated") {
        if (dim != 1) throw ConfigError("tabulated diffusion is 1-D only");
        const auto f = interp1d(j.at("points"));
        return [f](const Vec& z, Mat& o) { o = Mat::identity(1, f(z[0])); };
    }
    throw ConfigError("unknown diffusion type: " + type);
}

inline JumpFn jump(const Json& j, bool* state_independent) {
    const std::string type = j.value("type", "none");
    *state_independent = true;
    if (type == "none") return nullptr;
    if (type == "additive") // zeta(z, u) = u (dimensions must agree)
        return [](const Vec&, const Vec& u, Vec& o) { o = u; };
    if (type == "additive_abs") // zeta(z, u) = |u| componentwise
        return [](const Vec&, const Vec& u, Vec& o) {
            o.resize(u.size());
            for (std::size_t i = 0; i < u.size(); ++i) o[i] = std::fabs(u[i]);
        };
    if (type == "scaled_additive") { // zeta(z, u)_i = w_i * u[0]
        Vec weights = as_vec(j.at("weights"));
        return [weights](const Vec&, const Vec& u, Vec& o) {
            o.resize(weights.size());
            for (std::size_t i = 0; i < weights.size(); ++i) o[i] = weights[i] * u[0];
        };
    }
    throw ConfigError("unknown jump type: " + type);
}

inline LevyMeasureModel levy(const Json& j) {
    const std::string type = j.value("type", "none");
    if (type == "none") return {};
    if (type == "uniform_intervals") {
        std::vector<std::pair<double, double>> pieces;
        for (const auto& p : j.at("intervals"))
            pieces.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        auto m = LevyMeasureModel::uniform_on_intervals(pieces, j.at("total_mass").get<double>(),
                                                        j.value("quadrature_nodes", 64));
        return m;
    }
    if (type == "discrete") {
        std::vector<LevyMeasureModel::Atom> atoms;
        int dim = 1;
        for (const auto& a : j.at("atoms")) {
            LevyMeasureModel::Atom atom{as_vec(a.at("mark")), a.at("weight").get<double>()};
            dim = static_cast<int>(atom.mark.size());
            atoms.push_back(std::move(atom));
        }
        return LevyMeasureModel::discrete(MarkSpace{dim}, std::move(atoms));
    }
    throw ConfigError("unknown levy measure type: " + type);
}

inline LambdaFn lambda(const Json& j) {
    const std::string type = j.value("type", "none");
    if (type == "none") return nullptr;
    if (type == "constant") {
        const double value = j.at("value").get<double>();
        return [value](const Vec&) { return value; };
    }
    if (type == "exp_linear") { // lambda(u) = exp(coef * u_1)
        const double coef = j.at("coef").get<double>();
        return [coef](const Vec& u) { return std::exp(coef * u[0]); };
    }
    if (type == "exp_abs") { // lambda(u) = exp(coef * |u|)
        const double coef = j.at("coef").get<double>();
        return [coef](const Vec& u) { return std::exp(coef * euclidean_norm(u)); };
    }
    throw ConfigError("unknown lambda type: " + type);
}

inline ScalarField scalar_field(const Json& j) {
    const std::string type = j.value("type", "none");
    if (type == "none") return {};
    if (type == "linear") return linear_field(as_vec(j.at("slope")));
    if (type == "quadratic") {
        const auto rows = j.at("q");
        const int n = static_cast<int>(rows.size());
        Mat q(n, n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) q(i, k) = rows.at(i).at(k).get<double>();
        Vec b = j.contains("b") ? as_vec(j.at("b")) : Vec(static_cast<std::size_t>(n), 0.0);
        return quadratic_field(q, b);
    }
    if (type == "linear_periodic")
        return linear_periodic_field(j.at("slope").get<double>(), j.at("amplitude").get<double>());
    throw ConfigError("unknown scalar field type: " + type);
}

inline std::function<Vec(CounterRng&)> initial(const Json& j, int dim) {
    const std::string type = j.value("type", "point");
    if (type == "point") {
        Vec value = j.contains("value") ? as_vec(j.at("value")) : Vec(static_cast<std::size_t>(dim), 0.0);
        if (static_cast<int>(value.size()) != dim) throw ConfigError("initial value dimension mismatch");
        return [value](CounterRng&) { return value; };
    }
    if (type == "gaussian") {
        Vec mean = j.contains("mean") ? as_vec(j.at("mean")) : Vec(static_cast<std::size_t>(dim), 0.0);
        const double sd = j.value("stddev", 1.0);
        return [mean, sd](CounterRng& rng) {
            Vec out(mean.size());
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = mean[i] + sd * rng.normal();
            return out;
        };
    }
    throw ConfigError("unknown initial law type: " + type);
}

inline Spectrum spectrum(const Json& j) {
    const std::string type = j.value("type", "power_law");
    if (type == "power_law")
        return Spectrum::power_law(j.at("n_max").get<std::size_t>(), j.value("scale", 1.0),
                                   j.value("exponent", 1.0));
    if (type == "explicit") {
        Spectrum s;
        s.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        s.validate();
        return s;
    }
    throw ConfigError("unknown spectrum type: " + type);
}

// diagonal sequence coefficients with per-mode weights w_j
inline SequenceCoefficients sequence_coefficients(const Json& j) {
    const std::string type = j.value("type", "diagonal_power");
    SequenceCoefficients seq;
    if (type == "diagonal_power") {
        // sigma = diag(w_j), f(x,u)_j = w_j u, optional drift b_j = rate * x_j
        const double expo = j.value("exponent", -2.0);
        const double rate = j.value("drift_rate", 0.0);
        const bool with_jumps = j.value("with_jumps", true);
        auto weight = [expo](std::size_t jx) {
            return std::pow(static_cast<double>(jx + 1), expo);
        };
        seq.diffusion = [weight](const Vec& x, Mat& o) {
            const int n = static_cast<int>(x.size());
            o = Mat(n, n);
            for (int i = 0; i < n; ++i) o(i, i) = weight(static_cast<std::size_t>(i));
        };
        if (rate != 0.0)
            seq.drift = [rate](const Vec& x, Vec& o) {
                o.resize(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) o[i] = rate * x[i];
            };
        if (with_jumps) {
            seq.jump = [weight](const Vec& x, const Vec& u, Vec& o) {
                o.resize(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) o[i] = weight(i) * u[0];
            };
            seq.jump_state_independent = true;
        }
        return seq;
    }
    if (type == "first_coordinate") {
        // everything acts on mode 1 only
        const double sigma1 = j.value("sigma", 1.0);
        const double rate = j.value("drift_rate", -1.0);
        seq.diffusion = [sigma1](const Vec& x, Mat& o) {
            o = Mat(static_cast<int>(x.size()), static_cast<int>(x.size()));
            o(0, 0) = sigma1;
        };
        seq.drift = [rate](const Vec& x, Vec& o) {
            o.assign(x.size(), 0.0);
            o[0] = rate * x[0];
        };
        seq.jump = [](const Vec& x, const Vec& u, Vec& o) {
            o.assign(x.size(), 0.0);
            o[0] = u[0];
        };
        seq.jump_state_independent = true;
        return seq;
    }
    if (type == "tridiagonal") {
        // b(x)_j = x_{j-1} - 2 x_j + x_{j+1}, zero-padded at the ends
        seq.drift = [](const Vec& x, Vec& o) {
            const std::size_t n = x.size();
            o.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double s = -2.0 * x[i];
                if (i > 0) s += x[i - 1];
                if (i + 1 < n) s += x[i + 1];
                o[i] = s;
            }
        };
        return seq;
    }
    throw ConfigError("unknown sequence coefficient type: " + type);
}

} // namespace build

// ---------------------------------------------------------------------------

inline Scenario parse_scenario(const Json& doc) {
    Scenario sc;
    try {
        sc.name = doc.at("name").get<std::string>();
        sc.description = doc.value("description", "");
        sc.exercises = doc.value("exercises", "");
        const Json& model = doc.at("model");
        const int dim = model.value("dimension", 1);
        if (dim <= 0) throw ConfigError("dimension must be positive");
        sc.model.coeffs.dimension = dim;
        sc.model.coeffs.drift = build::drift(model.value("drift", Json{{"type", "zero"}}), dim);
        sc.model.coeffs.diffusion =
            build::diffusion(model.value("diffusion", Json{{"type", "zero"}}), dim);
        bool jump_si = true;
        sc.model.coeffs.jump = build::jump(model.value("jump", Json{{"type", "none"}}), &jump_si);
        sc.model.coeffs.jump_state_independent = jump_si;
        if (model.contains("lipschitz")) {
            sc.model.coeffs.declared_lipschitz =
                LipschitzBounds{model.at("lipschitz").at("l1").get<double>(),
                                model.at("lipschitz").at("l2").get<double>()};
        }
        sc.model.levy = build::levy(model.value("levy", Json{{"type", "none"}}));
        sc.model.lambda = build::lambda(model.value("lambda", Json{{"type", "none"}}));
        sc.model.rho_bound = model.value("rho_bound", 1e3);
        sc.model.v = build::scalar_field(model.value("v", Json{{"type", "none"}}));

        const Json rho = model.value("rho", Json{{"type", "none"}});
        const std::string rho_type = rho.value("type", "none");
        if (rho_type == "constant") {
            Vec value = build::as_vec(rho.at("value"));
            sc.model.rho = [value](const Vec&, Vec& o) { o = value; };
        } else if (rho_type == "from_v" || rho_type == "from_v_offset") {
            if (!sc.model.v.valid())
                throw ConfigError("rho type '" + rho_type + "' needs a scalar field v");
            if (!sc.model.coeffs.has_diffusion())
                throw ConfigError("rho type '" + rho_type + "' needs a diffusion coefficient");
            const double delta = rho_type == "from_v_offset" ? rho.at("delta").get<double>() : 0.0;
            const ScalarField v = sc.model.v;
            const DiffusionFn sigma = sc.model.coeffs.diffusion;
            sc.model.rho = [v, sigma, delta](const Vec& x, Vec& o) {
                Vec grad;
                Mat sig;
                v.gradient(x, grad);
                sigma(x, sig);
                sig.multiply_transposed(grad, o);
                for (auto& c : o) c += delta;
            };
        } else if (rho_type != "none") {
            throw ConfigError("unknown rho type: " + rho_type);
        }

        sc.model.initial = build::initial(model.value("initial", Json{{"type", "point"}}), dim);
        if (model.contains("spectrum")) {
            sc.model.spectrum = build::spectrum(model.at("spectrum"));
            sc.model.sequence = build::sequence_coefficients(
                model.value("sequence_coefficients", Json{{"type", "diagonal_power"}}));
        }

        sc.experiment = doc.at("experiment");
        if (doc.contains("execution")) {
            const Json& ex = doc.at("execution");
            sc.exec.n_paths = ex.value("n_paths", sc.exec.n_paths);
            sc.exec.dt = ex.value("dt", sc.exec.dt);
            sc.exec.horizon = ex.value("horizon", sc.exec.horizon);
            sc.exec.seed = ex.value("seed", sc.exec.seed);
            sc.exec.threads = ex.value("threads", sc.exec.threads);
            sc.exec.alpha = ex.value("alpha", sc.exec.alpha);
        }
        if (!(sc.exec.dt > 0.0)) throw ConfigError("execution.dt must be positive");
        if (!(sc.exec.horizon > 0.0)) throw ConfigError("execution.horizon must be positive");
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("scenario parse error: ") + e.what());
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    Json doc;
    try {
        in >> doc;
    } catch (const Json::exception& e) {
        throw ConfigError("scenario JSON error in " + path + ": " + e.what());
    }
    return parse_scenario(doc);
}

// Pre-simulation checks: every declared component must behave before any
// paths are drawn.
inline void validate_scenario(const Scenario& sc) {
    const int dim = sc.model.coeffs.dimension;

    // probe grid spanning the region experiments use
    std::vector<Vec> probes;
    for (double x = -2.0; x <= 2.0 + 1e-12; x += 0.5) {
        Vec p(static_cast<std::size_t>(dim), 0.0);
        p[0] = x;
        if (dim > 1) p[static_cast<std::size_t>(dim) - 1] = -0.5 * x;
        probes.push_back(std::move(p));
    }

    std::vector<Vec> probe_marks;
    if (!sc.model.levy.empty()) {
        CounterRng rng({sc.exec.seed, 0xabcdef, Substream::jump_marks});
        for (int i = 0; i < 32; ++i)
            probe_marks.push_back(sc.model.levy.sample(sc.model.region, rng));
    }

    probe_finiteness(sc.model.coeffs, probes, probe_marks);
    probe_lipschitz(sc.model.coeffs, probes, probe_marks);

    if (sc.model.lambda) {
        constexpr double eps = 1e-6; // integrability guard for the tilt
        for (const auto& u : probe_marks) {
            const double lam = sc.model.lambda(u);
            if (!(lam >= eps) || !(lam <= 1.0 - eps))
                throw ModelError("lambda must satisfy eps <= lambda(u) <= 1-eps on the region");
        }
    }
    if (sc.model.v.valid()) validate_scalar_field(sc.model.v, probes);
    if (sc.model.rho) {
        Vec out;
        for (const auto& p : probes) {
            sc.model.rho(p, out);
            if (euclidean_norm(out) > sc.model.rho_bound)
                throw ModelError("rho exceeds its declared bound on the probe grid");
        }
    }
    if (sc.model.spectrum) sc.model.spectrum->validate();
}

// ---------------------------------------------------------------------------

struct SimulatedPath {
    CadlagPath path;
    NoiseRecord noise;
};

// One path of the scenario's equation, fully determined by (seed, index).
inline SimulatedPath simulate_path(const BuiltModel& model, double horizon, double dt,
                                   std::uint64_t seed, std::uint64_t path_index) {
    const StreamKey key{seed, path_index, Substream::jump_times};
    MarkedPointPattern pattern;
    if (!model.levy.empty()) {
        pattern = sample_prm(model.levy, model.region, horizon, key);
        if (model.lambda) pattern = thin_to_tilted(pattern, model.lambda, key);
    } else {
        pattern.horizon = horizon;
    }
    const auto grid = make_time_grid(horizon, dt, pattern.times);
    auto noise = make_noise_record(grid, model.coeffs.dimension, std::move(pattern), key);

    CounterRng init_rng(key.with(Substream::initial_condition));
    const Vec x0 = model.initial ? model.initial(init_rng)
                                 : Vec(static_cast<std::size_t>(model.coeffs.dimension), 0.0);

    SimulatedPath out;
    out.path = solve_strong(model.coeffs, noise, grid, x0, model.environment());
    out.noise = std::move(noise);
    return out;
}

// spot-check the drift tilt along a path; a bound violation rejects the
// whole scenario rather than poisoning the statistics
inline void enforce_rho_bound(const BuiltModel& model, const CadlagPath& path) {
    if (!model.rho) return;
    Vec out;
    const std::size_t stride = std::max<std::size_t>(1, path.states.size() / 16);
    for (std::size_t k = 0; k < path.states.size(); k += stride) {
        model.rho(path.states[k], out);
        if (euclidean_norm(out) > model.rho_bound)
            throw ModelError("rho exceeded its bound along a simulated path");
    }
}

struct MartingaleCheckPoint {
    double time = 0.0;
    MeanStderr stat;
    bool pass = false; // |mean - 1| <= 3 stderr
};

// Ensemble mean of the density at each requested time. Passing requires
// every point to sit within three standard errors of one.
inline std::vector<MartingaleCheckPoint> martingale_check(const BuiltModel& model, double horizon,
                                                          double dt, std::size_t n_paths,
                                                          const std::vector<double>& times,
                                                          std::uint64_t seed, int threads = 1) {
    std::vector<std::vector<double>> lambda_at(times.size(), std::vector<double>(n_paths));
    detail::parallel_for(n_paths, threads, [&](std::size_t p) {
        const auto sim = simulate_path(model, horizon, dt, seed, p);
        enforce_rho_bound(model, sim.path);
        const auto rec = accumulate_log_density(sim.path, sim.noise, model.rho, model.lambda,
                                                model.levy, model.region);
        for (std::size_t ti = 0; ti < times.size(); ++ti)
            lambda_at[ti][p] = std::exp(rec.log_density[sim.path.grid.node_at_or_before(times[ti])]);
    });
    std::vector<MartingaleCheckPoint> out;
    out.reserve(times.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        MartingaleCheckPoint pt;
        pt.time = times[ti];
        pt.stat = mean_stderr(lambda_at[ti]);
        pt.pass = std::fabs(pt.stat.mean - 1.0) <= 3.0 * pt.stat.stderr_ ||
                  (pt.stat.stderr_ == 0.0 && pt.stat.mean == 1.0);
        out.push_back(pt);
    }
    return out;
}

} // namespace jsde
