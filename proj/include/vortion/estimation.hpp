#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortion/beam.hpp"
#include "vortion/dynamics.hpp"

// Nonlinear least-squares fits of the Rabi and spectrum models: mean phonon
// number, base Rabi frequency, Lamb-Dicke parameter, decoherence rate,
// calibration slope, and beam waist.
//
// The optimizer is a damped least-squares (Levenberg-Marquardt) loop with a
// central-difference Jacobian. nbar and gamma are fitted in log space to
// enforce positivity; eta is reflected about zero. One-sigma errors come from
// the Jacobian-based covariance at the optimum scaled by the reduced
// chi-square.

namespace vortion {

struct Dataset {
    std::vector<double> abscissa;
    std::vector<double> values;
    std::vector<double> weights;  // optional inverse variance; empty = unit

    std::size_t size() const { return abscissa.size(); }

    void validate(std::size_t min_points, bool values_are_probabilities) const {
        if (values.size() != abscissa.size())
            throw std::invalid_argument("dataset: abscissa/value lengths differ");
        if (!weights.empty() && weights.size() != abscissa.size())
            throw std::invalid_argument("dataset: weight length differs");
        if (abscissa.size() < min_points)
            throw std::invalid_argument("dataset: too few points for the free parameters");
        if (values_are_probabilities)
            for (double v : values)
                if (v < -1e-9 || v > 1.0 + 1e-9)
                    throw std::invalid_argument("dataset: populations must lie in [0, 1]");
    }
};

struct FitResult {
    std::map<std::string, double> parameters;
    std::map<std::string, double> errors;  // present only when converged
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
};

namespace lm {

enum class Transform { Identity, LogPositive, AbsReflect };

struct Param {
    std::string name;
    double value = 0.0;  // external (physical) value
    Transform transform = Transform::Identity;
    double lo = -1e300, hi = 1e300;  // external clamp for LogPositive

    // Bounds in internal coordinates; enforcing them on the iterate keeps
    // finite-difference gradients alive at the boundary.
    double internal_lo() const {
        return transform == Transform::LogPositive ? std::log(lo) : -1e300;
    }
    double internal_hi() const {
        return transform == Transform::LogPositive ? std::log(hi) : 1e300;
    }
};

inline double to_external(double q, const Param& p) {
    switch (p.transform) {
        case Transform::Identity: return q;
        case Transform::LogPositive: return std::clamp(std::exp(q), p.lo, p.hi);
        case Transform::AbsReflect: return std::abs(q);
    }
    return q;
}

inline double to_internal(double value, const Param& p) {
    switch (p.transform) {
        case Transform::Identity: return value;
        case Transform::LogPositive: return std::log(std::clamp(value, p.lo, p.hi));
        case Transform::AbsReflect: return std::abs(value);
    }
    return value;
}

struct Options {
    int max_iterations = 200;
    double cost_tol = 1e-10;   // relative cost change
    double step_tol = 1e-12;   // step norm
    double rel_step = 1e-6;    // Jacobian finite-difference step
};

// Gaussian elimination with partial pivoting; returns false when singular.
inline bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri][c] * x[c];
        x[ri] = s / a[ri][ri];
    }
    return true;
}

struct Outcome {
    std::vector<double> internal;
    double cost = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> sigma_internal;  // valid when converged and dof > 0
};

// residual_fn maps external parameter values to the weighted residual vector.
using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

inline Outcome minimize(const ResidualFn& residual_fn, const std::vector<Param>& params,
                        const std::vector<double>& start_internal, const Options& opt = {}) {
    const std::size_t m = params.size();
    auto externals = [&](const std::vector<double>& q) {
        std::vector<double> p(m);
        for (std::size_t j = 0; j < m; ++j) p[j] = to_external(q[j], params[j]);
        return p;
    };
    auto cost_of = [](const std::vector<double>& r) {
        double c = 0.0;
        for (double v : r) c += v * v;
        return c;
    };

    std::vector<double> q = start_internal;
    std::vector<double> r = residual_fn(externals(q));
    double cost = cost_of(r);
    double lambda = 1e-3;
    Outcome out;
    out.iterations = 0;

    std::vector<std::vector<double>> jac(r.size(), std::vector<double>(m, 0.0));
    for (int iter = 1; iter <= opt.max_iterations; ++iter) {
        out.iterations = iter;
        // Central-difference Jacobian in internal coordinates.
        for (std::size_t j = 0; j < m; ++j) {
            const double h = opt.rel_step * std::max(std::abs(q[j]), 1.0);
            std::vector<double> qp = q, qm = q;
            qp[j] += h;
            qm[j] -= h;
            const auto rp = residual_fn(externals(qp));
            const auto rm = residual_fn(externals(qm));
            for (std::size_t i = 0; i < r.size(); ++i) jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
        }
        std::vector<std::vector<double>> jtj(m, std::vector<double>(m, 0.0));
        std::vector<double> jtr(m, 0.0);
        for (std::size_t i = 0; i < r.size(); ++i) {
            for (std::size_t a = 0; a < m; ++a) {
                jtr[a] -= jac[i][a] * r[i];
                for (std::size_t b = a; b < m; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
            }
        }
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];

        bool stepped = false;
        for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
            auto damped = jtj;
            for (std::size_t a = 0; a < m; ++a)
                damped[a][a] += lambda * std::max(jtj[a][a], 1e-300);
            std::vector<double> delta;
            if (!solve_linear(damped, jtr, delta)) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> q_new(m);
            double step_norm = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                q_new[j] = std::clamp(q[j] + delta[j], params[j].internal_lo(),
                                      params[j].internal_hi());
                const double moved = q_new[j] - q[j];
                step_norm += moved * moved;
            }
            step_norm = std::sqrt(step_norm);
            const auto r_new = residual_fn(externals(q_new));
            const double cost_new = cost_of(r_new);
            if (cost_new <= cost) {
                const double rel_drop = (cost - cost_new) / std::max(cost, 1e-300);
                q = q_new;
                r = r_new;
                lambda = std::max(lambda / 5.0, 1e-12);
                stepped = true;
                // A tiny improvement only counts as convergence once the
                // damping is released; large lambda means the quadratic model
                // is still distrusted and steps are artificially short.
                if ((rel_drop < opt.cost_tol && lambda <= 1e-2) ||
                    step_norm < opt.step_tol)
                    out.converged = true;
                cost = cost_new;
            } else {
                lambda *= 10.0;
            }
        }
        if (out.converged || !stepped) break;
    }

    out.internal = q;
    out.cost = cost;
    if (out.converged && r.size() > m) {
        // Refresh the Jacobian at the optimum, then
        // sigma^2 = diag((J^T J)^-1) * chi2_red.
        for (std::size_t j = 0; j < m; ++j) {
            const double h = opt.rel_step * std::max(std::abs(q[j]), 1.0);
            std::vector<double> qp = q, qm = q;
            qp[j] += h;
            qm[j] -= h;
            const auto rp = residual_fn(externals(qp));
            const auto rm = residual_fn(externals(qm));
            for (std::size_t i = 0; i < r.size(); ++i) jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
        }
        const double chi2_red = cost / double(r.size() - m);
        std::vector<std::vector<double>> jtj(m, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = 0; b < m; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
        out.sigma_internal.assign(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            std::vector<double> unit(m, 0.0), col;
            unit[j] = 1.0;
            if (solve_linear(jtj, unit, col) && col[j] >= 0.0)
                out.sigma_internal[j] = std::sqrt(col[j] * chi2_red);
            else
                out.sigma_internal[j] = 0.0;
        }
    }
    return out;
}

// Delta-method back-transform of an internal one-sigma error.
inline double sigma_external(double q, double sigma_q, const Param& p) {
    switch (p.transform) {
        case Transform::Identity: return sigma_q;
        case Transform::LogPositive: return to_external(q, p) * sigma_q;
        case Transform::AbsReflect: return sigma_q;
    }
    return sigma_q;
}

}  // namespace lm

// ---------------------------------------------------------------------------
// Thermal Rabi fits

struct RabiTrace {
    Dataset data;          // abscissa in seconds, values are P_D
    SidebandOrder order = SidebandOrder::Carrier;
};

namespace detail {

// Thermal weights for one nbar, shared across every point of a residual
// evaluation.
struct ThermalWeights {
    std::vector<double> w;
    double mass = 0.0;

    explicit ThermalWeights(double nbar) {
        const int n_max = std::min(thermal_n_max(nbar), 20000);
        w.resize(n_max + 1);
        for (int n = 0; n <= n_max; ++n) {
            w[n] = thermal_weight(nbar, n);
            mass += w[n];
        }
    }
};

inline double rabi_model_point(double t, const ThermalWeights& tw, double omega0, double eta,
                               double gamma, SidebandOrder order) {
    double sum = 0.0;
    for (std::size_t n = 0; n < tw.w.size(); ++n)
        sum += tw.w[n] * std::cos(sideband_rabi(omega0, eta, int(n), order) * t);
    sum += 1.0 - tw.mass;
    return 0.5 * (1.0 - sum * std::exp(-gamma * t));
}

inline const std::array<std::string, 4>& rabi_param_names() {
    static const std::array<std::string, 4> names = {"nbar", "omega0", "eta", "gamma"};
    return names;
}

}  // namespace detail

// Simultaneous damped least-squares fit of the thermal Rabi model to one or
// more traces (carrier, red, blue) with shared parameters. fixed and free
// must exactly cover {nbar, omega0, eta, gamma}. When nbar is free the fit
// restarts from five log-spaced initial values and keeps the lowest cost.
inline FitResult fit_thermal_rabi(const std::vector<RabiTrace>& traces,
                                  const std::map<std::string, double>& fixed,
                                  const std::vector<std::string>& free_names) {
    if (traces.empty()) throw std::invalid_argument("fit_thermal_rabi: no traces");
    for (const auto& name : detail::rabi_param_names()) {
        const bool in_fixed = fixed.count(name) > 0;
        const bool in_free = std::count(free_names.begin(), free_names.end(), name) > 0;
        if (in_fixed == in_free)
            throw std::invalid_argument("fit_thermal_rabi: parameters {nbar, omega0, eta, gamma} "
                                        "must be covered exactly once by fixed+free (" +
                                        name + ")");
    }
    if (free_names.empty()) throw std::invalid_argument("fit_thermal_rabi: no free parameters");

    std::size_t n_points = 0;
    for (const auto& tr : traces) {
        tr.data.validate(1, true);
        n_points += tr.data.size();
    }
    if (n_points < free_names.size() + 1)
        throw std::invalid_argument("fit_thermal_rabi: under-determined (need >= nfree+1 points)");

    // Data-driven oscillation scales: the first local maximum of a trace sits
    // near its pi-time. Damped or monotone traces fall back to the argmax.
    auto first_peak_time = [](const Dataset& d) {
        double vmax = 0.0;
        std::size_t argmax = d.size() - 1;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d.values[i] > vmax) {
                vmax = d.values[i];
                argmax = i;
            }
        for (std::size_t i = 1; i + 1 < d.size(); ++i)
            if (d.values[i] >= 0.5 * vmax && d.values[i] > d.values[i - 1] &&
                d.values[i] >= d.values[i + 1])
                return std::max(d.abscissa[i], 1e-12);
        return std::max(d.abscissa[argmax], 1e-12);
    };
    const RabiTrace* carrier_trace = nullptr;
    const RabiTrace* sideband_trace = nullptr;
    for (const auto& tr : traces) {
        if (tr.order == SidebandOrder::Carrier && !carrier_trace) carrier_trace = &tr;
        // Blue traces keep contrast near the ground state; prefer them for
        // the eta scale.
        if (tr.order == SidebandOrder::Blue) sideband_trace = &tr;
        if (tr.order == SidebandOrder::Red && !sideband_trace) sideband_trace = &tr;
    }
    double omega0_guess;
    if (fixed.count("omega0")) {
        omega0_guess = fixed.at("omega0");
    } else if (carrier_trace) {
        omega0_guess = constants::pi / first_peak_time(carrier_trace->data);
    } else {
        const auto& t = traces.front().data.abscissa;
        omega0_guess = 4.0 * constants::two_pi / std::max(t.back() - t.front(), 1e-9);
    }
    double eta_guess = 0.05;
    if (sideband_trace && omega0_guess > 0.0)
        eta_guess = std::clamp(
            constants::pi / (omega0_guess * first_peak_time(sideband_trace->data)), 1e-4, 0.5);

    // Canonical parameter order keeps results deterministic.
    std::vector<lm::Param> params;
    for (const auto& name : detail::rabi_param_names()) {
        if (!std::count(free_names.begin(), free_names.end(), name)) continue;
        lm::Param p;
        p.name = name;
        if (name == "nbar") {
            p.transform = lm::Transform::LogPositive;
            p.lo = 1e-8;
            p.hi = 2e4;
            p.value = 1.0;
        } else if (name == "gamma") {
            p.transform = lm::Transform::LogPositive;
            p.lo = 1e-6;
            p.hi = 1e9;
            p.value = 100.0;
        } else if (name == "eta") {
            p.transform = lm::Transform::AbsReflect;
            p.value = eta_guess;
        } else {  // omega0
            p.transform = lm::Transform::Identity;
            p.value = omega0_guess;
        }
        params.push_back(p);
    }

    auto value_of = [&](const std::string& name, const std::vector<double>& ext) {
        for (std::size_t j = 0; j < params.size(); ++j)
            if (params[j].name == name) return ext[j];
        return fixed.at(name);
    };

    lm::ResidualFn residuals = [&](const std::vector<double>& ext) {
        const double nbar = value_of("nbar", ext);
        const double omega0 = value_of("omega0", ext);
        const double eta = value_of("eta", ext);
        const double gamma = value_of("gamma", ext);
        const detail::ThermalWeights tw(nbar);
        std::vector<double> r;
        r.reserve(n_points);
        for (const auto& tr : traces) {
            for (std::size_t i = 0; i < tr.data.size(); ++i) {
                const double model = detail::rabi_model_point(tr.data.abscissa[i], tw, omega0,
                                                              eta, gamma, tr.order);
                const double w = tr.data.weights.empty() ? 1.0 : tr.data.weights[i];
                r.push_back(std::sqrt(w) * (tr.data.values[i] - model));
            }
        }
        return r;
    };

    const bool nbar_free = std::count(free_names.begin(), free_names.end(), "nbar") > 0;
    const bool eta_free = std::count(free_names.begin(), free_names.end(), "eta") > 0;
    std::vector<std::vector<double>> starts;
    {
        std::vector<double> base(params.size());
        for (std::size_t j = 0; j < params.size(); ++j)
            base[j] = lm::to_internal(params[j].value, params[j]);
        // The thermal Rabi likelihood is multi-modal in nbar, and the
        // oscillatory traces admit subharmonic eta minima; restart over a
        // small deterministic grid and keep the best.
        std::vector<double> nbar_starts = {0.02, 0.14, 1.0, 7.0, 50.0};
        std::vector<double> eta_factors = {1.0, 0.5, 2.0};
        if (!nbar_free) nbar_starts = {0.0};
        if (!eta_free) eta_factors = {1.0};
        for (double nb : nbar_starts)
            for (double ef : eta_factors) {
                auto s = base;
                for (std::size_t j = 0; j < params.size(); ++j) {
                    if (params[j].name == "nbar" && nbar_free) s[j] = std::log(nb);
                    if (params[j].name == "eta" && eta_free)
                        s[j] = lm::to_internal(eta_guess * ef, params[j]);
                }
                starts.push_back(s);
            }
    }

    double mean = 0.0, wsum = 0.0;
    for (const auto& tr : traces)
        for (std::size_t i = 0; i < tr.data.size(); ++i) {
            const double w = tr.data.weights.empty() ? 1.0 : tr.data.weights[i];
            mean += w * tr.data.values[i];
            wsum += w;
        }
    mean /= wsum;
    double constant_cost = 0.0;
    for (const auto& tr : traces)
        for (std::size_t i = 0; i < tr.data.size(); ++i) {
            const double w = tr.data.weights.empty() ? 1.0 : tr.data.weights[i];
            constant_cost += w * (tr.data.values[i] - mean) * (tr.data.values[i] - mean);
        }

    lm::Outcome best;
    bool have_best = false;
    for (const auto& s : starts) {
        const auto o = lm::minimize(residuals, params, s);
        if (!have_best || (o.converged && !best.converged) ||
            (o.converged == best.converged && o.cost < best.cost)) {
            best = o;
            have_best = true;
        }
        // An essentially exact converged fit cannot be improved by further
        // restarts.
        if (best.converged && best.cost < 1e-12) break;
    }

    // Information check: a fit that does not beat the best constant predictor
    // carries no parameter information and is reported as non-converged.
    const bool informative = best.cost < 0.95 * constant_cost;

    FitResult res;
    res.converged = best.converged && informative;
    res.iterations = best.iterations;
    res.residual_norm = std::sqrt(best.cost);
    for (std::size_t j = 0; j < params.size(); ++j)
        res.parameters[params[j].name] = lm::to_external(best.internal[j], params[j]);
    for (const auto& [k, v] : fixed) res.parameters[k] = v;
    if (res.converged && !best.sigma_internal.empty())
        for (std::size_t j = 0; j < params.size(); ++j)
            res.errors[params[j].name] =
                lm::sigma_external(best.internal[j], best.sigma_internal[j], params[j]);
    return res;
}

// Least-squares slope of Omega = a sqrt(P).
inline FitResult fit_power_law(const Dataset& data) {
    data.validate(1, false);
    for (double p : data.abscissa)
        if (!(p > 0.0)) throw std::invalid_argument("fit_power_law: powers must be > 0");
    if (data.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(data.abscissa.begin(), data.abscissa.end());
        if (*lo == *hi)
            throw std::invalid_argument("fit_power_law: degenerate data (all powers equal)");
    }

    lm::Param slope;
    slope.name = "slope";
    slope.transform = lm::Transform::LogPositive;
    slope.lo = 1e-30;
    slope.hi = 1e30;
    double init = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        init += data.values[i] / std::sqrt(data.abscissa[i]);
    init = std::max(init / double(data.size()), 1e-20);

    lm::ResidualFn residuals = [&](const std::vector<double>& ext) {
        std::vector<double> r(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double w = data.weights.empty() ? 1.0 : data.weights[i];
            r[i] = std::sqrt(w) * (data.values[i] - ext[0] * std::sqrt(data.abscissa[i]));
        }
        return r;
    };
    const auto o = lm::minimize(residuals, {slope}, {std::log(init)});

    FitResult res;
    res.converged = o.converged;
    res.iterations = o.iterations;
    res.residual_norm = std::sqrt(o.cost);
    res.parameters["slope"] = lm::to_external(o.internal[0], slope);
    if (o.converged && !o.sigma_internal.empty())
        res.errors["slope"] = lm::sigma_external(o.internal[0], o.sigma_internal[0], slope);
    else if (o.converged)
        res.errors["slope"] = 0.0;  // exactly determined (single point)
    return res;
}

// Spatial excitation profile of a beam scanned across the ion along one
// transverse axis, with the pulse fixed: P(x) = sin^2(Omega(x) tau / 2)
// exp(-Gamma tau), Omega(x) = omega_peak * profile(x - center; waist).
inline FitResult fit_waist_scan(const Dataset& data, BeamKind kind, double tau,
                                double gamma = 0.0) {
    data.validate(4, true);
    if (!(tau > 0.0)) throw std::invalid_argument("fit_waist_scan: tau must be > 0");

    const double span =
        *std::max_element(data.abscissa.begin(), data.abscissa.end()) -
        *std::min_element(data.abscissa.begin(), data.abscissa.end());
    if (!(span > 0.0)) throw std::invalid_argument("fit_waist_scan: zero abscissa span");

    lm::Param w0{"waist", span / 4.0, lm::Transform::LogPositive, 1e-9, 1.0};
    lm::Param omega{"omega_peak", constants::pi / tau, lm::Transform::LogPositive, 1e-3, 1e12};
    double centroid = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        centroid += data.abscissa[i] * data.values[i];
        mass += data.values[i];
    }
    lm::Param center{"center", mass > 0.0 ? centroid / mass : 0.0, lm::Transform::Identity};
    const std::vector<lm::Param> params = {w0, omega, center};

    auto profile = [kind](double u, double w) {
        const double g = std::exp(-u * u / (w * w));
        if (kind == BeamKind::Gaussian) return g;
        return std::sqrt(2.0) * std::abs(u) / w * g;
    };
    lm::ResidualFn residuals = [&](const std::vector<double>& ext) {
        std::vector<double> r(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double om = ext[1] * profile(data.abscissa[i] - ext[2], ext[0]);
            const double model = detuned_excitation(om, 0.0, tau, gamma);
            const double w = data.weights.empty() ? 1.0 : data.weights[i];
            r[i] = std::sqrt(w) * (data.values[i] - model);
        }
        return r;
    };

    lm::Outcome best;
    bool have_best = false;
    for (double wf : {0.5, 1.0, 2.0}) {
        std::vector<double> start = {std::log(w0.value * wf), std::log(omega.value),
                                     center.value};
        const auto o = lm::minimize(residuals, params, start);
        if (!have_best || (o.converged && !best.converged) ||
            (o.converged == best.converged && o.cost < best.cost)) {
            best = o;
            have_best = true;
        }
        if (best.converged && best.cost < 1e-12) break;
    }

    // A scan carrying no spatial structure pins none of the parameters.
    double mean = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double w = data.weights.empty() ? 1.0 : data.weights[i];
        mean += w * data.values[i];
        wsum += w;
    }
    mean /= wsum;
    double constant_cost = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double w = data.weights.empty() ? 1.0 : data.weights[i];
        constant_cost += w * (data.values[i] - mean) * (data.values[i] - mean);
    }

    FitResult res;
    res.converged = best.converged && best.cost < 0.95 * constant_cost;
    res.iterations = best.iterations;
    res.residual_norm = std::sqrt(best.cost);
    for (std::size_t j = 0; j < params.size(); ++j)
        res.parameters[params[j].name] = lm::to_external(best.internal[j], params[j]);
    if (res.converged && !best.sigma_internal.empty())
        for (std::size_t j = 0; j < params.size(); ++j)
            res.errors[params[j].name] =
                lm::sigma_external(best.internal[j], best.sigma_internal[j], params[j]);
    return res;
}

// Unweighted mean and one-sigma spread of the per-power eta estimates. A
// single result falls back to its own fit error as the spread.
inline std::pair<double, double> eta_from_sideband_fits(const std::vector<FitResult>& results) {
    std::vector<double> etas;
    std::vector<double> errs;
    for (const auto& r : results) {
        auto it = r.parameters.find("eta");
        if (it == r.parameters.end()) continue;
        etas.push_back(it->second);
        auto eit = r.errors.find("eta");
        errs.push_back(eit == r.errors.end() ? 0.0 : eit->second);
    }
    if (etas.empty())
        throw std::invalid_argument("eta_from_sideband_fits: no eta estimates in input");
    double mean = 0.0;
    for (double e : etas) mean += e;
    mean /= double(etas.size());
    if (etas.size() == 1) return {mean, errs[0]};
    double var = 0.0;
    for (double e : etas) var += (e - mean) * (e - mean);
    return {mean, std::sqrt(var / double(etas.size() - 1))};
}

}  // namespace vortion
