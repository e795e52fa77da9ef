#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vortion/csv.hpp"
#include "vortion/estimation.hpp"

// Scan drivers behind the CLI: frequency, time, space, power, and the
// residual map. Grid points are independent; workers share them in fixed
// chunks and write by index, so output ordering never depends on scheduling.

namespace vortion {

namespace detail {

template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
    threads = std::max(1, threads);
    if (threads == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline std::vector<double> grid_by_step(double start, double stop, double step) {
    std::vector<double> out;
    const double n_est = (stop - start) / step;
    const std::size_t n = static_cast<std::size_t>(std::floor(n_est + 1e-9)) + 1;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(start + double(i) * step);
    return out;
}

inline std::vector<double> linspace(double start, double stop, int points) {
    std::vector<double> out;
    out.reserve(points);
    if (points == 1) {
        out.push_back(start);
        return out;
    }
    for (int i = 0; i < points; ++i)
        out.push_back(start + (stop - start) * double(i) / double(points - 1));
    return out;
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// Residual-carrier model resolved from the config: thermally averaged ratio
// plus the reference Gaussian's carrier Rabi frequency.
inline ResidualCarrierModel residual_model_from(const ExperimentConfig& cfg) {
    ResidualCarrierModel model;
    if (!cfg.residual_enabled || cfg.beam_kind != BeamKind::LaguerreGaussian01) return model;
    const auto beam = cfg.beam();
    const auto trap = cfg.trap();
    const auto state = cfg.state();
    const auto reference = cfg.residual_reference_beam();
    const auto wp =
        wavepacket_from(trap, state, Vec3{cfg.residual_displacement, 0.0, 0.0});
    model.enabled = true;
    model.ratio = residual_carrier_ratio(beam, reference, wp, cfg.residual_norm);
    model.reference_rabi =
        cfg.coupling_scale() *
        gaussian_carrier_scale(reference.wavenumber(), reference.peak_amplitude());
    return model;
}

// Resolved-sideband spectrum over the configured detuning grid.
inline ScanResult run_spectrum(const ExperimentConfig& cfg, int threads = 1) {
    detail::Stopwatch clock;
    const auto beam = cfg.beam();
    const auto trap = cfg.trap();
    const auto state = cfg.state();
    const auto detunings = detail::grid_by_step(cfg.scan_start, cfg.scan_stop, cfg.scan_step);
    const Vec3 position = beam.to_beam_frame(Vec3{});
    const auto residual = residual_model_from(cfg);
    const double kappa = cfg.coupling_scale();

    const TransitionRabi rabi = transition_rabi_at(beam, trap, position, cfg.delta_m, kappa);
    const detail::CarrierThermalSum carrier_sum(trap, state,
                                                Vec3{0.0, 0.0, beam.wavenumber()});

    std::vector<SpectrumPoint> points(detunings.size());
    detail::parallel_for(detunings.size(), threads, [&](std::size_t i) {
        points[i] = spectrum_at(beam, trap, state, cfg.tau, cfg.gamma, detunings[i], rabi,
                                carrier_sum, residual);
    });

    ScanResult result;
    result.kind = "spectrum";
    result.columns = {"detuning_khz", "pd_total",  "pd_carrier", "pd_ax_red", "pd_ax_blue",
                      "pd_r1_red",    "pd_r1_blue", "pd_r2_red",  "pd_r2_blue"};
    result.rows.reserve(points.size());
    const int ax = static_cast<int>(ModeId::Axial);
    const int r1 = static_cast<int>(ModeId::R1);
    const int r2 = static_cast<int>(ModeId::R2);
    for (const auto& p : points)
        result.rows.push_back({p.detuning / constants::two_pi / 1e3, p.total, p.carrier,
                               p.red[ax], p.blue[ax], p.red[r1], p.blue[r1], p.red[r2],
                               p.blue[r2]});
    result.metadata = scan_metadata(cfg, result.kind, clock.ms());
    return result;
}

// Rabi time trace for the configured transition at the configured position.
inline ScanResult run_rabi(const ExperimentConfig& cfg, int threads = 1) {
    (void)threads;  // single trace; the thermal sum dominates and is cheap
    detail::Stopwatch clock;
    const auto beam = cfg.beam();
    const auto trap = cfg.trap();
    const auto state = cfg.state();
    const auto times = detail::grid_by_step(cfg.rabi_start, cfg.rabi_stop, cfg.rabi_step);
    const Vec3 position = beam.to_beam_frame(Vec3{});
    const double kappa = cfg.coupling_scale();
    const TransitionRabi rabi = transition_rabi_at(beam, trap, position, cfg.delta_m, kappa);

    const int mode_idx = static_cast<int>(cfg.rabi_mode);
    std::vector<double> trace;
    if (cfg.rabi_order == SidebandOrder::Carrier) {
        const double eta =
            std::abs(lamb_dicke_parallel(trap, cfg.rabi_mode, Vec3{0.0, 0.0, beam.wavenumber()}));
        const PulseSpec pulse(cfg.tau, 0.0, rabi.carrier, cfg.gamma);
        trace = rabi_trace(state.nbar_of(cfg.rabi_mode), state.n_max_of(cfg.rabi_mode), pulse,
                           eta, SidebandOrder::Carrier, times);
    } else {
        // The channel amplitude already carries the Lamb-Dicke factor; feed it
        // as the base frequency with eta = 1 so Omega_n = A sqrt(n(+1)).
        const PulseSpec pulse(cfg.tau, 0.0, rabi.sideband[mode_idx], cfg.gamma);
        trace = rabi_trace(state.nbar_of(cfg.rabi_mode), state.n_max_of(cfg.rabi_mode), pulse,
                           1.0, cfg.rabi_order, times);
    }

    ScanResult result;
    result.kind = "rabi";
    result.columns = {"time_us", "pd"};
    result.rows.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        result.rows.push_back({times[i] * 1e6, trace[i]});
    result.metadata = scan_metadata(cfg, result.kind, clock.ms());
    return result;
}

// 2D spatial excitation map at a fixed transition detuning. Abscissae are the
// ion position in the beam frame; a 1x1 grid equals run_spectrum at the same
// single position and detuning.
inline ScanResult run_map(const ExperimentConfig& cfg, int threads = 1) {
    detail::Stopwatch clock;
    const auto beam = cfg.beam();
    const auto trap = cfg.trap();
    const auto state = cfg.state();
    const double kappa = cfg.coupling_scale();

    double detuning = cfg.detuning;
    const std::string& tr = cfg.map_transition;
    if (tr == "red_ax") detuning -= trap.frequency_of(ModeId::Axial);
    else if (tr == "blue_ax") detuning += trap.frequency_of(ModeId::Axial);
    else if (tr == "red_r1") detuning -= trap.frequency_of(ModeId::R1);
    else if (tr == "blue_r1") detuning += trap.frequency_of(ModeId::R1);
    else if (tr == "red_r2") detuning -= trap.frequency_of(ModeId::R2);
    else if (tr == "blue_r2") detuning += trap.frequency_of(ModeId::R2);
    else if (tr != "carrier")
        throw config_error("config: map.transition must be carrier|red_ax|blue_ax|red_r1|"
                           "blue_r1|red_r2|blue_r2");

    const auto xs = detail::grid_by_step(-0.5 * cfg.map_x_span, 0.5 * cfg.map_x_span,
                                         cfg.map_x_step);
    const auto ys = detail::grid_by_step(-0.5 * cfg.map_y_span, 0.5 * cfg.map_y_span,
                                         cfg.map_y_step);
    const detail::CarrierThermalSum carrier_sum(trap, state,
                                                Vec3{0.0, 0.0, beam.wavenumber()});
    const ResidualCarrierModel no_residual{};

    const std::size_t n = xs.size() * ys.size();
    std::vector<double> values(n, 0.0);
    detail::parallel_for(n, threads, [&](std::size_t idx) {
        const double x = xs[idx / ys.size()];
        const double y = ys[idx % ys.size()];
        const Vec3 position = beam.to_beam_frame(Vec3{x, y, 0.0});
        const TransitionRabi rabi =
            transition_rabi_at(beam, trap, position, cfg.delta_m, kappa);
        values[idx] = spectrum_at(beam, trap, state, cfg.tau, cfg.gamma, detuning, rabi,
                                  carrier_sum, no_residual)
                          .total;
    });

    ScanResult result;
    result.kind = "map";
    result.columns = {"x_um", "y_um", "pd"};
    result.rows.reserve(n);
    for (std::size_t idx = 0; idx < n; ++idx)
        result.rows.push_back(
            {xs[idx / ys.size()] * 1e6, ys[idx % ys.size()] * 1e6, values[idx]});
    result.metadata = scan_metadata(cfg, result.kind, clock.ms());
    return result;
}

// Residual-carrier ratio over (axial nbar) x (displacement) grids.
inline ScanResult run_residual(const ExperimentConfig& cfg, int threads = 1) {
    detail::Stopwatch clock;
    const auto beam = cfg.beam();
    if (beam.kind != BeamKind::LaguerreGaussian01)
        throw config_error("config: residual scan requires beam.kind = lg01");
    const auto trap = cfg.trap();
    const auto nbars = detail::linspace(0.0, cfg.res_nbar_max, cfg.res_nbar_steps);
    const auto disps = detail::linspace(0.0, cfg.res_disp_max, cfg.res_disp_steps);

    const std::size_t n = nbars.size() * disps.size();
    std::vector<double> values(n, 0.0);
    detail::parallel_for(n, threads, [&](std::size_t idx) {
        const double nbar = nbars[idx / disps.size()];
        const double disp = disps[idx % disps.size()];
        const ThermalState state({cfg.nbar_r1, cfg.nbar_r2, nbar});
        const auto wp = wavepacket_from(trap, state, Vec3{disp, 0.0, 0.0});
        values[idx] =
            residual_carrier_ratio(beam, beam, wp, ResidualNormalization::ModeScale);
    });

    ScanResult result;
    result.kind = "residual";
    result.columns = {"nbar_ax", "disp_nm", "ratio"};
    result.rows.reserve(n);
    for (std::size_t idx = 0; idx < n; ++idx)
        result.rows.push_back(
            {nbars[idx / disps.size()], disps[idx % disps.size()] * 1e9, values[idx]});
    result.metadata = scan_metadata(cfg, result.kind, clock.ms());
    return result;
}

// ---------------------------------------------------------------------------
// Fit dispatch

struct FitReport {
    std::string kind;
    FitResult result;
};

inline nlohmann::json fit_report_json(const ExperimentConfig& cfg, const FitReport& report) {
    nlohmann::json j;
    j["kind"] = report.kind;
    j["converged"] = report.result.converged;
    j["iterations"] = report.result.iterations;
    j["residual_norm"] = report.result.residual_norm;
    j["config_hash"] = config_hash(cfg);
    nlohmann::json params, errors;
    auto display = [&](const std::string& name, double v) -> std::pair<std::string, double> {
        if (name == "omega0" || name == "omega_peak")
            return {name + "_khz", v / constants::two_pi / 1e3};
        if (name == "gamma") return {"gamma_hz", v};
        if (name == "slope")
            return {"slope_mhz_per_sqrt_mw", v * std::sqrt(1e-3) / constants::two_pi / 1e6};
        if (name == "waist" || name == "center") return {name + "_um", v * 1e6};
        return {name, v};
    };
    for (const auto& [k, v] : report.result.parameters) {
        const auto [dk, dv] = display(k, v);
        params[dk] = dv;
    }
    for (const auto& [k, v] : report.result.errors) {
        const auto [dk, dv] = display(k, v);
        errors[dk] = dv;
    }
    j["parameters"] = params;
    j["errors"] = errors;
    return j;
}

// Dispatches to the estimation module based on fit.kind. The abscissa column
// determines the units; a position_v column is converted through the
// configured volt-to-position scale at ingestion.
inline FitReport run_fit(const ExperimentConfig& cfg, const CsvTable& table) {
    FitReport report;
    report.kind = cfg.fit_kind;
    if (cfg.fit_kind == "thermal_rabi") {
        const auto times_us = table.column("time_us");
        const auto pd = table.column("pd");
        const bool has_order = table.has_column("order");
        const bool has_weight = table.has_column("weight");
        std::vector<double> orders(times_us.size(),
                                   static_cast<double>(static_cast<int>(cfg.rabi_order)));
        if (has_order) orders = table.column("order");
        std::vector<double> weights;
        if (has_weight) weights = table.column("weight");

        std::map<int, RabiTrace> traces;
        for (std::size_t i = 0; i < times_us.size(); ++i) {
            const int order = static_cast<int>(orders[i]);
            if (order < -1 || order > 1)
                throw std::runtime_error("fit input: order column must be -1, 0, or +1");
            auto& tr = traces[order];
            tr.order = static_cast<SidebandOrder>(order);
            tr.data.abscissa.push_back(times_us[i] * 1e-6);
            tr.data.values.push_back(pd[i]);
            if (has_weight) tr.data.weights.push_back(weights[i]);
        }
        std::vector<RabiTrace> list;
        for (auto& [order, tr] : traces) list.push_back(std::move(tr));
        report.result = fit_thermal_rabi(list, cfg.fit_fixed, cfg.fit_free);
    } else if (cfg.fit_kind == "power_law") {
        Dataset data;
        for (double p : table.column("power_mw")) data.abscissa.push_back(p * 1e-3);
        for (double o : table.column("omega_khz"))
            data.values.push_back(o * constants::two_pi * 1e3);
        // Optional externally supplied per-point correction (e.g. for a
        // power-dependent waist shift), applied multiplicatively at ingestion.
        if (table.has_column("correction")) {
            const auto corr = table.column("correction");
            for (std::size_t i = 0; i < data.values.size(); ++i) data.values[i] *= corr[i];
        }
        if (table.has_column("weight")) data.weights = table.column("weight");
        report.result = fit_power_law(data);
    } else if (cfg.fit_kind == "waist_scan") {
        Dataset data;
        if (table.has_column("position_um")) {
            for (double x : table.column("position_um")) data.abscissa.push_back(x * 1e-6);
        } else if (table.has_column("position_v")) {
            if (!cfg.position_volt_scale)
                throw std::runtime_error(
                    "fit input: position_v column requires position_volt_scale_um_per_v");
            for (double v : table.column("position_v"))
                data.abscissa.push_back(v * *cfg.position_volt_scale);
        } else {
            throw std::runtime_error("fit input: need position_um or position_v column");
        }
        data.values = table.column("pd");
        if (table.has_column("weight")) data.weights = table.column("weight");
        report.result = fit_waist_scan(data, cfg.beam_kind, cfg.tau, cfg.gamma);
    } else {
        throw config_error("config: fit.kind must be thermal_rabi|power_law|waist_scan");
    }
    return report;
}

}  // namespace vortion
