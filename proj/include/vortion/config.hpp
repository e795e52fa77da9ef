#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortion/beam.hpp"
#include "vortion/dynamics.hpp"
#include "vortion/thermal.hpp"
#include "vortion/trap.hpp"

// Flat `section.key = value` experiment configuration. Keys carry SI suffixes
// (_um, _us, _uw, _khz, ...) to make units explicit; `#` starts a comment.
// Unknown keys are rejected. All values resolve to SI internally.

namespace vortion {

class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    // beam
    BeamKind beam_kind = BeamKind::Gaussian;
    int oam_charge = 0;  // resolved: 0 for gaussian, else +-1
    int polarization = -1;
    double waist = 2.8e-6;        // m
    double power = 0.31e-6;       // W
    double wavelength = 729e-9;   // m
    Vec3 beam_offset{};           // m

    // trap
    double mass_amu = 40.0;
    double freq_r1 = constants::two_pi * 1.70e6;  // rad/s
    double freq_r2 = constants::two_pi * 2.05e6;
    double freq_ax = constants::two_pi * 700e3;

    // state: mean phonon numbers (axial, R1, R2 as written in configs)
    double nbar_ax = 15.0, nbar_r1 = 7.0, nbar_r2 = 7.0;

    // pulse
    double tau = 150e-6;      // s
    double detuning = 0.0;    // rad/s
    double gamma = 0.0;       // 1/s

    int delta_m = -1;

    // calibration
    double cal_slope = constants::two_pi * 0.704e6 / std::sqrt(1e-3);  // rad/s per sqrt(W)
    double cal_waist = 2.8e-6;                                         // m

    // frequency scan (spectrum)
    double scan_start = -constants::two_pi * 2.2e6;  // rad/s
    double scan_stop = constants::two_pi * 2.2e6;
    double scan_step = constants::two_pi * 1e3;

    // time scan (rabi)
    double rabi_start = 0.0, rabi_stop = 500e-6, rabi_step = 1e-6;  // s
    SidebandOrder rabi_order = SidebandOrder::Carrier;
    ModeId rabi_mode = ModeId::Axial;

    // spatial scan (map)
    double map_x_span = 2e-6, map_y_span = 2e-6;    // m, full width
    double map_x_step = 32e-9, map_y_step = 64e-9;  // m
    std::string map_transition = "carrier";         // carrier|red_ax|blue_ax|red_r1|...

    // residual scan grids
    double res_nbar_max = 30.0;
    int res_nbar_steps = 16;
    double res_disp_max = 200e-9;  // m
    int res_disp_steps = 21;

    // residual-carrier correction for vortex spectra
    bool residual_enabled = false;
    double residual_displacement = 50e-9;       // m, along beam-frame x
    double residual_reference_power = 0.31e-6;  // W
    double residual_reference_waist = 2.8e-6;   // m
    ResidualNormalization residual_norm = ResidualNormalization::ModeScale;

    // fit run
    std::string fit_kind;                   // thermal_rabi|power_law|waist_scan
    std::vector<std::string> fit_free;      // for thermal_rabi
    std::map<std::string, double> fit_fixed;

    std::optional<double> position_volt_scale;  // m/V

    // Echo of every resolved key for self-describing outputs.
    std::map<std::string, std::string> resolved;

    BeamField beam() const {
        return BeamField(beam_kind, oam_charge, polarization, waist, power, wavelength,
                         beam_offset);
    }
    TrapModes trap() const { return TrapModes::with_mass_amu(mass_amu, freq_r1, freq_r2, freq_ax); }
    ThermalState state() const { return ThermalState({nbar_r1, nbar_r2, nbar_ax}); }
    RabiCalibration calibration() const { return RabiCalibration(cal_slope); }
    double coupling_scale() const {
        return rabi_coupling_scale(calibration(), wavelength, cal_waist);
    }
    BeamField residual_reference_beam() const {
        return BeamField::gaussian(residual_reference_waist, residual_reference_power,
                                   wavelength, polarization);
    }

    std::string canonical_text() const {
        std::string out;
        for (const auto& [k, v] : resolved) out += k + " = " + v + "\n";
        return out;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "beam.kind", "beam.oam_charge", "beam.polarization", "beam.waist_um", "beam.power_uw",
        "beam.wavelength_nm", "beam.offset_x_um", "beam.offset_y_um", "beam.offset_z_um",
        "trap.mass_amu", "trap.freq_r1_mhz", "trap.freq_r2_mhz", "trap.freq_ax_khz",
        "state.nbar",
        "pulse.tau_us", "pulse.detuning_khz", "pulse.gamma_hz",
        "channel.delta_m",
        "calibration.slope_mhz_per_sqrt_mw", "calibration.waist_um",
        "scan.kind", "scan.start_khz", "scan.stop_khz", "scan.step_khz",
        "scan.start_us", "scan.stop_us", "scan.step_us",
        "scan.x_span_um", "scan.y_span_um", "scan.x_step_nm", "scan.y_step_nm",
        "scan.nbar_max", "scan.nbar_steps", "scan.disp_max_nm", "scan.disp_steps",
        "rabi.order", "rabi.mode",
        "map.transition",
        "residual.enabled", "residual.displacement_nm", "residual.reference_power_uw",
        "residual.reference_waist_um", "residual.normalization",
        "fit.kind", "fit.free", "fit.nbar", "fit.omega0_khz", "fit.eta", "fit.gamma_hz",
        "position_volt_scale_um_per_v",
    };
    return keys;
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw config_error("config: key '" + key + "': not a number: '" + value + "'");
    }
}

inline int parse_int(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (v != std::floor(v)) throw config_error("config: key '" + key + "': expected integer");
    return static_cast<int>(v);
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw config_error("config: key '" + key + "': expected true/false");
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: line " + std::to_string(line_no) +
                               ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("config: line " + std::to_string(line_no) +
                               ": empty key or value");
        if (!detail::known_keys().count(key))
            throw config_error("config: line " + std::to_string(line_no) + ": unknown key '" +
                               key + "'");
        kv[key] = value;
    }

    ExperimentConfig cfg;
    bool oam_set = false;
    auto take = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };

    if (auto v = take("beam.kind")) {
        if (*v == "gaussian") cfg.beam_kind = BeamKind::Gaussian;
        else if (*v == "lg01") cfg.beam_kind = BeamKind::LaguerreGaussian01;
        else throw config_error("config: beam.kind must be 'gaussian' or 'lg01'");
    }
    if (auto v = take("beam.oam_charge")) {
        cfg.oam_charge = detail::parse_int("beam.oam_charge", *v);
        oam_set = true;
    }
    if (!oam_set) cfg.oam_charge = (cfg.beam_kind == BeamKind::Gaussian) ? 0 : -1;
    if (auto v = take("beam.polarization"))
        cfg.polarization = detail::parse_int("beam.polarization", *v);
    if (auto v = take("beam.waist_um")) cfg.waist = detail::parse_double("beam.waist_um", *v) * 1e-6;
    if (auto v = take("beam.power_uw")) cfg.power = detail::parse_double("beam.power_uw", *v) * 1e-6;
    if (auto v = take("beam.wavelength_nm"))
        cfg.wavelength = detail::parse_double("beam.wavelength_nm", *v) * 1e-9;
    if (auto v = take("beam.offset_x_um"))
        cfg.beam_offset.x = detail::parse_double("beam.offset_x_um", *v) * 1e-6;
    if (auto v = take("beam.offset_y_um"))
        cfg.beam_offset.y = detail::parse_double("beam.offset_y_um", *v) * 1e-6;
    if (auto v = take("beam.offset_z_um"))
        cfg.beam_offset.z = detail::parse_double("beam.offset_z_um", *v) * 1e-6;

    if (auto v = take("trap.mass_amu")) cfg.mass_amu = detail::parse_double("trap.mass_amu", *v);
    if (auto v = take("trap.freq_r1_mhz"))
        cfg.freq_r1 = constants::two_pi * detail::parse_double("trap.freq_r1_mhz", *v) * 1e6;
    if (auto v = take("trap.freq_r2_mhz"))
        cfg.freq_r2 = constants::two_pi * detail::parse_double("trap.freq_r2_mhz", *v) * 1e6;
    if (auto v = take("trap.freq_ax_khz"))
        cfg.freq_ax = constants::two_pi * detail::parse_double("trap.freq_ax_khz", *v) * 1e3;

    if (auto v = take("state.nbar")) {
        std::vector<double> parts;
        std::string token;
        std::istringstream ts(*v);
        while (std::getline(ts, token, ','))
            parts.push_back(detail::parse_double("state.nbar", detail::trim(token)));
        if (parts.size() != 3)
            throw config_error("config: state.nbar expects three values: ax,r1,r2");
        cfg.nbar_ax = parts[0];
        cfg.nbar_r1 = parts[1];
        cfg.nbar_r2 = parts[2];
    }

    if (auto v = take("pulse.tau_us")) cfg.tau = detail::parse_double("pulse.tau_us", *v) * 1e-6;
    if (auto v = take("pulse.detuning_khz"))
        cfg.detuning = constants::two_pi * detail::parse_double("pulse.detuning_khz", *v) * 1e3;
    if (auto v = take("pulse.gamma_hz")) cfg.gamma = detail::parse_double("pulse.gamma_hz", *v);

    if (auto v = take("channel.delta_m")) cfg.delta_m = detail::parse_int("channel.delta_m", *v);
    else cfg.delta_m = cfg.polarization;

    if (auto v = take("calibration.slope_mhz_per_sqrt_mw"))
        cfg.cal_slope = constants::two_pi *
                        detail::parse_double("calibration.slope_mhz_per_sqrt_mw", *v) * 1e6 /
                        std::sqrt(1e-3);
    if (auto v = take("calibration.waist_um"))
        cfg.cal_waist = detail::parse_double("calibration.waist_um", *v) * 1e-6;

    if (auto v = take("scan.start_khz"))
        cfg.scan_start = constants::two_pi * detail::parse_double("scan.start_khz", *v) * 1e3;
    if (auto v = take("scan.stop_khz"))
        cfg.scan_stop = constants::two_pi * detail::parse_double("scan.stop_khz", *v) * 1e3;
    if (auto v = take("scan.step_khz"))
        cfg.scan_step = constants::two_pi * detail::parse_double("scan.step_khz", *v) * 1e3;
    if (auto v = take("scan.start_us"))
        cfg.rabi_start = detail::parse_double("scan.start_us", *v) * 1e-6;
    if (auto v = take("scan.stop_us")) cfg.rabi_stop = detail::parse_double("scan.stop_us", *v) * 1e-6;
    if (auto v = take("scan.step_us")) cfg.rabi_step = detail::parse_double("scan.step_us", *v) * 1e-6;
    if (auto v = take("scan.x_span_um"))
        cfg.map_x_span = detail::parse_double("scan.x_span_um", *v) * 1e-6;
    if (auto v = take("scan.y_span_um"))
        cfg.map_y_span = detail::parse_double("scan.y_span_um", *v) * 1e-6;
    if (auto v = take("scan.x_step_nm"))
        cfg.map_x_step = detail::parse_double("scan.x_step_nm", *v) * 1e-9;
    if (auto v = take("scan.y_step_nm"))
        cfg.map_y_step = detail::parse_double("scan.y_step_nm", *v) * 1e-9;
    if (auto v = take("scan.nbar_max")) cfg.res_nbar_max = detail::parse_double("scan.nbar_max", *v);
    if (auto v = take("scan.nbar_steps")) cfg.res_nbar_steps = detail::parse_int("scan.nbar_steps", *v);
    if (auto v = take("scan.disp_max_nm"))
        cfg.res_disp_max = detail::parse_double("scan.disp_max_nm", *v) * 1e-9;
    if (auto v = take("scan.disp_steps")) cfg.res_disp_steps = detail::parse_int("scan.disp_steps", *v);
    take("scan.kind");  // informational; the CLI subcommand selects the driver

    if (auto v = take("rabi.order")) {
        if (*v == "carrier") cfg.rabi_order = SidebandOrder::Carrier;
        else if (*v == "red") cfg.rabi_order = SidebandOrder::Red;
        else if (*v == "blue") cfg.rabi_order = SidebandOrder::Blue;
        else throw config_error("config: rabi.order must be carrier|red|blue");
    }
    if (auto v = take("rabi.mode")) {
        if (*v == "ax") cfg.rabi_mode = ModeId::Axial;
        else if (*v == "r1") cfg.rabi_mode = ModeId::R1;
        else if (*v == "r2") cfg.rabi_mode = ModeId::R2;
        else throw config_error("config: rabi.mode must be ax|r1|r2");
    }
    if (auto v = take("map.transition")) cfg.map_transition = *v;

    if (auto v = take("residual.enabled"))
        cfg.residual_enabled = detail::parse_bool("residual.enabled", *v);
    if (auto v = take("residual.displacement_nm"))
        cfg.residual_displacement = detail::parse_double("residual.displacement_nm", *v) * 1e-9;
    if (auto v = take("residual.reference_power_uw"))
        cfg.residual_reference_power =
            detail::parse_double("residual.reference_power_uw", *v) * 1e-6;
    if (auto v = take("residual.reference_waist_um"))
        cfg.residual_reference_waist =
            detail::parse_double("residual.reference_waist_um", *v) * 1e-6;
    if (auto v = take("residual.normalization")) {
        if (*v == "mode_scale") cfg.residual_norm = ResidualNormalization::ModeScale;
        else if (*v == "equal_power") cfg.residual_norm = ResidualNormalization::EqualPower;
        else if (*v == "as_measured") cfg.residual_norm = ResidualNormalization::AsMeasured;
        else throw config_error(
            "config: residual.normalization must be mode_scale|equal_power|as_measured");
    }

    if (auto v = take("fit.kind")) cfg.fit_kind = *v;
    if (auto v = take("fit.free")) {
        std::string token;
        std::istringstream ts(*v);
        while (std::getline(ts, token, ',')) {
            token = detail::trim(token);
            if (!token.empty()) cfg.fit_free.push_back(token);
        }
    }
    if (auto v = take("fit.nbar")) cfg.fit_fixed["nbar"] = detail::parse_double("fit.nbar", *v);
    if (auto v = take("fit.omega0_khz"))
        cfg.fit_fixed["omega0"] =
            constants::two_pi * detail::parse_double("fit.omega0_khz", *v) * 1e3;
    if (auto v = take("fit.eta")) cfg.fit_fixed["eta"] = detail::parse_double("fit.eta", *v);
    if (auto v = take("fit.gamma_hz"))
        cfg.fit_fixed["gamma"] = detail::parse_double("fit.gamma_hz", *v);

    if (auto v = take("position_volt_scale_um_per_v"))
        cfg.position_volt_scale =
            detail::parse_double("position_volt_scale_um_per_v", *v) * 1e-6;

    // Cross-checks beyond the type constructors.
    if (cfg.delta_m < -2 || cfg.delta_m > 2)
        throw config_error("config: channel.delta_m must be in [-2, 2]");
    if (!(cfg.scan_step > 0.0) || !(cfg.rabi_step > 0.0) || !(cfg.map_x_step > 0.0) ||
        !(cfg.map_y_step > 0.0))
        throw config_error("config: scan steps must be > 0");
    if (cfg.scan_stop < cfg.scan_start || cfg.rabi_stop < cfg.rabi_start)
        throw config_error("config: scan range must be non-empty and monotone");
    if (cfg.res_nbar_steps < 1 || cfg.res_disp_steps < 1)
        throw config_error("config: residual grid needs at least one step");

    // Constructing the domain objects validates their invariants (waist > 0,
    // frequencies > 0, nbar >= 0, ...) with the invariant named in the message.
    try {
        (void)cfg.beam();
        (void)cfg.trap();
        (void)cfg.state();
        (void)cfg.calibration();
        (void)PulseSpec(cfg.tau, cfg.detuning, 0.0, cfg.gamma);
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("config: ") + e.what());
    }

    // Echo resolved values.
    auto put = [&](const std::string& k, double v) {
        std::ostringstream os;
        os.precision(12);
        os << v;
        cfg.resolved[k] = os.str();
    };
    cfg.resolved["beam.kind"] = cfg.beam_kind == BeamKind::Gaussian ? "gaussian" : "lg01";
    put("beam.oam_charge", cfg.oam_charge);
    put("beam.polarization", cfg.polarization);
    put("beam.waist_um", cfg.waist * 1e6);
    put("beam.power_uw", cfg.power * 1e6);
    put("beam.wavelength_nm", cfg.wavelength * 1e9);
    put("beam.offset_x_um", cfg.beam_offset.x * 1e6);
    put("beam.offset_y_um", cfg.beam_offset.y * 1e6);
    put("beam.offset_z_um", cfg.beam_offset.z * 1e6);
    put("trap.mass_amu", cfg.mass_amu);
    put("trap.freq_r1_mhz", cfg.freq_r1 / constants::two_pi / 1e6);
    put("trap.freq_r2_mhz", cfg.freq_r2 / constants::two_pi / 1e6);
    put("trap.freq_ax_khz", cfg.freq_ax / constants::two_pi / 1e3);
    {
        std::ostringstream os;
        os.precision(12);
        os << cfg.nbar_ax << "," << cfg.nbar_r1 << "," << cfg.nbar_r2;
        cfg.resolved["state.nbar"] = os.str();
    }
    put("pulse.tau_us", cfg.tau * 1e6);
    put("pulse.detuning_khz", cfg.detuning / constants::two_pi / 1e3);
    put("pulse.gamma_hz", cfg.gamma);
    put("channel.delta_m", cfg.delta_m);
    put("calibration.slope_mhz_per_sqrt_mw",
        cfg.cal_slope * std::sqrt(1e-3) / constants::two_pi / 1e6);
    put("calibration.waist_um", cfg.cal_waist * 1e6);
    put("scan.start_khz", cfg.scan_start / constants::two_pi / 1e3);
    put("scan.stop_khz", cfg.scan_stop / constants::two_pi / 1e3);
    put("scan.step_khz", cfg.scan_step / constants::two_pi / 1e3);
    put("scan.start_us", cfg.rabi_start * 1e6);
    put("scan.stop_us", cfg.rabi_stop * 1e6);
    put("scan.step_us", cfg.rabi_step * 1e6);
    put("scan.x_span_um", cfg.map_x_span * 1e6);
    put("scan.y_span_um", cfg.map_y_span * 1e6);
    put("scan.x_step_nm", cfg.map_x_step * 1e9);
    put("scan.y_step_nm", cfg.map_y_step * 1e9);
    put("scan.nbar_max", cfg.res_nbar_max);
    put("scan.nbar_steps", cfg.res_nbar_steps);
    put("scan.disp_max_nm", cfg.res_disp_max * 1e9);
    put("scan.disp_steps", cfg.res_disp_steps);
    cfg.resolved["rabi.order"] = cfg.rabi_order == SidebandOrder::Carrier
                                     ? "carrier"
                                     : (cfg.rabi_order == SidebandOrder::Red ? "red" : "blue");
    cfg.resolved["rabi.mode"] = cfg.rabi_mode == ModeId::Axial
                                    ? "ax"
                                    : (cfg.rabi_mode == ModeId::R1 ? "r1" : "r2");
    cfg.resolved["map.transition"] = cfg.map_transition;
    cfg.resolved["residual.enabled"] = cfg.residual_enabled ? "true" : "false";
    put("residual.displacement_nm", cfg.residual_displacement * 1e9);
    put("residual.reference_power_uw", cfg.residual_reference_power * 1e6);
    put("residual.reference_waist_um", cfg.residual_reference_waist * 1e6);
    cfg.resolved["residual.normalization"] =
        cfg.residual_norm == ResidualNormalization::ModeScale
            ? "mode_scale"
            : (cfg.residual_norm == ResidualNormalization::EqualPower ? "equal_power"
                                                                      : "as_measured");
    if (!cfg.fit_kind.empty()) cfg.resolved["fit.kind"] = cfg.fit_kind;
    if (cfg.position_volt_scale)
        put("position_volt_scale_um_per_v", *cfg.position_volt_scale * 1e6);

    return cfg;
}

// FNV-1a over the canonical resolved-key serialization; wall time never
// enters, so identical configs hash identically across runs.
inline std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = cfg.canonical_text();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace vortion
