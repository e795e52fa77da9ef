// vortion: simulator and estimation toolkit for trapped-ion spectroscopy
// with Gaussian and vortex (LG01) probe beams.
//
// Subcommands: spectrum | rabi | map | residual | fit | ldp | selftest
// Exit codes: 0 success, 1 validation error, 2 numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vortion/csv.hpp"
#include "vortion/ldp_table.hpp"
#include "vortion/scan.hpp"
#include "vortion/version.hpp"

namespace {

vortion::ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return vortion::parse_config("");
    std::ifstream in(path);
    if (!in) throw vortion::config_error("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return vortion::parse_config(text.str());
}

void emit(const vortion::ScanResult& result, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        vortion::write_scan(std::cout, result);
    } else {
        vortion::write_scan_file(out_path, result);
        std::cerr << result.kind << ": wrote " << result.rows.size() << " rows to " << out_path
                  << "\n";
    }
}

void print_ldp(const vortion::ExperimentConfig& cfg) {
    const auto trap = cfg.trap();
    const double vortex_waist =
        cfg.beam_kind == vortion::BeamKind::LaguerreGaussian01 ? cfg.waist : 3.34e-6;
    const auto table = vortion::lamb_dicke_table(trap, cfg.wavelength, vortex_waist);
    std::printf("# Lamb-Dicke parameters (lambda = %.6g nm, vortex waist = %.6g um)\n",
                cfg.wavelength * 1e9, vortex_waist * 1e6);
    std::printf("%-10s %-22s %-s\n", "mode", "gaussian_eta_parallel", "vortex_eta_perp");
    const struct {
        const char* name;
        vortion::ModeId mode;
    } rows[] = {{"axial", vortion::ModeId::Axial},
                {"radial_r1", vortion::ModeId::R1},
                {"radial_r2", vortion::ModeId::R2}};
    for (const auto& row : rows) {
        const int i = static_cast<int>(row.mode);
        std::printf("%-10s %-22.6g %-.6g\n", row.name, table.eta_parallel[i],
                    table.eta_perp[i]);
    }
    std::printf("# sideband-cooling geometry (45 deg to axial): eta_parallel = %.6g\n",
                vortion::lamb_dicke_cooling_45deg(trap, cfg.wavelength));
}

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<Check> run_selftest() {
    using namespace vortion;
    std::vector<Check> checks;
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        checks.push_back({name, pass, detail});
    };
    char buf[256];

    const auto trap = TrapModes::with_mass_amu(40.0, constants::two_pi * 1.70e6,
                                               constants::two_pi * 2.05e6,
                                               constants::two_pi * 700e3);
    const double lambda = 729e-9;

    // Reference Lamb-Dicke table, each entry within +-1 in its last digit.
    const auto table = lamb_dicke_table(trap, lambda, 3.34e-6);
    {
        const int ax = static_cast<int>(ModeId::Axial);
        const int r1 = static_cast<int>(ModeId::R1);
        const int r2 = static_cast<int>(ModeId::R2);
        const struct {
            double value, expected, tol;
        } entries[] = {
            {table.eta_parallel[ax], 0.0, 0.05},   {table.eta_parallel[r1], 0.053, 0.001},
            {table.eta_parallel[r2], 0.048, 0.001}, {table.eta_perp[ax], 0.0057, 0.0001},
            {table.eta_perp[r1], 0.0026, 0.0001},  {table.eta_perp[r2], 0.0024, 0.0001},
        };
        bool ok = true;
        std::string detail;
        for (const auto& e : entries) {
            if (std::abs(e.value - e.expected) > e.tol) ok = false;
            std::snprintf(buf, sizeof buf, "%.4g ", e.value);
            detail += buf;
        }
        add("lamb-dicke table (6 entries)", ok, detail);
    }
    {
        const BeamField vortex = BeamField::lg01(3.34e-6, 1e-6, lambda);
        const double eta = lamb_dicke_perp(trap, ModeId::Axial, vortex, 1.0, 0.0);
        std::snprintf(buf, sizeof buf, "eta_perp(ax) = %.6g", eta);
        add("transverse Lamb-Dicke golden value", eta >= 0.00558 && eta <= 0.00582, buf);
    }
    {
        const double eta = lamb_dicke_cooling_45deg(trap, lambda);
        std::snprintf(buf, sizeof buf, "eta_parallel(45deg) = %.6g", eta);
        add("sideband-cooling Lamb-Dicke", std::abs(eta - 0.0819) <= 2e-4, buf);
    }
    {
        const ThermalState state({7.0, 7.0, 15.0});
        const auto wp = wavepacket_from(trap, state);
        const double sig_ax = wp.sigma[static_cast<int>(ModeId::Axial)];
        const auto cov = wp.transverse_covariance();
        const double sig_rad = std::sqrt(cov[1]);  // beam-frame y spread
        std::snprintf(buf, sizeof buf, "sigma_ax = %.3g nm, sigma_rad = %.3g nm", sig_ax * 1e9,
                      sig_rad * 1e9);
        add("thermal wave-packet sizes",
            sig_ax >= 70e-9 && sig_ax <= 80e-9 && sig_rad >= 27e-9 && sig_rad <= 33e-9, buf);
    }
    {
        const BeamField vortex = BeamField::lg01(3.3e-6, 10e-6, lambda);
        const BeamField reference = BeamField::gaussian(2.8e-6, 0.31e-6, lambda);
        const ThermalState state({7.0, 7.0, 15.0});
        const auto wp = wavepacket_from(trap, state, Vec3{50e-9, 0.0, 0.0});
        const double ratio = residual_carrier_ratio(vortex, reference, wp);
        std::snprintf(buf, sizeof buf, "ratio = %.4g", ratio);
        add("residual carrier ratio", ratio >= 0.020 && ratio <= 0.030, buf);
    }
    return checks;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trapped-ion sideband spectroscopy with structured light"};
    app.set_version_flag("--version", vortion::version_string);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_path, input_path;
    int threads = 1;
    unsigned long long seed = 0;
    app.add_option("--config", config_path, "experiment config file");
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--seed", seed, "RNG seed for synthetic-data helpers (recorded in metadata)");
    app.add_option("--threads", threads, "worker threads for scan grids")
        ->check(CLI::PositiveNumber);

    auto* cmd_spectrum = app.add_subcommand("spectrum", "resolved-sideband frequency scan");
    auto* cmd_rabi = app.add_subcommand("rabi", "Rabi time trace");
    auto* cmd_map = app.add_subcommand("map", "2D spatial excitation map");
    auto* cmd_residual = app.add_subcommand("residual", "residual-carrier map over nbar and displacement");
    auto* cmd_fit = app.add_subcommand("fit", "least-squares fit of an input CSV");
    cmd_fit->add_option("--in", input_path, "input CSV file")->required();
    auto* cmd_ldp = app.add_subcommand("ldp", "print the Lamb-Dicke parameter table");
    auto* cmd_selftest = app.add_subcommand("selftest", "run golden-value checks");

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = load_config(config_path);
        auto with_seed = [&](vortion::ScanResult result) {
            result.metadata["seed"] = seed;
            return result;
        };
        if (cmd_spectrum->parsed()) {
            emit(with_seed(vortion::run_spectrum(cfg, threads)), out_path);
        } else if (cmd_rabi->parsed()) {
            emit(with_seed(vortion::run_rabi(cfg, threads)), out_path);
        } else if (cmd_map->parsed()) {
            emit(with_seed(vortion::run_map(cfg, threads)), out_path);
        } else if (cmd_residual->parsed()) {
            emit(with_seed(vortion::run_residual(cfg, threads)), out_path);
        } else if (cmd_fit->parsed()) {
            const auto table = vortion::read_csv_file(input_path);
            const auto report = vortion::run_fit(cfg, table);
            const auto j = vortion::fit_report_json(cfg, report);
            if (out_path.empty() || out_path == "-") {
                std::cout << j.dump(2) << "\n";
            } else {
                std::ofstream out(out_path, std::ios::binary);
                if (!out) throw std::runtime_error("cannot open output file: " + out_path);
                out << j.dump(2) << "\n";
            }
            if (!report.result.converged) {
                std::cerr << "fit: did not converge\n";
                return 2;
            }
        } else if (cmd_ldp->parsed()) {
            print_ldp(cfg);
        } else if (cmd_selftest->parsed()) {
            bool all = true;
            for (const auto& c : run_selftest()) {
                std::printf("[%s] %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                            c.detail.c_str());
                all = all && c.pass;
            }
            if (!all) return 1;
        }
    } catch (const vortion::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
