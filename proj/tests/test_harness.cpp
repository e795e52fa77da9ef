#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "vortion/csv.hpp"
#include "vortion/scan.hpp"

using namespace vortion;
using Catch::Approx;

namespace {

std::string render_without_walltime(const ScanResult& result) {
    ScanResult copy = result;
    copy.metadata["walltime_ms"] = 0.0;
    std::ostringstream out;
    write_scan(out, copy);
    return out.str();
}

}  // namespace

TEST_CASE("minimal config applies documented defaults") {
    const auto cfg = parse_config("beam.kind = gaussian\nbeam.waist_um = 2.8\n");
    CHECK(cfg.beam_kind == BeamKind::Gaussian);
    CHECK(cfg.oam_charge == 0);
    CHECK(cfg.waist == Approx(2.8e-6));
    CHECK(cfg.mass_amu == 40.0);
    CHECK(cfg.freq_ax == Approx(constants::two_pi * 700e3));
    CHECK(cfg.nbar_ax == 15.0);
    CHECK(cfg.tau == Approx(150e-6));
    CHECK(cfg.delta_m == cfg.polarization);
    CHECK_FALSE(cfg.position_volt_scale.has_value());
    // The beam kind resolves the OAM default.
    const auto lg = parse_config("beam.kind = lg01\nbeam.waist_um = 3.3\n");
    CHECK(lg.oam_charge == -1);
}

TEST_CASE("config validation names the violated invariant") {
    try {
        parse_config("beam.kind = gaussian\nbeam.waist_um = -1\n");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("waist") != std::string::npos);
    }
}

TEST_CASE("unknown keys and malformed lines are rejected with location") {
    try {
        parse_config("beam.kind = gaussian\nbeam.waste_um = 2.8\n");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("beam.waste_um") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("beam.kind gaussian\n"), config_error);
    CHECK_THROWS_AS(parse_config("state.nbar = 15,7\n"), config_error);
    CHECK_THROWS_AS(parse_config("pulse.tau_us = abc\n"), config_error);
}

TEST_CASE("reference vortex config parses and is echoed in metadata") {
    const std::string text =
        "beam.kind = lg01\n"
        "beam.waist_um = 3.3\n"
        "beam.power_uw = 10\n"
        "pulse.tau_us = 150\n"
        "state.nbar = 15,7,7\n";
    const auto cfg = parse_config(text);
    CHECK(cfg.beam_kind == BeamKind::LaguerreGaussian01);
    CHECK(cfg.power == Approx(10e-6));
    CHECK(cfg.waist == Approx(3.3e-6));
    CHECK(cfg.tau == Approx(150e-6));
    CHECK(cfg.nbar_ax == 15.0);
    CHECK(cfg.nbar_r1 == 7.0);
    CHECK(cfg.resolved.at("beam.kind") == "lg01");
    CHECK(cfg.resolved.at("state.nbar") == "15,7,7");
    const auto meta = scan_metadata(cfg, "spectrum", 1.0);
    CHECK(meta["config"]["beam.power_uw"] == "10");
}

TEST_CASE("config hash ignores wall time and changes with content") {
    const auto a = parse_config("beam.kind = gaussian\nbeam.waist_um = 2.8\n");
    const auto b = parse_config("beam.kind = gaussian\nbeam.waist_um = 2.8\n");
    const auto c = parse_config("beam.kind = gaussian\nbeam.waist_um = 2.9\n");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("identical configs produce byte-identical scans modulo wall time") {
    const std::string text =
        "beam.kind = gaussian\nbeam.waist_um = 2.8\nbeam.power_uw = 0.31\n"
        "scan.start_khz = -100\nscan.stop_khz = 100\nscan.step_khz = 5\n";
    const auto r1 = run_spectrum(parse_config(text), 1);
    const auto r2 = run_spectrum(parse_config(text), 1);
    CHECK(render_without_walltime(r1) == render_without_walltime(r2));
}

TEST_CASE("scan output is independent of the worker count") {
    const std::string text =
        "beam.kind = lg01\nbeam.waist_um = 3.3\nbeam.power_uw = 10\n"
        "pulse.tau_us = 55\nstate.nbar = 0.19,7,7\nmap.transition = blue_ax\n"
        "scan.x_span_um = 0.5\nscan.y_span_um = 0.5\n";
    const auto cfg = parse_config(text);
    const auto serial = run_map(cfg, 1);
    const auto parallel = run_map(cfg, 3);
    CHECK(render_without_walltime(serial) == render_without_walltime(parallel));
}

TEST_CASE("a 1x1 map equals the spectrum at the same point") {
    const std::string common =
        "beam.kind = lg01\nbeam.waist_um = 3.3\nbeam.power_uw = 10\n"
        "pulse.tau_us = 55\nstate.nbar = 0.19,7,7\n"
        "beam.offset_x_um = -0.2\nbeam.offset_y_um = 0.1\n";
    const auto map_cfg = parse_config(common +
                                      "map.transition = blue_ax\n"
                                      "scan.x_span_um = 0\nscan.y_span_um = 0\n"
                                      "scan.x_step_nm = 32\nscan.y_step_nm = 64\n");
    const auto map = run_map(map_cfg, 1);
    REQUIRE(map.rows.size() == 1);

    const double ax_khz = map_cfg.freq_ax / constants::two_pi / 1e3;
    std::ostringstream spec_text;
    spec_text << common << "scan.start_khz = " << ax_khz << "\nscan.stop_khz = " << ax_khz
              << "\nscan.step_khz = 1\n";
    const auto spec = run_spectrum(parse_config(spec_text.str()), 1);
    REQUIRE(spec.rows.size() == 1);
    CHECK(map.rows[0][2] == Approx(spec.rows[0][1]).epsilon(1e-12));
}

TEST_CASE("scan results stay within population bounds and embed the config") {
    const auto cfg = parse_config(
        "beam.kind = gaussian\nbeam.waist_um = 2.8\nbeam.power_uw = 0.31\n"
        "scan.start_khz = -1800\nscan.stop_khz = 1800\nscan.step_khz = 10\n");
    const auto result = run_spectrum(cfg, 2);
    CHECK(result.metadata["config_hash"] == config_hash(cfg));
    CHECK(result.metadata["config"].size() > 10);
    for (const auto& row : result.rows)
        for (std::size_t c = 1; c < row.size(); ++c) {
            CHECK(row[c] >= 0.0);
            CHECK(row[c] <= 1.0);
        }
}

TEST_CASE("csv round trip") {
    ScanResult result;
    result.kind = "rabi";
    result.columns = {"time_us", "pd"};
    result.rows = {{0.0, 0.25}, {1.5, 0.75}, {3.0, 1.0}};
    result.metadata = {{"kind", "rabi"}};
    std::ostringstream out;
    write_scan(out, result);
    std::istringstream in(out.str());
    const auto table = read_csv(in);
    REQUIRE(table.columns == result.columns);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[1][1] == 0.75);
    CHECK(table.column("pd")[2] == 1.0);
}

TEST_CASE("run_rabi emits a monotone time axis with bounded populations") {
    const auto cfg = parse_config(
        "beam.kind = gaussian\nbeam.waist_um = 2.8\nbeam.power_uw = 26\n"
        "scan.start_us = 0\nscan.stop_us = 40\nscan.step_us = 0.5\n"
        "rabi.order = carrier\nrabi.mode = r1\nstate.nbar = 0.19,7,7\n");
    const auto result = run_rabi(cfg, 1);
    REQUIRE(result.rows.size() == 81);
    for (std::size_t i = 1; i < result.rows.size(); ++i)
        CHECK(result.rows[i][0] > result.rows[i - 1][0]);
    double max_pd = 0.0;
    for (const auto& row : result.rows) {
        CHECK(row[1] >= 0.0);
        CHECK(row[1] <= 1.0);
        max_pd = std::max(max_pd, row[1]);
    }
    CHECK(max_pd > 0.5);  // the carrier actually oscillates
}

TEST_CASE("run_residual grid layout and values") {
    const auto cfg = parse_config(
        "beam.kind = lg01\nbeam.waist_um = 3.3\nbeam.power_uw = 10\n"
        "state.nbar = 15,7,7\n"
        "scan.nbar_max = 15\nscan.nbar_steps = 4\nscan.disp_max_nm = 50\nscan.disp_steps = 3\n");
    const auto result = run_residual(cfg, 2);
    REQUIRE(result.rows.size() == 12);
    // Last cell is (nbar = 15, disp = 50 nm): the reference configuration.
    const auto& last = result.rows.back();
    CHECK(last[0] == Approx(15.0));
    CHECK(last[1] == Approx(50.0));
    CHECK(last[2] >= 0.020);
    CHECK(last[2] <= 0.030);
    // Gaussian beams have no vortex singularity to probe.
    const auto bad = parse_config("beam.kind = gaussian\nbeam.waist_um = 2.8\n");
    CHECK_THROWS_AS(run_residual(bad, 1), config_error);
}

TEST_CASE("run_fit dispatches on fit.kind and converts volts at ingestion") {
    // Power law through the CSV path.
    {
        const auto cfg = parse_config("beam.kind = gaussian\nbeam.waist_um = 2.8\n"
                                      "fit.kind = power_law\n");
        CsvTable table;
        table.columns = {"power_mw", "omega_khz"};
        for (int i = 1; i <= 8; ++i) {
            const double p_mw = 0.25 * i;
            table.rows.push_back({p_mw, 704.0 * std::sqrt(p_mw)});
        }
        const auto report = run_fit(cfg, table);
        REQUIRE(report.result.converged);
        const double slope_si = report.result.parameters.at("slope");
        CHECK(slope_si * std::sqrt(1e-3) / constants::two_pi / 1e6 == Approx(0.704).epsilon(1e-6));
        const auto j = fit_report_json(cfg, report);
        CHECK(j["parameters"]["slope_mhz_per_sqrt_mw"].get<double>() ==
              Approx(0.704).epsilon(1e-6));
    }
    // Waist scan with a volt abscissa.
    {
        const auto cfg = parse_config(
            "beam.kind = gaussian\nbeam.waist_um = 2.8\npulse.tau_us = 200\n"
            "fit.kind = waist_scan\nposition_volt_scale_um_per_v = 2.20\n");
        const double w0 = 2.8e-6, tau = 200e-6, omega_pk = 0.7 * constants::pi / tau;
        CsvTable table;
        table.columns = {"position_v", "pd"};
        for (int i = 0; i <= 60; ++i) {
            const double x = -5e-6 + 10e-6 * i / 60.0;
            const double model =
                detuned_excitation(omega_pk * std::exp(-x * x / (w0 * w0)), 0.0, tau, 0.0);
            table.rows.push_back({x / 2.20e-6, model});
        }
        const auto report = run_fit(cfg, table);
        REQUIRE(report.result.converged);
        CHECK(std::abs(report.result.parameters.at("waist") / w0 - 1.0) < 0.01);
    }
    // Unknown kind is a configuration error.
    {
        const auto cfg = parse_config("beam.kind = gaussian\nbeam.waist_um = 2.8\n"
                                      "fit.kind = quadratic\n");
        CsvTable table;
        table.columns = {"power_mw", "omega_khz"};
        table.rows.push_back({1.0, 704.0});
        CHECK_THROWS_AS(run_fit(cfg, table), config_error);
    }
}
