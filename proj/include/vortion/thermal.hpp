#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vortion/beam.hpp"
#include "vortion/dynamics.hpp"
#include "vortion/trap.hpp"

// Thermal wave-packet averaging over the beam profile. The thermal position
// density is a product of Gaussians along the trap eigendirections with
// sigma_i = x0_i sqrt(2 nbar_i + 1); the beam profile is z-independent near
// focus, so intensity averages reduce to 2D quadrature over the transverse
// marginal of that density.

namespace vortion {

struct WavePacket {
    Vec3 displacement{};               // center offset from the beam axis, m
    std::array<double, 3> sigma{};     // per-mode position std, m (ModeId order)
    std::array<Vec3, 3> axes{};        // mode eigendirections, beam frame

    // Transverse (x,y) covariance of the position density.
    std::array<double, 3> transverse_covariance() const {  // {cxx, cyy, cxy}
        double cxx = 0.0, cyy = 0.0, cxy = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double s2 = sigma[i] * sigma[i];
            cxx += s2 * axes[i].x * axes[i].x;
            cyy += s2 * axes[i].y * axes[i].y;
            cxy += s2 * axes[i].x * axes[i].y;
        }
        return {cxx, cyy, cxy};
    }
};

inline WavePacket wavepacket_from(const TrapModes& trap, const ThermalState& state,
                                  const Vec3& displacement = {}) {
    WavePacket wp;
    wp.displacement = displacement;
    for (ModeId m : all_modes) {
        const int i = static_cast<int>(m);
        wp.sigma[i] = ground_state_size(trap, m) * std::sqrt(2.0 * state.nbar_of(m) + 1.0);
        wp.axes[i] = trap.axis_of(m);
    }
    return wp;
}

namespace detail {

struct TransverseGaussian {
    double cx = 0.0, cy = 0.0;   // center
    Vec3 a1{}, a2{};             // principal axes (z = 0)
    double s1 = 0.0, s2 = 0.0;   // principal stds
};

inline TransverseGaussian transverse_marginal(const WavePacket& wp) {
    const auto cov = wp.transverse_covariance();
    const double cxx = cov[0], cyy = cov[1], cxy = cov[2];
    TransverseGaussian g;
    g.cx = wp.displacement.x;
    g.cy = wp.displacement.y;
    const double tr = cxx + cyy;
    const double disc = std::sqrt(std::max(0.0, 0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy));
    const double l1 = 0.5 * tr + disc;
    const double l2 = 0.5 * tr - disc;
    if (std::abs(cxy) < 1e-300) {
        g.a1 = {1.0, 0.0, 0.0};
        g.a2 = {0.0, 1.0, 0.0};
        g.s1 = std::sqrt(std::max(0.0, cxx));
        g.s2 = std::sqrt(std::max(0.0, cyy));
    } else {
        const double vx = l1 - cyy, vy = cxy;
        const double vn = std::sqrt(vx * vx + vy * vy);
        g.a1 = {vx / vn, vy / vn, 0.0};
        g.a2 = {-g.a1.y, g.a1.x, 0.0};
        g.s1 = std::sqrt(std::max(0.0, l1));
        g.s2 = std::sqrt(std::max(0.0, l2));
    }
    return g;
}

inline double field_intensity(const BeamField& beam, double x, double y) {
    const auto e = field_amplitude(beam, Vec3{x, y, 0.0});
    return std::norm(e[0]) + std::norm(e[1]);
}

// Composite Simpson quadrature of rho * |E|^2 on a fixed tensor grid spanning
// +-span sigma per principal axis.
inline double intensity_on_grid(const BeamField& beam, const TransverseGaussian& g, int n,
                                double span) {
    const double h1 = 2.0 * span * g.s1 / n;
    const double h2 = 2.0 * span * g.s2 / n;
    const double norm1 = 1.0 / (std::sqrt(2.0 * constants::pi) * g.s1);
    const double norm2 = 1.0 / (std::sqrt(2.0 * constants::pi) * g.s2);
    auto simpson_w = [n](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0); };
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double u = -span * g.s1 + i * h1;
        const double wu = simpson_w(i) * norm1 * std::exp(-0.5 * u * u / (g.s1 * g.s1));
        double row = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double v = -span * g.s2 + j * h2;
            const double wv = simpson_w(j) * norm2 * std::exp(-0.5 * v * v / (g.s2 * g.s2));
            const double x = g.cx + u * g.a1.x + v * g.a2.x;
            const double y = g.cy + u * g.a1.y + v * g.a2.y;
            row += wv * field_intensity(beam, x, y);
        }
        sum += wu * row;
    }
    return sum * h1 * h2 / 9.0;
}

}  // namespace detail

class quadrature_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Wave-packet-averaged field intensity <|E|^2>, V^2/m^2. The tensor grid is
// refined (doubled per axis) until successive values agree to rel_tol.
inline double effective_intensity(const BeamField& beam, const WavePacket& wp,
                                  double rel_tol = 1e-4) {
    auto g = detail::transverse_marginal(wp);
    // Point-like directions: below ~1 pm the density is a delta on the scale
    // of any optical profile.
    const double point_scale = 1e-12;
    if (g.s1 < point_scale && g.s2 < point_scale)
        return detail::field_intensity(beam, g.cx, g.cy);
    g.s1 = std::max(g.s1, point_scale);
    g.s2 = std::max(g.s2, point_scale);

    // +-5 sigma covers the density to ~1e-6 per axis; widen when a tighter
    // tolerance is requested.
    const double span = rel_tol >= 1e-5 ? 5.0 : 7.0;
    double prev = detail::intensity_on_grid(beam, g, 32, span);
    for (int n = 64; n <= 4096; n *= 2) {
        const double cur = detail::intensity_on_grid(beam, g, n, span);
        const double scale = std::max(std::abs(cur), std::abs(prev));
        if (scale == 0.0 || std::abs(cur - prev) <= rel_tol * scale) return cur;
        prev = cur;
    }
    throw quadrature_error("effective_intensity: quadrature failed to stabilize");
}

// How the residual carrier strength is normalized.
//   ModeScale:  against the vortex mode's own gradient-scale field
//               sqrt(2) E0_V = w0 |d|E|/dr| on axis; to leading order the
//               ratio is the rms transverse excursion in waist units. This is
//               the scale on which the measured residual is quoted.
//   EqualPower: against the Gaussian reference evaluated at the vortex power.
//   AsMeasured: against the Gaussian reference at its own configured power.
enum class ResidualNormalization { ModeScale, EqualPower, AsMeasured };

// Residual carrier amplitude ratio sqrt(<|E_V|^2>_wp) / E_ref.
inline double residual_carrier_ratio(const BeamField& vortex, const BeamField& gaussian,
                                     const WavePacket& wp,
                                     ResidualNormalization norm = ResidualNormalization::ModeScale,
                                     double rel_tol = 1e-4) {
    const double intensity = effective_intensity(vortex, wp, rel_tol);
    switch (norm) {
        case ResidualNormalization::ModeScale:
            return std::sqrt(intensity) / (std::sqrt(2.0) * vortex.peak_amplitude());
        case ResidualNormalization::EqualPower: {
            const auto eg = field_amplitude(gaussian, Vec3{});
            const double ref2 = std::norm(eg[0]) + std::norm(eg[1]);
            const double power_scale = gaussian.power / vortex.power;
            return std::sqrt(intensity * power_scale / ref2);
        }
        case ResidualNormalization::AsMeasured: {
            const auto eg = field_amplitude(gaussian, Vec3{});
            const double ref2 = std::norm(eg[0]) + std::norm(eg[1]);
            return std::sqrt(intensity / ref2);
        }
    }
    return 0.0;
}

// Residual ratio over the outer product of an axial-nbar grid and a
// displacement grid (displacement along the beam-frame x axis). Radial
// occupations are held fixed.
inline std::vector<std::vector<double>> residual_map(const BeamField& vortex,
                                                     const TrapModes& trap,
                                                     const std::vector<double>& nbar_axial,
                                                     const std::vector<double>& displacement,
                                                     double nbar_r1 = 0.0, double nbar_r2 = 0.0) {
    for (double v : nbar_axial)
        if (!std::isfinite(v)) throw std::invalid_argument("residual_map: non-finite nbar");
    for (double v : displacement)
        if (!std::isfinite(v)) throw std::invalid_argument("residual_map: non-finite displacement");
    std::vector<std::vector<double>> out(nbar_axial.size(),
                                         std::vector<double>(displacement.size(), 0.0));
    for (std::size_t i = 0; i < nbar_axial.size(); ++i) {
        const ThermalState state({nbar_r1, nbar_r2, nbar_axial[i]});
        for (std::size_t j = 0; j < displacement.size(); ++j) {
            const auto wp = wavepacket_from(trap, state, Vec3{displacement[j], 0.0, 0.0});
            out[i][j] =
                residual_carrier_ratio(vortex, vortex, wp, ResidualNormalization::ModeScale);
        }
    }
    return out;
}

}  // namespace vortion
