#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "vortion/beam.hpp"
#include "vortion/constants.hpp"
#include "vortion/linalg.hpp"

// Trap geometry, secular frequencies, and Lamb-Dicke parameters.
//
// Eigendirections are expressed in the beam frame (beam along +z). The
// default geometry has the trap axis along x and the two radial modes in
// the y-z plane, rotated 45 degrees about the beam axis:
//   e_ax = (1,0,0), e_R1 = (0,1,1)/sqrt(2), e_R2 = (0,1,-1)/sqrt(2).

namespace vortion {

enum class ModeId { R1 = 0, R2 = 1, Axial = 2 };

inline constexpr std::array<ModeId, 3> all_modes = {ModeId::R1, ModeId::R2, ModeId::Axial};

struct TrapModes {
    double mass = 0.0;                    // kg
    std::array<double, 3> frequency{};    // rad/s, indexed by ModeId
    std::array<Vec3, 3> eigendirection{}; // unit vectors, beam frame

    TrapModes(double mass_kg, double omega_r1, double omega_r2, double omega_ax,
              std::array<Vec3, 3> axes = default_axes())
        : mass(mass_kg), frequency{omega_r1, omega_r2, omega_ax}, eigendirection(axes) {
        if (!(mass > 0.0)) throw std::invalid_argument("trap: mass must be > 0");
        for (double w : frequency)
            if (!(w > 0.0)) throw std::invalid_argument("trap: frequencies must be > 0");
        for (int i = 0; i < 3; ++i) {
            if (std::abs(eigendirection[i].norm() - 1.0) > 1e-12)
                throw std::invalid_argument("trap: eigendirections must be unit vectors");
            for (int j = i + 1; j < 3; ++j)
                if (std::abs(eigendirection[i].dot(eigendirection[j])) > 1e-12)
                    throw std::invalid_argument("trap: eigendirections must be orthogonal");
        }
    }

    static std::array<Vec3, 3> default_axes() {
        const double s = 1.0 / std::sqrt(2.0);
        return {Vec3{0.0, s, s}, Vec3{0.0, s, -s}, Vec3{1.0, 0.0, 0.0}};
    }

    static TrapModes with_mass_amu(double amu, double omega_r1, double omega_r2,
                                   double omega_ax) {
        return TrapModes(amu * constants::atomic_mass_unit, omega_r1, omega_r2, omega_ax);
    }

    double frequency_of(ModeId m) const { return frequency[static_cast<int>(m)]; }
    const Vec3& axis_of(ModeId m) const { return eigendirection[static_cast<int>(m)]; }
};

// Ground-state wave-packet size x0 = sqrt(hbar / (2 m omega)).
inline double ground_state_size(const TrapModes& trap, ModeId mode) {
    return std::sqrt(constants::hbar / (2.0 * trap.mass * trap.frequency_of(mode)));
}

// Longitudinal Lamb-Dicke parameter eta = (k . e_mode) x0. The sign carries
// the geometric projection; magnitudes are what enter Rabi frequencies.
inline double lamb_dicke_parallel(const TrapModes& trap, ModeId mode, const Vec3& k_vector) {
    return k_vector.dot(trap.axis_of(mode)) * ground_state_size(trap, mode);
}

// Transverse Lamb-Dicke parameter for the vortex gradient,
// eta_perp = (n_perp . e_mode) sqrt(2)/w0 * x0. n_perp is a unit vector in
// the beam's transverse plane (z component ignored).
inline double lamb_dicke_perp(const TrapModes& trap, ModeId mode, const BeamField& beam,
                              double nx, double ny) {
    if (beam.kind != BeamKind::LaguerreGaussian01)
        throw std::invalid_argument(
            "lamb_dicke_perp: defined for the LG01 transverse gradient only");
    const Vec3& e = trap.axis_of(mode);
    const double projection = nx * e.x + ny * e.y;
    return projection * std::sqrt(2.0) / beam.waist * ground_state_size(trap, mode);
}

// Effective per-mode transverse Lamb-Dicke magnitude for the vortex beam,
// combining the x and (i l) y terms of the transverse Hamiltonian:
// sqrt(2) x0/w0 * |(e.x) + i l (e.y)|. Reduces to the projection form when
// the mode lies along a single transverse axis.
inline double lamb_dicke_perp_combined(const TrapModes& trap, ModeId mode,
                                       const BeamField& beam) {
    if (beam.kind != BeamKind::LaguerreGaussian01)
        throw std::invalid_argument(
            "lamb_dicke_perp: defined for the LG01 transverse gradient only");
    const Vec3& e = trap.axis_of(mode);
    const double proj = std::sqrt(e.x * e.x + e.y * e.y);
    return proj * std::sqrt(2.0) / beam.waist * ground_state_size(trap, mode);
}

}  // namespace vortion
