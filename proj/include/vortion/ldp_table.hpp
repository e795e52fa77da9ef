#pragma once

#include <array>

#include "vortion/trap.hpp"

// The per-mode Lamb-Dicke summary: longitudinal parameters for a Gaussian
// probe along +z and transverse parameters for a vortex probe of the given
// waist. Everything derives from the constants table and the trap/beam
// inputs.

namespace vortion {

struct LambDickeTable {
    // Indexed by ModeId (R1, R2, Axial).
    std::array<double, 3> eta_parallel{};
    std::array<double, 3> eta_perp{};
};

inline LambDickeTable lamb_dicke_table(const TrapModes& trap, double wavelength,
                                       double vortex_waist) {
    const BeamField vortex = BeamField::lg01(vortex_waist, 1e-6, wavelength);
    const Vec3 k_vec{0.0, 0.0, constants::two_pi / wavelength};
    LambDickeTable table;
    for (ModeId m : all_modes) {
        const int i = static_cast<int>(m);
        table.eta_parallel[i] = std::abs(lamb_dicke_parallel(trap, m, k_vec));
        table.eta_perp[i] = lamb_dicke_perp_combined(trap, m, vortex);
    }
    return table;
}

// Lamb-Dicke parameter of the sideband-cooling geometry: a beam at 45
// degrees to the trap axis, projected onto the axial mode.
inline double lamb_dicke_cooling_45deg(const TrapModes& trap, double wavelength) {
    const double k = constants::two_pi / wavelength;
    const double c = std::sqrt(0.5);
    const Vec3 k_vec{k * c, 0.0, k * c};
    return std::abs(lamb_dicke_parallel(trap, ModeId::Axial, k_vec));
}

}  // namespace vortion
