#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "vortion/beam.hpp"
#include "vortion/linalg.hpp"
#include "vortion/trap.hpp"

// Spherical-tensor decomposition of the quadrupole coupling and effective
// transition channels.
//
// The paraxial quadrupole Hamiltonian decomposes into five rank-2 tensor
// components, one per Delta_m, each multiplying a fixed combination of the
// transverse field gradients:
//   T^2_+2 : dEx/dx - dEy/dy - i dEy/dx - i dEx/dy
//   T^2_+1 : dEx/dz - i dEy/dz
//   T^2_0  : (2/sqrt(6)) (dEx/dx + dEy/dy)
//   T^2_-1 : dEx/dz + i dEy/dz
//   T^2_-2 : dEx/dx - dEy/dy + i dEy/dx + i dEx/dy
//
// The reduced quadrupole matrix element and all geometric prefactors are
// absorbed into one coupling scale calibrated against the measured
// power-dependent Rabi frequency; channel amplitudes are meaningful as
// ratios.

namespace vortion {

struct TensorChannel {
    int delta_m = 0;
    Complex amplitude{};
};

// The bracketed gradient combination for one Delta_m, as a linear map on a
// jacobian-shaped matrix. Applying it to the directional derivative of the
// jacobian yields the directional derivative of the channel amplitude.
inline Complex tensor_amplitude(const ComplexJacobian& jac, int delta_m) {
    const Complex i(0.0, 1.0);
    const Complex dxEx = jac[0][0], dyEx = jac[0][1], dzEx = jac[0][2];
    const Complex dxEy = jac[1][0], dyEy = jac[1][1], dzEy = jac[1][2];
    switch (delta_m) {
        case +2: return dxEx - dyEy - i * dxEy - i * dyEx;
        case +1: return dzEx - i * dzEy;
        case 0: return 2.0 / std::sqrt(6.0) * (dxEx + dyEy);
        case -1: return dzEx + i * dzEy;
        case -2: return dxEx - dyEy + i * dxEy + i * dyEx;
        default: throw std::invalid_argument("tensor_amplitude: delta_m must be in [-2, 2]");
    }
}

// All five channels, ordered Delta_m = +2, +1, 0, -1, -2.
inline std::array<TensorChannel, 5> tensor_decompose(const FieldSample& sample) {
    std::array<TensorChannel, 5> out{};
    int idx = 0;
    for (int dmitr : {+2, +1, 0, -1, -2}) {
        out[idx].delta_m = dmitr;
        out[idx].amplitude = tensor_amplitude(sample.jacobian, dmitr);
        ++idx;
    }
    return out;
}

struct TransitionChannel {
    int delta_m = 0;
    Complex carrier_amplitude{};
    // First-order (one phonon) coupling per motional mode, before the
    // sqrt(n) thermal factors. Indexed by ModeId.
    std::array<Complex, 3> sideband_amplitudes{};
};

// Carrier and first-order sideband amplitudes of one channel at a beam-frame
// position. The carrier is the local tensor amplitude; each sideband is the
// first-order expansion of the position operators around the point along the
// trap eigendirection: x0_mode times the directional gradient of the channel
// amplitude. For a plane wave this reduces to i (k . e) x0 times the carrier;
// for the LG01 Delta_m = sigma channel at the singularity it reproduces the
// transverse factors sqrt(2) x0/w0 (e.x) and i l sqrt(2) x0/w0 (e.y).
inline TransitionChannel channel_at(const BeamField& beam, const TrapModes& trap,
                                    const Vec3& position, int delta_m) {
    if (delta_m < -2 || delta_m > 2)
        throw std::invalid_argument("channel_at: delta_m must be in [-2, 2]");
    TransitionChannel ch;
    ch.delta_m = delta_m;
    ch.carrier_amplitude = tensor_amplitude(field_jacobian(beam, position), delta_m);
    for (ModeId mode : all_modes) {
        const auto grad = field_jacobian_directional(beam, position, trap.axis_of(mode));
        ch.sideband_amplitudes[static_cast<int>(mode)] =
            ground_state_size(trap, mode) * tensor_amplitude(grad, delta_m);
    }
    return ch;
}

// Coupling scale of an on-axis Gaussian carrier with the same polarization:
// |T^2_sigma| = sqrt(2) k E0. Used to express channel amplitudes as
// dimensionless ratios and to anchor the Rabi-frequency calibration.
inline double gaussian_carrier_scale(double wavenumber, double peak_amplitude) {
    return std::sqrt(2.0) * wavenumber * peak_amplitude;
}

}  // namespace vortion
