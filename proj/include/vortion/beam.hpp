#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "vortion/constants.hpp"
#include "vortion/linalg.hpp"

// Focal-plane field evaluation for circularly polarized Gaussian and
// first-order Laguerre-Gaussian beams.
//
// The scalar profile is u(x,y,z) = E0 * f(x,y) * exp(i k z) with
//   Gaussian:  f = exp(-r^2/w0^2)
//   LG01:      f = sqrt(2) (x + i l y)/w0 * exp(-r^2/w0^2)
// and the field vector E = u * (e_x + i sigma e_y)/sqrt(2).
//
// E0 is fixed by the focal-plane power integral: both profiles satisfy
// integral |f|^2 dA = pi w0^2 / 2, so integral |E|^2 dA = P / (c eps0 / 2)
// gives E0 = sqrt(4 P / (pi c eps0 w0^2)) for either kind.
//
// Only the plane-wave phase exp(ikz) is kept along z. The ion wave packet
// (< 100 nm) is far smaller than the Rayleigh range, so Gouy phase and
// waist divergence are dropped, and there is no longitudinal component.

namespace vortion {

enum class BeamKind { Gaussian, LaguerreGaussian01 };

struct BeamField {
    BeamKind kind = BeamKind::Gaussian;
    int oam_charge = 0;      // l: 0 for Gaussian, +-1 for LG01
    int polarization = -1;   // sigma: +-1
    double waist = 0.0;      // w0, m
    double power = 0.0;      // W
    double wavelength = 0.0; // m
    Vec3 focus_offset{};     // beam-axis displacement from trap origin, m

    BeamField(BeamKind kind_, int l, int sigma, double w0, double P, double lambda,
              Vec3 offset = {})
        : kind(kind_), oam_charge(l), polarization(sigma), waist(w0), power(P),
          wavelength(lambda), focus_offset(offset) {
        if (!(waist > 0.0)) throw std::invalid_argument("beam: waist must be > 0");
        if (!(power >= 0.0)) throw std::invalid_argument("beam: power must be >= 0");
        if (!(wavelength > 0.0)) throw std::invalid_argument("beam: wavelength must be > 0");
        if (polarization != 1 && polarization != -1)
            throw std::invalid_argument("beam: polarization must be +1 or -1");
        if (kind == BeamKind::Gaussian && oam_charge != 0)
            throw std::invalid_argument("beam: Gaussian requires oam_charge = 0");
        if (kind == BeamKind::LaguerreGaussian01 && oam_charge * oam_charge != 1)
            throw std::invalid_argument("beam: LG01 requires oam_charge = +1 or -1");
    }

    static BeamField gaussian(double w0, double P, double lambda, int sigma = -1,
                              Vec3 offset = {}) {
        return BeamField(BeamKind::Gaussian, 0, sigma, w0, P, lambda, offset);
    }
    static BeamField lg01(double w0, double P, double lambda, int l = -1, int sigma = -1,
                          Vec3 offset = {}) {
        return BeamField(BeamKind::LaguerreGaussian01, l, sigma, w0, P, lambda, offset);
    }

    // k = 2 pi / lambda, always derived.
    double wavenumber() const { return constants::two_pi / wavelength; }

    // Power-normalized peak field scale, V/m.
    double peak_amplitude() const {
        return std::sqrt(4.0 * power /
                         (constants::pi * constants::speed_of_light *
                          constants::vacuum_permittivity * waist * waist));
    }

    Vec3 to_beam_frame(const Vec3& trap_point) const { return trap_point - focus_offset; }
};

struct FieldSample {
    Complex2 amplitude{};        // (E_x, E_y), V/m
    ComplexJacobian jacobian{};  // dE_j/dq_i, V/m^2
};

namespace detail {

// Scalar profile f = p * g and its derivatives through second order, with
// g = exp(-r^2/w^2) and p the mode polynomial (1 or sqrt(2)(x + i l y)/w).
// p is at most linear, so p_xx = p_yy = p_xy = 0 for both kinds.
struct ScalarProfile {
    Complex f, fx, fy, fxx, fxy, fyy;
};

inline ScalarProfile scalar_profile(const BeamField& beam, double x, double y) {
    const double w2 = beam.waist * beam.waist;
    const double g = std::exp(-(x * x + y * y) / w2);

    Complex p, px, py;
    if (beam.kind == BeamKind::Gaussian) {
        p = 1.0;
        px = 0.0;
        py = 0.0;
    } else {
        const double c = std::sqrt(2.0) / beam.waist;
        const double l = static_cast<double>(beam.oam_charge);
        p = Complex(c * x, c * l * y);
        px = c;
        py = Complex(0.0, c * l);
    }

    ScalarProfile s;
    s.f = p * g;
    s.fx = (px - 2.0 * x * p / w2) * g;
    s.fy = (py - 2.0 * y * p / w2) * g;
    s.fxx = (-4.0 * x * px / w2 - 2.0 * p / w2 + 4.0 * x * x * p / (w2 * w2)) * g;
    s.fyy = (-4.0 * y * py / w2 - 2.0 * p / w2 + 4.0 * y * y * p / (w2 * w2)) * g;
    s.fxy = (-2.0 * y * px / w2 - 2.0 * x * py / w2 + 4.0 * x * y * p / (w2 * w2)) * g;
    return s;
}

inline void require_finite(const Vec3& point) {
    if (!point.finite()) throw std::domain_error("field evaluation: non-finite point");
}

// Polarization weights: E_j = c_j * u with c = (1, i sigma)/sqrt(2).
inline Complex2 polarization_weights(const BeamField& beam) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    return {Complex(inv_sqrt2, 0.0),
            Complex(0.0, static_cast<double>(beam.polarization) * inv_sqrt2)};
}

}  // namespace detail

// Complex transverse field (E_x, E_y) at a beam-frame point.
inline Complex2 field_amplitude(const BeamField& beam, const Vec3& point) {
    detail::require_finite(point);
    const auto s = detail::scalar_profile(beam, point.x, point.y);
    const Complex phase = std::exp(Complex(0.0, beam.wavenumber() * point.z));
    const Complex u = beam.peak_amplitude() * s.f * phase;
    const auto c = detail::polarization_weights(beam);
    return {c[0] * u, c[1] * u};
}

// Analytic jacobian dE_j/dq_i at a beam-frame point.
inline ComplexJacobian field_jacobian(const BeamField& beam, const Vec3& point) {
    detail::require_finite(point);
    const auto s = detail::scalar_profile(beam, point.x, point.y);
    const double k = beam.wavenumber();
    const Complex phase = std::exp(Complex(0.0, k * point.z));
    const Complex e0 = beam.peak_amplitude();
    const Complex ux = e0 * s.fx * phase;
    const Complex uy = e0 * s.fy * phase;
    const Complex uz = Complex(0.0, k) * e0 * s.f * phase;
    const auto c = detail::polarization_weights(beam);
    ComplexJacobian jac{};
    for (int j = 0; j < 2; ++j) {
        jac[j][0] = c[j] * ux;
        jac[j][1] = c[j] * uy;
        jac[j][2] = c[j] * uz;
    }
    return jac;
}

inline FieldSample field_sample(const BeamField& beam, const Vec3& point) {
    return {field_amplitude(beam, point), field_jacobian(beam, point)};
}

// Directional derivative (dir . grad) of the jacobian, i.e. the 2x3 matrix of
// second derivatives (dir . grad) dE_j/dq_i. Used to expand transition
// amplitudes to first order in the motional displacement along a trap
// eigendirection.
inline ComplexJacobian field_jacobian_directional(const BeamField& beam, const Vec3& point,
                                                  const Vec3& dir) {
    detail::require_finite(point);
    const auto s = detail::scalar_profile(beam, point.x, point.y);
    const double k = beam.wavenumber();
    const Complex ik(0.0, k);
    const Complex phase = std::exp(Complex(0.0, k * point.z));
    const Complex e0 = beam.peak_amplitude();

    const Complex u = e0 * s.f * phase;
    const Complex ux = e0 * s.fx * phase;
    const Complex uy = e0 * s.fy * phase;
    const Complex uxx = e0 * s.fxx * phase;
    const Complex uxy = e0 * s.fxy * phase;
    const Complex uyy = e0 * s.fyy * phase;

    // (dir . grad) of (u_x, u_y, u_z); z only contributes the plane-wave phase.
    const Complex dux = dir.x * uxx + dir.y * uxy + dir.z * ik * ux;
    const Complex duy = dir.x * uxy + dir.y * uyy + dir.z * ik * uy;
    const Complex duz = ik * (dir.x * ux + dir.y * uy + dir.z * ik * u);

    const auto c = detail::polarization_weights(beam);
    ComplexJacobian out{};
    for (int j = 0; j < 2; ++j) {
        out[j][0] = c[j] * dux;
        out[j][1] = c[j] * duy;
        out[j][2] = c[j] * duz;
    }
    return out;
}

}  // namespace vortion
