#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vortion/coupling.hpp"
#include "vortion/trap.hpp"

// Thermal-state Rabi dynamics, resolved-sideband spectra, and the
// power-dependent Rabi calibration.
//
// Trace model (resonant):   P_D(t) = 1/2 (1 - sum_n rho_n cos(Omega_n t) e^{-Gamma t})
// Spectrum model (detuned): P_D    = sum_n rho_n Omega_n^2/(Omega_n^2+delta^2)
//                                    sin^2(tau/2 sqrt(Omega_n^2+delta^2)) e^{-Gamma tau}
// with rho_n = nbar^n/(nbar+1)^{n+1} and
//   Omega_{n,n}   = (1 - eta^2 n) Omega_0   (carrier)
//   Omega_{n-1,n} = eta sqrt(n)   Omega_0   (red sideband)
//   Omega_{n+1,n} = eta sqrt(n+1) Omega_0   (blue sideband)
//
// The two decoherence placements above are intentional and kept literal;
// they agree at Gamma = 0.

namespace vortion {

// rho_n for a thermal (geometric) phonon distribution.
inline double thermal_weight(double nbar, int n) {
    if (nbar < 0.0 || n < 0) throw std::invalid_argument("thermal_weight: nbar, n must be >= 0");
    if (nbar == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(n * std::log(nbar / (nbar + 1.0)) - std::log(nbar + 1.0));
}

// Smallest truncation with tail mass <= epsilon: the tail above N is
// (nbar/(nbar+1))^{N+1}.
inline int thermal_n_max(double nbar, double epsilon = 1e-6) {
    if (nbar <= 0.0) return 0;
    const double n = std::ceil(std::log(epsilon) / std::log(nbar / (nbar + 1.0))) - 1.0;
    return std::max(0, static_cast<int>(n));
}

struct ThermalState {
    std::array<double, 3> nbar{};  // indexed by ModeId
    std::array<int, 3> n_max{};

    explicit ThermalState(std::array<double, 3> nbar_per_mode,
                          std::array<int, 3> requested_n_max = {0, 0, 0},
                          double mass_tolerance = 1e-6)
        : nbar(nbar_per_mode) {
        for (int i = 0; i < 3; ++i) {
            if (!(nbar[i] >= 0.0))
                throw std::invalid_argument("thermal state: nbar must be >= 0");
            n_max[i] = std::max(requested_n_max[i], thermal_n_max(nbar[i], mass_tolerance));
        }
    }

    double nbar_of(ModeId m) const { return nbar[static_cast<int>(m)]; }
    int n_max_of(ModeId m) const { return n_max[static_cast<int>(m)]; }
};

struct PulseSpec {
    double duration = 0.0;    // s
    double detuning = 0.0;    // rad/s
    double base_rabi = 0.0;   // rad/s
    double decoherence = 0.0; // 1/s

    PulseSpec(double tau, double delta, double omega0, double gamma)
        : duration(tau), detuning(delta), base_rabi(omega0), decoherence(gamma) {
        if (!(duration >= 0.0)) throw std::invalid_argument("pulse: duration must be >= 0");
        if (!(decoherence >= 0.0)) throw std::invalid_argument("pulse: decoherence must be >= 0");
        if (!std::isfinite(detuning) || !std::isfinite(base_rabi))
            throw std::invalid_argument("pulse: fields must be finite");
    }
};

enum class SidebandOrder : int { Red = -1, Carrier = 0, Blue = +1 };

// Rabi frequency of the carrier or a first-order sideband for phonon number n.
inline double sideband_rabi(double omega0, double eta, int n, SidebandOrder order) {
    if (n < 0) throw std::invalid_argument("sideband_rabi: n must be >= 0");
    switch (order) {
        case SidebandOrder::Carrier: return (1.0 - eta * eta * n) * omega0;
        case SidebandOrder::Red: return n >= 1 ? eta * std::sqrt(double(n)) * omega0 : 0.0;
        case SidebandOrder::Blue: return eta * std::sqrt(double(n + 1)) * omega0;
    }
    return 0.0;
}

// Resonant thermal Rabi trace over the given sample times (single mode). The
// trace model carries no detuning.
inline std::vector<double> rabi_trace(double nbar, int n_max, const PulseSpec& pulse,
                                      double eta, SidebandOrder order,
                                      const std::vector<double>& times) {
    if (pulse.detuning != 0.0)
        throw std::invalid_argument("rabi_trace: the trace model is resonant (detuning = 0)");
    std::vector<double> weights(n_max + 1), omegas(n_max + 1);
    double mass = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        weights[n] = thermal_weight(nbar, n);
        omegas[n] = sideband_rabi(pulse.base_rabi, eta, n, order);
        mass += weights[n];
    }
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        double sum = 0.0;
        for (int n = 0; n <= n_max; ++n) sum += weights[n] * std::cos(omegas[n] * t);
        // Weight above the truncation is below the mass tolerance; treat it
        // as stationary.
        sum += 1.0 - mass;
        out.push_back(0.5 * (1.0 - sum * std::exp(-pulse.decoherence * t)));
    }
    return out;
}

inline std::vector<double> rabi_trace(const ThermalState& state, ModeId mode,
                                      const PulseSpec& pulse, double eta, SidebandOrder order,
                                      const std::vector<double>& times) {
    return rabi_trace(state.nbar_of(mode), state.n_max_of(mode), pulse, eta, order, times);
}

// One excitation term of the detuned spectrum model.
inline double detuned_excitation(double omega, double delta, double tau, double gamma) {
    const double w2 = omega * omega + delta * delta;
    if (w2 == 0.0) return 0.0;
    const double s = std::sin(0.5 * tau * std::sqrt(w2));
    return omega * omega / w2 * s * s * std::exp(-gamma * tau);
}

// Thermal spectrum value for a single-mode transition with a per-n Rabi law.
template <typename RabiLaw>
double spectrum_point(double nbar, int n_max, const PulseSpec& pulse, RabiLaw omega_of_n) {
    double sum = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        sum += thermal_weight(nbar, n) *
               detuned_excitation(omega_of_n(n), pulse.detuning, pulse.duration,
                                  pulse.decoherence);
    }
    return sum;
}

template <typename RabiLaw>
double spectrum_point(const ThermalState& state, ModeId mode, const PulseSpec& pulse,
                      RabiLaw omega_of_n) {
    return spectrum_point(state.nbar_of(mode), state.n_max_of(mode), pulse, omega_of_n);
}

struct RabiCalibration {
    double slope = 0.0;  // rad/s per sqrt(W)

    explicit RabiCalibration(double slope_rad_per_sqrt_watt) : slope(slope_rad_per_sqrt_watt) {
        if (!(slope > 0.0)) throw std::invalid_argument("calibration: slope must be > 0");
    }
};

// Omega(P) = slope * sqrt(P).
inline double rabi_from_power(const RabiCalibration& cal, double power) {
    if (!(power >= 0.0)) throw std::invalid_argument("rabi_from_power: power must be >= 0");
    return cal.slope * std::sqrt(power);
}

// Conversion from tensor-channel amplitude (V/m^2) to Rabi frequency (rad/s),
// anchored so that an on-axis Gaussian carrier at the calibration waist
// reproduces Omega(P) = slope sqrt(P) at every power. The power cancels:
// kappa = slope sqrt(P) / (sqrt(2) k E0(P, w_cal)).
inline double rabi_coupling_scale(const RabiCalibration& cal, double wavelength,
                                  double calibration_waist) {
    const BeamField probe = BeamField::gaussian(calibration_waist, 1e-3, wavelength);
    return cal.slope * std::sqrt(probe.power) /
           gaussian_carrier_scale(probe.wavenumber(), probe.peak_amplitude());
}

// ---------------------------------------------------------------------------
// Full resolved-sideband spectrum: carrier plus all six first-order sidebands.

struct SpectrumPoint {
    double detuning = 0.0;               // rad/s
    double total = 0.0;                  // clamped to [0, 1]
    double carrier = 0.0;
    std::array<double, 3> red{};         // per ModeId
    std::array<double, 3> blue{};
};

// Replaces the vortex carrier line with the residual-carrier model: the
// reference Gaussian carrier line scaled by the thermally averaged residual
// ratio. The quoted residual is an excitation relative to the
// Gaussian carrier, so the scaling is applied at the population level.
struct ResidualCarrierModel {
    bool enabled = false;
    double ratio = 0.0;           // residual excitation fraction
    double reference_rabi = 0.0;  // carrier Rabi of the reference Gaussian, rad/s
};

namespace detail {

// Carrier excitation with multi-mode thermal dephasing through the
// (1 - sum_i eta_i^2 n_i) correction. Modes with eta = 0 drop out.
class CarrierThermalSum {
  public:
    CarrierThermalSum(const TrapModes& trap, const ThermalState& state, const Vec3& k_vector) {
        for (ModeId m : all_modes) {
            const double eta = lamb_dicke_parallel(trap, m, k_vector);
            if (eta == 0.0 || state.nbar_of(m) == 0.0) continue;
            ModeTerm term;
            term.eta2 = eta * eta;
            const int n_max = state.n_max_of(m);
            term.weights.resize(n_max + 1);
            for (int n = 0; n <= n_max; ++n)
                term.weights[n] = thermal_weight(state.nbar_of(m), n);
            modes_.push_back(std::move(term));
        }
    }

    double evaluate(double omega_carrier, double delta, double tau, double gamma) const {
        return accumulate(0, 1.0, 0.0, omega_carrier, delta, tau, gamma);
    }

  private:
    struct ModeTerm {
        double eta2 = 0.0;
        std::vector<double> weights;
    };
    std::vector<ModeTerm> modes_;

    double accumulate(std::size_t level, double weight, double eta2n, double omega0,
                      double delta, double tau, double gamma) const {
        if (weight < 1e-12) return 0.0;
        if (level == modes_.size())
            return weight * detuned_excitation(omega0 * (1.0 - eta2n), delta, tau, gamma);
        double sum = 0.0;
        const ModeTerm& m = modes_[level];
        for (std::size_t n = 0; n < m.weights.size(); ++n)
            sum += accumulate(level + 1, weight * m.weights[n], eta2n + m.eta2 * double(n),
                              omega0, delta, tau, gamma);
        return sum;
    }
};

}  // namespace detail

// Per-transition Rabi frequencies at one position, derived from the channel
// amplitudes through the calibrated coupling scale.
struct TransitionRabi {
    double carrier = 0.0;             // rad/s
    std::array<double, 3> sideband{}; // eta-weighted base, per ModeId
};

inline TransitionRabi transition_rabi_at(const BeamField& beam, const TrapModes& trap,
                                         const Vec3& position, int delta_m,
                                         double coupling_scale) {
    const TransitionChannel ch = channel_at(beam, trap, position, delta_m);
    TransitionRabi r;
    r.carrier = coupling_scale * std::abs(ch.carrier_amplitude);
    for (int i = 0; i < 3; ++i)
        r.sideband[i] = coupling_scale * std::abs(ch.sideband_amplitudes[i]);
    return r;
}

// Spectrum at a single laser detuning for a given position. Contributions of
// the carrier and the six first-order sidebands are summed independently and
// the total clamped to [0, 1].
inline SpectrumPoint spectrum_at(const BeamField& beam, const TrapModes& trap,
                                 const ThermalState& state, double tau, double gamma,
                                 double detuning, const TransitionRabi& rabi,
                                 const detail::CarrierThermalSum& carrier_sum,
                                 const ResidualCarrierModel& residual) {
    SpectrumPoint pt;
    pt.detuning = detuning;

    if (residual.enabled && beam.kind == BeamKind::LaguerreGaussian01) {
        pt.carrier = residual.ratio *
                     carrier_sum.evaluate(residual.reference_rabi, detuning, tau, gamma);
    } else {
        pt.carrier = carrier_sum.evaluate(rabi.carrier, detuning, tau, gamma);
    }

    const PulseSpec nominal(tau, 0.0, 0.0, gamma);
    for (ModeId m : all_modes) {
        const int i = static_cast<int>(m);
        const double omega_sb = rabi.sideband[i];
        const double omega_mode = trap.frequency_of(m);
        const double nbar = state.nbar_of(m);
        const int n_max = state.n_max_of(m);
        if (omega_sb > 0.0) {
            PulseSpec red_pulse(tau, detuning + omega_mode, 0.0, gamma);
            pt.red[i] = spectrum_point(nbar, n_max, red_pulse, [&](int n) {
                return n >= 1 ? omega_sb * std::sqrt(double(n)) : 0.0;
            });
            PulseSpec blue_pulse(tau, detuning - omega_mode, 0.0, gamma);
            pt.blue[i] = spectrum_point(nbar, n_max, blue_pulse, [&](int n) {
                return omega_sb * std::sqrt(double(n + 1));
            });
        }
    }

    double total = pt.carrier;
    for (int i = 0; i < 3; ++i) total += pt.red[i] + pt.blue[i];
    pt.total = std::clamp(total, 0.0, 1.0);
    return pt;
}

// Spectrum over a detuning grid at a fixed beam-frame position.
inline std::vector<SpectrumPoint> full_spectrum(const BeamField& beam, const TrapModes& trap,
                                                const ThermalState& state, double tau,
                                                double gamma, int delta_m,
                                                const std::vector<double>& detunings,
                                                double coupling_scale,
                                                const Vec3& position = {},
                                                const ResidualCarrierModel& residual = {}) {
    for (double d : detunings)
        if (!std::isfinite(d)) throw std::invalid_argument("full_spectrum: non-finite detuning");
    const TransitionRabi rabi = transition_rabi_at(beam, trap, position, delta_m, coupling_scale);
    const Vec3 k_vec = Vec3{0.0, 0.0, beam.wavenumber()};
    const detail::CarrierThermalSum carrier_sum(trap, state, k_vec);
    std::vector<SpectrumPoint> out;
    out.reserve(detunings.size());
    for (double d : detunings)
        out.push_back(spectrum_at(beam, trap, state, tau, gamma, d, rabi, carrier_sum, residual));
    return out;
}

}  // namespace vortion
