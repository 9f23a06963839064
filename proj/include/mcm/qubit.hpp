#pragma once

// Per-atom qubit state and the deterministic channels acting on it.
//
// Each atom carries a 2x2 density matrix in the {|1>, |0>} basis,
// parameterized by the |1> population and the off-diagonal element
// c = <1|rho|0>. Unitaries are applied with the exact 2x2 propagator;
// dephasing-type channels contract |c| only. Measurement projection is the
// only stochastic operation and lives with the imaging code.

#include "mcm/constants.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace mcm {

struct QubitState {
    bool present = false;
    double p1 = 0.0;                       // population of |1>
    std::complex<double> coherence{0.0, 0.0}; // <1|rho|0>

    static QubitState atom_in_1() { return {true, 1.0, {0.0, 0.0}}; }
    static QubitState atom_in_0() { return {true, 0.0, {0.0, 0.0}}; }
    static QubitState empty() { return {}; }

    // positivity: |c| <= sqrt(p1 (1 - p1)) up to roundoff
    bool valid(double tol = 1e-12) const {
        if (!present) return p1 == 0.0 && coherence == std::complex<double>(0.0, 0.0);
        if (!(p1 >= -tol && p1 <= 1.0 + tol)) return false;
        const double bound = std::sqrt(std::max(0.0, p1 * (1.0 - p1)));
        return std::abs(coherence) <= bound + tol;
    }
};

// Pulse of the global Raman drive: area theta = Omega*t (rad), axis phase in
// the equatorial plane, two-photon Rabi frequency in Hz. Detuning per site
// comes from the array's detuning map.
struct PulseSpec {
    double area_rad = kPi / 2.0;
    double axis_phase_rad = 0.0;
    double rabi_frequency_hz = 1.4e3;
    bool global = true;

    void validate() const {
        if (!(area_rad >= 0.0)) throw std::invalid_argument("pulse: area must be >= 0");
        if (!(rabi_frequency_hz > 0.0)) throw std::invalid_argument("pulse: rabi frequency must be > 0");
    }
};

namespace detail {

// rho' = U rho U^dag for U = cos(a/2) I - i sin(a/2) (n . sigma), applied to
// (p1, c). Basis {|1>, |0>} with |1> along +z.
inline void rotate(QubitState& q, double angle, double nx, double ny, double nz) {
    const double c2 = std::cos(0.5 * angle);
    const double s2 = std::sin(0.5 * angle);
    const std::complex<double> u00(c2, -s2 * nz);
    const std::complex<double> u01(-s2 * ny, -s2 * nx);
    const std::complex<double> u10(s2 * ny, -s2 * nx);
    const std::complex<double> u11(c2, s2 * nz);

    const std::complex<double> r00(q.p1, 0.0);
    const std::complex<double> r01 = q.coherence;
    const std::complex<double> r10 = std::conj(q.coherence);
    const std::complex<double> r11(1.0 - q.p1, 0.0);

    // U * rho
    const std::complex<double> a00 = u00 * r00 + u01 * r10;
    const std::complex<double> a01 = u00 * r01 + u01 * r11;
    const std::complex<double> a10 = u10 * r00 + u11 * r10;
    const std::complex<double> a11 = u10 * r01 + u11 * r11;
    // ... * U^dag
    const std::complex<double> b00 = a00 * std::conj(u00) + a01 * std::conj(u01);
    const std::complex<double> b01 = a00 * std::conj(u10) + a01 * std::conj(u11);
    const std::complex<double> b11 = a10 * std::conj(u10) + a11 * std::conj(u11);

    q.p1 = b00.real();
    q.coherence = b01;
    // clamp roundoff
    if (q.p1 < 0.0) q.p1 = 0.0;
    if (q.p1 > 1.0) q.p1 = 1.0;
    (void)b11;
}

} // namespace detail

// Detuned rotation generated by
//   H = (Omega/2)(cos(phi) X + sin(phi) Y) + (delta/2) Z
// evolved for t = area / Omega (angular). Exact propagator; trace and
// positivity preserved.
inline void pulse_qubit(QubitState& q, const PulseSpec& pulse, double detuning_hz) {
    if (!q.present) return;
    const double omega = kTwoPi * pulse.rabi_frequency_hz;
    const double delta = kTwoPi * detuning_hz;
    const double t = pulse.area_rad / omega;
    const double gen = std::sqrt(omega * omega + delta * delta);
    if (gen <= 0.0) return;
    const double angle = gen * t;
    const double nx = omega * std::cos(pulse.axis_phase_rad) / gen;
    const double ny = omega * std::sin(pulse.axis_phase_rad) / gen;
    const double nz = delta / gen;
    detail::rotate(q, angle, nx, ny, nz);
}

// Coherent phase imprint: c <- c * exp(i phi). Populations untouched.
inline void imprint_phase(QubitState& q, double phase_rad) {
    if (!q.present) return;
    if (!std::isfinite(phase_rad)) throw std::invalid_argument("imprint_phase: non-finite phase");
    q.coherence *= std::polar(1.0, phase_rad);
}

// White dephasing: c <- c * exp(-rate * t). Composes additively in t.
inline void dephase_qubit(QubitState& q, double rate_per_s, double duration_s) {
    if (!(rate_per_s >= 0.0)) throw std::invalid_argument("dephase: rate must be >= 0");
    if (!(duration_s >= 0.0)) throw std::invalid_argument("dephase: duration must be >= 0");
    if (!q.present) return;
    q.coherence *= std::exp(-rate_per_s * duration_s);
}

// Multiplicative coherence contraction (e.g. pulse-induced scattering).
inline void contract_coherence(QubitState& q, double factor) {
    if (!(factor >= 0.0 && factor <= 1.0)) throw std::invalid_argument("contract: factor must be in [0, 1]");
    if (!q.present) return;
    q.coherence *= factor;
}

// Depolarizing channel: rho <- (1-p) rho + p I/2. Used for pulse-induced
// scattering, which damages populations and coherence alike.
inline void depolarize_qubit(QubitState& q, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("depolarize: p must be in [0, 1]");
    if (!q.present) return;
    q.p1 = (1.0 - p) * q.p1 + 0.5 * p;
    q.coherence *= 1.0 - p;
}

// Free evolution at a static qubit detuning (Hz), same Z convention as
// pulse_qubit so a pi pulse at mid-hold echoes it out exactly.
inline void free_evolve_qubit(QubitState& q, double detuning_hz, double duration_s) {
    if (!(duration_s >= 0.0)) throw std::invalid_argument("free_evolve: duration must be >= 0");
    if (!q.present) return;
    q.coherence *= std::polar(1.0, -kTwoPi * detuning_hz * duration_s);
}

// Projective collapse after a measurement outcome.
inline void project_qubit(QubitState& q, TargetState target, bool bright) {
    if (!q.present) return;
    const bool in_one = (target == TargetState::one) == bright;
    q.p1 = in_one ? 1.0 : 0.0;
    q.coherence = {0.0, 0.0};
}

inline void pump_qubit(QubitState& q, TargetState target) {
    if (!q.present) return;
    q.p1 = target == TargetState::one ? 1.0 : 0.0;
    q.coherence = {0.0, 0.0};
}

} // namespace mcm
