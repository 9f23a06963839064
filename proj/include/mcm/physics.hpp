#pragma once

// Closed-form imaging physics: saturated scattering, hiding light shifts,
// and the per-image error budgets built from them. Everything here is pure;
// same inputs give bit-identical outputs.

#include "mcm/constants.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcm {

//
// Saturated two-level scattering rate,
//   R = (gamma/2) * s / (1 + s + (2*delta/gamma)^2)
// with delta and gamma as angular frequencies.
//
inline double scattering_rate(double s, double delta, double gamma) {
    if (!std::isfinite(s) || !std::isfinite(delta) || !std::isfinite(gamma))
        throw std::invalid_argument("scattering_rate: non-finite input");
    if (!(s >= 0.0)) throw std::invalid_argument("scattering_rate: s must be >= 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("scattering_rate: gamma must be > 0");
    const double d = 2.0 * delta / gamma;
    return 0.5 * gamma * s / (1.0 + s + d * d);
}

//
// Phase imprinted on a hidden qubit during one image: the differential light
// shift of the off-resonant imaging drive integrated over the exposure,
//   Phi = s * gamma^2 * t / (8 * 2*pi*hide_shift) + offset,
// a pure inverse law in the hiding shift plus a constant offset. gamma is
// angular, hide_shift_hz is an ordinary frequency.
//
inline double light_shift_phase(double s, double gamma, double hide_shift_hz,
                                double duration_s, double offset_rad = 0.0) {
    if (!std::isfinite(s) || !std::isfinite(gamma) || !std::isfinite(duration_s) ||
        std::isnan(hide_shift_hz) || !std::isfinite(offset_rad))
        throw std::invalid_argument("light_shift_phase: non-finite input");
    if (!(hide_shift_hz > 0.0))
        throw std::invalid_argument("light_shift_phase: hide shift must be > 0 (resonant hiding undefined)");
    return s * gamma * gamma * duration_s / (8.0 * kTwoPi * hide_shift_hz) + offset_rad;
}

// Inverse-law coefficient C in Phi = C / hide_shift + offset, in rad*Hz.
inline double light_shift_coefficient(double s, double gamma, double duration_s) {
    return s * gamma * gamma * duration_s / (8.0 * kTwoPi);
}

//
// Per-image loss probability from Raman scattering out of the excited
// imaging state into unmeasured metastable states:
//   error = n_collected * sum_i(R_i) / eta.
// Exactly linear in the photon number and in each branching ratio.
//
inline double raman_loss_budget(double n_collected, double eta, const std::vector<double>& branch_ratios) {
    if (!std::isfinite(n_collected) || !std::isfinite(eta))
        throw std::invalid_argument("raman_loss_budget: non-finite input");
    if (!(eta > 0.0)) throw std::invalid_argument("raman_loss_budget: eta must be > 0");
    if (!(n_collected >= 0.0)) throw std::invalid_argument("raman_loss_budget: n_collected must be >= 0");
    double sum = 0.0;
    for (double r : branch_ratios) {
        if (!std::isfinite(r)) throw std::invalid_argument("raman_loss_budget: non-finite branching ratio");
        sum += r;
    }
    return n_collected * sum / eta;
}

//
// Spin-flip budget for one image of `target`.
//
// Two mechanisms: (a) off-resonant scattering of parasitic imaging tones,
// suppressed by (2*delta/gamma)^2 and weighted by the decay branching into
// the opposite qubit state and by the polarization purity; (b) trap-light
// Raman scattering of the atom being imaged through non-stretched excited
// states (applies to the bright state only).
//
struct ToneContribution {
    std::string label;
    double detuning_mhz = 0.0;
    TargetState source = TargetState::one;
    double probability = 0.0;
};

struct SpinFlipBudget {
    double bright_flip = 0.0; // atom in the imaged state flips to the other state
    double dark_flip = 0.0;   // atom in the other (dark) state flips to the imaged state
    double raman_term = 0.0;  // contribution to bright_flip from trap-light Raman scattering
    std::vector<ToneContribution> per_tone;
    double total() const { return bright_flip + dark_flip; }
};

inline SpinFlipBudget spin_flip_budget(const ToneLedger& ledger, double s, TargetState target,
                                       const AtomicConstants& constants, double duration_s,
                                       double n_collected = -1.0) {
    if (!(s >= 0.0)) throw std::invalid_argument("spin_flip_budget: s must be >= 0");
    if (!(duration_s >= 0.0)) throw std::invalid_argument("spin_flip_budget: duration must be >= 0");
    SpinFlipBudget out;
    const double gamma = constants.gamma_angular();
    for (const ToneEntry& tone : ledger.entries_for(target)) {
        const double purity = tone.pol == Polarization::impurity ? ledger.impurity_fraction : 1.0;
        const double s_eff = s * tone.relative_intensity * purity;
        const double rate = scattering_rate(s_eff, kTwoPi * tone.detuning_mhz * 1e6, gamma);
        const double p = rate * duration_s * tone.flip_weight;
        out.per_tone.push_back({tone.label, tone.detuning_mhz, tone.source, p});
        if (tone.source == target)
            out.bright_flip += p;
        else
            out.dark_flip += p;
    }
    if (n_collected < 0.0) n_collected = 30.0 * duration_s / 5.0e-3;
    out.raman_term = raman_loss_budget(n_collected, constants.collection_eta,
                                       {constants.raman_flip_branch * constants.depth_scale()});
    out.bright_flip += out.raman_term;
    return out;
}

//
// Imaging-tone positions within the excited-state manifold.
//
// Excited sublevel offsets are quoted relative to m=-1/2. At the operating
// field the measured gaps are used verbatim (they include nonlinear Zeeman
// shifts); elsewhere the linear sensitivities apply. The EOM frequency is
// chosen so a first-order sideband addresses the imaging transition of the
// requested state, with the carrier a fixed 280 MHz red of m=-1/2.
//
struct ToneDetuning {
    std::string tone;
    double offset_mhz = 0.0;              // position relative to the m=-1/2 excited state
    std::vector<double> detuning_mhz;     // from sublevels m=-3/2, -1/2, +1/2, +3/2
};

struct ToneDetuningMap {
    double field_gauss = 0.0;
    double eom_frequency_mhz = 0.0;
    std::vector<double> sublevel_offsets_mhz; // m=-3/2, -1/2, +1/2, +3/2
    std::vector<ToneDetuning> tones;
};

inline ToneDetuningMap zeeman_tone_detunings(double field_gauss, const ToneLedger& ledger,
                                             const AtomicConstants& constants,
                                             TargetState target = TargetState::zero) {
    if (!(field_gauss >= 0.0)) throw std::invalid_argument("zeeman_tone_detunings: field must be >= 0");
    ToneDetuningMap map;
    map.field_gauss = field_gauss;

    const bool anchored = std::abs(field_gauss - constants.operating_field_gauss) < 1e-9;
    if (anchored) {
        map.sublevel_offsets_mhz = {-constants.zeeman_split_lower_mhz, 0.0,
                                    constants.zeeman_mid_gap_mhz,
                                    constants.zeeman_mid_gap_mhz + constants.zeeman_split_upper_mhz};
    } else {
        const auto& sens = constants.excited_sens_mhz_per_gauss;
        const double ref = sens[1] * field_gauss;
        map.sublevel_offsets_mhz = {sens[0] * field_gauss - ref, 0.0,
                                    sens[2] * field_gauss - ref, sens[3] * field_gauss - ref};
    }

    // Ground-state offset of the addressed qubit state (half the qubit
    // splitting, sign by state), in MHz.
    const double qubit_mhz = constants.qubit_frequency_khz * 1e-3;
    const double ground = (target == TargetState::one ? -0.5 : 0.5) * qubit_mhz;
    // |0> images on m=-3/2, |1> on m=+3/2.
    const double transition = (target == TargetState::zero ? map.sublevel_offsets_mhz[0]
                                                           : map.sublevel_offsets_mhz[3]) - ground;
    map.eom_frequency_mhz = std::abs(transition - ledger.carrier_detuning_mhz);

    const auto add_tone = [&](const std::string& name, double offset) {
        ToneDetuning t;
        t.tone = name;
        t.offset_mhz = offset;
        for (double lvl : map.sublevel_offsets_mhz) t.detuning_mhz.push_back(offset - lvl);
        map.tones.push_back(t);
    };
    const double c = ledger.carrier_detuning_mhz;
    const double f = map.eom_frequency_mhz;
    add_tone("carrier", c);
    add_tone("sideband_p1", c + f);
    add_tone("sideband_m1", c - f);
    add_tone("sideband_p2", c + 2.0 * f);
    add_tone("sideband_m2", c - 2.0 * f);
    return map;
}

// Gaussian dephasing factor for a phase spread of std sigma (radians).
inline double contrast_from_phase_spread(double sigma_rad) {
    if (!(sigma_rad >= 0.0)) throw std::invalid_argument("contrast_from_phase_spread: sigma must be >= 0");
    return std::exp(-0.5 * sigma_rad * sigma_rad);
}

} // namespace mcm
