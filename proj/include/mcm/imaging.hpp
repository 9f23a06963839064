#pragma once

// Monte Carlo formation of one state-selective image.
//
// simulate_image applies only measurement back-action and image-induced
// error channels: Born projection of imaged atoms, photon counting with
// camera noise, per-photon and heating loss, spin flips from the tone
// ledger, and the phase imprint plus residual scattering on hidden atoms.
// Wall-clock effects during the frame (free evolution, white dephasing,
// background-gas loss over exposure + readout) are the sequence executor's
// job, so the channels stay orthogonal and individually testable.

#include "mcm/array.hpp"
#include "mcm/physics.hpp"

#include <cmath>
#include <vector>

namespace mcm {

struct SiteTruth {
    double collected = 0.0;  // signal photons collected (expected value for hidden sites)
    double scattered = 0.0;  // photons scattered by the atom
    bool bright = false;     // sampled outcome, before thresholding
    bool lost = false;
    bool spin_flipped = false;
};

struct ImageFrame {
    int rows = 0;
    int cols = 0;
    TargetState target = TargetState::one;
    double duration_s = 0.0;
    bool hiding_active = false;
    std::vector<double> counts;  // integrated signal per site, background-relative
    std::vector<SiteTruth> truth;
};

// Deterministic threshold comparison; ties classify bright.
inline std::vector<bool> classify_frame(const ImageFrame& frame, double threshold) {
    if (!std::isfinite(threshold)) throw std::invalid_argument("classify_frame: non-finite threshold");
    std::vector<bool> bright(frame.counts.size());
    for (std::size_t i = 0; i < frame.counts.size(); ++i) bright[i] = frame.counts[i] >= threshold;
    return bright;
}

inline ImageFrame simulate_image(ArrayState& array, TargetState target, const ImagingParams& params,
                                 const CameraModel& camera, const AtomicConstants& constants,
                                 const ToneLedger& ledger, const NoiseParams& noise,
                                 std::vector<Rng>& site_rngs, double duration_s = -1.0) {
    params.validate();
    if (duration_s <= 0.0) duration_s = params.duration_s;
    const double dur_scale = duration_s / params.duration_s;

    ImageFrame frame;
    frame.rows = array.rows;
    frame.cols = array.cols;
    frame.target = target;
    frame.duration_s = duration_s;
    for (bool h : array.hidden) frame.hiding_active = frame.hiding_active || h;
    frame.counts.resize(array.n_sites());
    frame.truth.resize(array.n_sites());

    const double gamma = constants.gamma_angular();
    const double lambda = params.collected_mean(duration_s);
    const double gain = camera.gain(params.mean_collected_photons) *
                        (frame.hiding_active ? params.mcm_brightness_factor : 1.0);

    const SpinFlipBudget flips =
        spin_flip_budget(ledger, params.saturation, target, constants, duration_s, lambda);

    // Loss channels for a bright atom beyond the per-photon term.
    const double op_rate = scattering_rate(params.saturation, kTwoPi * params.detuning_hz, gamma);
    double p_heat = 0.0;
    if (op_rate > params.heating_knee_per_s)
        p_heat = params.heating_excess_per_s * (op_rate / params.heating_knee_per_s - 1.0) * duration_s;
    const double p_state0 = target == TargetState::zero ? params.state0_extra_loss_per_image * dur_scale : 0.0;
    const double p_excess = frame.hiding_active ? params.excess_loss_per_image * dur_scale : 0.0;

    for (int i = 0; i < array.n_sites(); ++i) {
        QubitState& q = array.sites[i];
        SiteTruth& t = frame.truth[i];
        Rng& rng = site_rngs[i];
        double signal = 0.0;

        if (q.present && array.hidden[i]) {
            // No projection: imprint the light-shift phase and contract the
            // coherence by the residual scattering probability. Populations
            // are untouched (no-signaling). The imprint enters with the same
            // sign convention as a qubit detuning, so the Ramsey fringe
            // shifts by +phase.
            const double shift_hz = array.hide_shift_mhz[i] * 1e6;
            double phase = light_shift_phase(params.saturation, gamma, shift_hz, duration_s,
                                             params.hide_phase_offset_rad * dur_scale);
            if (noise.hide_phase_jitter_rad > 0.0)
                phase += rng.normal(0.0, noise.hide_phase_jitter_rad);
            imprint_phase(q, -phase);
            const double p_res =
                std::min(1.0, scattering_rate(params.saturation, kTwoPi * shift_hz, gamma) * duration_s);
            contract_coherence(q, 1.0 - p_res);
            t.scattered = p_res;
            t.collected = p_res * constants.collection_eta;
            signal = gain * t.collected; // mean extra light, ~1e-4 counts
        } else if (q.present) {
            const double p_bright = target == TargetState::one ? q.p1 : 1.0 - q.p1;
            t.bright = rng.bernoulli(p_bright);
            project_qubit(q, target, t.bright);
            if (t.bright) {
                const long n = rng.poisson(lambda);
                t.collected = static_cast<double>(n);
                t.scattered = n / constants.collection_eta;
                signal = gain * static_cast<double>(n);
                const double p_photon =
                    1.0 - std::pow(1.0 - constants.loss_per_collected_photon, static_cast<double>(n));
                t.lost = rng.bernoulli(p_photon) || rng.bernoulli(p_heat) ||
                         rng.bernoulli(p_state0) || rng.bernoulli(p_excess);
                if (t.lost) {
                    q = QubitState::empty();
                } else if (rng.bernoulli(flips.bright_flip)) {
                    t.spin_flipped = true;
                    pump_qubit(q, target == TargetState::one ? TargetState::zero : TargetState::one);
                }
            } else if (rng.bernoulli(flips.dark_flip)) {
                t.spin_flipped = true;
                pump_qubit(q, target);
            }
        }

        frame.counts[i] = camera.background_mean + signal + rng.normal(0.0, camera.background_std);
        if (camera.bright_std_extra > 0.0 && t.bright)
            frame.counts[i] += rng.normal(0.0, camera.bright_std_extra);
    }
    return frame;
}

} // namespace mcm
