#pragma once

// Declarative experiment sequences and the per-trial executor.
//
// A sequence is a finite ordered list of steps; the executor owns one
// trial's ArrayState and random streams and applies each step. Randomness
// is drawn from substreams keyed by (trial, purpose, call index, site), so
// results are independent of trial scheduling, and scenario arms sharing a
// master seed see common random numbers wherever their step structure
// matches (readout, initialization, hiding draws).

#include "mcm/imaging.hpp"
#include "mcm/rearrange.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace mcm {

// Bundle of every physical parameter record a trial needs.
struct ExperimentParams {
    AtomicConstants constants;
    ImagingParams imaging;
    CameraModel camera;
    NoiseParams noise;
    ToneLedger ledger_base = base_tone_ledger();
    ToneLedger ledger_mcm = mcm_tone_ledger();
    MoveTimingModel timing;
    double move_loss_prob = 0.01;

    int rows = 7;
    int cols = 10;
    RoleLayout layout{RoleLayout::Kind::checkerboard, 2, 3, 3, 4};
    double fill_prob = 0.5;
    double subarray_fill_prob = -1.0; // only for subarray layouts

    // Readout in expected-population mode: ReadoutStep records Born
    // probabilities instead of sampled outcomes (used by idealized-limit
    // property checks).
    bool exact_readout = false;

    // Seed of the per-run static hiding-shift map (stratified mode). The
    // runner derives it from the master seed; 0 falls back to per-trial
    // sampling.
    std::uint64_t hide_map_seed = 0;
};

// Static hiding-shift map: stratified normal quantiles, assigned to the
// masked sites in a seed-shuffled order. The realized spread equals the
// quoted site-to-site standard deviation by construction.
inline std::vector<double> stratified_shift_map(int n, double mean, double std, std::uint64_t seed) {
    std::vector<double> shifts(n);
    for (int k = 0; k < n; ++k)
        shifts[k] = std::max(0.05 * mean, mean + std * normal_quantile((k + 0.5) / n));
    Rng rng(seed);
    for (int k = n - 1; k > 0; --k)
        std::swap(shifts[k], shifts[rng.raw() % static_cast<std::uint64_t>(k + 1)]);
    return shifts;
}

// --- steps ---------------------------------------------------------------

enum class ImageKind { cycle, readout, final_occupancy };

struct PulseStep {
    double area_rad = kPi / 2.0;
    double axis_phase_rad = 0.0;
};
struct WaitStep {
    double duration_s = 0.0;
    bool mot_on = false;
};
struct ImageStep {
    TargetState target = TargetState::one;
    ImageKind kind = ImageKind::cycle;
    double duration_s = -1.0; // <=0: default image length
    bool record = false;
};
struct HideStep {
    bool on = true;
    double shift_mean_mhz = -1.0; // <=0: noise default
};
struct PumpStep {
    std::optional<Role> role; // nullopt: all sites
    TargetState to = TargetState::one;
};
struct RefillStep {
    double budget_s = 0.03;
};
struct MotLoadStep {
    double duration_s = 0.2;
};
struct EchoStep {};

using SequenceStep = std::variant<PulseStep, WaitStep, ImageStep, HideStep, PumpStep, RefillStep,
                                  MotLoadStep, EchoStep>;

// --- per-trial record ----------------------------------------------------

struct CycleStats {
    int cycle_image_index = 0;
    std::vector<bool> bright;    // classified
    std::vector<double> counts;  // raw signal counts
    int planned_moves = 0;
    int executed_moves = 0;
    int skipped_moves = 0;
    int lost_moves = 0;
    int dropped_for_budget = 0;
    int unmatched_targets = 0;
    double plan_time_s = 0.0;
    int total_distance = 0;
};

struct TrialRecord {
    std::vector<bool> readout_bright;        // classified readout outcome per site
    std::vector<double> readout_expected;    // exact-readout mode
    bool have_readout = false;
    std::vector<bool> final_bright;          // post-selection image
    bool have_final = false;
    std::vector<CycleStats> cycles;          // one per recorded cycle image
    std::vector<double> readout_counts;      // raw counts at the readout image
    std::vector<ImageFrame> dumped_frames;   // full frames, when dumping is on
    int images_taken = 0;
};

// --- executor ------------------------------------------------------------

class TrialExecutor {
  public:
    TrialExecutor(const ExperimentParams& params, std::uint64_t trial_seed, bool dump_frames = false)
        : p_(params), trial_seed_(trial_seed), dump_(dump_frames) {
        auto init_rngs = site_streams(kPurposeInit, 0);
        array_ = initialize_array(p_.rows, p_.cols, p_.fill_prob, p_.layout, init_rngs,
                                  p_.subarray_fill_prob);
        Rng trial_rng(derive_seed(trial_seed_, kPurposeTrial));
        const double jitter =
            p_.noise.detuning_jitter_hz > 0.0 ? trial_rng.normal(0.0, p_.noise.detuning_jitter_hz) : 0.0;
        set_detuning_map(array_, p_.noise.detuning_gradient_hz_per_col, jitter);
    }

    TrialRecord run(const std::vector<SequenceStep>& steps) {
        for (const SequenceStep& s : steps) std::visit([this](const auto& st) { exec(st); }, s);
        return std::move(record_);
    }

    const ArrayState& array() const { return array_; }

  private:
    static constexpr std::uint64_t kPurposeInit = 0;
    static constexpr std::uint64_t kPurposeTrial = 1;
    static constexpr std::uint64_t kPurposeHide = 2;
    static constexpr std::uint64_t kPurposePump = 3;
    static constexpr std::uint64_t kPurposeMove = 4;
    static constexpr std::uint64_t kPurposeWait = 5;
    static constexpr std::uint64_t kPurposeReadout = 6;
    static constexpr std::uint64_t kPurposeFinal = 7;
    static constexpr std::uint64_t kPurposeCycleImage = 16;

    std::vector<Rng> site_streams(std::uint64_t purpose, std::uint64_t call) {
        const std::uint64_t key = derive_seed(trial_seed_, purpose * 4096 + call);
        std::vector<Rng> rngs;
        rngs.reserve(array_.n_sites() ? array_.n_sites() : p_.rows * p_.cols);
        const int n = array_.n_sites() ? array_.n_sites() : p_.rows * p_.cols;
        for (int i = 0; i < n; ++i) rngs.emplace_back(derive_seed(key, i));
        return rngs;
    }

    const ToneLedger& active_ledger() const { return hiding_on_ ? p_.ledger_mcm : p_.ledger_base; }

    // Wall-clock evolution shared by every step that takes time. Pulses skip
    // the coherent part: their propagator already includes the detuning.
    void elapse(double duration_s, bool mot_on, bool coherent_phase = true) {
        if (duration_s <= 0.0) return;
        if (coherent_phase) evolve_free(array_, duration_s);
        double rate = p_.noise.white_dephasing_per_s;
        if (mot_on) rate += p_.noise.mot_dephasing_per_s;
        if (rate > 0.0) apply_dephasing(array_, rate, duration_s);
        auto rngs = site_streams(kPurposeWait, wait_calls_++);
        apply_background_loss(array_, duration_s, p_.noise.vacuum_lifetime_s, rngs);
    }

    void exec(const PulseStep& s) {
        PulseSpec pulse{s.area_rad, s.axis_phase_rad, 1.4e3, true};
        const double pulse_time = s.area_rad / (kTwoPi * pulse.rabi_frequency_hz);
        apply_pulse(array_, pulse);
        // scattering from the intermediate state during the pulse, as a
        // depolarizing channel so it costs contrast at the readout pulse too
        const double eps = p_.noise.pulse_contraction_per_halfpi * (s.area_rad / (kPi / 2.0));
        if (eps > 0.0)
            for (auto& q : array_.sites) depolarize_qubit(q, std::min(1.0, eps));
        elapse(pulse_time, false, false);
    }

    void exec(const EchoStep&) { exec(PulseStep{kPi, 0.0}); }

    void exec(const WaitStep& s) { elapse(s.duration_s, s.mot_on); }

    void exec(const MotLoadStep& s) { elapse(s.duration_s, true); }

    void exec(const HideStep& s) {
        if (!s.on) {
            clear_hiding(array_);
            hiding_on_ = false;
            return;
        }
        const double mean = s.shift_mean_mhz > 0.0 ? s.shift_mean_mhz : p_.noise.hide_shift_mean_mhz;
        const double std = mean * p_.noise.hide_shift_std_mhz / p_.noise.hide_shift_mean_mhz;
        if (!hide_sampled_) {
            if (p_.noise.hide_map_stratified && p_.hide_map_seed != 0) {
                // static spatial profile of the hiding array, shared by all
                // trials of a run
                const std::vector<bool> mask = mask_for_role(array_, Role::data);
                int n_masked = 0;
                for (bool m : mask) n_masked += m ? 1 : 0;
                const std::vector<double> shifts =
                    stratified_shift_map(n_masked, mean, std, p_.hide_map_seed);
                hide_shifts_.assign(array_.n_sites(), 0.0);
                int k = 0;
                for (int i = 0; i < array_.n_sites(); ++i)
                    if (mask[i]) hide_shifts_[i] = shifts[k++];
            } else {
                // quasi-static per trial
                auto rngs = site_streams(kPurposeHide, 0);
                set_hiding(array_, mask_for_role(array_, Role::data), rngs, mean, std);
                hide_shifts_ = array_.hide_shift_mhz;
            }
            hide_sampled_ = true;
        }
        for (int i = 0; i < array_.n_sites(); ++i) {
            array_.hidden[i] = array_.roles[i] == Role::data;
            array_.hide_shift_mhz[i] = array_.hidden[i] ? hide_shifts_[i] : 0.0;
        }
        hiding_on_ = true;
    }

    void exec(const PumpStep& s) {
        std::vector<int> targets;
        for (int i = 0; i < array_.n_sites(); ++i) {
            if (s.role && array_.roles[i] != *s.role) continue;
            if (array_.hidden[i]) continue; // hidden sites are not addressed
            targets.push_back(i);
        }
        auto rngs = site_streams(kPurposePump, pump_calls_++);
        optical_pump(array_, targets, p_.noise.op_failure_prob, rngs, s.to);
        elapse(p_.noise.op_duration_s, false);
    }

    void exec(const ImageStep& s) {
        const double duration = s.duration_s > 0.0 ? s.duration_s : p_.imaging.duration_s;
        elapse(duration, false);

        if (s.kind == ImageKind::readout && p_.exact_readout) {
            record_.readout_expected.resize(array_.n_sites());
            for (int i = 0; i < array_.n_sites(); ++i) {
                const QubitState& q = array_.sites[i];
                record_.readout_expected[i] =
                    q.present ? (s.target == TargetState::one ? q.p1 : 1.0 - q.p1) : 0.0;
            }
            record_.have_readout = true;
            ++record_.images_taken;
            return;
        }

        std::uint64_t purpose = kPurposeCycleImage + cycle_images_;
        std::uint64_t call = 0;
        if (s.kind == ImageKind::readout) {
            purpose = kPurposeReadout;
            call = readout_calls_++;
        }
        if (s.kind == ImageKind::final_occupancy) {
            purpose = kPurposeFinal;
            call = final_calls_++;
        }
        auto rngs = site_streams(purpose, call);
        if (s.kind == ImageKind::cycle) ++cycle_images_;

        ImageFrame frame = simulate_image(array_, s.target, p_.imaging, p_.camera, p_.constants,
                                          active_ledger(), p_.noise, rngs, duration);
        last_classified_ = classify_frame(frame, p_.camera.threshold);
        ++record_.images_taken;

        if (s.kind == ImageKind::readout) {
            record_.readout_bright = last_classified_;
            record_.readout_counts = frame.counts;
            record_.have_readout = true;
        } else if (s.kind == ImageKind::final_occupancy) {
            record_.final_bright = last_classified_;
            record_.have_final = true;
        } else if (s.record) {
            CycleStats st;
            st.cycle_image_index = cycle_images_;
            st.bright = last_classified_;
            st.counts = frame.counts;
            record_.cycles.push_back(st);
        }
        if (dump_) record_.dumped_frames.push_back(frame);
    }

    void exec(const RefillStep& s) {
        // plan from the most recent classified image: measured emptiness,
        // not ground truth
        std::vector<int> empty_anc, occ_res;
        if (!last_classified_.empty()) {
            for (int i = 0; i < array_.n_sites(); ++i) {
                if (array_.roles[i] == Role::ancilla && !last_classified_[i]) empty_anc.push_back(i);
                if (array_.roles[i] == Role::reservoir && last_classified_[i]) occ_res.push_back(i);
            }
        }
        const MovePlan plan = plan_refill_from_lists(array_, empty_anc, occ_res, p_.timing, s.budget_s);
        auto rngs = site_streams(kPurposeMove, move_calls_++);
        const MoveReport report = execute_moves(array_, plan, p_.move_loss_prob, rngs);
        if (!record_.cycles.empty()) {
            CycleStats& st = record_.cycles.back();
            st.planned_moves = static_cast<int>(plan.moves.size());
            st.executed_moves = report.executed;
            st.skipped_moves = report.skipped_stale;
            st.lost_moves = report.lost_in_transit;
            st.dropped_for_budget = plan.dropped_for_budget;
            st.unmatched_targets = plan.unmatched_targets;
            st.plan_time_s = plan.total_time_s;
            for (const Move& m : plan.moves) st.total_distance += m.distance;
        }
    }

    ExperimentParams p_;
    std::uint64_t trial_seed_;
    bool dump_ = false;
    ArrayState array_;
    bool hiding_on_ = false;
    bool hide_sampled_ = false;
    std::vector<double> hide_shifts_;
    std::vector<bool> last_classified_;
    TrialRecord record_;
    int cycle_images_ = 0;
    std::uint64_t pump_calls_ = 0;
    std::uint64_t move_calls_ = 0;
    std::uint64_t wait_calls_ = 0;
    std::uint64_t readout_calls_ = 0;
    std::uint64_t final_calls_ = 0;
};

} // namespace mcm
