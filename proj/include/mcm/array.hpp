#pragma once

// Tweezer-array state: a grid of sites with roles, occupancy, per-atom qubit
// states, the hiding mask with its per-trial shift map, and the static
// qubit-detuning map. ArrayState is a plain value; trials work on
// independent copies and need no synchronization.

#include "mcm/qubit.hpp"
#include "mcm/rng.hpp"

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcm {

enum class Role : std::uint8_t { data, ancilla, reservoir };

inline char role_char(Role r) {
    switch (r) {
        case Role::data: return 'D';
        case Role::ancilla: return 'A';
        default: return 'R';
    }
}

struct ArrayState {
    int rows = 0;
    int cols = 0;
    std::vector<Role> roles;
    std::vector<QubitState> sites;
    std::vector<bool> hidden;
    std::vector<double> hide_shift_mhz; // valid where hidden
    std::vector<double> detuning_hz;    // static qubit detuning per site

    int n_sites() const { return rows * cols; }
    int index(int r, int c) const { return r * cols + c; }
    int row_of(int i) const { return i / cols; }
    int col_of(int i) const { return i % cols; }

    int occupied_count() const {
        int n = 0;
        for (const auto& q : sites) n += q.present ? 1 : 0;
        return n;
    }

    std::vector<int> sites_with_role(Role role) const {
        std::vector<int> out;
        for (int i = 0; i < n_sites(); ++i)
            if (roles[i] == role) out.push_back(i);
        return out;
    }
};

// Role layouts. `checkerboard` alternates data/ancilla over the whole grid;
// `subarray` carves a data/ancilla checkerboard block out of a reservoir.
struct RoleLayout {
    enum class Kind { checkerboard, subarray, all_data } kind = Kind::checkerboard;
    int sub_row0 = 0, sub_col0 = 0, sub_rows = 0, sub_cols = 0;

    Role role_at(int r, int c) const {
        switch (kind) {
            case Kind::all_data: return Role::data;
            case Kind::checkerboard: return (r + c) % 2 == 0 ? Role::data : Role::ancilla;
            case Kind::subarray:
                if (r >= sub_row0 && r < sub_row0 + sub_rows && c >= sub_col0 && c < sub_col0 + sub_cols)
                    return (r + c) % 2 == 0 ? Role::data : Role::ancilla;
                return Role::reservoir;
        }
        return Role::data;
    }
};

// Stochastic loading: Bernoulli occupancy per site at fill_prob, atoms
// prepared in |1> (the post-pumping state). `site_rngs` supplies one stream
// per site so occupancy draws pair across scenario arms.
inline ArrayState initialize_array(int rows, int cols, double fill_prob, const RoleLayout& layout,
                                   std::vector<Rng>& site_rngs, double subarray_fill_prob = -1.0) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("initialize_array: dims must be positive");
    if (!(fill_prob >= 0.0 && fill_prob <= 1.0))
        throw std::invalid_argument("initialize_array: fill_prob must be in [0, 1]");
    ArrayState a;
    a.rows = rows;
    a.cols = cols;
    const int n = rows * cols;
    if (static_cast<int>(site_rngs.size()) < n)
        throw std::invalid_argument("initialize_array: not enough site rngs");
    a.roles.resize(n);
    a.sites.assign(n, QubitState::empty());
    a.hidden.assign(n, false);
    a.hide_shift_mhz.assign(n, 0.0);
    a.detuning_hz.assign(n, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int i = a.index(r, c);
            a.roles[i] = layout.role_at(r, c);
            double p = fill_prob;
            if (subarray_fill_prob >= 0.0 && a.roles[i] != Role::reservoir &&
                layout.kind == RoleLayout::Kind::subarray)
                p = subarray_fill_prob;
            if (site_rngs[i].bernoulli(p)) a.sites[i] = QubitState::atom_in_1();
        }
    }
    return a;
}

// Static detuning map: linear gradient across columns plus a per-trial
// common-mode offset (quasi-static field noise).
inline void set_detuning_map(ArrayState& a, double gradient_hz_per_col, double trial_offset_hz) {
    const double mid = 0.5 * (a.cols - 1);
    for (int i = 0; i < a.n_sites(); ++i)
        a.detuning_hz[i] = gradient_hz_per_col * (a.col_of(i) - mid) + trial_offset_hz;
}

// Hiding mask. Masked sites draw their light shift once per call (one trial)
// from N(mean, std), truncated positive; unmasked sites are imaged normally.
inline void set_hiding(ArrayState& a, const std::vector<bool>& mask, std::vector<Rng>& site_rngs,
                       double mean_mhz, double std_mhz) {
    if (static_cast<int>(mask.size()) != a.n_sites())
        throw std::invalid_argument("set_hiding: mask shape mismatch");
    if (!(mean_mhz > 0.0)) throw std::invalid_argument("set_hiding: mean shift must be > 0");
    for (int i = 0; i < a.n_sites(); ++i) {
        a.hidden[i] = mask[i];
        if (mask[i]) {
            double shift = site_rngs[i].normal(mean_mhz, std_mhz);
            while (shift <= 0.0) shift = site_rngs[i].normal(mean_mhz, std_mhz);
            a.hide_shift_mhz[i] = shift;
        } else {
            a.hide_shift_mhz[i] = 0.0;
        }
    }
}

inline void clear_hiding(ArrayState& a) {
    std::fill(a.hidden.begin(), a.hidden.end(), false);
    std::fill(a.hide_shift_mhz.begin(), a.hide_shift_mhz.end(), 0.0);
}

inline std::vector<bool> mask_for_role(const ArrayState& a, Role role) {
    std::vector<bool> mask(a.n_sites(), false);
    for (int i = 0; i < a.n_sites(); ++i) mask[i] = a.roles[i] == role;
    return mask;
}

// --- global channels ---------------------------------------------------

// Global pulse on all present atoms; per-site detuning enters the exact
// propagator. Site-selective pulses are out of scope.
inline void apply_pulse(ArrayState& a, const PulseSpec& pulse) {
    pulse.validate();
    for (int i = 0; i < a.n_sites(); ++i) pulse_qubit(a.sites[i], pulse, a.detuning_hz[i]);
}

inline void apply_phase_imprint(ArrayState& a, const std::vector<double>& per_site_phase) {
    if (per_site_phase.size() != a.sites.size())
        throw std::invalid_argument("apply_phase_imprint: phase map shape mismatch");
    for (int i = 0; i < a.n_sites(); ++i) imprint_phase(a.sites[i], per_site_phase[i]);
}

inline void apply_dephasing(ArrayState& a, double rate_per_s, double duration_s) {
    for (auto& q : a.sites) dephase_qubit(q, rate_per_s, duration_s);
}

// Free evolution under the static detuning map (white dephasing and
// background loss are applied separately by the sequence executor).
inline void evolve_free(ArrayState& a, double duration_s) {
    for (int i = 0; i < a.n_sites(); ++i) free_evolve_qubit(a.sites[i], a.detuning_hz[i], duration_s);
}

// Optical pumping of selected present atoms to `target`; each pump attempt
// fails (leaves the atom untouched) with failure_prob.
inline void optical_pump(ArrayState& a, const std::vector<int>& site_ids, double failure_prob,
                         std::vector<Rng>& site_rngs, TargetState target = TargetState::one) {
    for (int i : site_ids) {
        if (i < 0 || i >= a.n_sites()) throw std::invalid_argument("optical_pump: site out of range");
        if (!a.sites[i].present) continue;
        if (site_rngs[i].bernoulli(failure_prob)) continue;
        pump_qubit(a.sites[i], target);
    }
}

// Background-gas loss on every present atom over `duration_s`.
inline void apply_background_loss(ArrayState& a, double duration_s, double lifetime_s,
                                  std::vector<Rng>& site_rngs) {
    if (!(lifetime_s > 0.0)) throw std::invalid_argument("background loss: lifetime must be > 0");
    if (duration_s <= 0.0) return;
    const double p = 1.0 - std::exp(-duration_s / lifetime_s);
    for (int i = 0; i < a.n_sites(); ++i) {
        if (!a.sites[i].present) continue;
        if (site_rngs[i].bernoulli(p)) a.sites[i] = QubitState::empty();
    }
}

// Debug snapshot: one row per grid row, role/occupancy/hiding per site.
inline std::string snapshot(const ArrayState& a) {
    std::ostringstream out;
    out << "array " << a.rows << "x" << a.cols << " occupied=" << a.occupied_count() << "\n";
    for (int r = 0; r < a.rows; ++r) {
        for (int c = 0; c < a.cols; ++c) {
            const int i = a.index(r, c);
            out << role_char(a.roles[i]) << (a.sites[i].present ? '*' : '.')
                << (a.hidden[i] ? 'h' : ' ');
            if (c + 1 < a.cols) out << ' ';
        }
        out << "\n";
    }
    return out.str();
}

} // namespace mcm
