#pragma once

// Conditional refill of empty ancilla sites from the reservoir: greedy
// nearest-neighbor planning under a time budget, and sequential execution
// with a single movable tweezer.

#include "mcm/array.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcm {

struct MoveTimingModel {
    double handoff_s = 1e-3;          // per pickup and per drop
    double transit_per_site_s = 1e-3; // per site-spacing moved
    double overhead_s = 0.0;          // camera readout + buffer, accounted by the caller

    double move_time(int manhattan_distance) const {
        return 2.0 * handoff_s + manhattan_distance * transit_per_site_s;
    }
};

struct Move {
    int source = -1;
    int target = -1;
    int distance = 0;
    double time_s = 0.0;
};

struct MovePlan {
    std::vector<Move> moves;
    double total_time_s = 0.0;
    int dropped_for_budget = 0;  // matched moves that did not fit the budget
    int unmatched_targets = 0;   // empty ancillae with no reservoir atom left
    bool complete() const { return dropped_for_budget == 0 && unmatched_targets == 0; }
};

inline int manhattan(const ArrayState& a, int i, int j) {
    return std::abs(a.row_of(i) - a.row_of(j)) + std::abs(a.col_of(i) - a.col_of(j));
}

// Core planner on explicit site lists (the experiment plans from *measured*
// occupancy, which may disagree with ground truth). Targets are processed in
// row-major order; each takes the nearest unclaimed source by Manhattan
// distance, ties broken by row-major source order. Moves run sequentially,
// so total time is the sum; once the budget is exhausted the remaining
// matches are dropped from the end of the list.
inline MovePlan plan_refill_from_lists(const ArrayState& a, std::vector<int> empty_targets,
                                       std::vector<int> occupied_sources,
                                       const MoveTimingModel& timing, double budget_s) {
    if (!(budget_s > 0.0)) throw std::invalid_argument("plan_refill: budget must be > 0");
    MovePlan plan;
    std::vector<bool> claimed(occupied_sources.size(), false);
    bool budget_spent = false;
    for (int target : empty_targets) {
        int best = -1;
        int best_dist = 0;
        for (std::size_t k = 0; k < occupied_sources.size(); ++k) {
            if (claimed[k]) continue;
            const int d = manhattan(a, occupied_sources[k], target);
            if (best < 0 || d < best_dist) {
                best = static_cast<int>(k);
                best_dist = d;
            }
        }
        if (best < 0) {
            ++plan.unmatched_targets;
            continue;
        }
        const double t = timing.move_time(best_dist);
        if (budget_spent || plan.total_time_s + t > budget_s) {
            budget_spent = true;
            ++plan.dropped_for_budget;
            continue;
        }
        claimed[best] = true;
        plan.moves.push_back({occupied_sources[best], target, best_dist, t});
        plan.total_time_s += t;
    }
    return plan;
}

// Ground-truth convenience: plan from the array's actual occupancy.
inline MovePlan plan_refill(const ArrayState& a, const MoveTimingModel& timing, double budget_s) {
    std::vector<int> empty_anc, occ_res;
    for (int i = 0; i < a.n_sites(); ++i) {
        if (a.roles[i] == Role::ancilla && !a.sites[i].present) empty_anc.push_back(i);
        if (a.roles[i] == Role::reservoir && a.sites[i].present) occ_res.push_back(i);
    }
    return plan_refill_from_lists(a, empty_anc, occ_res, timing, budget_s);
}

struct MoveReport {
    int executed = 0;
    int skipped_stale = 0;   // source vacated or target occupied since planning
    int lost_in_transit = 0;
};

// Execute sequentially. A stale move (source empty or target occupied) is
// skipped and reported; an executed move loses the atom with
// move_loss_prob, leaving both sites empty. Atom count never increases.
inline MoveReport execute_moves(ArrayState& a, const MovePlan& plan, double move_loss_prob,
                                std::vector<Rng>& site_rngs) {
    if (!(move_loss_prob >= 0.0 && move_loss_prob <= 1.0))
        throw std::invalid_argument("execute_moves: move_loss_prob must be in [0, 1]");
    MoveReport report;
    for (const Move& m : plan.moves) {
        if (m.source < 0 || m.source >= a.n_sites() || m.target < 0 || m.target >= a.n_sites())
            throw std::invalid_argument("execute_moves: move site out of range");
        if (!a.sites[m.source].present || a.sites[m.target].present) {
            ++report.skipped_stale;
            continue;
        }
        QubitState atom = a.sites[m.source];
        a.sites[m.source] = QubitState::empty();
        if (site_rngs[m.target].bernoulli(move_loss_prob)) {
            ++report.lost_in_transit;
            continue;
        }
        a.sites[m.target] = atom;
        ++report.executed;
    }
    return report;
}

} // namespace mcm
