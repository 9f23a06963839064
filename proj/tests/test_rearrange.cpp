#include "mcm/rearrange.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace mcm;
using Catch::Matchers::WithinAbs;

namespace {

ArrayState grid(int rows, int cols) {
    ArrayState a;
    a.rows = rows;
    a.cols = cols;
    const int n = rows * cols;
    a.roles.assign(n, Role::reservoir);
    a.sites.assign(n, QubitState::empty());
    a.hidden.assign(n, false);
    a.hide_shift_mhz.assign(n, 0.0);
    a.detuning_hz.assign(n, 0.0);
    return a;
}

std::vector<Rng> rngs_for(const ArrayState& a, std::uint64_t seed) {
    std::vector<Rng> r;
    for (int i = 0; i < a.n_sites(); ++i) r.emplace_back(derive_seed(seed, i));
    return r;
}

} // namespace

TEST_CASE("no empty ancillae gives an empty plan") {
    ArrayState a = grid(4, 5);
    a.roles[a.index(1, 1)] = Role::ancilla;
    a.sites[a.index(1, 1)] = QubitState::atom_in_1();
    const MovePlan plan = plan_refill(a, MoveTimingModel{}, 0.03);
    CHECK(plan.moves.empty());
    CHECK(plan.total_time_s == 0.0);
    CHECK(plan.complete());
}

TEST_CASE("nearest reservoir atom by Manhattan distance, timing per the model") {
    ArrayState a = grid(4, 5);
    a.roles[a.index(1, 1)] = Role::ancilla; // empty
    a.sites[a.index(0, 4)] = QubitState::atom_in_1();
    a.sites[a.index(3, 1)] = QubitState::atom_in_1();

    const MovePlan plan = plan_refill(a, MoveTimingModel{}, 0.03);
    REQUIRE(plan.moves.size() == 1);
    CHECK(plan.moves[0].source == a.index(3, 1)); // distance 2 beats distance 4
    CHECK(plan.moves[0].distance == 2);
    CHECK_THAT(plan.moves[0].time_s, WithinAbs(4e-3, 1e-12)); // 2 handoffs + 2 sites
    CHECK_THAT(plan.total_time_s, WithinAbs(4e-3, 1e-12));
}

TEST_CASE("ties break in row-major reservoir order") {
    ArrayState a = grid(3, 3);
    a.roles[a.index(1, 1)] = Role::ancilla;
    a.sites[a.index(0, 1)] = QubitState::atom_in_1(); // distance 1, row-major first
    a.sites[a.index(1, 0)] = QubitState::atom_in_1(); // distance 1
    const MovePlan plan = plan_refill(a, MoveTimingModel{}, 0.03);
    REQUIRE(plan.moves.size() == 1);
    CHECK(plan.moves[0].source == a.index(0, 1));
}

TEST_CASE("greedy singleton choice is optimal (brute force)") {
    Rng rng(61);
    for (int rep = 0; rep < 50; ++rep) {
        ArrayState a = grid(6, 7);
        const int anc = static_cast<int>(rng.raw() % a.n_sites());
        a.roles[anc] = Role::ancilla;
        int best = -1;
        for (int i = 0; i < a.n_sites(); ++i) {
            if (a.roles[i] != Role::reservoir) continue;
            if (rng.bernoulli(0.4)) {
                a.sites[i] = QubitState::atom_in_1();
                if (best < 0 || manhattan(a, i, anc) < manhattan(a, best, anc)) best = i;
            }
        }
        const MovePlan plan = plan_refill(a, MoveTimingModel{}, 1.0);
        if (best < 0) {
            CHECK(plan.unmatched_targets == 1);
        } else {
            REQUIRE(plan.moves.size() == 1);
            CHECK(manhattan(a, plan.moves[0].source, anc) == manhattan(a, best, anc));
        }
    }
}

TEST_CASE("plans are deterministic and respect the budget") {
    ArrayState a = grid(6, 7);
    Rng rng(62);
    for (int i = 0; i < a.n_sites(); ++i) {
        if (i % 5 == 0) a.roles[i] = Role::ancilla;
        else if (rng.bernoulli(0.5)) a.sites[i] = QubitState::atom_in_1();
    }
    const MovePlan p1 = plan_refill(a, MoveTimingModel{}, 0.012);
    const MovePlan p2 = plan_refill(a, MoveTimingModel{}, 0.012);
    REQUIRE(p1.moves.size() == p2.moves.size());
    for (std::size_t i = 0; i < p1.moves.size(); ++i) {
        CHECK(p1.moves[i].source == p2.moves[i].source);
        CHECK(p1.moves[i].target == p2.moves[i].target);
    }
    CHECK(p1.total_time_s <= 0.012);

    const MovePlan wide = plan_refill(a, MoveTimingModel{}, 10.0);
    CHECK(wide.moves.size() >= p1.moves.size());
    CHECK(p1.dropped_for_budget == static_cast<int>(wide.moves.size() - p1.moves.size()));
    // no site twice as source or target
    std::vector<int> seen;
    for (const auto& m : wide.moves) {
        for (int s : seen) CHECK(s != m.source);
        seen.push_back(m.source);
    }
}

TEST_CASE("execution conserves atoms and reports losses") {
    ArrayState a = grid(5, 5);
    a.roles[a.index(2, 2)] = Role::ancilla;
    a.roles[a.index(2, 3)] = Role::ancilla;
    a.sites[a.index(0, 0)] = QubitState::atom_in_1();
    a.sites[a.index(4, 4)] = QubitState::atom_in_1();
    auto rngs = rngs_for(a, 63);

    const MovePlan plan = plan_refill(a, MoveTimingModel{}, 1.0);
    REQUIRE(plan.moves.size() == 2);

    SECTION("lossless moves fill every target") {
        ArrayState b = a;
        const MoveReport rep = execute_moves(b, plan, 0.0, rngs);
        CHECK(rep.executed == 2);
        CHECK(rep.lost_in_transit == 0);
        CHECK(b.sites[b.index(2, 2)].present);
        CHECK(b.sites[b.index(2, 3)].present);
        CHECK(b.occupied_count() == a.occupied_count());
    }
    SECTION("certain loss empties both ends") {
        ArrayState b = a;
        const MoveReport rep = execute_moves(b, plan, 1.0, rngs);
        CHECK(rep.executed == 0);
        CHECK(rep.lost_in_transit == 2);
        CHECK(b.occupied_count() == 0);
    }
    SECTION("stale moves are skipped") {
        ArrayState b = a;
        b.sites[plan.moves[0].source] = QubitState::empty();   // source vacated
        b.sites[plan.moves[1].target] = QubitState::atom_in_1(); // target filled
        const int before = b.occupied_count();
        const MoveReport rep = execute_moves(b, plan, 0.0, rngs);
        CHECK(rep.skipped_stale == 2);
        CHECK(rep.executed == 0);
        CHECK(b.occupied_count() == before);
    }
    SECTION("empty plan is a no-op") {
        ArrayState b = a;
        const MoveReport rep = execute_moves(b, MovePlan{}, 0.5, rngs);
        CHECK(rep.executed == 0);
        CHECK(b.occupied_count() == a.occupied_count());
    }
}

TEST_CASE("atom count never increases under execution") {
    Rng rng(64);
    for (int rep = 0; rep < 30; ++rep) {
        ArrayState a = grid(6, 6);
        for (int i = 0; i < a.n_sites(); ++i) {
            if (rng.bernoulli(0.25)) a.roles[i] = Role::ancilla;
            else if (rng.bernoulli(0.5)) a.sites[i] = QubitState::atom_in_1();
        }
        auto rngs = rngs_for(a, derive_seed(64, rep));
        const int before = a.occupied_count();
        const MovePlan plan = plan_refill(a, MoveTimingModel{}, 0.05);
        const MoveReport report = execute_moves(a, plan, 0.3, rngs);
        CHECK(a.occupied_count() == before - report.lost_in_transit);
    }
}
