#include "mcm/array.hpp"
#include "mcm/qubit.hpp"
#include "mcm/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>

using namespace mcm;
using Catch::Matchers::WithinAbs;
using cplx = std::complex<double>;

namespace {

// Independent 2x2 matrix oracle: build the propagator explicitly and
// conjugate the density matrix with plain matrix products.
struct Mat2 {
    cplx a, b, c, d;
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 dagger() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }
};

Mat2 propagator(double area, double axis_phase, double omega_hz, double detuning_hz) {
    const double omega = kTwoPi * omega_hz;
    const double delta = kTwoPi * detuning_hz;
    const double t = area / omega;
    const double gen = std::sqrt(omega * omega + delta * delta);
    const double ang = gen * t;
    const double nx = omega * std::cos(axis_phase) / gen;
    const double ny = omega * std::sin(axis_phase) / gen;
    const double nz = delta / gen;
    const double ch = std::cos(0.5 * ang), sh = std::sin(0.5 * ang);
    // U = ch I - i sh (n . sigma), basis {|1>, |0>}
    return {cplx(ch, -sh * nz), cplx(-sh * ny, -sh * nx), cplx(sh * ny, -sh * nx), cplx(ch, sh * nz)};
}

Mat2 density(const QubitState& q) {
    return {cplx(q.p1, 0.0), q.coherence, std::conj(q.coherence), cplx(1.0 - q.p1, 0.0)};
}

std::vector<Rng> make_site_rngs(int n, std::uint64_t seed) {
    std::vector<Rng> rngs;
    for (int i = 0; i < n; ++i) rngs.emplace_back(derive_seed(seed, i));
    return rngs;
}

ArrayState row_array(int n) {
    ArrayState a;
    a.rows = 1;
    a.cols = n;
    a.roles.assign(n, Role::data);
    a.sites.assign(n, QubitState::atom_in_1());
    a.hidden.assign(n, false);
    a.hide_shift_mhz.assign(n, 0.0);
    a.detuning_hz.assign(n, 0.0);
    return a;
}

} // namespace

TEST_CASE("resonant pulses from |1>") {
    QubitState q = QubitState::atom_in_1();
    pulse_qubit(q, {kPi / 2.0, 0.0, 1.4e3, true}, 0.0);
    CHECK_THAT(q.p1, WithinAbs(0.5, 1e-12));
    CHECK_THAT(std::abs(q.coherence), WithinAbs(0.5, 1e-12));

    q = QubitState::atom_in_1();
    pulse_qubit(q, {kPi, 0.0, 1.4e3, true}, 0.0);
    CHECK_THAT(q.p1, WithinAbs(0.0, 1e-12));
}

TEST_CASE("detuned pulse matches the generalized Rabi formula") {
    const double omega = 1.4e3;
    const double delta = 1.4e3; // delta = Omega
    QubitState q = QubitState::atom_in_1();
    pulse_qubit(q, {kPi, 0.0, omega, true}, delta);

    const double w = kTwoPi * omega, d = kTwoPi * delta;
    const double gen = std::sqrt(w * w + d * d);
    const double t = kPi / w;
    const double expected = (w * w / (gen * gen)) * std::pow(std::sin(0.5 * gen * t), 2.0);
    CHECK_THAT(1.0 - q.p1, WithinAbs(expected, 1e-12));
    CHECK_THAT(expected, WithinAbs(0.317, 1e-3));
}

TEST_CASE("2pi pulse is the identity at zero detuning") {
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        QubitState q;
        q.present = true;
        q.p1 = rng.uniform();
        const double bound = std::sqrt(q.p1 * (1.0 - q.p1));
        q.coherence = std::polar(bound * rng.uniform(), rng.uniform(0.0, kTwoPi));
        const QubitState before = q;
        pulse_qubit(q, {kTwoPi, rng.uniform(0.0, kTwoPi), 1.4e3, true}, 0.0);
        CHECK_THAT(q.p1, WithinAbs(before.p1, 1e-10));
        CHECK_THAT(std::abs(q.coherence - before.coherence), WithinAbs(0.0, 1e-10));
    }
}

TEST_CASE("Ramsey pair against the matrix-product oracle") {
    Rng rng(22);
    for (int i = 0; i < 100; ++i) {
        const double phi = rng.uniform(0.0, kTwoPi);
        QubitState q = QubitState::atom_in_1();
        pulse_qubit(q, {kPi / 2.0, 0.0, 1.4e3, true}, 0.0);
        pulse_qubit(q, {kPi / 2.0, phi, 1.4e3, true}, 0.0);

        const Mat2 u1 = propagator(kPi / 2.0, 0.0, 1.4e3, 0.0);
        const Mat2 u2 = propagator(kPi / 2.0, phi, 1.4e3, 0.0);
        const Mat2 rho0 = density(QubitState::atom_in_1());
        const Mat2 rho = (u2 * ((u1 * rho0) * u1.dagger())) * u2.dagger();

        CHECK_THAT(q.p1, WithinAbs(rho.a.real(), 1e-12));
        // closed form: P(|1>) = 1/2 - 1/2 cos(phi) for both routes
        CHECK_THAT(q.p1, WithinAbs(0.5 - 0.5 * std::cos(phi), 1e-12));
    }
}

TEST_CASE("phase imprint leaves populations and coherence magnitude alone") {
    QubitState q{true, 0.3, std::polar(0.35, 1.1)};
    const QubitState before = q;
    imprint_phase(q, 1.59);
    CHECK(q.p1 == before.p1);
    CHECK_THAT(std::abs(q.coherence), WithinAbs(std::abs(before.coherence), 1e-15));
    CHECK_THAT(std::arg(q.coherence) - std::arg(before.coherence), WithinAbs(1.59, 1e-12));
}

TEST_CASE("dephasing contracts and composes") {
    // the 0.303/s calibration puts echo contrast at 1/e after 3.3 s
    QubitState q{true, 0.5, {0.5, 0.0}};
    dephase_qubit(q, 0.303, 3.3);
    CHECK_THAT(std::abs(q.coherence), WithinAbs(0.5 * std::exp(-1.0), 5e-5));
    CHECK(q.p1 == 0.5);

    QubitState a{true, 0.5, {0.5, 0.0}}, b{true, 0.5, {0.5, 0.0}};
    dephase_qubit(a, 0.1, 0.7);
    dephase_qubit(a, 0.1, 1.6);
    dephase_qubit(b, 0.1, 2.3);
    CHECK_THAT(std::abs(a.coherence), WithinAbs(std::abs(b.coherence), 1e-15));

    // one reload-length at the reload-channel rate
    QubitState m{true, 0.5, {0.5, 0.0}};
    dephase_qubit(m, 0.03, 0.2);
    CHECK_THAT(std::abs(m.coherence) / 0.5, WithinAbs(0.994, 1e-3));
}

TEST_CASE("echo cancels arbitrary static detuning maps") {
    Rng rng(23);
    const double fast_rabi = 1e12; // effectively instantaneous pulses
    for (int rep = 0; rep < 20; ++rep) {
        ArrayState a = row_array(8);
        ArrayState ref = a;
        for (int i = 0; i < 8; ++i) a.detuning_hz[i] = rng.uniform(-50.0, 50.0);
        const double tau = rng.uniform(0.05, 0.5);

        auto run = [&](ArrayState& arr) {
            apply_pulse(arr, {kPi / 2.0, 0.0, fast_rabi, true});
            evolve_free(arr, tau);
            apply_pulse(arr, {kPi, 0.0, fast_rabi, true});
            evolve_free(arr, tau);
            apply_pulse(arr, {kPi / 2.0, kPi / 3.0, fast_rabi, true});
        };
        run(a);
        run(ref);
        for (int i = 0; i < 8; ++i) CHECK_THAT(a.sites[i].p1, WithinAbs(ref.sites[i].p1, 1e-9));
    }
}

TEST_CASE("channels preserve density-matrix validity") {
    Rng rng(24);
    for (int rep = 0; rep < 10000; ++rep) {
        QubitState q;
        q.present = true;
        q.p1 = rng.uniform();
        const double bound = std::sqrt(q.p1 * (1.0 - q.p1));
        q.coherence = std::polar(bound * rng.uniform(), rng.uniform(0.0, kTwoPi));
        switch (rng.raw() % 6) {
            case 0: pulse_qubit(q, {rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi), 1.4e3, true},
                                rng.uniform(-500.0, 500.0)); break;
            case 1: imprint_phase(q, rng.uniform(-10.0, 10.0)); break;
            case 2: dephase_qubit(q, rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)); break;
            case 3: free_evolve_qubit(q, rng.uniform(-100.0, 100.0), rng.uniform(0.0, 1.0)); break;
            case 4: project_qubit(q, rng.bernoulli(0.5) ? TargetState::one : TargetState::zero,
                                  rng.bernoulli(0.5)); break;
            default: pump_qubit(q, TargetState::one); break;
        }
        REQUIRE(q.valid());
    }
}

TEST_CASE("optical pumping on the array") {
    ArrayState a = row_array(3);
    a.sites[0] = QubitState::atom_in_0();
    a.sites[1] = QubitState::empty();
    a.sites[2] = QubitState{true, 0.5, {0.4, 0.1}};
    auto rngs = make_site_rngs(3, 99);

    optical_pump(a, {0, 1, 2}, 0.0, rngs);
    CHECK(a.sites[0].p1 == 1.0);
    CHECK(a.sites[0].coherence == cplx(0.0, 0.0));
    CHECK_FALSE(a.sites[1].present);
    CHECK(a.sites[2].p1 == 1.0);

    // non-selected sites untouched
    ArrayState b = row_array(2);
    b.sites[0] = QubitState{true, 0.5, {0.5, 0.0}};
    optical_pump(b, {1}, 0.0, rngs);
    CHECK(b.sites[0].p1 == 0.5);

    // failed pump leaves the atom as-is
    ArrayState c = row_array(1);
    c.sites[0] = QubitState::atom_in_0();
    optical_pump(c, {0}, 1.0, rngs);
    CHECK(c.sites[0].p1 == 0.0);
}

TEST_CASE("array initialization") {
    auto rngs = make_site_rngs(70, 7);
    RoleLayout checker{RoleLayout::Kind::checkerboard, 0, 0, 0, 0};
    ArrayState full = initialize_array(7, 10, 1.0, checker, rngs);
    CHECK(full.occupied_count() == 70);
    for (const auto& q : full.sites) {
        CHECK(q.present);
        CHECK(q.p1 == 1.0); // prepared in |1>
    }
    CHECK(full.roles[full.index(0, 0)] == Role::data);
    CHECK(full.roles[full.index(0, 1)] == Role::ancilla);
    CHECK(full.sites_with_role(Role::data).size() == 35);

    // Bernoulli occupancy at fill 0.5: mean over trials within 3 sigma
    double total = 0.0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
        auto r = make_site_rngs(70, derive_seed(1234, t));
        total += initialize_array(7, 10, 0.5, checker, r).occupied_count();
    }
    const double mean = total / trials;
    const double sigma = std::sqrt(70 * 0.25 / trials);
    CHECK_THAT(mean, WithinAbs(35.0, 3.0 * sigma));

    // reservoir-wrapped checkerboard block
    RoleLayout sub{RoleLayout::Kind::subarray, 2, 3, 3, 4};
    ArrayState s = initialize_array(7, 10, 0.5, sub, rngs, 1.0);
    CHECK(s.sites_with_role(Role::reservoir).size() == 70 - 12);
    CHECK(s.sites_with_role(Role::data).size() + s.sites_with_role(Role::ancilla).size() == 12);
    for (int i : s.sites_with_role(Role::data)) CHECK(s.sites[i].present);
    for (int i : s.sites_with_role(Role::ancilla)) CHECK(s.sites[i].present);
}

TEST_CASE("hiding mask sampling") {
    ArrayState a = row_array(40);
    auto rngs = make_site_rngs(40, 31);
    std::vector<bool> mask(40, false);
    for (int i = 0; i < 40; i += 2) mask[i] = true;
    set_hiding(a, mask, rngs, 74.0, 6.0);
    double sum = 0.0;
    int n = 0;
    for (int i = 0; i < 40; ++i) {
        if (!mask[i]) {
            CHECK(a.hide_shift_mhz[i] == 0.0);
            continue;
        }
        CHECK(a.hidden[i]);
        CHECK(a.hide_shift_mhz[i] > 0.0);
        sum += a.hide_shift_mhz[i];
        ++n;
    }
    CHECK(n == 20);
    CHECK_THAT(sum / n, WithinAbs(74.0, 5.0));
    clear_hiding(a);
    for (int i = 0; i < 40; ++i) CHECK_FALSE(a.hidden[i]);
}

TEST_CASE("snapshot renders roles and occupancy") {
    ArrayState a = row_array(2);
    a.sites[1] = QubitState::empty();
    a.hidden[0] = true;
    const std::string s = snapshot(a);
    CHECK(s.find("1x2") != std::string::npos);
    CHECK(s.find("D*h") != std::string::npos);
    CHECK(s.find("D.") != std::string::npos);
}
