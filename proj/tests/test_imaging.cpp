#include "mcm/imaging.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace mcm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Rig {
    AtomicConstants constants;
    ImagingParams imaging;
    CameraModel camera;
    NoiseParams noise;
    ToneLedger ledger = base_tone_ledger();
    std::vector<Rng> rngs;

    Rig(int n, std::uint64_t seed) {
        for (int i = 0; i < n; ++i) rngs.emplace_back(derive_seed(seed, i));
    }
};

ArrayState full_row(int n) {
    ArrayState a;
    a.rows = 1;
    a.cols = n;
    a.roles.assign(n, Role::ancilla);
    a.sites.assign(n, QubitState::atom_in_1());
    a.hidden.assign(n, false);
    a.hide_shift_mhz.assign(n, 0.0);
    a.detuning_hz.assign(n, 0.0);
    return a;
}

} // namespace

TEST_CASE("classify_frame thresholds with ties bright") {
    ImageFrame f;
    f.counts = {8.999, 9.0, 31.0, -3.0};
    const auto bright = classify_frame(f, 9.0);
    CHECK_FALSE(bright[0]);
    CHECK(bright[1]); // tie classifies bright
    CHECK(bright[2]);
    CHECK_FALSE(bright[3]);
    CHECK_THROWS_AS(classify_frame(f, std::nan("")), std::invalid_argument);
}

TEST_CASE("empty and dark sites emit camera background only") {
    Rig rig(2000, 41);
    ArrayState a = full_row(2000);
    for (int i = 0; i < 2000; i += 2) a.sites[i] = QubitState::empty();
    for (int i = 1; i < 2000; i += 2) a.sites[i] = QubitState::atom_in_0(); // dark for |1> imaging

    const ImageFrame f = simulate_image(a, TargetState::one, rig.imaging, rig.camera, rig.constants,
                                        rig.ledger, rig.noise, rig.rngs);
    double sum = 0.0, sum2 = 0.0;
    for (double c : f.counts) {
        sum += c;
        sum2 += c * c;
    }
    const double mean = sum / 2000.0;
    const double std = std::sqrt(sum2 / 2000.0 - mean * mean);
    CHECK_THAT(mean, WithinAbs(0.0, 3.0 * 2.5 / std::sqrt(2000.0)));
    CHECK_THAT(std, WithinAbs(2.5, 0.15));
    for (const auto& t : f.truth) CHECK_FALSE(t.bright);
}

TEST_CASE("bright atoms register ~31 signal counts and project onto the target") {
    Rig rig(5000, 42);
    ArrayState a = full_row(5000);
    const ImageFrame f = simulate_image(a, TargetState::one, rig.imaging, rig.camera, rig.constants,
                                        rig.ledger, rig.noise, rig.rngs);
    double sum = 0.0, sum2 = 0.0;
    int n = 0;
    for (int i = 0; i < 5000; ++i) {
        REQUIRE(f.truth[i].bright);
        sum += f.counts[i];
        sum2 += f.counts[i] * f.counts[i];
        ++n;
    }
    const double mean = sum / n;
    CHECK_THAT(mean, WithinAbs(31.3, 0.3));
    CHECK_THAT(std::sqrt(sum2 / n - mean * mean), WithinAbs(6.24, 0.3));
    // atoms not lost stay projected in |1>
    for (int i = 0; i < 5000; ++i)
        if (a.sites[i].present && !f.truth[i].spin_flipped) CHECK(a.sites[i].p1 == 1.0);
}

TEST_CASE("projection of an equal superposition and repeatability") {
    Rig rig(20000, 43);
    ArrayState a = full_row(20000);
    for (auto& q : a.sites) {
        q.p1 = 0.5;
        q.coherence = {0.5, 0.0};
    }
    const ImageFrame f1 = simulate_image(a, TargetState::one, rig.imaging, rig.camera, rig.constants,
                                         rig.ledger, rig.noise, rig.rngs);
    int bright1 = 0;
    for (const auto& t : f1.truth) bright1 += t.bright ? 1 : 0;
    const double frac = bright1 / 20000.0;
    CHECK_THAT(frac, WithinAbs(0.5, 3.0 * 0.5 / std::sqrt(20000.0)));

    // a second image reproduces the first outcome up to loss/flip rates
    const ImageFrame f2 = simulate_image(a, TargetState::one, rig.imaging, rig.camera, rig.constants,
                                         rig.ledger, rig.noise, rig.rngs);
    int disagree = 0;
    for (int i = 0; i < 20000; ++i) disagree += f1.truth[i].bright != f2.truth[i].bright ? 1 : 0;
    CHECK(disagree < 20000 * 0.006); // ~0.4% loss dominates the disagreement
}

TEST_CASE("no-signaling: hidden populations are untouched bit-for-bit") {
    Rig rig(64, 44);
    rig.noise.hide_phase_jitter_rad = 0.06;
    ArrayState a = full_row(64);
    std::vector<bool> mask(64, false);
    for (int i = 0; i < 64; i += 2) mask[i] = true;
    set_hiding(a, mask, rig.rngs, 74.0, 6.0);
    std::vector<double> p_before(64);
    for (int i = 0; i < 64; ++i) {
        a.sites[i].p1 = 0.25 + 0.5 * (i % 3) / 3.0;
        const double bound = std::sqrt(a.sites[i].p1 * (1.0 - a.sites[i].p1));
        a.sites[i].coherence = std::polar(0.9 * bound, 0.3 * i);
        p_before[i] = a.sites[i].p1;
    }
    for (int rep = 0; rep < 10; ++rep)
        simulate_image(a, TargetState::one, rig.imaging, rig.camera, rig.constants, rig.ledger,
                       rig.noise, rig.rngs);
    for (int i = 0; i < 64; i += 2) {
        REQUIRE(a.sites[i].present);
        CHECK(a.sites[i].p1 == p_before[i]); // exact: populations never touched
    }
}

TEST_CASE("hidden-site imprint and residual scattering at the defaults") {
    Rig rig(1, 45);
    rig.noise.hide_phase_jitter_rad = 0.0;
    ArrayState a = full_row(1);
    std::vector<bool> mask{true};
    set_hiding(a, mask, rig.rngs, 74.0, 0.0); // pinned shift
    a.sites[0].p1 = 0.5;
    a.sites[0].coherence = {0.5, 0.0};

    simulate_image(a, TargetState::one, rig.imaging, rig.camera, rig.constants, rig.ledger,
                   rig.noise, rig.rngs);
    CHECK_THAT(std::arg(a.sites[0].coherence), WithinAbs(-1.59, 1e-6));
    CHECK_THAT(std::abs(a.sites[0].coherence), WithinRel(0.5 * (1.0 - 5.019e-3), 1e-3));
}

TEST_CASE("repeated imaging decays geometrically with the configured loss") {
    Rig rig(50, 46);
    rig.constants.raman_flip_branch = 0.0; // isolate the per-photon loss channel
    rig.ledger = ToneLedger{};
    const double p_loss = 1.0 - std::exp(-30.0 * rig.constants.loss_per_collected_photon);

    const int trials = 400, sites = 50, images = 20;
    std::vector<long> bright(images, 0);
    for (int t = 0; t < trials; ++t) {
        Rig local(sites, derive_seed(777, t));
        local.constants.raman_flip_branch = 0.0;
        local.ledger = ToneLedger{};
        ArrayState a = full_row(sites);
        for (int k = 0; k < images; ++k) {
            const ImageFrame f = simulate_image(a, TargetState::one, local.imaging, local.camera,
                                                local.constants, local.ledger, local.noise, local.rngs);
            for (const auto& tr : f.truth) bright[k] += tr.bright ? 1 : 0;
        }
    }
    const double n = static_cast<double>(trials) * sites;
    for (int k = 0; k < images; ++k) {
        const double expect = std::pow(1.0 - p_loss, k);
        const double sigma = std::sqrt(std::max(expect * (1.0 - expect), 1e-9) / n);
        CHECK_THAT(bright[k] / n, WithinAbs(expect, 3.5 * sigma + 1e-4));
    }
}

TEST_CASE("hiding-condition brightness shift") {
    Rig rig(4000, 47);
    ArrayState a = full_row(4000);
    std::vector<bool> mask(4000, false);
    mask[0] = true; // any hidden site flips the frame into the hiding condition
    set_hiding(a, mask, rig.rngs, 74.0, 6.0);
    const ImageFrame f = simulate_image(a, TargetState::one, rig.imaging, rig.camera, rig.constants,
                                        mcm_tone_ledger(), rig.noise, rig.rngs);
    CHECK(f.hiding_active);
    double sum = 0.0;
    int n = 0;
    for (int i = 1; i < 4000; ++i) {
        sum += f.counts[i];
        ++n;
    }
    CHECK_THAT(sum / n, WithinAbs(33.0, 0.4));
}

TEST_CASE("threshold misclassification stays below 2e-4 at the defaults") {
    Rig rig(50000, 49);
    ArrayState a = full_row(50000);
    for (int i = 0; i < 50000; i += 2) a.sites[i] = QubitState::atom_in_0(); // dark half
    const ImageFrame f = simulate_image(a, TargetState::one, rig.imaging, rig.camera, rig.constants,
                                        rig.ledger, rig.noise, rig.rngs);
    const auto bright = classify_frame(f, rig.camera.threshold);
    long wrong = 0;
    for (int i = 0; i < 50000; ++i) wrong += bright[i] != f.truth[i].bright ? 1 : 0;
    CHECK(wrong <= 50000 * 2e-4);
}

TEST_CASE("dummy-length exposures scale the photon number") {
    Rig rig(200, 48);
    ArrayState a = full_row(200);
    const ImageFrame f = simulate_image(a, TargetState::one, rig.imaging, rig.camera, rig.constants,
                                        rig.ledger, rig.noise, rig.rngs, 50e-3);
    double collected = 0.0;
    for (const auto& t : f.truth) collected += t.collected;
    CHECK_THAT(collected / 200.0, WithinAbs(300.0, 12.0));
}
