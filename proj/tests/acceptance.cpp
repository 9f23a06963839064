// Acceptance suite: runs every canned experiment at full statistics and
// checks each headline number against its pinned band, printing one
// pass/fail line per criterion. Exit code is nonzero if any criterion fails.

#include "mcm/table1.hpp"

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

using namespace mcm;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& details) {
    std::printf("[%s] %-45s %s\n", pass ? "PASS" : "FAIL", name.c_str(), details.c_str());
    if (!pass) ++g_failures;
}

void report(const CheckResult& c) {
    if (!c.gating) {
        std::printf("[%s] %-45s %s (informational)\n", c.pass ? "pass" : "fail", c.name.c_str(),
                    c.details.c_str());
        return;
    }
    report(c.name, c.pass, c.details);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScenarioConfig base_config(const std::string& scenario, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.scenario = scenario;
    cfg.seed = seed;
    cfg.threads = 0; // all cores
    return cfg;
}

// --- criterion 1: error-rate table ----------------------------------------

void criterion_table1() {
    std::puts("\n-- error-rate table (repeated-image loss, dummy-image flips) --");
    const auto t0 = std::chrono::steady_clock::now();
    const Table1Outcome out = scenario_table1(base_config("table1", 1001));
    const double elapsed = seconds_since(t0);
    for (const auto& c : out.log.checks) report(c);
    report("table1.runtime_under_5min", elapsed < 300.0, fmt(elapsed) + " s");
}

// --- criteria 2 and 3: Ramsey fringes and count histograms ----------------

void criterion_fig2() {
    std::puts("\n-- mid-circuit measurement fringes and histograms --");
    const Fig2Outcome out = scenario_fig2(base_config("fig2", 1002));
    for (const auto& c : out.log.checks) report(c);
}

// --- criterion 4: inverse-shift fit ----------------------------------------

void criterion_fig3() {
    std::puts("\n-- hiding-shift sweep --");
    const Fig3Outcome out = scenario_fig3(base_config("fig3", 1003));
    for (const auto& c : out.log.checks) report(c);
}

// --- criterion 5: conditional refill ---------------------------------------

void criterion_fig4() {
    std::puts("\n-- repeated measurement and conditional refill --");
    const Fig4Outcome out = scenario_fig4(base_config("fig4", 1004));
    for (const auto& c : out.log.checks) report(c);
}

// --- criterion 6: decoherence while the atom source runs -------------------

void criterion_fig5() {
    std::puts("\n-- contrast decay under source loading --");
    const Fig5Outcome out = scenario_fig5(base_config("fig5", 1005));
    for (const auto& c : out.log.checks) report(c);
}

// --- criterion 7: closed forms ---------------------------------------------

void criterion_closed_forms() {
    std::puts("\n-- closed-form error budgets --");
    const AtomicConstants constants;
    const ImagingParams imaging;

    const double raman = raman_loss_budget(30.0, 0.04, {5e-7, 1.7e-6});
    report("closed_form.raman_loss_budget", std::abs(raman - 1.65e-3) < 1e-12 * 1.65e-3,
           fmt(raman) + " == 1.65e-3");

    const double scatter =
        scattering_rate(imaging.saturation, kTwoPi * 74e6, constants.gamma_angular()) *
        imaging.duration_s;
    report("closed_form.hidden_site_scatter", std::abs(scatter - 5.0e-3) <= 0.1 * 5.0e-3,
           fmt(scatter) + " within 10% of 5.0e-3");

    const double factor = contrast_from_phase_spread(0.14);
    report("closed_form.contrast_from_phase_spread", std::abs(factor - 0.9902) <= 1e-4,
           fmt(factor) + " within 1e-4 of 0.9902");
}

// --- criterion 8: property suites ------------------------------------------

void property_positivity() {
    Rng rng(8001);
    long violations = 0;
    const long n = 100000;
    for (long rep = 0; rep < n; ++rep) {
        QubitState q;
        q.present = true;
        q.p1 = rng.uniform();
        const double bound = std::sqrt(q.p1 * (1.0 - q.p1));
        q.coherence = std::polar(bound * rng.uniform(), rng.uniform(0.0, kTwoPi));
        switch (rng.raw() % 7) {
            case 0: pulse_qubit(q, {rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi), 1.4e3, true},
                                rng.uniform(-500.0, 500.0)); break;
            case 1: imprint_phase(q, rng.uniform(-10.0, 10.0)); break;
            case 2: dephase_qubit(q, rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)); break;
            case 3: free_evolve_qubit(q, rng.uniform(-100.0, 100.0), rng.uniform(0.0, 1.0)); break;
            case 4: depolarize_qubit(q, rng.uniform(0.0, 0.2)); break;
            case 5: project_qubit(q, rng.bernoulli(0.5) ? TargetState::one : TargetState::zero,
                                  rng.bernoulli(0.5)); break;
            default: pump_qubit(q, rng.bernoulli(0.5) ? TargetState::one : TargetState::zero); break;
        }
        if (!q.valid()) ++violations;
    }
    report("property.density_matrix_positivity", violations == 0,
           fmt(violations) + " violations in " + fmt(n) + " randomized channel applications");
}

void property_echo() {
    Rng rng(8002);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        ArrayState a;
        a.rows = 1;
        a.cols = 8;
        a.roles.assign(8, Role::data);
        a.sites.assign(8, QubitState::atom_in_1());
        a.hidden.assign(8, false);
        a.hide_shift_mhz.assign(8, 0.0);
        a.detuning_hz.assign(8, 0.0);
        ArrayState ref = a;
        for (int i = 0; i < 8; ++i) a.detuning_hz[i] = rng.uniform(-80.0, 80.0);
        const double tau = rng.uniform(0.05, 0.5);
        auto run = [&](ArrayState& arr) {
            apply_pulse(arr, {kPi / 2.0, 0.0, 1e12, true});
            evolve_free(arr, tau);
            apply_pulse(arr, {kPi, 0.0, 1e12, true});
            evolve_free(arr, tau);
            apply_pulse(arr, {kPi / 2.0, kPi / 3.0, 1e12, true});
        };
        run(a);
        run(ref);
        for (int i = 0; i < 8; ++i) worst = std::max(worst, std::abs(a.sites[i].p1 - ref.sites[i].p1));
    }
    report("property.echo_cancellation", worst <= 1e-9, "max deviation " + fmt(worst) + " <= 1e-9");
}

void property_wilson_coverage() {
    Rng rng(8003);
    const int sims = 10000, n = 100;
    long covered_all = 0;
    std::string detail;
    for (double p : {0.01, 0.1, 0.5}) {
        int covered = 0;
        for (int s = 0; s < sims; ++s) {
            long k = 0;
            for (int i = 0; i < n; ++i) k += rng.bernoulli(p) ? 1 : 0;
            const Interval w = wilson_interval(k, n);
            covered += (p >= w.low && p <= w.high) ? 1 : 0;
        }
        covered_all += covered;
        detail += "p=" + fmt(p) + ": " + fmt(covered / static_cast<double>(sims)) + "  ";
    }
    const double coverage = covered_all / (3.0 * sims);
    report("property.wilson_coverage", coverage >= 0.93,
           detail + "aggregate " + fmt(coverage) + " >= 0.93");
}

void property_self_consistency() {
    Rng rng(8004);
    // each fitter: 100 randomized generate-from-model instances; at least 95
    // must land every parameter within 3 fitted standard errors (the errors
    // are residual-based estimates, hence the finite-sample allowance)
    int good_exp = 0, good_fringe = 0, good_inv = 0, good_lin = 0, good_dg = 0;

    for (int rep = 0; rep < 100; ++rep) {
        const double a = rng.uniform(0.4, 1.0), r = rng.uniform(0.005, 0.15);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 20; ++i)
            pts.push_back({i, std::clamp(a * std::exp(-r * i) + rng.normal(0.0, 0.004), 0.0, 1.0)});
        const DecayFit fit = fit_exponential_decay(pts);
        good_exp += std::abs(fit.rate - r) <= 3.0 * fit.rate_error ? 1 : 0;
    }
    for (int rep = 0; rep < 100; ++rep) {
        const double c = rng.uniform(0.2, 0.95), ph = rng.uniform(-2.5, 2.5);
        std::vector<double> phases, fracs, counts;
        for (int i = 0; i < 12; ++i) {
            const double phi = kTwoPi * i / 12.0;
            const double p = 0.5 + 0.5 * c * std::cos(phi - ph);
            long k = 0;
            for (int s = 0; s < 800; ++s) k += rng.bernoulli(p) ? 1 : 0;
            phases.push_back(phi);
            fracs.push_back(k / 800.0);
            counts.push_back(800);
        }
        const FringeFit fit = fit_ramsey_fringe(phases, fracs, binomial_weights(fracs, counts));
        good_fringe += (std::abs(fit.contrast - c) <= 3.0 * fit.contrast_error + 1e-4 &&
                        std::abs(wrap_phase(fit.phase - ph)) <= 3.0 * fit.phase_error + 1e-4)
                           ? 1
                           : 0;
    }
    for (int rep = 0; rep < 100; ++rep) {
        const double c = rng.uniform(80.0, 250.0), off = rng.uniform(-1.0, 1.0);
        std::vector<double> shifts, phases;
        for (int i = 0; i < 10; ++i) shifts.push_back(12.0 + 9.0 * i);
        for (double s : shifts) phases.push_back(c / s + off + rng.normal(0.0, 0.02));
        const InverseShiftFit fit = fit_inverse_shift(shifts, phases);
        good_inv += (std::abs(fit.coefficient_rad_mhz - c) <= 3.0 * fit.coefficient_error + 1e-6 &&
                     std::abs(fit.offset_rad - off) <= 3.0 * fit.offset_error + 1e-6)
                        ? 1
                        : 0;
    }
    for (int rep = 0; rep < 100; ++rep) {
        const double r = rng.uniform(0.005, 0.06);
        std::vector<double> t, y;
        for (int i = 0; i < 8; ++i) {
            t.push_back(0.25 * (i + 1));
            y.push_back(1.0 - r * t.back() + rng.normal(0.0, 0.003));
        }
        const LinearDecayFit fit = fit_linear_decay(t, y);
        good_lin += std::abs(fit.rate_per_s - r) <= 3.0 * fit.rate_error + 1e-6 ? 1 : 0;
    }
    for (int rep = 0; rep < 100; ++rep) {
        const double mu0 = rng.uniform(-1.0, 1.0), mu1 = rng.uniform(25.0, 40.0);
        const double s0 = rng.uniform(2.0, 3.0), s1 = rng.uniform(5.0, 7.0);
        std::vector<double> samples;
        for (int i = 0; i < 8000; ++i) samples.push_back(rng.normal(mu0, s0));
        for (int i = 0; i < 8000; ++i) samples.push_back(rng.normal(mu1, s1));
        const GaussianPairFit fit = fit_double_gaussian(samples);
        good_dg += (fit.ok && std::abs(fit.mu0 - mu0) <= 3.0 * fit.mu0_error + 1e-3 &&
                    std::abs(fit.mu1 - mu1) <= 3.0 * fit.mu1_error + 1e-3)
                       ? 1
                       : 0;
    }
    auto line = [&](const std::string& name, int good) {
        report("property.self_consistency." + name, good >= 95, fmt(good) + "/100 within 3 SE");
    };
    line("exponential", good_exp);
    line("fringe", good_fringe);
    line("inverse_shift", good_inv);
    line("linear", good_lin);
    line("double_gaussian", good_dg);
}

void property_determinism() {
    ScenarioConfig cfg;
    cfg.scenario = "fig5";
    cfg.trials = 240;
    cfg.seed = 77;
    cfg.fig5_holds_s = {0.3, 0.6, 0.9};
    cfg.frames_dump_trials = 2;
    cfg.threads = 1;
    const std::string a = run_scenario(cfg).to_text();
    const std::string b = run_scenario(cfg).to_text();
    cfg.threads = 4;
    const std::string c = run_scenario(cfg).to_text();
    report("property.determinism_replay", a == b, "two runs, same seed: byte-identical logs");
    report("property.determinism_workers", a == c, "1 vs 4 workers: byte-identical logs");
}

void criterion_properties() {
    std::puts("\n-- property suites --");
    property_positivity();
    property_echo();
    property_wilson_coverage();
    property_self_consistency();
    property_determinism();
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_closed_forms();
    criterion_properties();
    criterion_table1();
    criterion_fig2();
    criterion_fig3();
    criterion_fig4();
    criterion_fig5();

    std::printf("\n%s: %d failing criterion check(s), %.1f s total\n",
                g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", g_failures,
                seconds_since(t0));
    return g_failures == 0 ? 0 : 1;
}
