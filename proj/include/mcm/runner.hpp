#pragma once

// Scenario configuration, the trial pool, and shared aggregation machinery.
//
// Trials are independent work units: trial i derives its seed from the
// master seed alone, and workers aggregate into integer counters that merge
// exactly, so any worker count produces identical statistics and logs.

#include "mcm/estimators.hpp"
#include "mcm/sequence.hpp"
#include "mcm/table_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

namespace mcm {

inline constexpr int kConfigVersion = 1;

struct ScenarioConfig {
    std::string scenario = "fig2";
    ExperimentParams params;
    long trials = -1; // negative: scenario default; 0 runs no trials
    std::uint64_t seed = 20230517;
    int threads = 1; // 0: hardware concurrency
    int phase_points = 12;
    long frames_dump_trials = 0;
    std::string out_dir;

    double fig2_pre_wait_s = 1e-3;
    double fig2_post_wait_s = 2e-3;

    std::vector<double> fig3_shifts_mhz{15.0, 25.0, 40.0, 74.0};

    int fig4_max_cycles = 16;
    double fig4_total_hold_s = 0.6;
    double fig4_window_min_s = 0.010;
    double fig4_window_max_s = 0.030;
    double fig4_subarray_fill = 0.99;
    // Calibration: extra per-image loss of imaged (non-hidden) atoms under
    // the hiding condition, frozen against the observed 1.1%/cycle filling
    // decay without refill.
    double fig4_ancilla_excess_loss = 0.006755;

    std::vector<double> fig5_holds_s{0.5, 1.0, 1.5, 2.0};

    double table1_dummy_base_s = 0.2;
    double table1_dummy_mcm_s = 0.05;

    std::string custom_sequence; // step list for the `custom` scenario

    int effective_threads() const {
        if (threads > 0) return threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw ? static_cast<int>(hw) : 1;
    }

    static ScenarioConfig from_config(const Config& cfg) {
        ScenarioConfig sc;
        const long version = cfg.get_int("config_version", kConfigVersion);
        if (version != kConfigVersion)
            throw ConfigError("unsupported config_version " + std::to_string(version));
        sc.scenario = cfg.get_string("scenario", sc.scenario);
        sc.trials = cfg.get_int("trials", sc.trials);
        sc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long>(sc.seed)));
        sc.threads = static_cast<int>(cfg.get_int("threads", sc.threads));
        sc.phase_points = static_cast<int>(cfg.get_int("phase_points", sc.phase_points));
        sc.frames_dump_trials = cfg.get_int("frames_dump_trials", sc.frames_dump_trials);
        sc.out_dir = cfg.get_string("out_dir", sc.out_dir);

        ExperimentParams& p = sc.params;
        p.rows = static_cast<int>(cfg.get_int("array.rows", p.rows));
        p.cols = static_cast<int>(cfg.get_int("array.cols", p.cols));
        p.fill_prob = cfg.get_number("array.fill_prob", p.fill_prob);
        const std::string roles = cfg.get_string("array.roles", "checkerboard");
        if (roles == "checkerboard") {
            p.layout.kind = RoleLayout::Kind::checkerboard;
        } else if (roles == "subarray") {
            p.layout.kind = RoleLayout::Kind::subarray;
        } else if (roles == "all_data") {
            p.layout.kind = RoleLayout::Kind::all_data;
        } else {
            throw ConfigError("key `array.roles`: expected checkerboard|subarray|all_data, got `" +
                              roles + "`");
        }
        p.layout.sub_row0 = static_cast<int>(cfg.get_int("array.subarray_row0", 2));
        p.layout.sub_col0 = static_cast<int>(cfg.get_int("array.subarray_col0", 3));
        p.layout.sub_rows = static_cast<int>(cfg.get_int("array.subarray_rows", 3));
        p.layout.sub_cols = static_cast<int>(cfg.get_int("array.subarray_cols", 4));

        load(p.constants, cfg);
        load(p.imaging, cfg);
        load(p.camera, cfg);
        load(p.noise, cfg);
        load(p.ledger_base, cfg, "tones.base");
        load(p.ledger_mcm, cfg, "tones.mcm");
        p.timing.handoff_s = cfg.get_number("rearrange.handoff_s", p.timing.handoff_s);
        p.timing.transit_per_site_s =
            cfg.get_number("rearrange.transit_per_site_s", p.timing.transit_per_site_s);
        p.timing.overhead_s = cfg.get_number("rearrange.overhead_s", p.timing.overhead_s);
        p.move_loss_prob = cfg.get_number("rearrange.move_loss_prob", p.move_loss_prob);

        sc.fig2_pre_wait_s = cfg.get_number("fig2.pre_wait_s", sc.fig2_pre_wait_s);
        sc.fig2_post_wait_s = cfg.get_number("fig2.post_wait_s", sc.fig2_post_wait_s);
        sc.fig3_shifts_mhz = cfg.get_list("fig3.shifts_mhz", sc.fig3_shifts_mhz);
        sc.fig4_max_cycles = static_cast<int>(cfg.get_int("fig4.max_cycles", sc.fig4_max_cycles));
        sc.fig4_total_hold_s = cfg.get_number("fig4.total_hold_s", sc.fig4_total_hold_s);
        sc.fig4_window_min_s = cfg.get_number("fig4.window_min_s", sc.fig4_window_min_s);
        sc.fig4_window_max_s = cfg.get_number("fig4.window_max_s", sc.fig4_window_max_s);
        sc.fig4_subarray_fill = cfg.get_number("fig4.subarray_fill", sc.fig4_subarray_fill);
        sc.fig4_ancilla_excess_loss =
            cfg.get_number("fig4.ancilla_excess_loss", sc.fig4_ancilla_excess_loss);
        sc.fig5_holds_s = cfg.get_list("fig5.hold_times_s", sc.fig5_holds_s);
        sc.table1_dummy_base_s = cfg.get_number("table1.dummy_base_s", sc.table1_dummy_base_s);
        sc.table1_dummy_mcm_s = cfg.get_number("table1.dummy_mcm_s", sc.table1_dummy_mcm_s);
        sc.custom_sequence = cfg.get_string("custom.sequence", sc.custom_sequence);

        cfg.reject_unknown_keys();
        sc.validate();
        return sc;
    }

    void validate() const {
        if (trials < -1) throw ConfigError("key `trials`: must be >= 0");
        if (phase_points < 4) throw ConfigError("key `phase_points`: need at least 4 phases");
        if (params.rows <= 0 || params.cols <= 0)
            throw ConfigError("key `array.rows`/`array.cols`: must be positive");
        if (!(params.fill_prob >= 0.0 && params.fill_prob <= 1.0))
            throw ConfigError("key `array.fill_prob`: must be in [0, 1]");
        if (fig4_max_cycles < 0 || fig4_max_cycles % 2 != 0)
            throw ConfigError("key `fig4.max_cycles`: must be even (echo at the midpoint)");
        for (double s : fig3_shifts_mhz)
            if (!(s > 0.0)) throw ConfigError("key `fig3.shifts_mhz`: shifts must be > 0");
        for (double t : fig5_holds_s)
            if (!(t > 0.0)) throw ConfigError("key `fig5.hold_times_s`: holds must be > 0");
    }
};

// --- deterministic trial pool ---------------------------------------------

// body(trial_index, accum) runs for each trial; Accum must merge exactly
// (integer counters), so the partition into workers cannot change results.
template <typename Accum, typename Body>
Accum map_reduce_trials(long trials, int threads, std::vector<std::string>& errors, Body body) {
    threads = std::max(1, threads);
    if (trials < threads) threads = std::max<long>(1, trials);
    std::vector<Accum> partial(threads);
    std::vector<std::vector<std::string>> errs(threads);

    auto work = [&](int w) {
        const long lo = trials * w / threads;
        const long hi = trials * (w + 1) / threads;
        for (long t = lo; t < hi; ++t) {
            try {
                body(t, partial[w]);
            } catch (const std::exception& e) {
                errs[w].push_back("trial " + std::to_string(t) + ": " + e.what());
            }
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    Accum total = std::move(partial[0]);
    for (int w = 1; w < threads; ++w) total.merge(partial[w]);
    for (auto& v : errs)
        for (auto& e : v) errors.push_back(std::move(e));
    return total;
}

// --- fringe accumulation ---------------------------------------------------

enum class SiteClass : int { data = 0, ancilla = 1, all = 2 };

struct FringeAccum {
    int phase_points = 0;
    int n_sites = 0;
    // [class][phase] post-selected readout counts
    std::array<std::vector<long>, 3> bright{}, total{};
    // [site][phase] for site-resolved analysis
    std::vector<std::vector<long>> site_bright, site_total;
    // exact-readout sums, [class][phase]
    std::array<std::vector<double>, 3> expected_sum{};
    std::array<std::vector<long>, 3> expected_n{};
    // histogram samples (collected for a bounded number of trials)
    std::vector<double> hist_samples;
    long post_selected_sites = 0;
    std::vector<ImageFrame> dumped_frames;
    std::vector<long> dumped_trials;

    void init(int phases, int sites) {
        phase_points = phases;
        n_sites = sites;
        for (int c = 0; c < 3; ++c) {
            bright[c].assign(phases, 0);
            total[c].assign(phases, 0);
            expected_sum[c].assign(phases, 0.0);
            expected_n[c].assign(phases, 0);
        }
        site_bright.assign(sites, std::vector<long>(phases, 0));
        site_total.assign(sites, std::vector<long>(phases, 0));
    }

    void merge(const FringeAccum& o) {
        if (o.phase_points == 0) return;
        if (phase_points == 0) {
            *this = o;
            return;
        }
        for (int c = 0; c < 3; ++c) {
            for (int i = 0; i < phase_points; ++i) {
                bright[c][i] += o.bright[c][i];
                total[c][i] += o.total[c][i];
                expected_sum[c][i] += o.expected_sum[c][i];
                expected_n[c][i] += o.expected_n[c][i];
            }
        }
        for (int s = 0; s < n_sites; ++s)
            for (int i = 0; i < phase_points; ++i) {
                site_bright[s][i] += o.site_bright[s][i];
                site_total[s][i] += o.site_total[s][i];
            }
        hist_samples.insert(hist_samples.end(), o.hist_samples.begin(), o.hist_samples.end());
        post_selected_sites += o.post_selected_sites;
        dumped_frames.insert(dumped_frames.end(), o.dumped_frames.begin(), o.dumped_frames.end());
        dumped_trials.insert(dumped_trials.end(), o.dumped_trials.begin(), o.dumped_trials.end());
    }
};

struct FringeArmSpec {
    // builds the step list for one trial's scanned phase
    std::function<std::vector<SequenceStep>(double phase)> steps;
    // which image supplies histogram samples: 0 none, 1 readout counts, 2 mcm counts
    int hist_source = 0;
    SiteClass hist_class = SiteClass::all;
    long hist_trials = 0; // trials contributing histogram samples
};

// Derive the per-run static hide-map seed from the master seed.
inline std::uint64_t hide_map_seed_for(const ScenarioConfig& cfg) {
    return derive_seed(cfg.seed, 0x48494445); // "HIDE"
}

// Runs `trials` trials of a phase-scanned sequence and accumulates
// post-selected fringe statistics per class and per site.
inline FringeAccum run_fringe_arm(const ScenarioConfig& cfg, const ExperimentParams& base_params,
                                  const FringeArmSpec& spec, long trials,
                                  std::vector<std::string>& errors) {
    const int phases = cfg.phase_points;
    ExperimentParams params = base_params;
    if (params.hide_map_seed == 0) params.hide_map_seed = hide_map_seed_for(cfg);
    const int n_sites = params.rows * params.cols;

    return map_reduce_trials<FringeAccum>(
        trials, cfg.effective_threads(), errors, [&](long trial, FringeAccum& acc) {
            if (acc.phase_points == 0) acc.init(phases, n_sites);
            const int phase_idx = static_cast<int>(trial % phases);
            const double phase = kTwoPi * phase_idx / phases;
            const bool dump = trial < cfg.frames_dump_trials;

            TrialExecutor exec(params, derive_seed(cfg.seed, trial), dump);
            const TrialRecord rec = exec.run(spec.steps(phase));
            const ArrayState& array = exec.array();
            if (!rec.have_readout) throw std::runtime_error("sequence produced no readout");

            const bool exact = params.exact_readout;
            for (int i = 0; i < n_sites; ++i) {
                const int cls = array.roles[i] == Role::data ? 0 : 1;
                if (exact) {
                    if (!array.sites[i].present) continue;
                    acc.expected_sum[cls][phase_idx] += rec.readout_expected[i];
                    acc.expected_n[cls][phase_idx] += 1;
                    acc.expected_sum[2][phase_idx] += rec.readout_expected[i];
                    acc.expected_n[2][phase_idx] += 1;
                    continue;
                }
                if (!rec.have_final || !rec.final_bright[i]) continue; // post-selection
                acc.post_selected_sites += 1;
                const long hit = rec.readout_bright[i] ? 1 : 0;
                acc.bright[cls][phase_idx] += hit;
                acc.total[cls][phase_idx] += 1;
                acc.bright[2][phase_idx] += hit;
                acc.total[2][phase_idx] += 1;
                acc.site_bright[i][phase_idx] += hit;
                acc.site_total[i][phase_idx] += 1;

                if (spec.hist_source != 0 && trial < spec.hist_trials) {
                    const bool in_class =
                        spec.hist_class == SiteClass::all ||
                        (spec.hist_class == SiteClass::data) == (array.roles[i] == Role::data);
                    if (in_class) {
                        if (spec.hist_source == 1)
                            acc.hist_samples.push_back(rec.readout_counts[i]);
                        else if (!rec.cycles.empty())
                            acc.hist_samples.push_back(rec.cycles.front().counts[i]);
                    }
                }
            }
            if (dump) {
                for (const auto& f : rec.dumped_frames) {
                    acc.dumped_frames.push_back(f);
                    acc.dumped_trials.push_back(trial);
                }
            }
        });
}

// Ensemble fringe fit from accumulated counts. No data (zero trials, or a
// layout without this class) gives a default, unconverged fit.
inline FringeFit fit_accum(const FringeAccum& acc, SiteClass cls) {
    const int c = static_cast<int>(cls);
    std::vector<double> phases, fracs, counts;
    for (int i = 0; i < acc.phase_points; ++i) {
        const double n = static_cast<double>(acc.total[c][i]);
        const double e = static_cast<double>(acc.expected_n[c][i]);
        if (n > 0) {
            phases.push_back(kTwoPi * i / acc.phase_points);
            fracs.push_back(acc.bright[c][i] / n);
            counts.push_back(n);
        } else if (e > 0) {
            phases.push_back(kTwoPi * i / acc.phase_points);
            fracs.push_back(acc.expected_sum[c][i] / e);
            counts.push_back(e);
        }
    }
    if (phases.size() < 4) return FringeFit{};
    return fit_ramsey_fringe(phases, fracs, binomial_weights(fracs, counts));
}

inline std::vector<SiteFringeData> site_data_from_accum(const FringeAccum& acc, const RoleLayout& layout,
                                                        int cols, Role role) {
    std::vector<SiteFringeData> out;
    for (int s = 0; s < acc.n_sites; ++s) {
        if (layout.role_at(s / cols, s % cols) != role) continue;
        SiteFringeData d;
        d.site = s;
        long total = 0;
        for (int i = 0; i < acc.phase_points; ++i) {
            const long n = acc.site_total[s][i];
            total += n;
            d.phases.push_back(kTwoPi * i / acc.phase_points);
            d.fractions.push_back(n > 0 ? static_cast<double>(acc.site_bright[s][i]) / n : 0.0);
            d.counts.push_back(static_cast<double>(n));
        }
        if (total == 0) d.phases.clear(); // unoccupied; will be skipped and flagged
        out.push_back(d);
    }
    return out;
}

// --- small helpers ----------------------------------------------------------

// value with the larger interval side in compact parenthesis notation,
// e.g. 0.005(2)
inline std::string format_with_uncertainty(double value, double err) {
    if (!(err > 0.0)) return fmt(value);
    int k = static_cast<int>(std::ceil(-std::log10(err)));
    if (k < 0) k = 0;
    long digit = std::lround(err * std::pow(10.0, k));
    if (digit >= 10) {
        k -= 1;
        digit = std::lround(err * std::pow(10.0, std::max(k, 0)));
    }
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(std::max(k, 0));
    out << value << "(" << digit << ")";
    return out.str();
}

inline CheckResult check_in_range(const std::string& name, double value, double lo, double hi,
                                  const std::string& extra = "") {
    CheckResult c;
    c.name = name;
    c.pass = value >= lo && value <= hi;
    c.details = fmt(value) + " in [" + fmt(lo) + ", " + fmt(hi) + "]" + (extra.empty() ? "" : " " + extra);
    return c;
}

inline CheckResult check_leq(const std::string& name, double value, double bound,
                             const std::string& extra = "") {
    CheckResult c;
    c.name = name;
    c.pass = value <= bound;
    c.details = fmt(value) + " <= " + fmt(bound) + (extra.empty() ? "" : " " + extra);
    return c;
}

// Long-format estimator output: one row per fitted parameter plus the
// residual norm, shared by every scenario's `fits` table.
inline void add_fit_rows(RunLog& log, const std::string& label, const std::string& model,
                         const std::vector<std::tuple<std::string, double, double>>& params,
                         double residual_norm) {
    Table* t = nullptr;
    for (auto& existing : log.tables)
        if (existing.name == "fits") t = &existing;
    if (!t) {
        Table n;
        n.name = "fits";
        n.columns = {"label", "model", "parameter", "value", "error"};
        log.tables.push_back(std::move(n));
        t = &log.tables.back();
    }
    for (const auto& [name, value, error] : params)
        t->add_row({label, model, name, fmt(value), fmt(error)});
    t->add_row({label, model, "residual_norm", fmt(residual_norm), ""});
}

inline void add_fit_rows(RunLog& log, const std::string& label, const FringeFit& f) {
    add_fit_rows(log, label, "cosine_fringe",
                 {{"contrast", f.contrast, f.contrast_error},
                  {"phase_rad", f.phase, f.phase_error},
                  {"offset", f.offset, f.offset_error}},
                 f.residual_norm);
}

inline void add_fit_rows(RunLog& log, const std::string& label, const GaussianPairFit& f) {
    add_fit_rows(log, label, "double_gaussian",
                 {{"mu0", f.mu0, f.mu0_error},
                  {"sigma0", f.sigma0, 0.0},
                  {"amp0", f.amp0, 0.0},
                  {"mu1", f.mu1, f.mu1_error},
                  {"sigma1", f.sigma1, 0.0},
                  {"amp1", f.amp1, 0.0},
                  {"threshold", f.threshold, 0.0},
                  {"overlap_error", f.overlap_error, 0.0}},
                 f.residual_norm);
}

inline void add_frames_table(RunLog& log, const FringeAccum& acc) {
    Table t;
    t.name = "frames";
    t.columns = {"trial", "image", "site", "row", "col", "counts", "collected",
                 "scattered", "bright", "lost", "flipped"};
    long prev_trial = -1;
    int image_idx = 0;
    for (std::size_t f = 0; f < acc.dumped_frames.size(); ++f) {
        const ImageFrame& frame = acc.dumped_frames[f];
        const long trial = acc.dumped_trials[f];
        image_idx = trial == prev_trial ? image_idx + 1 : 0;
        prev_trial = trial;
        for (int i = 0; i < static_cast<int>(frame.counts.size()); ++i) {
            const SiteTruth& tr = frame.truth[i];
            t.add_row({fmt(trial), fmt(image_idx), fmt(i), fmt(i / frame.cols), fmt(i % frame.cols),
                       fmt(frame.counts[i]), fmt(tr.collected), fmt(tr.scattered),
                       tr.bright ? "1" : "0", tr.lost ? "1" : "0", tr.spin_flipped ? "1" : "0"});
        }
    }
    log.tables.push_back(std::move(t));
}

inline void add_fringe_tables(RunLog& log, const std::string& prefix, const FringeAccum& acc,
                              const std::string& arm) {
    Table* t = nullptr;
    for (auto& existing : log.tables)
        if (existing.name == prefix) t = &existing;
    if (!t) {
        Table n;
        n.name = prefix;
        n.columns = {"arm", "class", "phase_rad", "bright", "total", "fraction"};
        log.tables.push_back(std::move(n));
        t = &log.tables.back();
    }
    const char* names[3] = {"data", "ancilla", "all"};
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < acc.phase_points; ++i) {
            if (acc.total[c][i] == 0) continue;
            const double frac = static_cast<double>(acc.bright[c][i]) / acc.total[c][i];
            t->add_row({arm, names[c], fmt(kTwoPi * i / acc.phase_points), fmt(acc.bright[c][i]),
                        fmt(acc.total[c][i]), fmt(frac)});
        }
    }
}

} // namespace mcm
