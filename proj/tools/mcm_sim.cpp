// mcm-sim: stochastic simulator and estimation toolkit for mid-circuit
// measurement in a neutral-atom tweezer array.
//
//   mcm-sim run <scenario> [--config file] [--seed N] [--trials N]
//                [--out dir] [--threads N] [--check] [--set key=value]...
//   mcm-sim print-config
//
// Scenarios: table1 | fig2 | fig3 | fig4 | fig5 | custom.

#include "mcm/table1.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

const char* kDefaultConfig = R"(# mcm-sim configuration (all defaults shown; units in key names)
config_version = 1
scenario = fig2
# trials < 0 selects the per-scenario default batch size
trials = -1
seed = 20230517
threads = 1
phase_points = 12
frames_dump_trials = 0
out_dir =

[array]
rows = 7
cols = 10
fill_prob = 0.5
roles = checkerboard          # checkerboard | subarray | all_data
subarray_row0 = 2
subarray_col0 = 3
subarray_rows = 3
subarray_cols = 4

[constants]
gamma_linewidth_hz = 180e3
excited_decay_rate_per_s = 1.14e6
zeeman_split_lower_mhz = 771
zeeman_split_upper_mhz = 681
zeeman_mid_gap_mhz = 736      # pins the second-order sideband 34 MHz red of m=+1/2
operating_field_gauss = 500
excited_sens_mhz_per_gauss = -2.099, -0.550, 0.875, 2.099
qubit_sens_hz_per_gauss = 376.3
qubit_frequency_khz = 388.9
branch_p0 = 5e-7
branch_p2 = 1.7e-6
raman_flip_branch = 1.2e-7    # calibration: 9e-5 flip probability per default image
collection_eta = 0.04
loss_per_collected_photon = 1e-4
trap_depth_uk = 350

[imaging]
saturation = 1.2
detuning_hz = -180e3          # intensity/detuning are degenerate given s; see README
duration_s = 5e-3
mean_collected_photons = 30
dead_time_s = 21e-3
heating_knee_per_s = 3e5      # uncalibrated; default operating point is below it
heating_excess_per_s = 1.0
state0_extra_loss_per_image = 6.05e-3   # calibration to the 0.010 imaged-state loss
excess_loss_per_image = 0.0             # phenomenological hiding-on excess, off by default
hide_phase_offset_rad = -0.473262       # net default imprint 1.59 rad at 74 MHz
mcm_brightness_factor = 1.0543          # 33.0/31.3 peak-separation ratio

[camera]
background_mean = 0
background_std = 2.5
bright_mean = 31.3
bright_std_extra = 0
threshold = 9

[noise]
vacuum_lifetime_s = 30
white_dephasing_per_s = 0.303           # echo contrast 1/e at 3.3 s
detuning_gradient_hz_per_col = 0.139
detuning_jitter_hz = 0.337
pulse_contraction_per_halfpi = 0.005
hide_shift_mean_mhz = 74
hide_shift_std_mhz = 6
hide_phase_jitter_rad = 0.06            # calibration: per-cycle contrast loss split
op_failure_prob = 0.001
op_duration_s = 100e-6
mot_dephasing_per_s = 0.03

[rearrange]
handoff_s = 1e-3
transit_per_site_s = 1e-3
overhead_s = 0
move_loss_prob = 0.01

# Parasitic imaging tones. Intensities are frozen calibrations reproducing
# the measured flip budgets; they are not derived from the modulation depth.
[tones.base]
carrier_detuning_mhz = -280
impurity_fraction = 0.05
image0.count = 2
image0.0.order = 1
image0.0.detuning_mhz = 211
image0.0.relative_intensity = 0.3645
image0.0.polarization = dominant
image0.0.source_state = 1
image0.0.flip_weight = 0.6666666666666666
image0.0.label = first_order_upper
image0.1.order = 2
image0.1.detuning_mhz = 34
image0.1.relative_intensity = 0.12
image0.1.polarization = impurity
image0.1.source_state = 1
image0.1.flip_weight = 0.3333333333333333
image0.1.label = second_order_upper
image1.count = 0

[tones.mcm]
carrier_detuning_mhz = -280
impurity_fraction = 0.05
image0.count = 2
image0.0.order = 1
image0.0.detuning_mhz = 211
image0.0.relative_intensity = 0.3645
image0.0.polarization = dominant
image0.0.source_state = 1
image0.0.flip_weight = 0.6666666666666666
image0.0.label = first_order_upper
image0.1.order = 2
image0.1.detuning_mhz = 34
image0.1.relative_intensity = 0.12
image0.1.polarization = impurity
image0.1.source_state = 1
image0.1.flip_weight = 0.3333333333333333
image0.1.label = second_order_upper
image1.count = 1
image1.0.order = 2
image1.0.detuning_mhz = 34
image1.0.relative_intensity = 0.3672
image1.0.polarization = dominant
image1.0.source_state = 1
image1.0.flip_weight = 0.3333333333333333
image1.0.label = second_order_mcm

[fig2]
pre_wait_s = 1e-3
post_wait_s = 2e-3

[fig3]
shifts_mhz = 15, 25, 40, 74

[fig4]
max_cycles = 16
total_hold_s = 0.6
window_min_s = 0.010
window_max_s = 0.030
subarray_fill = 0.99
ancilla_excess_loss = 0.006755   # calibration: 1.1% filling loss per cycle

[fig5]
hold_times_s = 0.5, 1.0, 1.5, 2.0

[table1]
dummy_base_s = 0.2
dummy_mcm_s = 0.05

[custom]
sequence =
)";

nlohmann::ordered_json summary_json(const mcm::RunLog& log) {
    nlohmann::ordered_json j;
    j["scenario"] = log.scenario;
    j["seed"] = log.seed;
    j["trials"] = log.trials;
    j["failed_trials"] = log.failed_trials;
    nlohmann::ordered_json s;
    for (const auto& [k, v] : log.summary) {
        char* end = nullptr;
        const double num = std::strtod(v.c_str(), &end);
        if (end && *end == '\0' && !v.empty())
            s[k] = num;
        else
            s[k] = v;
    }
    j["summary"] = s;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : log.checks)
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"gating", c.gating}, {"details", c.details}});
    j["checks"] = checks;
    j["trial_errors"] = log.trial_errors;
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic simulator for mid-circuit measurement in a tweezer array"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a scenario and write its result tables");
    std::string scenario;
    run->add_option("scenario", scenario, "table1|fig2|fig3|fig4|fig5|custom")->required();
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    long trials = -1;
    int threads = 0;
    bool check = false;
    std::vector<std::string> sets;
    long dump_frames = -1;
    run->add_option("--config", config_path, "configuration file (defaults embedded)");
    run->add_option("--seed", seed, "master seed");
    run->add_option("--trials", trials, "trials per arm (scenario default if omitted)");
    run->add_option("--out", out_dir, "output directory for tables and the summary");
    run->add_option("--threads", threads, "worker threads (0 = all cores)");
    run->add_option("--set", sets, "override a config key, key=value")->type_size(1);
    run->add_option("--dump-frames", dump_frames, "dump full image frames for the first N trials");
    run->add_flag("--check", check, "evaluate acceptance checks; nonzero exit on failure");

    auto* print_cfg = app.add_subcommand("print-config", "print the default configuration");

    CLI11_PARSE(app, argc, argv);

    if (print_cfg->parsed()) {
        std::fputs(kDefaultConfig, stdout);
        return 0;
    }

    try {
        mcm::Config cfg = config_path.empty() ? mcm::Config()
                                              : mcm::Config::parse_file(config_path);
        cfg.set("scenario", scenario);
        for (const std::string& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw mcm::ConfigError("--set expects key=value, got `" + kv + "`");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (run->count("--seed")) cfg.set("seed", std::to_string(seed));
        if (run->count("--trials")) cfg.set("trials", std::to_string(trials));
        if (run->count("--threads")) cfg.set("threads", std::to_string(threads));
        if (run->count("--out")) cfg.set("out_dir", out_dir);
        if (run->count("--dump-frames")) cfg.set("frames_dump_trials", std::to_string(dump_frames));

        const mcm::ScenarioConfig sc = mcm::ScenarioConfig::from_config(cfg);
        const mcm::RunLog log = mcm::run_scenario(sc);

        for (const auto& [k, v] : log.summary) std::cout << k << " = " << v << "\n";
        for (const auto& c : log.checks)
            std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.details
                      << (c.gating ? "" : " (informational)") << "\n";
        if (log.failed_trials > 0)
            std::cout << log.failed_trials << " trial(s) aborted; see trial_errors in the log\n";

        if (!sc.out_dir.empty()) {
            std::ofstream js(std::filesystem::path(sc.out_dir) / "summary.json", std::ios::binary);
            js << summary_json(log).dump(2) << "\n";
            std::cout << "wrote " << sc.out_dir << "\n";
        }
        if (check && !log.all_checks_pass()) return 1;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
