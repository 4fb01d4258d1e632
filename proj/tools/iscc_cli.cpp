// iscc: command-line front end for trials, sweeps and beampattern export.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "iscc/harness.hpp"
#include "iscc/util.hpp"

namespace fs = std::filesystem;
using namespace iscc;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string out;
    int workers = 1;
    bool strict_alg1 = false;
    bool strict_eq17 = false;
    std::vector<std::string> schemes;
};

void add_common(CLI::App* app, Common& c, bool with_trials = true) {
    app->add_option("--config", c.config, "scenario JSON (default: built-in reference scenario)");
    app->add_option("--seed", c.seed, "master seed");
    if (with_trials) app->add_option("--trials", c.trials, "number of trials");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    app->add_flag("--strict-alg1", c.strict_alg1, "re-solve beamforming for every partition assignment");
    app->add_flag("--strict-eq17", c.strict_eq17, "charge terminal-layer transfers");
}

Scenario load(const Common& c) {
    return c.config.empty() ? default_scenario() : load_scenario_file(c.config);
}

TrialOptions trial_options(const Common& c) {
    TrialOptions o;
    o.inner.cache_rates = !c.strict_alg1;
    o.inner.cost.charge_terminal_transfers = c.strict_eq17;
    o.baseline.workers = c.workers;
    o.ce.workers = c.workers;
    o.workers = c.workers;
    if (!c.schemes.empty()) {
        o.schemes.clear();
        for (const auto& s : c.schemes) o.schemes.push_back(parse_scheme(s));
    }
    return o;
}

fs::path out_dir(const Common& c) {
    fs::path d = c.out.empty() ? fs::path("results") : fs::path(c.out);
    ensure_writable_dir(d);
    return d;
}

std::ofstream open(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw IoError("cannot write " + p.string());
    f << std::setprecision(17);
    return f;
}

void print_results(const std::vector<TrialResult>& rs) {
    std::cout << std::left << std::setw(7) << "trial" << std::setw(12) << "scheme" << std::setw(16) << "latency_s"
              << "wallclock_s\n";
    for (const auto& r : rs)
        std::cout << std::setw(7) << r.trial_index << std::setw(12) << to_string(r.scheme) << std::setw(16)
                  << r.objective << r.wallclock_s << '\n';
}

int cmd_run(const Common& c, bool all_schemes_flag) {
    const Scenario sc = load(c);
    TrialOptions o = trial_options(c);
    if (all_schemes_flag) {
        o.schemes = all_schemes();
        const double pairs = static_cast<double>(enumerate_partitions(*sc.profile).size());
        if (std::pow(pairs, sc.devices) > o.baseline.exhaustive_budget) {
            std::cerr << "warning: skipping exhaustive, " << pairs << "^" << sc.devices
                      << " assignments exceed the budget\n";
            std::erase(o.schemes, SchemeId::Exhaustive);
        }
    }
    const std::uint64_t master = c.seed.value_or(1);
    const int trials = all_schemes_flag ? 1 : c.trials.value_or(1);
    const auto dir = out_dir(c);

    CovarianceCache cache;
    std::vector<std::vector<TrialResult>> per(static_cast<std::size_t>(trials));
    TrialOptions inner_opts = o;
    if (trials > 1) inner_opts.ce.workers = inner_opts.baseline.workers = 1;
    parallel_for(per.size(), trials > 1 ? c.workers : 1, [&](std::size_t t) {
        const auto seed = all_schemes_flag ? master : trial_seed(master, t);
        per[t] = run_trial(sc, seed, inner_opts, static_cast<int>(t), &cache);
    });

    auto trials_csv = open(dir / "trials.csv");
    auto dev_csv = open(dir / "devices.csv");
    write_trial_csv_header(trials_csv);
    write_device_csv_header(dev_csv);
    std::vector<TrialResult> flat;
    for (const auto& tr : per)
        for (const auto& r : tr) {
            write_trial_csv(trials_csv, r);
            write_device_csv(dev_csv, r);
            flat.push_back(r);
        }
    nlohmann::json meta{{"master_seed", master}, {"trials", trials}, {"scenario", sc.to_json()},
                        {"strict_alg1", c.strict_alg1}, {"strict_eq17", c.strict_eq17}};
    open(dir / "run.json") << meta.dump(2) << '\n';
    print_results(flat);
    return 0;
}

int cmd_sweep(const Common& c, const std::string& spec_path) {
    const Scenario sc = load(c);
    SweepSpec spec = load_sweep_spec_file(spec_path);
    if (c.trials) spec.trials = *c.trials;
    if (c.seed) spec.seed = *c.seed;
    if (!c.schemes.empty()) {
        spec.schemes.clear();
        for (const auto& s : c.schemes) spec.schemes.push_back(parse_scheme(s));
    }
    TrialOptions o = trial_options(c);
    o.ce.workers = o.baseline.workers = 1;  // parallelism goes to trials
    const auto dir = c.out.empty() ? fs::path("results") : fs::path(c.out);
    const auto summary = run_sweep(spec, sc, o, dir);
    std::cout << summary.to_json().dump(2) << '\n';
    return 0;
}

int cmd_beampattern(const Common& c, const std::vector<double>& widths) {
    const Scenario sc = load(c);
    const auto dir = out_dir(c);
    auto f = open(dir / "beampattern.csv");
    emit_beampattern(sc, widths, f);
    for (const auto& curve : beampattern_curves(sc, widths))
        std::cout << "width " << curve.width_deg << " deg: peak " << curve.peak_gain_db << " dB, residual "
                  << curve.residual << '\n';
    return 0;
}

int cmd_trace(const Common& c) {
    const Scenario sc = load(c);
    TrialOptions o = trial_options(c);
    o.schemes = {SchemeId::ProposedCE};
    o.record_traces = true;
    const std::uint64_t seed = c.seed.value_or(1);
    const auto in = prepare_trial(sc, seed, o.synth);
    const auto results = run_schemes(in, seed, o);
    const auto& best = results.front();
    const auto dir = out_dir(c);
    auto ce = open(dir / "ce_trace.csv");
    write_ce_trace_csv(ce, best.ce_history);

    // beamforming convergence for the chosen partitions
    const InnerSolver inner(in.scenario, in.channels, in.targets, o.inner);
    BeamformingOptions bo = o.inner.beamforming;
    bo.record_trace = true;
    const auto bf = solve_beamforming(inner.beamforming_context(), inner.uplink_weights(best.solution.partitions), bo);
    auto wm = open(dir / "wmmse_trace.csv");
    write_beamforming_trace_csv(wm, bf.trace);
    auto mm = open(dir / "mm_trace.csv");
    mm << "outer,mm_objective\n";
    for (std::size_t t = 0; t < bf.trace.mm_objective.size(); ++t) mm << t << ',' << bf.trace.mm_objective[t] << '\n';
    print_results(results);
    return 0;
}

int fail(const char* kind, const std::string& msg) {
    std::cerr << "error: " << kind << ": " << msg << '\n';
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latency-optimal DNN partitioning, beamforming and compute allocation simulator"};
    app.require_subcommand(1);

    Common run_c, cmp_c, sweep_c, bp_c, trace_c;
    auto* run = app.add_subcommand("run", "run trials of one scenario");
    add_common(run, run_c);
    run->add_option("--schemes", run_c.schemes, "local, ed-dp, ced-wdp, exhaustive, proposed")->delimiter(',');

    auto* cmp = app.add_subcommand("compare", "run every scheme on one seed");
    add_common(cmp, cmp_c, false);

    std::string spec_path;
    auto* sweep = app.add_subcommand("sweep", "parameter sweep from a spec file");
    add_common(sweep, sweep_c);
    sweep->add_option("spec", spec_path, "sweep spec JSON")->required();
    sweep->add_option("--schemes", sweep_c.schemes, "override the spec's scheme list")->delimiter(',');

    std::vector<double> widths{10, 20, 30};
    auto* bp = app.add_subcommand("beampattern", "export synthesized beampatterns");
    add_common(bp, bp_c, false);
    bp->add_option("--widths", widths, "mainlobe widths in degrees")->delimiter(',');

    auto* trace = app.add_subcommand("trace", "write convergence traces for one seed");
    add_common(trace, trace_c, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return fail("usage", e.what());
    }

    try {
        if (*run) return cmd_run(run_c, false);
        if (*cmp) return cmd_run(cmp_c, true);
        if (*sweep) return cmd_sweep(sweep_c, spec_path);
        if (*bp) return cmd_beampattern(bp_c, widths);
        if (*trace) return cmd_trace(trace_c);
    } catch (const ConfigError& e) {
        return fail("config", e.what());
    } catch (const ProfileError& e) {
        return fail("profile", e.what());
    } catch (const BudgetError& e) {
        return fail("budget", e.what());
    } catch (const IoError& e) {
        return fail("io", e.what());
    } catch (const TrialError& e) {
        return fail("trial", e.what());
    } catch (const std::invalid_argument& e) {
        return fail("usage", e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
