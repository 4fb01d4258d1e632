#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iscc/baselines.hpp"
#include "iscc/beampattern.hpp"
#include "iscc/ce_optimizer.hpp"

namespace iscc {

class TrialError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Seed of trial `index` under `master`. Sweep points reuse the same trial
/// seeds so that every point sees the same positions and fading.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

struct TrialOptions {
    std::vector<SchemeId> schemes{SchemeId::ProposedCE};
    CeParams ce;
    BaselineOptions baseline;
    InnerOptions inner;
    SynthOptions synth;
    /// Run ED-DP as an exhaustive search over its restricted space.
    bool ed_dp_exhaustive = false;
    bool record_traces = false;
    int workers = 1;  // concurrent trials in run_sweep
};

/// Everything a trial's schemes share: placed devices, fading channels and
/// sensing covariance targets.
struct TrialInputs {
    Scenario scenario;
    ChannelSet channels;
    std::vector<CovarianceTarget> targets;
};

/// Draws missing device positions uniformly in the square area and the
/// channels from `seed`, then synthesizes one covariance target per device.
TrialInputs prepare_trial(const Scenario& base, std::uint64_t seed, const SynthOptions& synth = {},
                          CovarianceCache* cache = nullptr);

struct TrialResult {
    int trial_index = 0;
    std::uint64_t seed = 0;
    SchemeId scheme = SchemeId::ProposedCE;
    InnerSolution solution;
    double objective = 0.0;  // s
    std::uint64_t evaluations = 0;
    double wallclock_s = 0.0;  // not part of replay
    std::vector<CeIterationStats> ce_history;
};

/// Runs every requested scheme on one set of trial inputs. Errors are
/// rethrown as TrialError naming the trial and seed.
std::vector<TrialResult> run_trial(const Scenario& scenario, std::uint64_t seed, const TrialOptions& opts,
                                   int trial_index = 0, CovarianceCache* cache = nullptr);

/// Same, on inputs prepared by the caller.
std::vector<TrialResult> run_schemes(const TrialInputs& inputs, std::uint64_t seed, const TrialOptions& opts,
                                     int trial_index = 0);

/// One scheme on a prepared inner solver.
SchemeResult run_scheme(SchemeId scheme, const InnerSolver& inner, const TrialOptions& opts, std::uint64_t seed,
                        std::vector<CeIterationStats>* ce_history = nullptr);

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
    int trials = 200;
    std::vector<SchemeId> schemes{SchemeId::ProposedCE};
    std::uint64_t seed = 1;
};

/// Axes: F_M, F_k (cycles/s), mainlobe_width (deg), bandwidth (Hz), K,
/// d_streams, r_b (bits/s).
const std::vector<std::string>& sweep_axes();
SweepSpec load_sweep_spec(const nlohmann::json& doc);
SweepSpec load_sweep_spec_file(const std::filesystem::path& path);

/// Applies one sweep value and renormalizes; throws ConfigError.
void apply_parameter(Scenario& scenario, const std::string& parameter, double value);

struct SchemeStats {
    double mean = 0.0;        // over feasible trials
    double std_error = 0.0;
    int trials = 0;
    int infeasible = 0;
};

struct SweepPoint {
    double value = 0.0;
    std::map<SchemeId, SchemeStats> stats;
    std::vector<TrialResult> results;  // trial-major, schemes in spec order
};

struct SweepSummary {
    SweepSpec spec;
    std::vector<SweepPoint> points;
    nlohmann::json to_json() const;
};

/// Runs the sweep. When `out_dir` is set, writes sweep.csv (one row per
/// value, scheme and trial) and summary.json there; the directory is checked
/// for writability before any trial runs.
SweepSummary run_sweep(const SweepSpec& spec, const Scenario& base, const TrialOptions& opts,
                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

SchemeStats summarize(const std::vector<double>& objectives);

/// Creates the directory if needed and verifies a file can be written in it.
void ensure_writable_dir(const std::filesystem::path& dir);

void write_trial_csv_header(std::ostream& os);
void write_trial_csv(std::ostream& os, const TrialResult& r);
/// One row per device: partition, rate, frequencies and latency components.
void write_device_csv_header(std::ostream& os);
void write_device_csv(std::ostream& os, const TrialResult& r);
void write_ce_trace_csv(std::ostream& os, const std::vector<CeIterationStats>& history);
void write_beamforming_trace_csv(std::ostream& os, const BeamformingTrace& trace);

struct BeampatternCurve {
    double width_deg = 0.0;
    std::vector<double> theta_deg;
    std::vector<double> gain_db;    // 10 log10 of a^H R a
    std::vector<double> desired;    // indicator pattern
    double residual = 0.0;          // least-squares fit objective
    double peak_gain_db = 0.0;
};

/// Synthesizes the first device's sensing target for each width.
std::vector<BeampatternCurve> beampattern_curves(const Scenario& scenario, const std::vector<double>& widths_deg,
                                                 const SynthOptions& synth = {});
/// Columns: width_deg, theta_deg, gain_db, desired, residual.
void emit_beampattern(const Scenario& scenario, const std::vector<double>& widths_deg, std::ostream& os,
                      const SynthOptions& synth = {});

}  // namespace iscc
