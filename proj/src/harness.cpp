#include "iscc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "iscc/util.hpp"

namespace iscc {

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) { return derive_seed(master, index); }

TrialInputs prepare_trial(const Scenario& base, std::uint64_t seed, const SynthOptions& synth,
                          CovarianceCache* cache) {
    TrialInputs in;
    in.scenario = base;
    in.scenario.normalize();
    auto& sc = in.scenario;
    if (sc.device_positions.empty()) {
        std::mt19937_64 rng(derive_seed(seed, 0));
        std::uniform_real_distribution<double> u(-sc.area_half_width_m, sc.area_half_width_m);
        for (int k = 0; k < sc.devices; ++k) {
            const double x = u(rng);
            const double y = u(rng);
            sc.device_positions.push_back({x, y});
        }
    }
    in.channels = gen_channels(sc, derive_seed(seed, 1));

    const auto grid = angle_grid(sc.grid_step_deg);
    SynthOptions so = synth;
    so.antenna_spacing = sc.antenna_spacing;
    CovarianceCache local;
    CovarianceCache& c = cache ? *cache : local;
    for (const auto& req : sc.sensing) {
        std::vector<double> angles;
        for (double a : req.target_angles_deg) angles.push_back(deg2rad(a));
        in.targets.push_back(
            c.get(angles, deg2rad(req.mainlobe_width_deg), sc.tx_power_w(), sc.device_antennas, grid, so));
    }
    return in;
}

SchemeResult run_scheme(SchemeId scheme, const InnerSolver& inner, const TrialOptions& opts, std::uint64_t seed,
                        std::vector<CeIterationStats>* ce_history) {
    switch (scheme) {
        case SchemeId::LocalOnly: return run_local_only(inner);
        case SchemeId::EdDp:
            return opts.ed_dp_exhaustive ? run_ed_dp_exhaustive(inner, opts.baseline) : run_ed_dp(inner, opts.baseline);
        case SchemeId::CedWdp: return run_ced_wdp(inner, opts.baseline);
        case SchemeId::Exhaustive: return run_exhaustive(inner, opts.baseline);
        case SchemeId::ProposedCE: {
            CeParams p = opts.ce;
            p.seed = derive_seed(seed, 2);
            auto ce = optimize(inner, p);
            if (ce_history) *ce_history = ce.state.history;
            SchemeResult r;
            r.solution = std::move(ce.solution);
            r.evaluations = static_cast<std::uint64_t>(ce.state.iteration) *
                            static_cast<std::uint64_t>(p.enumerate_samples ? 0 : p.samples);
            r.exact = false;
            return r;
        }
    }
    throw std::invalid_argument("unknown scheme");
}

std::vector<TrialResult> run_schemes(const TrialInputs& inputs, std::uint64_t seed, const TrialOptions& opts,
                                     int trial_index) {
    InnerOptions io = opts.inner;
    io.beamforming.record_trace = io.beamforming.record_trace || opts.record_traces;
    const InnerSolver inner(inputs.scenario, inputs.channels, inputs.targets, io);
    std::vector<TrialResult> out;
    for (auto scheme : opts.schemes) {
        TrialResult r;
        r.trial_index = trial_index;
        r.seed = seed;
        r.scheme = scheme;
        const auto t0 = std::chrono::steady_clock::now();
        auto sr = run_scheme(scheme, inner, opts, seed, opts.record_traces ? &r.ce_history : nullptr);
        r.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.solution = std::move(sr.solution);
        r.objective = r.solution.objective;
        r.evaluations = sr.evaluations;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<TrialResult> run_trial(const Scenario& scenario, std::uint64_t seed, const TrialOptions& opts,
                                   int trial_index, CovarianceCache* cache) {
    try {
        return run_schemes(prepare_trial(scenario, seed, opts.synth, cache), seed, opts, trial_index);
    } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << "trial " << trial_index << " (seed " << seed << "): " << e.what();
        throw TrialError(msg.str());
    }
}

// ---- sweeps

const std::vector<std::string>& sweep_axes() {
    static const std::vector<std::string> axes{"F_M", "F_k", "mainlobe_width", "bandwidth", "K", "d_streams", "r_b"};
    return axes;
}

SweepSpec load_sweep_spec(const nlohmann::json& doc) {
    SweepSpec s;
    try {
        s.parameter = doc.at("parameter").get<std::string>();
        s.values = doc.at("values").get<std::vector<double>>();
        if (doc.contains("trials")) s.trials = doc["trials"].get<int>();
        if (doc.contains("seed")) s.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("schemes")) {
            s.schemes.clear();
            for (const auto& n : doc["schemes"]) s.schemes.push_back(parse_scheme(n.get<std::string>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("sweep spec: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sweep spec: ") + e.what());
    }
    if (std::find(sweep_axes().begin(), sweep_axes().end(), s.parameter) == sweep_axes().end())
        throw ConfigError("sweep spec: unsupported parameter '" + s.parameter + "'");
    if (s.values.empty()) throw ConfigError("sweep spec: no values");
    if (s.trials < 1) throw ConfigError("sweep spec: trials must be >= 1");
    if (s.schemes.empty()) throw ConfigError("sweep spec: no schemes");
    return s;
}

SweepSpec load_sweep_spec_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sweep spec " + path.string());
    try {
        return load_sweep_spec(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void apply_parameter(Scenario& sc, const std::string& parameter, double value) {
    auto as_count = [&](const char* what) {
        if (value < 1 || value != std::floor(value)) throw ConfigError(std::string(what) + " must be a positive integer");
        return static_cast<int>(value);
    };
    if (parameter == "F_M") {
        sc.server.mec_capacity_cps = value;
    } else if (parameter == "F_k") {
        for (auto& d : sc.device_compute) d.capacity_cps = value;
    } else if (parameter == "mainlobe_width") {
        for (auto& s : sc.sensing) s.mainlobe_width_deg = value;
    } else if (parameter == "bandwidth") {
        sc.bandwidth_hz = value;
    } else if (parameter == "K") {
        sc.devices = as_count("K");
        if (!sc.device_compute.empty()) sc.device_compute.resize(1);
        if (!sc.sensing.empty()) sc.sensing.resize(1);
        sc.device_positions.clear();
    } else if (parameter == "d_streams") {
        sc.streams = as_count("d_streams");
    } else if (parameter == "r_b") {
        sc.server.backhaul_bps = value;
    } else {
        throw ConfigError("unsupported sweep parameter '" + parameter + "'");
    }
    sc.normalize();
}

SchemeStats summarize(const std::vector<double>& objectives) {
    SchemeStats s;
    s.trials = static_cast<int>(objectives.size());
    std::vector<double> ok;
    for (double v : objectives)
        if (std::isfinite(v)) ok.push_back(v);
        else ++s.infeasible;
    if (ok.empty()) {
        s.mean = std::numeric_limits<double>::infinity();
        return s;
    }
    double sum = 0.0;
    for (double v : ok) sum += v;
    s.mean = sum / static_cast<double>(ok.size());
    if (ok.size() > 1) {
        double ss = 0.0;
        for (double v : ok) ss += (v - s.mean) * (v - s.mean);
        s.std_error = std::sqrt(ss / static_cast<double>(ok.size() - 1) / static_cast<double>(ok.size()));
    }
    return s;
}

void ensure_writable_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto probe = dir / ".write_probe";
    {
        std::ofstream f(probe);
        if (!f) throw IoError("output directory " + dir.string() + " is not writable");
    }
    std::filesystem::remove(probe, ec);
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw IoError("cannot write " + p.string());
    f << std::setprecision(17);
    return f;
}

}  // namespace

nlohmann::json SweepSummary::to_json() const {
    nlohmann::json j;
    j["parameter"] = spec.parameter;
    j["trials"] = spec.trials;
    j["seed"] = spec.seed;
    j["values"] = spec.values;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) {
        nlohmann::json jp;
        jp["value"] = p.value;
        for (const auto& [id, st] : p.stats)
            jp["schemes"][to_string(id)] = {{"mean", number_or_null(st.mean)},
                                            {"std_error", st.std_error},
                                            {"trials", st.trials},
                                            {"infeasible", st.infeasible}};
        pts.push_back(jp);
    }
    j["points"] = pts;
    return j;
}

SweepSummary run_sweep(const SweepSpec& spec, const Scenario& base, const TrialOptions& opts,
                       const std::optional<std::filesystem::path>& out_dir) {
    if (out_dir) ensure_writable_dir(*out_dir);

    SweepSummary summary;
    summary.spec = spec;
    TrialOptions topts = opts;
    topts.schemes = spec.schemes;
    CovarianceCache cache;

    for (double value : spec.values) {
        Scenario sc = base;
        apply_parameter(sc, spec.parameter, value);
        std::vector<std::vector<TrialResult>> per_trial(static_cast<std::size_t>(spec.trials));
        parallel_for(per_trial.size(), opts.workers, [&](std::size_t t) {
            per_trial[t] = run_trial(sc, trial_seed(spec.seed, t), topts, static_cast<int>(t), &cache);
        });
        SweepPoint pt;
        pt.value = value;
        std::map<SchemeId, std::vector<double>> objs;
        for (auto& tr : per_trial)
            for (auto& r : tr) {
                objs[r.scheme].push_back(r.objective);
                pt.results.push_back(std::move(r));
            }
        for (const auto& [id, v] : objs) pt.stats[id] = summarize(v);
        summary.points.push_back(std::move(pt));
    }

    if (out_dir) {
        auto csv = open_out(*out_dir / "sweep.csv");
        csv << "parameter,param_value,";
        write_trial_csv_header(csv);
        auto dev = open_out(*out_dir / "sweep_devices.csv");
        dev << "parameter,param_value,";
        write_device_csv_header(dev);
        for (const auto& p : summary.points)
            for (const auto& r : p.results) {
                csv << spec.parameter << ',' << p.value << ',';
                write_trial_csv(csv, r);
                std::ostringstream rows;
                rows << std::setprecision(17);
                write_device_csv(rows, r);
                std::istringstream lines(rows.str());
                for (std::string line; std::getline(lines, line);)
                    dev << spec.parameter << ',' << p.value << ',' << line << '\n';
            }
        auto js = open_out(*out_dir / "summary.json");
        js << summary.to_json().dump(2) << '\n';
    }
    return summary;
}

// ---- CSV writers

void write_trial_csv_header(std::ostream& os) {
    os << "trial,seed,scheme,objective_s,feasible,evaluations,wallclock_s\n";
}

void write_trial_csv(std::ostream& os, const TrialResult& r) {
    os << r.trial_index << ',' << r.seed << ',' << to_string(r.scheme) << ',' << r.objective << ','
       << (r.solution.feasible ? 1 : 0) << ',' << r.evaluations << ',' << r.wallclock_s << '\n';
}

void write_device_csv_header(std::ostream& os) {
    os << "trial,seed,scheme,device,l1,l2,rate_bps,f_local,f_mec,t_local,t_offload_dev_mec,t_mec,"
          "t_offload_mec_cloud,t_cloud,total_s,energy_j\n";
}

void write_device_csv(std::ostream& os, const TrialResult& r) {
    const auto& s = r.solution;
    for (std::size_t k = 0; k < s.per_device.size(); ++k) {
        const auto& b = s.per_device[k];
        os << r.trial_index << ',' << r.seed << ',' << to_string(r.scheme) << ',' << k << ',' << s.partitions[k].l1
           << ',' << s.partitions[k].l2 << ',' << s.rates[k] << ',' << s.allocations.f_local[k] << ','
           << s.allocations.f_mec[k] << ',' << b.t_local << ',' << b.t_offload_dev_mec << ',' << b.t_mec << ','
           << b.t_offload_mec_cloud << ',' << b.t_cloud << ',' << b.total << ',' << b.energy_j << '\n';
    }
}

void write_ce_trace_csv(std::ostream& os, const std::vector<CeIterationStats>& history) {
    os << "iteration,best_objective,iteration_best,mean_elite_objective,omega_entropy_bits\n";
    for (const auto& h : history)
        os << h.iteration << ',' << h.best_objective << ',' << h.iteration_best << ',' << h.mean_elite_objective
           << ',' << h.omega_entropy << '\n';
}

void write_beamforming_trace_csv(std::ostream& os, const BeamformingTrace& trace) {
    os << "outer,step,wmmse_objective\n";
    for (std::size_t t = 0; t < trace.wmmse.size(); ++t)
        for (std::size_t s = 0; s < trace.wmmse[t].size(); ++s) os << t << ',' << s << ',' << trace.wmmse[t][s] << '\n';
}

// ---- beampatterns

std::vector<BeampatternCurve> beampattern_curves(const Scenario& scenario, const std::vector<double>& widths_deg,
                                                 const SynthOptions& synth) {
    Scenario sc = scenario;
    sc.normalize();
    const auto grid = angle_grid(sc.grid_step_deg);
    std::vector<double> angles;
    for (double a : sc.sensing.front().target_angles_deg) angles.push_back(deg2rad(a));
    SynthOptions so = synth;
    so.antenna_spacing = sc.antenna_spacing;

    std::vector<BeampatternCurve> out;
    for (double w : widths_deg) {
        if (!(w > 0)) throw ConfigError("mainlobe width must be positive");
        const auto res = synth_covariance(angles, deg2rad(w), sc.tx_power_w(), sc.device_antennas, grid, so);
        const auto pattern = beampattern(res.target.R, grid, sc.antenna_spacing);
        const auto desired = desired_pattern(angles, deg2rad(w), grid);
        BeampatternCurve c;
        c.width_deg = w;
        c.residual = res.objective;
        c.desired = desired;
        c.peak_gain_db = -std::numeric_limits<double>::infinity();
        for (const auto& s : pattern) {
            c.theta_deg.push_back(rad2deg(s.theta));
            const double db = 10.0 * std::log10(std::max(s.gain, 1e-30));
            c.gain_db.push_back(db);
            c.peak_gain_db = std::max(c.peak_gain_db, db);
        }
        out.push_back(std::move(c));
    }
    return out;
}

void emit_beampattern(const Scenario& scenario, const std::vector<double>& widths_deg, std::ostream& os,
                      const SynthOptions& synth) {
    os << "width_deg,theta_deg,gain_db,desired,residual\n";
    for (const auto& c : beampattern_curves(scenario, widths_deg, synth))
        for (std::size_t i = 0; i < c.theta_deg.size(); ++i)
            os << c.width_deg << ',' << c.theta_deg[i] << ',' << c.gain_db[i] << ',' << c.desired[i] << ','
               << c.residual << '\n';
}

}  // namespace iscc
