// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "iscc/harness.hpp"

using namespace iscc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Scenario scenario_with(int K, int depth) {
    Scenario sc = default_scenario();
    sc.profile = std::make_shared<const DnnProfile>(alexnet_profile().truncated(depth));
    apply_parameter(sc, "K", K);
    return sc;
}

// 1: CE against exhaustive search on small problems.
Outcome criterion1() {
    const auto t0 = Clock::now();
    const Scenario sc = scenario_with(2, 5);
    int exact = 0, within = 0;
    double worst = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        const auto seed = trial_seed(101, static_cast<std::uint64_t>(t));
        const auto in = prepare_trial(sc, seed);
        const InnerSolver inner(in.scenario, in.channels, in.targets);
        const double ex = run_exhaustive(inner).solution.objective;
        CeParams p;
        p.seed = seed;
        const double ce = optimize(inner, p).solution.objective;
        const double gap = rel_gap(ce, ex);
        worst = std::max(worst, gap);
        exact += gap <= 1e-9;
        within += gap <= 1e-2;
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = exact * 10 >= trials * 9 && within == trials && secs < 120;
    o.detail = std::to_string(exact) + "/" + std::to_string(trials) + " exact, worst gap " + fmt("%.3g", worst) +
               ", " + fmt("%.1f", secs) + " s";
    return o;
}

// 2: exhaustive cost grows with the joint space, CE cost barely moves.
Outcome criterion2() {
    std::map<int, double> t_ex, t_ce;
    const int seeds = 3;
    for (int K : {2, 3}) {
        const Scenario sc = scenario_with(K, 5);
        for (int s = 0; s < seeds; ++s) {
            const auto seed = trial_seed(202, static_cast<std::uint64_t>(s));
            const auto in = prepare_trial(sc, seed);
            const InnerSolver inner(in.scenario, in.channels, in.targets);
            auto t0 = Clock::now();
            run_exhaustive(inner);
            t_ex[K] += seconds_since(t0);
            CeParams p;
            p.seed = seed;
            t0 = Clock::now();
            optimize(inner, p);
            t_ce[K] += seconds_since(t0);
        }
    }
    const double ex_ratio = t_ex[3] / t_ex[2];
    const double ce_ratio = t_ce[3] / t_ce[2];
    Outcome o;
    o.pass = ex_ratio >= 5 && ce_ratio <= 2;
    o.detail = "exhaustive x" + fmt("%.2f", ex_ratio) + " (" + fmt("%.3f", t_ex[2] / seeds) + " -> " +
               fmt("%.3f", t_ex[3] / seeds) + " s), CE x" + fmt("%.2f", ce_ratio) + " (" +
               fmt("%.3f", t_ce[2] / seeds) + " -> " + fmt("%.3f", t_ce[3] / seeds) + " s)";
    return o;
}

// 3: per-trial ordering of the schemes across an MEC capacity sweep.
Outcome criterion3() {
    const auto t0 = Clock::now();
    const Scenario base = scenario_with(2, 11);
    const std::vector<double> values{4e9, 8e9, 12e9, 16e9};
    const int trials = 20;
    int ordered = 0, total = 0;
    std::vector<double> means;
    std::ostringstream bad;
    for (double fm : values) {
        Scenario sc = base;
        apply_parameter(sc, "F_M", fm);
        double sum = 0;
        for (int t = 0; t < trials; ++t) {
            const auto seed = trial_seed(303, static_cast<std::uint64_t>(t));
            const auto in = prepare_trial(sc, seed);
            const InnerSolver inner(in.scenario, in.channels, in.targets);
            const double ex = run_exhaustive(inner).solution.objective;
            CeParams p;
            p.seed = seed;
            const double ce = optimize(inner, p).solution.objective;
            const double ed = run_ed_dp_exhaustive(inner).solution.objective;
            const double ced = run_ced_wdp(inner).solution.objective;
            sum += ce;
            ++total;
            const bool ok = ex <= ce && ce <= std::min(ed, ced);
            ordered += ok;
            if (!ok && bad.tellp() < 200)
                bad << " [F_M " << fm / 1e9 << "G t" << t << ": ex " << ex << " ce " << ce << " ed " << ed << " ced "
                    << ced << "]";
        }
        means.push_back(sum / trials);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < means.size(); ++i) monotone &= means[i] <= means[i - 1];
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = ordered == total && monotone && secs < 600;
    std::ostringstream d;
    d << ordered << "/" << total << " ordered, CE means";
    for (double m : means) d << ' ' << fmt("%.4f", m);
    d << " s, " << fmt("%.1f", secs) << " s" << bad.str();
    o.detail = d.str();
    return o;
}

// 4: latency against mainlobe width, and peak gain against width.
Outcome criterion4() {
    const Scenario base = scenario_with(3, 11);
    const std::vector<double> widths{10, 20, 30};
    const int trials = 50;
    CovarianceCache cache;
    std::vector<double> means;
    for (double w : widths) {
        Scenario sc = base;
        apply_parameter(sc, "mainlobe_width", w);
        double sum = 0;
        for (int t = 0; t < trials; ++t) {
            const auto seed = trial_seed(404, static_cast<std::uint64_t>(t));
            const auto in = prepare_trial(sc, seed, {}, &cache);
            const InnerSolver inner(in.scenario, in.channels, in.targets);
            CeParams p;
            p.seed = seed;
            sum += optimize(inner, p).solution.objective;
        }
        means.push_back(sum / trials);
    }
    const auto curves = beampattern_curves(base, widths);
    bool lat = true, peak = true;
    for (std::size_t i = 1; i < widths.size(); ++i) {
        lat &= means[i] <= means[i - 1];
        peak &= curves[i].peak_gain_db < curves[i - 1].peak_gain_db;
    }
    std::ostringstream d;
    d << "CE means";
    for (double m : means) d << ' ' << fmt("%.4f", m);
    d << " s; peaks";
    for (const auto& c : curves) d << ' ' << fmt("%.2f", c.peak_gain_db);
    d << " dB";
    return {lat && peak, d.str()};
}

CMatrix gaussian(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> g;
    CMatrix A(r, c);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = Complex(g(rng), g(rng));
    return A;
}

// 5: beamforming solver invariants on random instances.
Outcome criterion5() {
    int passed = 0;
    const int n = 100;
    std::string first_fail;
    for (int i = 0; i < n; ++i) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(5000 + i));
        ChannelSet channels;
        std::vector<CovarianceTarget> targets;
        int d = 2;
        double bw = 1e6;
        if (i % 2 == 0) {
            // abstract instance: unit-scale channels, random full-rank covariances
            const int K = 2 + i % 3, M = 6, Nt = 4;
            channels.noise_var = 1e-2;
            for (int k = 0; k < K; ++k) {
                channels.H.push_back(gaussian(rng, M, Nt));
                const CMatrix A = gaussian(rng, Nt, Nt);
                CMatrix R = A * A.adjoint() + 0.1 * CMatrix::Identity(Nt, Nt);
                const Eigen::VectorXd s = R.diagonal().real().cwiseSqrt().cwiseInverse();
                R = s.asDiagonal() * R * s.asDiagonal();
                targets.push_back({R / Nt, 1.0 / Nt});
            }
        } else {
            // physical instance at the reference scenario scales
            Scenario sc = default_scenario();
            apply_parameter(sc, "K", 3);
            const auto in = prepare_trial(sc, rng());
            channels = in.channels;
            targets = in.targets;
            d = sc.streams;
            bw = sc.bandwidth_hz;
        }
        const int K = static_cast<int>(channels.H.size());
        const BeamformingContext ctx(channels, targets, d, bw);
        std::uniform_real_distribution<double> wdist(1e5, 5e6);
        std::vector<double> o(static_cast<std::size_t>(K));
        for (double& x : o) x = wdist(rng);
        BeamformingOptions opts;
        opts.record_trace = true;
        const auto r = solve_beamforming(ctx, o, opts);

        bool a = true, b = true, c = true, dd = true, e = true;
        for (const auto& outer : r.trace.wmmse)
            for (std::size_t j = 1; j < outer.size(); ++j) a &= outer[j] - outer[j - 1] <= 1e-8 * std::abs(outer[j - 1]);
        for (std::size_t j = 1; j < r.trace.mm_objective.size(); ++j)
            b &= r.trace.mm_objective[j] <= r.trace.mm_objective[j - 1] * (1 + 1e-12);
        for (double err : r.trace.covariance_error) c &= err <= 1e-8;
        for (int k = 0; k < K; ++k) {
            c &= covariance_error(r.beamformers.W_c[k], r.beamformers.W_r[k], ctx.target(k)) <= 1e-8;
            const double direct = rate(k, r.beamformers.W_c, r.beamformers.W_r, channels, bw);
            dd &= rel_gap(r.rates[k], direct) <= 1e-9;
        }
        const auto unit = solve_beamforming(ctx, std::vector<double>(static_cast<std::size_t>(K), 1.0));
        for (int k = 0; k < K; ++k) e &= rel_gap(unit.rates[k], r.rates[k]) <= 1e-6;
        const bool ok = a && b && c && dd && e && r.feasible;
        passed += ok;
        if (!ok && first_fail.empty())
            first_fail = " first failure instance " + std::to_string(i) + " (a" + std::to_string(a) + " b" +
                         std::to_string(b) + " c" + std::to_string(c) + " d" + std::to_string(dd) + " e" +
                         std::to_string(e) + ")";
    }
    return {passed == n, std::to_string(passed) + "/" + std::to_string(n) + " instances" + first_fail};
}

// 6: closed-form compute allocation.
Outcome criterion6() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> s_dist(1e8, 5e9), a_dist(1, 8), f_dist(0.2e9, 2e9), e_dist(0.05, 5);
    int passed = 0;
    const int n = 20;
    double worst_grid = 0, worst_spread = 0;
    for (int t = 0; t < n; ++t) {
        const int K = 1 + t % 3;
        std::vector<double> s(K), a(K);
        for (int k = 0; k < K; ++k) {
            s[k] = s_dist(rng);
            a[k] = a_dist(rng);
        }
        const double F = 4e9 + 12e9 * (t % 4) / 3;
        const auto f = alloc_mec(s, a, F);
        auto obj = [&](const std::vector<double>& x) {
            double v = 0;
            for (int k = 0; k < K; ++k) v += s[k] / (a[k] * x[k]);
            return v;
        };
        double best = 1e300;
        if (K == 1) {
            best = obj({F});
        } else if (K == 2) {
            const int g = 100000;
            for (int i = 1; i < g; ++i) best = std::min(best, obj({F * i / g, F * (g - i) / g}));
        } else {
            const int g = 1000;
            for (int i = 1; i < g; ++i)
                for (int j = 1; i + j < g; ++j) best = std::min(best, obj({F * i / g, F * j / g, F * (g - i - j) / g}));
        }
        const double grid_gap = (obj(f) - best) / best;
        worst_grid = std::max(worst_grid, std::abs(std::min(grid_gap, 0.0)));
        bool ok = obj(f) <= best * (1 + 1e-3);

        // stationarity: s_k / (alpha_k f_k^2) is common to all devices
        double lo = 1e300, hi = 0;
        for (int k = 0; k < K; ++k) {
            const double m = s[k] / (a[k] * f[k] * f[k]);
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        const double spread = (hi - lo) / hi;
        worst_spread = std::max(worst_spread, spread);
        ok &= spread <= 1e-8;

        const double cap = f_dist(rng), budget = e_dist(rng), kappa = 1e-28, sl = s[0], al = a[0];
        const double analytic = std::min(cap, std::sqrt(budget * al / (kappa * sl)));
        const double fl = alloc_local(sl, al, cap, budget, kappa);
        ok &= fl == analytic;
        ok &= energy(sl, fl, al, kappa) <= budget * (1 + 1e-12);
        passed += ok;
    }
    return {passed == n, std::to_string(passed) + "/" + std::to_string(n) + " instances, KKT spread max " +
                             fmt("%.2g", worst_spread)};
}

// 7: Procrustes step against random orthonormal candidates.
Outcome criterion7() {
    std::mt19937_64 rng(707);
    const int n = 20, candidates = 10000, Nt = 8, d = 4;
    int passed = 0;
    double min_margin = 1e300;
    for (int t = 0; t < n; ++t) {
        const CMatrix T = gaussian(rng, Nt, d);
        const auto sol = solve_procrustes(T, d);
        const double value = (T.adjoint() * sol.W_c).trace().real();
        double best = -1e300;
        for (int c = 0; c < candidates; ++c) {
            const CMatrix X = gaussian(rng, Nt, d).householderQr().householderQ() * CMatrix::Identity(Nt, d);
            best = std::max(best, (T.adjoint() * X).trace().real());
        }
        const bool orth = (sol.W_c.adjoint() * sol.W_c - CMatrix::Identity(d, d)).norm() <= 1e-10;
        passed += value >= best && orth;
        min_margin = std::min(min_margin, value - best);
    }
    return {passed == n, std::to_string(passed) + "/" + std::to_string(n) + " matrices, smallest margin " +
                             fmt("%.3g", min_margin)};
}

// 8: workload conservation and latency additivity on every AlexNet pair.
Outcome criterion8() {
    const auto p = alexnet_profile();
    const Scenario sc = default_scenario();
    int passed = 0, n = 0;
    for (const auto& pair : enumerate_partitions(p)) {
        ++n;
        const auto s = workload_split(p, pair);
        bool ok = s.s_local + s.s_mec + s.s_cloud == p.total_flops();
        for (bool strict : {false, true}) {
            CostOptions co;
            co.charge_terminal_transfers = strict;
            const auto b = latency(s, pair, p, 5e7, 0.8e9, 4e9, sc.device_compute[0], sc.server, co);
            const double sum = b.t_local + b.t_offload_dev_mec + b.t_mec + b.t_offload_mec_cloud + b.t_cloud;
            ok &= b.feasible && std::abs(b.total - sum) <= 1e-12 * sum;
        }
        passed += ok;
    }
    return {passed == n, std::to_string(passed) + "/" + std::to_string(n) + " partition pairs"};
}

// 9: conditioned Bernoulli sampler frequencies.
Outcome criterion9() {
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int draws = 100000, vectors = 5, len = 12;
    int passed = 0;
    std::ostringstream d;
    d << "p-values";
    for (int v = 0; v < vectors; ++v) {
        std::vector<double> w(len);
        for (double& x : w) x = u(rng);
        // enumerate every bit vector with one or two set bits
        std::map<PartitionPair, double> mass;
        double total = 0;
        for (int i = 0; i < len; ++i)
            for (int j = i; j < len; ++j) {
                double m = 1;
                for (int l = 0; l < len; ++l) m *= (l == i || l == j) ? w[l] : 1 - w[l];
                mass[{i, j}] = m;
                total += m;
            }
        const PairSampler sampler(w);
        Rng srng(static_cast<std::uint64_t>(9000 + v));
        std::map<PartitionPair, int> counts;
        for (int k = 0; k < draws; ++k) ++counts[sampler(srng)];
        // cells with expected count under 5 are pooled
        double stat = 0, pool_e = 0, pool_o = 0;
        int cells = 0;
        for (const auto& [pair, m] : mass) {
            const double e = m / total * draws;
            const double o = counts[pair];
            if (e < 5) {
                pool_e += e;
                pool_o += o;
                continue;
            }
            stat += (o - e) * (o - e) / e;
            ++cells;
        }
        if (pool_e > 0) {
            stat += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
            ++cells;
        }
        const double pval = 1 - boost::math::cdf(boost::math::chi_squared(cells - 1), stat);
        passed += pval > 0.01;
        d << ' ' << fmt("%.3f", pval);
    }
    return {passed == vectors, d.str()};
}

// 10: full reference scenario, replayable.
Outcome criterion10() {
    const auto t0 = Clock::now();
    const Scenario sc = default_scenario();
    TrialOptions opts;
    opts.schemes = {SchemeId::LocalOnly, SchemeId::EdDp, SchemeId::CedWdp, SchemeId::ProposedCE};
    const std::uint64_t master = 1010;
    const int trials = 20;
    CovarianceCache cache;
    std::vector<std::vector<TrialResult>> results;
    for (int t = 0; t < trials; ++t)
        results.push_back(run_trial(sc, trial_seed(master, static_cast<std::uint64_t>(t)), opts, t, &cache));
    const double secs = seconds_since(t0);

    const auto dir = fs::temp_directory_path() / "iscc_acceptance_c10";
    ensure_writable_dir(dir);
    {
        std::ofstream f(dir / "trials.csv");
        f.precision(17);
        write_trial_csv_header(f);
        for (const auto& tr : results)
            for (const auto& r : tr) write_trial_csv(f, r);
    }

    // replay two trials from their recorded seeds with a cold cache
    bool replay = true;
    for (int t : {0, trials - 1}) {
        const auto& rec = results[static_cast<std::size_t>(t)];
        const auto again = run_trial(sc, rec.front().seed, opts, t);
        for (std::size_t i = 0; i < rec.size(); ++i)
            replay &= again[i].objective == rec[i].objective &&
                      again[i].solution.partitions == rec[i].solution.partitions;
    }
    bool finite = true;
    double ce_sum = 0;
    for (const auto& tr : results)
        for (const auto& r : tr) {
            finite &= std::isfinite(r.objective);
            if (r.scheme == SchemeId::ProposedCE) ce_sum += r.objective;
        }
    std::ostringstream d;
    d << trials << " trials in " << fmt("%.1f", secs) << " s, CE mean " << fmt("%.4f", ce_sum / trials)
      << " s, replay " << (replay ? "identical" : "DIFFERS") << ", written to " << (dir / "trials.csv").string();
    return {secs < 600 && replay && finite, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<int, std::function<Outcome()>>> all{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
    int failed = 0;
    for (const auto& [id, fn] : all) {
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
