#include "iscc/ce_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "iscc/util.hpp"

namespace iscc {

void CeParams::validate() const {
    if (samples < 1) throw std::invalid_argument("CE: samples must be >= 1");
    if (elites < 1 || elites > samples) throw std::invalid_argument("CE: need 1 <= elites <= samples");
    if (!(smoothing > 0.0 && smoothing <= 1.0)) throw std::invalid_argument("CE: smoothing must be in (0, 1]");
    if (max_iters < 1 || stall_iters < 1) throw std::invalid_argument("CE: iteration limits must be >= 1");
}

PairSampler::PairSampler(std::span<const double> omega_row) {
    const int n = static_cast<int>(omega_row.size());
    if (n < 1) throw std::invalid_argument("PairSampler: empty probability row");
    for (double w : omega_row)
        if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("PairSampler: probabilities must lie in [0, 1]");

    // mass with exactly the bits in `set` on: prod_{l in set} w_l * prod_{l not in set} (1 - w_l)
    auto mass = [&](int a, int b) {
        double m = 1.0;
        for (int l = 0; l < n; ++l) {
            const double w = omega_row[static_cast<std::size_t>(l)];
            m *= (l == a || l == b) ? w : 1.0 - w;
        }
        return m;
    };

    double total = 0.0;
    for (int l1 = 0; l1 < n; ++l1)
        for (int l2 = l1; l2 < n; ++l2) {
            pairs_.push_back({l1, l2});
            prob_.push_back(mass(l1, l2));
            total += prob_.back();
        }
    if (!(total > 0.0)) {
        degenerate_ = true;
        std::clog << "warning: partition sampler has no feasible mass; sampling pairs uniformly\n";
        std::fill(prob_.begin(), prob_.end(), 1.0);
        total = static_cast<double>(prob_.size());
    }
    for (double& p : prob_) p /= total;
    cdf_.resize(prob_.size());
    std::partial_sum(prob_.begin(), prob_.end(), cdf_.begin());
}

PartitionPair PairSampler::operator()(Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    // skip zero-probability entries that share the CDF value
    auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
    while (prob_[idx] == 0.0 && idx + 1 < prob_.size()) ++idx;
    return pairs_[idx];
}

PartitionPair sample_feasible(std::span<const double> omega_row, Rng& rng) { return PairSampler(omega_row)(rng); }

Eigen::MatrixXd update_omega(std::span<const SampleEval> elites, int devices, int depth) {
    if (elites.empty()) throw std::invalid_argument("update_omega: no elites");
    Eigen::MatrixXd upsilon = Eigen::MatrixXd::Zero(devices, depth + 1);
    for (const auto& e : elites) {
        for (int k = 0; k < devices; ++k) {
            const auto& p = e.partitions[static_cast<std::size_t>(k)];
            upsilon(k, p.l1) += 1.0;
            if (p.l2 != p.l1) upsilon(k, p.l2) += 1.0;
        }
    }
    return upsilon / static_cast<double>(elites.size());
}

Eigen::MatrixXd smooth(const Eigen::MatrixXd& omega, const Eigen::MatrixXd& upsilon, double rho) {
    return (rho * upsilon + (1.0 - rho) * omega).cwiseMax(0.0).cwiseMin(1.0);
}

namespace {

double binary_entropy_bits(const Eigen::MatrixXd& omega) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        const double p = omega.data()[i];
        if (p > 0.0 && p < 1.0) h -= p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p);
    }
    return h;
}

std::vector<std::vector<PartitionPair>> all_assignments(const DnnProfile& profile, int devices) {
    const auto pairs = enumerate_partitions(profile);
    std::vector<std::vector<PartitionPair>> out;
    std::vector<std::size_t> digit(static_cast<std::size_t>(devices), 0);
    for (;;) {
        std::vector<PartitionPair> a(static_cast<std::size_t>(devices));
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = pairs[digit[k]];
        out.push_back(std::move(a));
        auto k = static_cast<std::size_t>(devices);
        while (k > 0) {
            --k;
            if (++digit[k] < pairs.size()) break;
            digit[k] = 0;
            if (k == 0) return out;
        }
        if (devices == 0) return out;
    }
}

bool better(const SampleEval& a, const SampleEval& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (a.objective != b.objective) return a.objective < b.objective;
    return a.index < b.index;
}

}  // namespace

CeResult optimize(const InnerSolver& inner, const CeParams& params) {
    params.validate();
    const int K = inner.devices();
    const int L = inner.profile().depth();

    CeState state;
    state.omega = Eigen::MatrixXd::Constant(K, L + 1, 0.5);
    state.best_objective = std::numeric_limits<double>::infinity();

    std::vector<std::vector<PartitionPair>> enumerated;
    if (params.enumerate_samples) enumerated = all_assignments(inner.profile(), K);

    int stall = 0;
    bool have_best = false;
    for (int it = 0; it < params.max_iters; ++it) {
        std::vector<SampleEval> samples;
        if (params.enumerate_samples) {
            samples.resize(enumerated.size());
            for (std::size_t v = 0; v < enumerated.size(); ++v) samples[v].partitions = enumerated[v];
        } else {
            std::vector<PairSampler> samplers;
            samplers.reserve(static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k) {
                const Eigen::VectorXd row = state.omega.row(k).transpose();
                samplers.emplace_back(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
            }
            samples.resize(static_cast<std::size_t>(params.samples));
            const std::uint64_t iter_seed = derive_seed(params.seed, static_cast<std::uint64_t>(it));
            for (std::size_t v = 0; v < samples.size(); ++v) {
                Rng rng(derive_seed(iter_seed, v));
                samples[v].partitions.resize(static_cast<std::size_t>(K));
                for (int k = 0; k < K; ++k) samples[v].partitions[static_cast<std::size_t>(k)] = samplers[static_cast<std::size_t>(k)](rng);
            }
        }

        parallel_for(samples.size(), params.workers, [&](std::size_t v) {
            auto& s = samples[v];
            s.index = static_cast<int>(v);
            const auto ev = inner.evaluate(s.partitions);
            s.objective = ev.objective;
            s.feasible = ev.feasible;
        });

        const auto n_elite = std::min<std::size_t>(static_cast<std::size_t>(params.elites), samples.size());
        std::partial_sort(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n_elite), samples.end(), better);
        const std::span<const SampleEval> elites(samples.data(), n_elite);

        const auto& top = samples.front();
        bool improved = false;
        if (top.feasible &&
            (!have_best || top.objective < state.best_objective - params.stall_tol * std::abs(state.best_objective))) {
            improved = true;
        } else if (!have_best && !top.feasible) {
            improved = true;  // keep something even if every sample is infeasible
        }
        if (improved) {
            state.best = top.partitions;
            state.best_objective = top.objective;
            have_best = true;
            stall = 0;
        } else {
            ++stall;
        }

        state.omega = smooth(state.omega, update_omega(elites, K, L), params.smoothing);
        state.iteration = it + 1;

        CeIterationStats stats;
        stats.iteration = it + 1;
        stats.best_objective = state.best_objective;
        stats.iteration_best = top.objective;
        double sum = 0.0;
        for (const auto& e : elites) sum += e.objective;
        stats.mean_elite_objective = sum / static_cast<double>(elites.size());
        stats.omega_entropy = binary_entropy_bits(state.omega);
        state.history.push_back(stats);

        if (stall >= params.stall_iters) break;
    }

    CeResult result;
    result.best = state.best;
    result.solution = inner.solve(state.best);
    result.state = std::move(state);
    return result;
}

}  // namespace iscc
