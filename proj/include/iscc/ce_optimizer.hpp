#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "iscc/inner_solver.hpp"

namespace iscc {

using Rng = std::mt19937_64;

struct CeParams {
    int samples = 1000;     // V
    int elites = 50;        // V_elite
    double smoothing = 0.9; // rho
    int max_iters = 50;
    int stall_iters = 5;
    double stall_tol = 1e-9;
    std::uint64_t seed = 1;
    int workers = 1;
    /// Test hook: each iteration evaluates every joint assignment instead of
    /// drawing `samples` random ones.
    bool enumerate_samples = false;

    void validate() const;
};

struct SampleEval {
    std::vector<PartitionPair> partitions;
    double objective = 0.0;
    bool feasible = true;
    int index = 0;  // position in the iteration's sample list
};

struct CeIterationStats {
    int iteration = 0;
    double best_objective = 0.0;  // best so far
    double iteration_best = 0.0;
    double mean_elite_objective = 0.0;
    double omega_entropy = 0.0;   // bits, summed over all entries
};

struct CeState {
    Eigen::MatrixXd omega;  // K x (L+1) Bernoulli parameters
    int iteration = 0;
    std::vector<PartitionPair> best;
    double best_objective = 0.0;
    std::vector<CeIterationStats> history;
};

struct CeResult {
    std::vector<PartitionPair> best;
    InnerSolution solution;
    CeState state;
};

/// Exact sampler for one device's partition pair: the independent Bernoulli
/// distribution over layer bits conditioned on one or two bits being set.
/// Pair probabilities follow enumerate_partitions order; a single set bit l
/// maps to (l, l).
class PairSampler {
public:
    explicit PairSampler(std::span<const double> omega_row);

    PartitionPair operator()(Rng& rng) const;

    std::span<const double> probabilities() const { return prob_; }
    std::span<const PartitionPair> support() const { return pairs_; }
    /// True when every mass was zero and the sampler fell back to uniform.
    bool degenerate() const { return degenerate_; }

private:
    std::vector<PartitionPair> pairs_;
    std::vector<double> prob_;
    std::vector<double> cdf_;
    bool degenerate_ = false;
};

PartitionPair sample_feasible(std::span<const double> omega_row, Rng& rng);

/// Fraction of elites with each (device, layer) bit set. A pair (l1, l2)
/// sets bits l1 and l2; (l, l) sets bit l only.
Eigen::MatrixXd update_omega(std::span<const SampleEval> elites, int devices, int depth);

/// rho * upsilon + (1 - rho) * omega.
Eigen::MatrixXd smooth(const Eigen::MatrixXd& omega, const Eigen::MatrixXd& upsilon, double rho);

/// Cross-entropy search over partition assignments. Each iteration draws
/// `samples` assignments from the current Bernoulli model, evaluates them with
/// the inner solver, keeps the `elites` best (ties by sample index) and
/// smooths the model toward their empirical bit frequencies. Stops after
/// `stall_iters` iterations without improving the best objective or after
/// `max_iters`. Results do not depend on `workers`.
CeResult optimize(const InnerSolver& inner, const CeParams& params);

}  // namespace iscc
