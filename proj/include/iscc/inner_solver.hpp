#pragma once

#include <optional>
#include <span>
#include <vector>

#include "iscc/beamforming.hpp"
#include "iscc/cost_model.hpp"
#include "iscc/resource_alloc.hpp"

namespace iscc {

struct InnerOptions {
    /// Reuse one set of converged rates for every partition assignment. The
    /// converged precoders do not depend on the positive MM weights, so this
    /// matches the per-assignment solve; `false` re-runs the full
    /// beamforming solve for each assignment.
    bool cache_rates = true;
    CostOptions cost;
    BeamformingOptions beamforming;
};

struct InnerSolution {
    std::vector<PartitionPair> partitions;
    AllocationVector allocations;
    BeamformerSet beamformers;
    std::vector<double> rates;
    std::vector<LatencyBreakdown> per_device;
    double objective = 0.0;  // seconds; +inf iff !feasible
    bool feasible = true;
};

/// Objective-only result used inside search loops.
struct Evaluation {
    double objective = 0.0;
    bool feasible = true;
};

/// Solves the continuous subproblem (MEC/local frequencies and precoders) for
/// a given partition assignment. Holds the channel realization and covariance
/// targets; const member functions are safe to call concurrently.
class InnerSolver {
public:
    InnerSolver(Scenario scenario, const ChannelSet& channels, std::vector<CovarianceTarget> targets,
                InnerOptions opts = {});

    InnerSolution solve(std::span<const PartitionPair> partitions) const;
    Evaluation evaluate(std::span<const PartitionPair> partitions) const;

    const Scenario& scenario() const { return scenario_; }
    const DnnProfile& profile() const { return *scenario_.profile; }
    const InnerOptions& options() const { return opts_; }
    const BeamformingContext& beamforming_context() const { return ctx_; }
    std::span<const CovarianceTarget> targets() const { return targets_; }
    int devices() const { return scenario_.devices; }

    /// Rates shared by all assignments in caching mode; empty otherwise.
    std::span<const double> cached_rates() const { return cached_rates_; }

    /// Bits each device pushes over the uplink: o(l1) when the hop is
    /// charged, else 0. These are the weights of the beamforming objective.
    std::vector<double> uplink_weights(std::span<const PartitionPair> partitions) const;

    AllocationVector allocate(std::span<const PartitionPair> partitions) const;

private:
    void check(std::span<const PartitionPair> partitions) const;
    std::vector<double> clean_rates(std::vector<double> rates) const;

    Scenario scenario_;
    std::vector<CovarianceTarget> targets_;
    InnerOptions opts_;
    BeamformingContext ctx_;
    std::optional<BeamformingResult> cached_;
    std::vector<double> cached_rates_;
    std::vector<double> alpha_mec_;
};

}  // namespace iscc
