#include "iscc/inner_solver.hpp"

#include <limits>
#include <stdexcept>

namespace iscc {

InnerSolver::InnerSolver(Scenario scenario, const ChannelSet& channels, std::vector<CovarianceTarget> targets,
                         InnerOptions opts)
    : scenario_(std::move(scenario)),
      targets_(std::move(targets)),
      opts_(opts),
      ctx_(channels, targets_, scenario_.streams, scenario_.bandwidth_hz) {
    if (!scenario_.profile) throw std::invalid_argument("scenario has no profile");
    if (channels.H.size() != static_cast<std::size_t>(scenario_.devices))
        throw std::invalid_argument("channel count does not match device count");
    alpha_mec_.assign(static_cast<std::size_t>(scenario_.devices), scenario_.server.alpha_mec);
    if (opts_.cache_rates) {
        const std::vector<double> ones(static_cast<std::size_t>(scenario_.devices), 1.0);
        cached_ = solve_beamforming(ctx_, ones, opts_.beamforming);
        cached_rates_ = clean_rates(cached_->rates);
    }
}

std::vector<double> InnerSolver::clean_rates(std::vector<double> rates) const {
    const double zero = 1e-12 * scenario_.bandwidth_hz;
    for (double& r : rates)
        if (r <= zero) r = 0.0;
    return rates;
}

void InnerSolver::check(std::span<const PartitionPair> partitions) const {
    if (partitions.size() != static_cast<std::size_t>(scenario_.devices))
        throw std::invalid_argument("one partition pair per device required");
    for (const auto& p : partitions)
        if (!is_valid(profile(), p)) throw std::out_of_range("partition pair outside the profile");
}

std::vector<double> InnerSolver::uplink_weights(std::span<const PartitionPair> partitions) const {
    std::vector<double> w(partitions.size(), 0.0);
    for (std::size_t k = 0; k < partitions.size(); ++k)
        if (charges_uplink(profile(), partitions[k], opts_.cost))
            w[k] = static_cast<double>(profile().out_bits(partitions[k].l1));
    return w;
}

AllocationVector InnerSolver::allocate(std::span<const PartitionPair> partitions) const {
    const auto K = partitions.size();
    AllocationVector alloc;
    std::vector<double> s_mec(K);
    alloc.f_local.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto split = workload_split(profile(), partitions[k]);
        s_mec[k] = static_cast<double>(split.s_mec);
        const auto& dev = scenario_.device_compute[k];
        alloc.f_local[k] = alloc_local(static_cast<double>(split.s_local), dev.alpha_local, dev.capacity_cps,
                                       dev.energy_budget_j, dev.kappa);
    }
    alloc.f_mec = alloc_mec(s_mec, alpha_mec_, scenario_.server.mec_capacity_cps);
    return alloc;
}

InnerSolution InnerSolver::solve(std::span<const PartitionPair> partitions) const {
    check(partitions);
    InnerSolution sol;
    sol.partitions.assign(partitions.begin(), partitions.end());
    sol.allocations = allocate(partitions);

    bool bf_feasible = true;
    if (opts_.cache_rates) {
        sol.beamformers = cached_->beamformers;
        sol.rates = cached_rates_;
    } else {
        auto bf = solve_beamforming(ctx_, uplink_weights(partitions), opts_.beamforming);
        bf_feasible = bf.feasible;
        sol.beamformers = std::move(bf.beamformers);
        sol.rates = clean_rates(std::move(bf.rates));
    }

    sol.objective = 0.0;
    sol.feasible = bf_feasible;
    for (std::size_t k = 0; k < partitions.size(); ++k) {
        const auto split = workload_split(profile(), partitions[k]);
        auto b = latency(split, partitions[k], profile(), sol.rates[k], sol.allocations.f_local[k],
                         sol.allocations.f_mec[k], scenario_.device_compute[k], scenario_.server, opts_.cost);
        sol.feasible = sol.feasible && b.feasible;
        sol.objective += b.total;
        sol.per_device.push_back(b);
    }
    if (!sol.feasible) sol.objective = std::numeric_limits<double>::infinity();
    return sol;
}

Evaluation InnerSolver::evaluate(std::span<const PartitionPair> partitions) const {
    if (!opts_.cache_rates) {
        const auto sol = solve(partitions);
        return {sol.objective, sol.feasible};
    }
    check(partitions);
    const auto alloc = allocate(partitions);
    Evaluation ev;
    for (std::size_t k = 0; k < partitions.size(); ++k) {
        const auto split = workload_split(profile(), partitions[k]);
        const auto b = latency(split, partitions[k], profile(), cached_rates_[k], alloc.f_local[k], alloc.f_mec[k],
                               scenario_.device_compute[k], scenario_.server, opts_.cost);
        if (!b.feasible) return {std::numeric_limits<double>::infinity(), false};
        ev.objective += b.total;
    }
    return ev;
}

}  // namespace iscc
