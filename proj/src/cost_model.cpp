#include "iscc/cost_model.hpp"

#include <limits>

#include "iscc/resource_alloc.hpp"

namespace iscc {

bool charges_uplink(const DnnProfile& profile, PartitionPair p, const CostOptions& opts) {
    return opts.charge_terminal_transfers || p.l1 < profile.depth();
}

namespace {

LatencyBreakdown infeasible(LatencyBreakdown b) {
    b.feasible = false;
    b.total = std::numeric_limits<double>::infinity();
    return b;
}

}  // namespace

LatencyBreakdown latency(const WorkloadSplit& split, PartitionPair p, const DnnProfile& profile, double rate_bps,
                         double f_local, double f_mec, const DeviceCompute& device, const ServerCompute& server,
                         const CostOptions& opts) {
    LatencyBreakdown b;
    bool ok = true;

    if (split.s_local > 0) {
        if (f_local > 0)
            b.t_local = static_cast<double>(split.s_local) / (device.alpha_local * f_local);
        else
            ok = false;
        b.energy_j = energy(static_cast<double>(split.s_local), f_local, device.alpha_local, device.kappa);
    }
    if (charges_uplink(profile, p, opts)) {
        if (rate_bps > 0)
            b.t_offload_dev_mec = static_cast<double>(profile.out_bits(p.l1)) / rate_bps;
        else
            ok = false;
    }
    if (split.s_mec > 0) {
        if (f_mec > 0)
            b.t_mec = static_cast<double>(split.s_mec) / (server.alpha_mec * f_mec);
        else
            ok = false;
    }
    if (opts.charge_terminal_transfers || p.l2 < profile.depth())
        b.t_offload_mec_cloud = static_cast<double>(profile.out_bits(p.l2)) / server.backhaul_bps;
    if (split.s_cloud > 0) b.t_cloud = static_cast<double>(split.s_cloud) / (server.alpha_cloud * server.cloud_cps);

    b.total = b.t_local + b.t_offload_dev_mec + b.t_mec + b.t_offload_mec_cloud + b.t_cloud;
    return ok ? b : infeasible(b);
}

}  // namespace iscc
