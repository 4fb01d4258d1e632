#pragma once

#include "iscc/dnn_profile.hpp"
#include "iscc/scenario.hpp"

namespace iscc {

struct LatencyBreakdown {
    double t_local = 0.0;
    double t_offload_dev_mec = 0.0;
    double t_mec = 0.0;
    double t_offload_mec_cloud = 0.0;
    double t_cloud = 0.0;
    double total = 0.0;
    double energy_j = 0.0;
    bool feasible = true;  // false: total is +infinity
};

struct CostOptions {
    /// Charge o(L)/R and o(L)/r_b even when the last layer runs on the device
    /// or the MEC server. Off by default: the classification result is tiny.
    bool charge_terminal_transfers = false;
};

/// Whether the device-to-BS hop carries o(l1) bits under the given options.
bool charges_uplink(const DnnProfile& profile, PartitionPair p, const CostOptions& opts = {});

/// Five-component inference latency and local computation energy of one
/// device. A positive workload or transfer facing a zero frequency or rate
/// yields an infeasible breakdown with infinite total.
LatencyBreakdown latency(const WorkloadSplit& split, PartitionPair p, const DnnProfile& profile, double rate_bps,
                         double f_local, double f_mec, const DeviceCompute& device, const ServerCompute& server,
                         const CostOptions& opts = {});

}  // namespace iscc
