#pragma once

#include <span>
#include <vector>

namespace iscc {

struct AllocationVector {
    std::vector<double> f_mec;    // cycles/s per device
    std::vector<double> f_local;  // cycles/s per device
};

/// Splits the MEC capacity F_M to minimize sum_k s_k / (alpha_k f_k):
/// f_k is proportional to sqrt(s_k / alpha_k) and the capacity is used in
/// full. Devices without MEC workload get 0; all-zero workload gives zeros.
std::vector<double> alloc_mec(std::span<const double> s_mec, std::span<const double> alpha_mec, double capacity);

/// Fastest local frequency within both the hardware cap and the energy
/// budget: min{F_k, sqrt(E_th alpha / (kappa s))}. Returns F_k for s = 0.
double alloc_local(double s_local, double alpha_local, double capacity, double energy_budget, double kappa);

/// Computation energy kappa s f^2 / alpha in joules.
double energy(double s_local, double f_local, double alpha_local, double kappa);

}  // namespace iscc
