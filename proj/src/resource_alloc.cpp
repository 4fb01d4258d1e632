#include "iscc/resource_alloc.hpp"

#include <cmath>
#include <stdexcept>

namespace iscc {

std::vector<double> alloc_mec(std::span<const double> s_mec, std::span<const double> alpha_mec, double capacity) {
    if (s_mec.size() != alpha_mec.size()) throw std::invalid_argument("alloc_mec: size mismatch");
    std::vector<double> root(s_mec.size(), 0.0);
    double denom = 0.0;
    for (std::size_t k = 0; k < s_mec.size(); ++k) {
        if (s_mec[k] > 0) root[k] = std::sqrt(s_mec[k] / alpha_mec[k]);
        denom += root[k];
    }
    if (denom == 0.0) return root;
    for (double& r : root) r = r / denom * capacity;
    return root;
}

double alloc_local(double s_local, double alpha_local, double capacity, double energy_budget, double kappa) {
    if (s_local <= 0) return capacity;
    return std::min(capacity, std::sqrt(energy_budget * alpha_local / (kappa * s_local)));
}

double energy(double s_local, double f_local, double alpha_local, double kappa) {
    return kappa * s_local * f_local * f_local / alpha_local;
}

}  // namespace iscc
