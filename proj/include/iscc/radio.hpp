#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "iscc/scenario.hpp"

namespace iscc {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Uniform linear array response, element i = exp(j 2 pi i delta sin(theta)).
CVector steering_vector(double theta_rad, int n, double delta = 0.5);

/// Block-fading uplink channels, one M x Nt matrix per device.
struct ChannelSet {
    std::vector<CMatrix> H;
    double noise_var = 0.0;  // W
};

/// Linear path gain of the log-distance model; distances below the
/// reference are clamped to it.
double pathloss_gain(const PathLoss& pl, double distance_m);

/// Rayleigh channels scaled by path loss. Requires scenario.device_positions
/// to be populated. Same seed gives bit-identical output.
ChannelSet gen_channels(const Scenario& scenario, std::uint64_t seed);

/// Achievable uplink rate of device k in bits/s with interference from all
/// other devices' communication precoders and every radar precoder.
double rate(int k, std::span<const CMatrix> W_c, std::span<const CMatrix> W_r, const ChannelSet& channels,
            double bandwidth_hz);

/// log det of a Hermitian positive definite matrix via Cholesky.
double log_det_hpd(const CMatrix& A);

}  // namespace iscc
