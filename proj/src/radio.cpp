#include "iscc/radio.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <random>
#include <stdexcept>

namespace iscc {

CVector steering_vector(double theta_rad, int n, double delta) {
    CVector a(n);
    const double phase = 2.0 * std::numbers::pi * delta * std::sin(theta_rad);
    for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, phase * i);
    return a;
}

double pathloss_gain(const PathLoss& pl, double distance_m) {
    const double dist = std::max(distance_m, pl.reference_m);
    const double loss_db = pl.reference_db + 10.0 * pl.exponent * std::log10(dist / pl.reference_m);
    return std::pow(10.0, -loss_db / 10.0);
}

ChannelSet gen_channels(const Scenario& scenario, std::uint64_t seed) {
    if (scenario.device_positions.size() != static_cast<std::size_t>(scenario.devices))
        throw std::invalid_argument("gen_channels: device positions not set");

    std::mt19937_64 rng(seed);
    // unit-variance circularly-symmetric entries: each part has variance 1/2
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));

    ChannelSet out;
    out.noise_var = scenario.noise_power_w();
    out.H.reserve(static_cast<std::size_t>(scenario.devices));
    for (int k = 0; k < scenario.devices; ++k) {
        const auto& p = scenario.device_positions[static_cast<std::size_t>(k)];
        const double dist = std::hypot(p.x - scenario.bs_position.x, p.y - scenario.bs_position.y);
        if (dist < scenario.pathloss.reference_m)
            std::clog << "warning: device " << k << " is " << dist << " m from the BS; clamping to "
                      << scenario.pathloss.reference_m << " m\n";
        const double amp = std::sqrt(pathloss_gain(scenario.pathloss, dist));
        CMatrix H(scenario.bs_antennas, scenario.device_antennas);
        for (int c = 0; c < H.cols(); ++c)
            for (int r = 0; r < H.rows(); ++r) {
                const double re = gauss(rng);
                const double im = gauss(rng);
                H(r, c) = amp * Complex(re, im);
            }
        out.H.push_back(std::move(H));
    }
    return out;
}

double log_det_hpd(const CMatrix& A) {
    Eigen::LLT<CMatrix> llt(A);
    if (llt.info() != Eigen::Success) throw std::runtime_error("log_det_hpd: matrix not positive definite");
    const auto& L = llt.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i).real());
    return 2.0 * s;
}

double rate(int k, std::span<const CMatrix> W_c, std::span<const CMatrix> W_r, const ChannelSet& channels,
            double bandwidth_hz) {
    const auto K = channels.H.size();
    if (W_c.size() != K || W_r.size() != K) throw std::invalid_argument("rate: precoder count mismatch");
    const auto ku = static_cast<std::size_t>(k);
    const auto M = channels.H[ku].rows();

    // interference-plus-noise covariance
    CMatrix D = channels.noise_var * CMatrix::Identity(M, M);
    for (std::size_t i = 0; i < K; ++i) {
        const CMatrix& H = channels.H[i];
        if (i != ku && W_c[i].cols() > 0) {
            const CMatrix HW = H * W_c[i];
            D.noalias() += HW * HW.adjoint();
        }
        if (W_r[i].cols() > 0) {
            const CMatrix HW = H * W_r[i];
            D.noalias() += HW * HW.adjoint();
        }
    }
    const CMatrix HW = channels.H[ku] * W_c[ku];
    const CMatrix S = HW * HW.adjoint();
    if (!S.allFinite() || !D.allFinite()) throw std::runtime_error("rate: non-finite input");

    // log det(I + S D^-1) = log det(D + S) - log det(D)
    const double nats = log_det_hpd(D + S) - log_det_hpd(D);
    return std::max(0.0, bandwidth_hz * nats / std::numbers::ln2);
}

}  // namespace iscc
