#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "iscc/radio.hpp"

namespace iscc {

/// Desired transmit covariance for one device: Hermitian PSD with every
/// diagonal entry equal to P_t / Nt.
struct CovarianceTarget {
    CMatrix R;
    double per_antenna_power = 0.0;
};

struct BeampatternSample {
    double theta = 0.0;  // rad
    double gain = 0.0;   // W
};

/// Uniform grid from -90 to 90 degrees inclusive, returned in radians.
std::vector<double> angle_grid(double step_deg = 1.0);

double deg2rad(double deg);
double rad2deg(double rad);

/// 1 inside any mainlobe |theta - target| < width / 2, else 0.
std::vector<double> desired_pattern(std::span<const double> targets_rad, double width_rad,
                                    std::span<const double> grid_rad);

struct SynthOptions {
    double tol = 1e-8;  // relative objective decrease
    int max_iter = 5000;
    double antenna_spacing = 0.5;
    bool record_history = false;
};

struct SynthResult {
    CovarianceTarget target;
    double scale = 0.0;      // gamma
    double objective = 0.0;  // sum_q |gamma phi_q - a^H R a|^2
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;  // objective per iteration when requested
};

/// Least-squares fit of a^H R a to a scaled indicator pattern over PSD
/// matrices with fixed diagonal. Alternates the closed-form scale update with
/// a projected-gradient step; the projection onto PSD-with-fixed-diagonal is
/// computed by Dykstra's alternating projections.
SynthResult synth_covariance(std::span<const double> targets_rad, double width_rad, double tx_power_w, int nt,
                             std::span<const double> grid_rad, const SynthOptions& opts = {});

/// Transmit beampattern a^H R a, clamped at zero.
std::vector<BeampatternSample> beampattern(const CMatrix& R, std::span<const double> grid_rad,
                                           double antenna_spacing = 0.5);

/// Projection onto the PSD cone (negative eigenvalues clipped).
CMatrix project_psd(const CMatrix& A);

/// Cholesky factor Q with Q Q^H = R. When the smallest eigenvalue of R is
/// below eps = 1e-10 tr(R)/Nt the factor is taken of R + jitter I, with
/// jitter = eps plus any negative excess.
CMatrix covariance_factor(const CMatrix& R);

/// Memoizes synthesized targets keyed by their inputs; optionally persisted
/// as JSON. Safe to share between threads.
class CovarianceCache {
public:
    CovarianceTarget get(std::span<const double> targets_rad, double width_rad, double tx_power_w, int nt,
                         std::span<const double> grid_rad, const SynthOptions& opts = {});

    std::size_t size() const;
    void load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    static std::string key(std::span<const double> targets_rad, double width_rad, double tx_power_w, int nt,
                           std::span<const double> grid_rad, const SynthOptions& opts);

private:
    mutable std::mutex mutex_;
    std::map<std::string, CovarianceTarget> entries_;
};

}  // namespace iscc
