#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iscc/dnn_profile.hpp"

namespace iscc {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct PathLoss {
    double exponent = 2.7;
    double reference_db = 30.0;
    double reference_m = 1.0;
};

struct DeviceCompute {
    double alpha_local = 2.0;     // FLOPs per cycle
    double capacity_cps = 0.8e9;  // F_k
    double energy_budget_j = 300.0;
    double kappa = 1e-28;
};

struct ServerCompute {
    double alpha_mec = 4.0;
    double mec_capacity_cps = 12e9;  // F_M
    double alpha_cloud = 8.0;
    double cloud_cps = 20e9;      // f^C, per device
    double backhaul_bps = 2e6;    // r_b
};

struct SensingRequirement {
    std::vector<double> target_angles_deg{0.0};
    double mainlobe_width_deg = 20.0;
};

/// Network, radio and compute configuration for one experiment. Defaults are
/// the reference setup (K=5, M=12, Nt=8, AlexNet).
struct Scenario {
    int devices = 5;             // K
    int bs_antennas = 12;        // M
    int device_antennas = 8;     // Nt
    int streams = 4;             // d
    double bandwidth_hz = 5e6;
    double noise_psd_dbm_hz = -174.0;
    double tx_power_dbm = 30.0;
    double antenna_spacing = 0.5;  // normalized, in wavelengths
    double grid_step_deg = 1.0;

    Point2 bs_position{};
    double area_half_width_m = 200.0;
    std::vector<Point2> device_positions;  // empty: drawn per trial
    PathLoss pathloss{};

    std::vector<DeviceCompute> device_compute;      // one per device
    ServerCompute server{};
    std::vector<SensingRequirement> sensing;        // one per device

    std::shared_ptr<const DnnProfile> profile;

    double tx_power_w() const;
    /// sigma^2 = PSD * B in watts.
    double noise_power_w() const;

    /// Broadcasts single-entry per-device vectors to `devices` entries and
    /// checks every invariant; throws ConfigError.
    void normalize();
    void validate() const;

    nlohmann::json to_json() const;
};

/// Defaults with K devices, AlexNet profile.
Scenario default_scenario();

/// Missing keys keep their defaults. `base_dir` resolves a relative
/// "profile" path.
Scenario load_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario_file(const std::filesystem::path& path);

}  // namespace iscc
