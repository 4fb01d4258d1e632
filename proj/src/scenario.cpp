#include "iscc/scenario.hpp"

#include <cmath>
#include <fstream>

namespace iscc {

double Scenario::tx_power_w() const { return std::pow(10.0, (tx_power_dbm - 30.0) / 10.0); }

double Scenario::noise_power_w() const {
    return std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0) * bandwidth_hz;
}

namespace {

template <class T>
void broadcast(std::vector<T>& v, int n, const char* what) {
    if (v.empty()) v.resize(static_cast<std::size_t>(n));
    if (v.size() == 1 && n > 1) v.assign(static_cast<std::size_t>(n), v.front());
    if (v.size() != static_cast<std::size_t>(n))
        throw ConfigError(std::string(what) + ": expected 1 or " + std::to_string(n) + " entries, got " +
                          std::to_string(v.size()));
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

}  // namespace

void Scenario::normalize() {
    require(devices >= 1, "devices must be >= 1");
    broadcast(device_compute, devices, "device_compute");
    broadcast(sensing, devices, "sensing");
    if (!device_positions.empty() && device_positions.size() != static_cast<std::size_t>(devices))
        throw ConfigError("device_positions must list one position per device");
    if (!profile) profile = std::make_shared<const DnnProfile>(alexnet_profile());
    validate();
}

void Scenario::validate() const {
    require(devices >= 1 && bs_antennas >= 1 && device_antennas >= 1, "K, M and Nt must be >= 1");
    require(streams >= 1 && streams <= device_antennas, "streams must satisfy 1 <= d <= Nt");
    require(bandwidth_hz > 0, "bandwidth must be positive");
    require(antenna_spacing > 0, "antenna spacing must be positive");
    require(grid_step_deg > 0 && grid_step_deg <= 10, "grid step must be in (0, 10] degrees");
    require(area_half_width_m > 0, "area half width must be positive");
    require(pathloss.reference_m > 0, "path-loss reference distance must be positive");
    require(std::isfinite(tx_power_dbm) && std::isfinite(noise_psd_dbm_hz), "powers must be finite");
    require(device_compute.size() == static_cast<std::size_t>(devices), "device_compute size mismatch");
    require(sensing.size() == static_cast<std::size_t>(devices), "sensing size mismatch");
    for (const auto& dc : device_compute)
        require(dc.alpha_local > 0 && dc.capacity_cps > 0 && dc.energy_budget_j > 0 && dc.kappa > 0,
                "device compute parameters must be positive");
    require(server.alpha_mec > 0 && server.mec_capacity_cps > 0 && server.alpha_cloud > 0 &&
                server.cloud_cps > 0 && server.backhaul_bps > 0,
            "server compute parameters must be positive");
    for (const auto& s : sensing) {
        require(s.mainlobe_width_deg > 0, "mainlobe width must be positive");
        require(!s.target_angles_deg.empty(), "each device needs at least one target angle");
        for (double a : s.target_angles_deg) require(a >= -90.0 && a <= 90.0, "target angles must lie in [-90, 90]");
    }
    require(profile != nullptr, "scenario has no DNN profile");
}

nlohmann::json Scenario::to_json() const {
    nlohmann::json dc = nlohmann::json::array();
    for (const auto& d : device_compute)
        dc.push_back({{"alpha", d.alpha_local},
                      {"capacity_cps", d.capacity_cps},
                      {"energy_budget_j", d.energy_budget_j},
                      {"kappa", d.kappa}});
    nlohmann::json sens = nlohmann::json::array();
    for (const auto& s : sensing)
        sens.push_back({{"target_angles_deg", s.target_angles_deg}, {"mainlobe_width_deg", s.mainlobe_width_deg}});
    nlohmann::json pos = nlohmann::json::array();
    for (const auto& p : device_positions) pos.push_back({p.x, p.y});
    nlohmann::json j{
        {"devices", devices},
        {"bs_antennas", bs_antennas},
        {"device_antennas", device_antennas},
        {"streams", streams},
        {"bandwidth_hz", bandwidth_hz},
        {"noise_psd_dbm_hz", noise_psd_dbm_hz},
        {"tx_power_dbm", tx_power_dbm},
        {"antenna_spacing", antenna_spacing},
        {"grid_step_deg", grid_step_deg},
        {"bs_position", {bs_position.x, bs_position.y}},
        {"area_half_width_m", area_half_width_m},
        {"device_positions", pos},
        {"pathloss",
         {{"exponent", pathloss.exponent}, {"reference_db", pathloss.reference_db}, {"reference_m", pathloss.reference_m}}},
        {"device_compute", dc},
        {"mec", {{"alpha", server.alpha_mec}, {"capacity_cps", server.mec_capacity_cps}}},
        {"cloud", {{"alpha", server.alpha_cloud}, {"frequency_cps", server.cloud_cps}, {"backhaul_bps", server.backhaul_bps}}},
        {"sensing", sens},
    };
    if (profile) j["profile"] = profile->to_json();
    return j;
}

Scenario default_scenario() {
    Scenario s;
    s.normalize();
    return s;
}

namespace {

template <class T>
void get_to(const nlohmann::json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    try {
        it->get_to(out);
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError(std::string("field '") + key + "': " + err.what());
    }
}

Point2 parse_point(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("positions must be [x, y] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

DeviceCompute parse_device_compute(const nlohmann::json& j) {
    DeviceCompute d;
    get_to(j, "alpha", d.alpha_local);
    get_to(j, "capacity_cps", d.capacity_cps);
    get_to(j, "energy_budget_j", d.energy_budget_j);
    get_to(j, "kappa", d.kappa);
    return d;
}

SensingRequirement parse_sensing(const nlohmann::json& j) {
    SensingRequirement s;
    get_to(j, "target_angles_deg", s.target_angles_deg);
    get_to(j, "mainlobe_width_deg", s.mainlobe_width_deg);
    return s;
}

template <class T, class F>
std::vector<T> parse_one_or_many(const nlohmann::json& j, F parse) {
    std::vector<T> out;
    if (j.is_array())
        for (const auto& e : j) out.push_back(parse(e));
    else
        out.push_back(parse(j));
    return out;
}

}  // namespace

Scenario load_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("scenario document must be an object");
    Scenario s;
    get_to(doc, "devices", s.devices);
    get_to(doc, "bs_antennas", s.bs_antennas);
    get_to(doc, "device_antennas", s.device_antennas);
    get_to(doc, "streams", s.streams);
    get_to(doc, "bandwidth_hz", s.bandwidth_hz);
    get_to(doc, "noise_psd_dbm_hz", s.noise_psd_dbm_hz);
    get_to(doc, "tx_power_dbm", s.tx_power_dbm);
    get_to(doc, "antenna_spacing", s.antenna_spacing);
    get_to(doc, "grid_step_deg", s.grid_step_deg);
    get_to(doc, "area_half_width_m", s.area_half_width_m);
    try {
        if (doc.contains("bs_position")) s.bs_position = parse_point(doc["bs_position"]);
        if (doc.contains("device_positions") && !doc["device_positions"].is_null())
            for (const auto& p : doc["device_positions"]) s.device_positions.push_back(parse_point(p));
        if (auto it = doc.find("pathloss"); it != doc.end()) {
            get_to(*it, "exponent", s.pathloss.exponent);
            get_to(*it, "reference_db", s.pathloss.reference_db);
            get_to(*it, "reference_m", s.pathloss.reference_m);
        }
        if (auto it = doc.find("device_compute"); it != doc.end())
            s.device_compute = parse_one_or_many<DeviceCompute>(*it, parse_device_compute);
        if (auto it = doc.find("mec"); it != doc.end()) {
            get_to(*it, "alpha", s.server.alpha_mec);
            get_to(*it, "capacity_cps", s.server.mec_capacity_cps);
        }
        if (auto it = doc.find("cloud"); it != doc.end()) {
            get_to(*it, "alpha", s.server.alpha_cloud);
            get_to(*it, "frequency_cps", s.server.cloud_cps);
            get_to(*it, "backhaul_bps", s.server.backhaul_bps);
        }
        if (auto it = doc.find("sensing"); it != doc.end())
            s.sensing = parse_one_or_many<SensingRequirement>(*it, parse_sensing);
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError(err.what());
    }

    if (auto it = doc.find("profile"); it != doc.end() && !it->is_null()) {
        if (it->is_string()) {
            const auto name = it->get<std::string>();
            if (name == "alexnet") {
                s.profile = std::make_shared<const DnnProfile>(alexnet_profile());
            } else {
                std::filesystem::path p(name);
                if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
                s.profile = std::make_shared<const DnnProfile>(load_profile_file(p));
            }
        } else {
            s.profile = std::make_shared<const DnnProfile>(load_profile(*it));
        }
    }
    int truncate = 0;
    get_to(doc, "profile_depth", truncate);
    if (truncate > 0) {
        if (!s.profile) s.profile = std::make_shared<const DnnProfile>(alexnet_profile());
        s.profile = std::make_shared<const DnnProfile>(s.profile->truncated(truncate));
    }
    s.normalize();
    return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& err) {
        throw ConfigError(path.string() + ": " + err.what());
    }
    return load_scenario(doc, path.parent_path());
}

}  // namespace iscc
