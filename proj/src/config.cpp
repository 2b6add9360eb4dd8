#include "sqrn/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sqrn {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("DeviceConfig: ") + what);
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

void DeviceConfig::validate() const {
    require(std::isfinite(pulse_rate_hz) && pulse_rate_hz > 0, "pulse_rate_hz must be > 0");
    require(std::isfinite(pulse_width_ns) && pulse_width_ns >= 0, "pulse_width_ns must be >= 0");
    require(std::isfinite(mean_photon_number) && mean_photon_number >= 0,
            "mean_photon_number must be >= 0");
    require(std::isfinite(v_pi_volts) && v_pi_volts > 0, "v_pi_volts must be > 0");
    require(std::isfinite(v_offset_volts), "v_offset_volts must be finite");
    require(transmittance_early > 0 && transmittance_early <= 1,
            "transmittance_early must be in (0,1]");
    require(transmittance_late > 0 && transmittance_late <= 1,
            "transmittance_late must be in (0,1]");
    require(detector_efficiency > 0 && detector_efficiency <= 1,
            "detector_efficiency must be in (0,1]");
    require(dark_count_prob >= 0 && dark_count_prob <= 1, "dark_count_prob must be in [0,1]");
    require(dead_time_ns >= 0, "dead_time_ns must be >= 0");
    require(timebin_separation_ns > 0, "timebin_separation_ns must be > 0");
    require(dead_time_ns < timebin_separation_ns,
            "dead_time_ns must be < timebin_separation_ns (an early click would "
            "otherwise suppress the late gate, which this model refuses to simulate)");
}

std::map<std::string, std::string> parse_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << path << ":" << lineno << ": expected `key = value`";
            throw std::runtime_error(msg.str());
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) throw std::runtime_error(path + ": empty key");
        kv[key] = value;
    }
    return kv;
}

bool apply_device_key(DeviceConfig& cfg, const std::string& key, const std::string& value) {
    auto as_double = [&] {
        size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("bad number for " + key + ": " + value);
        return v;
    };
    if (key == "pulse_rate_hz") cfg.pulse_rate_hz = as_double();
    else if (key == "pulse_width_ns") cfg.pulse_width_ns = as_double();
    else if (key == "mean_photon_number") cfg.mean_photon_number = as_double();
    else if (key == "v_pi_volts") cfg.v_pi_volts = as_double();
    else if (key == "v_offset_volts") cfg.v_offset_volts = as_double();
    else if (key == "transmittance_early") cfg.transmittance_early = as_double();
    else if (key == "transmittance_late") cfg.transmittance_late = as_double();
    else if (key == "detector_efficiency") cfg.detector_efficiency = as_double();
    else if (key == "dark_count_prob") cfg.dark_count_prob = as_double();
    else if (key == "dead_time_ns") cfg.dead_time_ns = as_double();
    else if (key == "timebin_separation_ns") cfg.timebin_separation_ns = as_double();
    else if (key == "rng_seed") cfg.rng_seed = std::stoull(value);
    else return false;
    return true;
}

DeviceConfig load_device_config(const std::string& path) {
    DeviceConfig cfg;
    for (const auto& [key, value] : parse_flat_config(path)) apply_device_key(cfg, key, value);
    return cfg;
}

void save_device_config(const DeviceConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out.precision(17);
    out << "pulse_rate_hz = " << cfg.pulse_rate_hz << "\n"
        << "pulse_width_ns = " << cfg.pulse_width_ns << "\n"
        << "mean_photon_number = " << cfg.mean_photon_number << "\n"
        << "v_pi_volts = " << cfg.v_pi_volts << "\n"
        << "v_offset_volts = " << cfg.v_offset_volts << "\n"
        << "transmittance_early = " << cfg.transmittance_early << "\n"
        << "transmittance_late = " << cfg.transmittance_late << "\n"
        << "detector_efficiency = " << cfg.detector_efficiency << "\n"
        << "dark_count_prob = " << cfg.dark_count_prob << "\n"
        << "dead_time_ns = " << cfg.dead_time_ns << "\n"
        << "timebin_separation_ns = " << cfg.timebin_separation_ns << "\n"
        << "rng_seed = " << cfg.rng_seed << "\n";
}

} // namespace sqrn
