#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace sqrn {

/// Physical and electronic parameters of the simulated chain.
///
/// The transmittance defaults are calibrated against the closed-form
/// click model: T_e = T_l = 1.0 puts the single-click fraction at the
/// balanced point at 0.4773 per pulse (119.3 kbps at 250 kHz), the
/// maximum the independent two-gate threshold model admits with
/// symmetric paths.
struct DeviceConfig {
    double pulse_rate_hz = 250000.0;
    double pulse_width_ns = 20.0; // informational, not used in click statistics
    double mean_photon_number = 10.0;
    double v_pi_volts = 4.3;
    double v_offset_volts = 0.0;
    double transmittance_early = 1.0;
    double transmittance_late = 1.0;
    double detector_efficiency = 0.10;
    double dark_count_prob = 1e-5;
    double dead_time_ns = 500.0;
    double timebin_separation_ns = 750.0;
    uint64_t rng_seed = 1;

    /// Throws std::invalid_argument naming the violated constraint.
    /// Notably dead_time_ns must stay below timebin_separation_ns:
    /// otherwise an early click would suppress the late gate, which
    /// this model refuses to simulate.
    void validate() const;
};

/// Parses a flat `key = value` file (one pair per line, `#` comments,
/// blank lines ignored). Unknown keys are an error. Returns every pair
/// so callers can consume non-device keys too.
std::map<std::string, std::string> parse_flat_config(const std::string& path);

/// Loads a DeviceConfig from a flat key-value file. Keys match the
/// field names; missing keys keep their defaults. Non-device keys in
/// the file are ignored here.
DeviceConfig load_device_config(const std::string& path);

/// Applies one `key = value` pair to a DeviceConfig. Returns false if
/// the key is not a device field.
bool apply_device_key(DeviceConfig& cfg, const std::string& key, const std::string& value);

void save_device_config(const DeviceConfig& cfg, const std::string& path);

} // namespace sqrn
