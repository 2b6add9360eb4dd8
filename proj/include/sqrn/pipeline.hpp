#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sqrn/config.hpp"
#include "sqrn/selftest.hpp"
#include "sqrn/testkit.hpp"
#include "sqrn/tuner.hpp"

namespace sqrn {

/// Everything `run` needs: the device, plus tuner / self-test /
/// extractor / output settings. rng_seed in the device config is the
/// master seed for the whole pipeline; every stage derives its own
/// stream from it.
struct PipelineConfig {
    DeviceConfig device;
    SelftestConfig selftest;
    uint64_t n_blocks = 100;
    uint64_t tune_pulses_per_point = kDefaultPulsesPerPoint;
    size_t extractor_n = 400;
    int epsilon_log2 = 100;
    std::optional<double> h_min_override; // skip calibration when set
    uint64_t calibration_blocks = 64;     // Omega blocks used to measure H_min
    int threads = 1;
    std::string out_dir = ".";

    void validate() const;
};

/// Loads pipeline keys (and nested device/self-test keys) from a flat
/// key-value file.
PipelineConfig load_pipeline_config(const std::string& path);
bool apply_pipeline_key(PipelineConfig& cfg, const std::string& key, const std::string& value);

struct PipelineResult {
    double v_opt = 0.0;
    double h_min_calibration = 0.0;
    size_t extractor_m = 0;
    uint64_t raw_bits = 0;
    uint64_t extracted_bits = 0;
    double raw_bitrate_bps = 0.0;
    TestReport battery;
    VisibilityReport visibility;
    bool alarm = false;
    std::string frames_path;
    std::string raw_path;
    std::string extracted_path;
    std::string report_path;
};

class stage_error : public std::runtime_error {
public:
    stage_error(const std::string& stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// tune → acquire with state switching → frame to disk → calibrate
/// H_min → extract → analyze. Reproducible from (config, seed): the
/// extracted output is byte-identical for any `threads` value.
/// Throws stage_error with stage attribution.
PipelineResult run_pipeline(const PipelineConfig& cfg);

} // namespace sqrn
