#pragma once

#include <cstdint>
#include <vector>

#include "sqrn/config.hpp"

namespace sqrn {

struct SweepPoint {
    double voltage = 0.0;
    double entropy = 0.0; // bits/byte over the bits accepted at this point
    uint64_t early = 0;
    uint64_t late = 0;
    uint64_t double_click = 0;
    uint64_t empty = 0;
};

struct SweepResult {
    std::vector<SweepPoint> points; // voltages strictly increasing
};

/// Acquires pulses_per_point pulses at each voltage in
/// [v_start, v_end] (step `step`) and records byte entropy plus
/// outcome tallies. Points run on independent derived streams
/// (seed = derive(master, point index)) and may be simulated in
/// parallel; assembly is order preserving, so the result does not
/// depend on the thread count. Requires step > 0, v_start < v_end and
/// pulses_per_point ≥ 1e5.
SweepResult sweep(const DeviceConfig& cfg, double v_start, double v_end, double step,
                  uint64_t pulses_per_point, uint64_t master_seed, int threads = 1);

struct TuneResult {
    double v_opt = 0.0;
    SweepResult coarse;
    SweepResult fine;
};

inline constexpr double kCoarseStart = 0.0;
inline constexpr double kCoarseEnd = 4.2;
inline constexpr double kCoarseStep = 0.2;
inline constexpr double kFineHalfWindow = 0.15;
inline constexpr double kFineStep = 0.02;
inline constexpr uint64_t kDefaultPulsesPerPoint = 1ull << 20;

/// Two-stage search for the entropy-maximizing drive voltage: coarse
/// sweep over 0–4.2 V in 200 mV steps, then a fine 20 mV sweep in a
/// ±150 mV window around the coarse argmax (clamped to the coarse
/// range). Argmax is taken over the sampled grid with ties broken
/// toward lower voltage.
TuneResult optimize(const DeviceConfig& cfg, uint64_t master_seed,
                    uint64_t pulses_per_point = kDefaultPulsesPerPoint, int threads = 1);

/// Closed-form balance point: the voltage where
/// T_e·cos²(φ/2) = T_l·sin²(φ/2), i.e. φ* = 2·atan(sqrt(T_e/T_l)).
double predicted_balance_voltage(const DeviceConfig& cfg);

} // namespace sqrn
