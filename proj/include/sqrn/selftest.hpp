#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sqrn/acquisition.hpp"
#include "sqrn/config.hpp"
#include "sqrn/rng.hpp"

namespace sqrn {

struct StatePrep {
    StateTag tag = StateTag::Omega;
    double voltage = 0.0;
};

struct SelftestConfig {
    double prob_psi = 0.005;
    double prob_phi = 0.005;
    double v_psi = 0.0;
    double v_phi = 4.2;
    double alarm_min_visibility = 0.98;       // Psi/Phi window mean below this trips
    double alarm_max_omega_visibility = 0.02; // Omega window mean above this trips
    size_t alarm_window = 20;                 // trailing blocks per state
    bool stop_on_alarm = true;

    void validate() const;
};

/// Draws the prepared state for the next block: Psi w.p. prob_psi,
/// Phi w.p. prob_phi, Omega otherwise, from one uniform draw.
StatePrep choose_state(const SelftestConfig& cfg, double v_omega, Prng& rng);

struct VisibilityPoint {
    uint64_t block_index = 0;
    double time_s = 0.0;
    double visibility = 0.0;
};

struct StateSeries {
    std::vector<VisibilityPoint> points;
    double mean = 0.0;
    double stddev = 0.0;
    bool alarm = false;
};

struct VisibilityReport {
    StateSeries psi;
    StateSeries phi;
    StateSeries omega;
    bool any_alarm = false;
    std::optional<uint64_t> alarm_block; // block index at which the first alarm tripped
};

struct SelftestResult {
    std::vector<RawBlock> omega_blocks; // the only blocks released downstream
    VisibilityReport report;
    uint64_t blocks_produced = 0;
    uint64_t total_pulses = 0;
};

/// Acquires n_blocks 32 kB blocks, choosing the prepared state per
/// block. Psi/Phi audit blocks contribute only to the visibility
/// report; Omega blocks are additionally emitted as random output.
/// Alarms evaluate after every block on the trailing window mean per
/// state; with stop_on_alarm the run stops emitting at the first trip.
SelftestResult run_selftest(const DeviceConfig& device, const SelftestConfig& st, double v_omega,
                            uint64_t n_blocks, Prng& rng);

/// Streaming variant: every produced block (all states) is handed to
/// `sink` in production order; emit_to_output marks the blocks whose
/// bits belong on the random-number output path (Omega, no alarm).
/// The returned result carries the report only, not the blocks.
using BlockSink = std::function<void(const RawBlock&, bool emit_to_output)>;
SelftestResult run_selftest_streaming(const DeviceConfig& device, const SelftestConfig& st,
                                      double v_omega, uint64_t n_blocks, Prng& rng,
                                      const BlockSink& sink);

struct TrendFit {
    double slope = 0.0;      // per second of simulated time
    double slope_stderr = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares visibility-vs-time fit of a state series.
/// Requires at least 3 points.
TrendFit visibility_trend(const StateSeries& series);

} // namespace sqrn
