#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sqrn/config.hpp"
#include "sqrn/optics.hpp"
#include "sqrn/rng.hpp"

namespace sqrn {

enum class StateTag : uint8_t { Omega = 0, Psi = 1, Phi = 2 };

const char* to_string(StateTag tag);

/// Payload size of every assembled block: 32 kilobytes.
inline constexpr size_t kBlockBytes = 32768;
inline constexpr uint64_t kBlockBits = 8ull * kBlockBytes;

/// One assembled 32 kB block plus the statistics gathered while it
/// filled. Bit order inside the payload: first accepted bit = most
/// significant bit of byte 0.
struct RawBlock {
    uint64_t index = 0;
    std::vector<uint8_t> payload; // exactly kBlockBytes once assembled
    StateTag state_tag = StateTag::Omega;
    uint64_t early = 0;
    uint64_t late = 0;
    uint64_t double_click = 0;
    uint64_t empty = 0;
    double shannon_entropy = 0.0;
    uint64_t start_pulse = 0;
    uint64_t end_pulse = 0; // one past the last pulse consumed

    uint64_t pulses() const { return end_pulse - start_pulse; }
    double start_time_s(const DeviceConfig& cfg) const {
        return static_cast<double>(start_pulse) / cfg.pulse_rate_hz;
    }
};

/// Fills one block at a fixed drive voltage, advancing the shared pulse
/// counter. Throws std::invalid_argument if the config admits no clicks
/// at all (the block could never fill).
RawBlock acquire_block(const DeviceConfig& cfg, double v, StateTag tag, uint64_t index,
                       uint64_t& pulse_cursor, Prng& rng);

/// Runs the pulse loop until n_blocks 32 kB blocks are assembled.
/// Pulse indices are contiguous across blocks.
std::vector<RawBlock> run_acquisition(const DeviceConfig& cfg, double v, uint64_t n_blocks,
                                      Prng& rng);

/// Total accepted bits divided by elapsed simulated time
/// (total pulses / pulse_rate_hz). Throws on an empty sequence.
double effective_bitrate(std::span<const RawBlock> blocks, const DeviceConfig& cfg);

} // namespace sqrn
