#include "sqrn/acquisition.hpp"

#include <stdexcept>

#include "sqrn/metrics.hpp"

namespace sqrn {

const char* to_string(StateTag tag) {
    switch (tag) {
        case StateTag::Omega: return "Omega";
        case StateTag::Psi: return "Psi";
        case StateTag::Phi: return "Phi";
    }
    return "?";
}

RawBlock acquire_block(const DeviceConfig& cfg, double v, StateTag tag, uint64_t index,
                       uint64_t& pulse_cursor, Prng& rng) {
    cfg.validate();
    const GateProbabilities gates = gate_probabilities(cfg, v);
    if (gates.accepted() <= 0.0)
        throw std::invalid_argument("acquire_block: configuration admits no single clicks; "
                                    "a block would never fill");

    RawBlock block;
    block.index = index;
    block.state_tag = tag;
    block.start_pulse = pulse_cursor;
    block.payload.assign(kBlockBytes, 0);

    uint64_t bit = 0;
    while (bit < kBlockBits) {
        const PulseKind kind = simulate_pulse(gates, rng);
        ++pulse_cursor;
        switch (kind) {
            case PulseKind::EarlyClick:
                ++block.early; // bit 0: payload already zeroed
                ++bit;
                break;
            case PulseKind::LateClick:
                ++block.late;
                block.payload[bit >> 3] |= static_cast<uint8_t>(0x80u >> (bit & 7));
                ++bit;
                break;
            case PulseKind::DoubleClick: ++block.double_click; break;
            case PulseKind::NoClick: ++block.empty; break;
        }
    }
    block.end_pulse = pulse_cursor;

    ByteHistogram hist;
    hist.add(std::span<const uint8_t>(block.payload));
    block.shannon_entropy = shannon_entropy(hist);
    return block;
}

std::vector<RawBlock> run_acquisition(const DeviceConfig& cfg, double v, uint64_t n_blocks,
                                      Prng& rng) {
    if (n_blocks < 1) throw std::invalid_argument("run_acquisition: n_blocks must be >= 1");
    std::vector<RawBlock> blocks;
    blocks.reserve(n_blocks);
    uint64_t cursor = 0;
    for (uint64_t i = 0; i < n_blocks; ++i)
        blocks.push_back(acquire_block(cfg, v, StateTag::Omega, i, cursor, rng));
    return blocks;
}

double effective_bitrate(std::span<const RawBlock> blocks, const DeviceConfig& cfg) {
    if (blocks.empty()) throw std::invalid_argument("effective_bitrate: empty block sequence");
    uint64_t bits = 0;
    uint64_t pulses = 0;
    for (const RawBlock& b : blocks) {
        bits += b.early + b.late;
        pulses += b.early + b.late + b.double_click + b.empty;
    }
    return static_cast<double>(bits) / (static_cast<double>(pulses) / cfg.pulse_rate_hz);
}

} // namespace sqrn
