#pragma once

#include <cstdint>

#include "sqrn/config.hpp"
#include "sqrn/rng.hpp"

namespace sqrn {

/// Per-pulse outcome of the detection chain. Early clicks map to bit 0
/// and late clicks to bit 1; double clicks are discarded and empty
/// pulses leave no record.
enum class PulseKind : uint8_t { EarlyClick, LateClick, DoubleClick, NoClick };

/// φ = π · (v + v_offset) / v_pi. No wrapping: callers may exceed
/// [0, 2π). Throws std::invalid_argument for non-finite v.
double voltage_to_phase(double v, const DeviceConfig& cfg);

struct SplitProbabilities {
    double early; // cos²(φ/2)
    double late;  // 1 − early, so the pair sums to 1 exactly
};

SplitProbabilities splitting_probabilities(double phase);

/// Threshold-detector click probability for Poissonian light:
/// 1 − (1 − dark) · exp(−μ_gate).
double click_probability(double mean_photons_at_gate, double dark_count_prob);

/// Click probabilities of the two gates at a fixed drive voltage,
/// precomputed once per operating point for the hot pulse loop.
struct GateProbabilities {
    double early_click;
    double late_click;

    double early_only() const { return early_click * (1.0 - late_click); }
    double late_only() const { return late_click * (1.0 - early_click); }
    double double_click() const { return early_click * late_click; }
    double accepted() const { return early_only() + late_only(); }
};

GateProbabilities gate_probabilities(const DeviceConfig& cfg, double v);

/// One pulse against precomputed gate probabilities. Draws exactly two
/// uniforms (early gate first) so outcome sequences are reproducible
/// from (cfg, voltage, seed) alone.
inline PulseKind simulate_pulse(const GateProbabilities& g, Prng& rng) {
    const bool early = rng.bernoulli(g.early_click);
    const bool late = rng.bernoulli(g.late_click);
    if (early && late) return PulseKind::DoubleClick;
    if (early) return PulseKind::EarlyClick;
    if (late) return PulseKind::LateClick;
    return PulseKind::NoClick;
}

/// Validating wrapper; throws on an invalid config.
PulseKind simulate_pulse(const DeviceConfig& cfg, double v, Prng& rng);

} // namespace sqrn
