#include "sqrn/optics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sqrn {

double voltage_to_phase(double v, const DeviceConfig& cfg) {
    if (!std::isfinite(v)) throw std::invalid_argument("voltage_to_phase: non-finite voltage");
    return std::numbers::pi * (v + cfg.v_offset_volts) / cfg.v_pi_volts;
}

SplitProbabilities splitting_probabilities(double phase) {
    if (!std::isfinite(phase)) throw std::invalid_argument("splitting_probabilities: non-finite phase");
    const double c = std::cos(phase / 2.0);
    const double early = c * c;
    return {early, 1.0 - early};
}

double click_probability(double mean_photons_at_gate, double dark_count_prob) {
    if (mean_photons_at_gate < 0)
        throw std::invalid_argument("click_probability: negative gate mean");
    return 1.0 - (1.0 - dark_count_prob) * std::exp(-mean_photons_at_gate);
}

GateProbabilities gate_probabilities(const DeviceConfig& cfg, double v) {
    const auto split = splitting_probabilities(voltage_to_phase(v, cfg));
    const double source = cfg.mean_photon_number * cfg.detector_efficiency;
    const double mu_early = source * cfg.transmittance_early * split.early;
    const double mu_late = source * cfg.transmittance_late * split.late;
    return {click_probability(mu_early, cfg.dark_count_prob),
            click_probability(mu_late, cfg.dark_count_prob)};
}

PulseKind simulate_pulse(const DeviceConfig& cfg, double v, Prng& rng) {
    cfg.validate();
    return simulate_pulse(gate_probabilities(cfg, v), rng);
}

} // namespace sqrn
