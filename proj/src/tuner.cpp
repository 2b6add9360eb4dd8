#include "sqrn/tuner.hpp"

#include <cmath>
#include <future>
#include <numbers>
#include <stdexcept>

#include "sqrn/bits.hpp"
#include "sqrn/metrics.hpp"
#include "sqrn/optics.hpp"
#include "sqrn/rng.hpp"

namespace sqrn {

namespace {

SweepPoint measure_point(const DeviceConfig& cfg, double v, uint64_t pulses, uint64_t seed) {
    Prng rng(seed);
    const GateProbabilities gates = gate_probabilities(cfg, v);
    SweepPoint pt;
    pt.voltage = v;
    BitVec bits;
    bits.reserve_bits(static_cast<size_t>(static_cast<double>(pulses) * gates.accepted() * 1.1) + 64);
    for (uint64_t i = 0; i < pulses; ++i) {
        switch (simulate_pulse(gates, rng)) {
            case PulseKind::EarlyClick:
                ++pt.early;
                bits.push_back(false);
                break;
            case PulseKind::LateClick:
                ++pt.late;
                bits.push_back(true);
                break;
            case PulseKind::DoubleClick: ++pt.double_click; break;
            case PulseKind::NoClick: ++pt.empty; break;
        }
    }
    if (bits.full_bytes() > 0) {
        ByteHistogram hist;
        hist.add(bits.full_byte_span());
        pt.entropy = shannon_entropy(hist);
    }
    return pt;
}

// Salts keep coarse and fine sweeps on disjoint derived streams.
constexpr uint64_t kSweepSalt = 0x53574550ull;   // "SWEP"
constexpr uint64_t kCoarseSalt = 0x434f415253ull; // "COARS"
constexpr uint64_t kFineSalt = 0x46494e45ull;     // "FINE"

size_t argmax_lowest_tie(const SweepResult& r) {
    size_t best = 0;
    for (size_t i = 1; i < r.points.size(); ++i)
        if (r.points[i].entropy > r.points[best].entropy) best = i;
    return best;
}

} // namespace

SweepResult sweep(const DeviceConfig& cfg, double v_start, double v_end, double step,
                  uint64_t pulses_per_point, uint64_t master_seed, int threads) {
    cfg.validate();
    if (!(step > 0)) throw std::invalid_argument("sweep: step must be > 0");
    if (!(v_start < v_end)) throw std::invalid_argument("sweep: v_start must be < v_end");
    if (pulses_per_point < 100000)
        throw std::invalid_argument("sweep: pulses_per_point must be >= 1e5");

    std::vector<double> voltages;
    for (size_t i = 0;; ++i) {
        const double v = v_start + static_cast<double>(i) * step;
        if (v > v_end + step * 1e-9) break;
        voltages.push_back(v);
    }

    const uint64_t sweep_seed = derive_seed(master_seed, kSweepSalt);
    SweepResult result;
    result.points.resize(voltages.size());

    if (threads < 2 || voltages.size() < 2) {
        for (size_t i = 0; i < voltages.size(); ++i)
            result.points[i] =
                measure_point(cfg, voltages[i], pulses_per_point, derive_seed(sweep_seed, i));
        return result;
    }

    std::vector<std::future<SweepPoint>> futures;
    futures.reserve(voltages.size());
    for (size_t i = 0; i < voltages.size(); ++i)
        futures.push_back(std::async(std::launch::async, measure_point, cfg, voltages[i],
                                     pulses_per_point, derive_seed(sweep_seed, i)));
    for (size_t i = 0; i < futures.size(); ++i) result.points[i] = futures[i].get();
    return result;
}

TuneResult optimize(const DeviceConfig& cfg, uint64_t master_seed, uint64_t pulses_per_point,
                    int threads) {
    TuneResult tr;
    tr.coarse = sweep(cfg, kCoarseStart, kCoarseEnd, kCoarseStep, pulses_per_point,
                      derive_seed(master_seed, kCoarseSalt), threads);
    const double coarse_opt = tr.coarse.points[argmax_lowest_tie(tr.coarse)].voltage;

    const double lo = std::max(kCoarseStart, coarse_opt - kFineHalfWindow);
    const double hi = std::min(kCoarseEnd, coarse_opt + kFineHalfWindow);
    tr.fine = sweep(cfg, lo, hi, kFineStep, pulses_per_point, derive_seed(master_seed, kFineSalt),
                    threads);
    tr.v_opt = tr.fine.points[argmax_lowest_tie(tr.fine)].voltage;
    return tr;
}

double predicted_balance_voltage(const DeviceConfig& cfg) {
    const double phi = 2.0 * std::atan(std::sqrt(cfg.transmittance_early / cfg.transmittance_late));
    return phi * cfg.v_pi_volts / std::numbers::pi - cfg.v_offset_volts;
}

} // namespace sqrn
