#include "sqrn/selftest.hpp"

#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

#include "sqrn/metrics.hpp"

namespace sqrn {

void SelftestConfig::validate() const {
    if (prob_psi < 0 || prob_phi < 0 || prob_psi + prob_phi > 1.0)
        throw std::invalid_argument("SelftestConfig: state probabilities must be >= 0 and sum <= 1");
    if (alarm_window < 1) throw std::invalid_argument("SelftestConfig: alarm_window must be >= 1");
    if (alarm_min_visibility < 0 || alarm_min_visibility > 1 || alarm_max_omega_visibility < 0 ||
        alarm_max_omega_visibility > 1)
        throw std::invalid_argument("SelftestConfig: alarm thresholds must be in [0,1]");
}

StatePrep choose_state(const SelftestConfig& cfg, double v_omega, Prng& rng) {
    const double u = rng.next_double();
    if (u < cfg.prob_psi) return {StateTag::Psi, cfg.v_psi};
    if (u < cfg.prob_psi + cfg.prob_phi) return {StateTag::Phi, cfg.v_phi};
    return {StateTag::Omega, v_omega};
}

namespace {

struct WindowTracker {
    std::deque<double> window;
    size_t cap;

    explicit WindowTracker(size_t cap) : cap(cap) {}

    double push(double v) {
        window.push_back(v);
        if (window.size() > cap) window.pop_front();
        return std::accumulate(window.begin(), window.end(), 0.0) /
               static_cast<double>(window.size());
    }
};

void finalize(StateSeries& s) {
    if (s.points.empty()) return;
    double sum = 0.0;
    for (const auto& p : s.points) sum += p.visibility;
    s.mean = sum / static_cast<double>(s.points.size());
    double sq = 0.0;
    for (const auto& p : s.points) sq += (p.visibility - s.mean) * (p.visibility - s.mean);
    s.stddev = s.points.size() > 1
                   ? std::sqrt(sq / static_cast<double>(s.points.size() - 1))
                   : 0.0;
}

} // namespace

namespace {

SelftestResult run_selftest_impl(const DeviceConfig& device, const SelftestConfig& st,
                                 double v_omega, uint64_t n_blocks, Prng& rng,
                                 const BlockSink* sink, bool keep_omega) {
    device.validate();
    st.validate();
    if (n_blocks < 1) throw std::invalid_argument("run_selftest: n_blocks must be >= 1");

    SelftestResult result;
    WindowTracker psi_window(st.alarm_window);
    WindowTracker phi_window(st.alarm_window);
    WindowTracker omega_window(st.alarm_window);

    uint64_t cursor = 0;
    for (uint64_t i = 0; i < n_blocks; ++i) {
        const StatePrep prep = choose_state(st, v_omega, rng);
        RawBlock block = acquire_block(device, prep.voltage, prep.tag, i, cursor, rng);
        const double vis = visibility(block.early, block.late);
        const VisibilityPoint pt{i, block.start_time_s(device), vis};

        bool tripped = false;
        switch (prep.tag) {
            case StateTag::Psi:
                result.report.psi.points.push_back(pt);
                if (psi_window.push(vis) < st.alarm_min_visibility) {
                    result.report.psi.alarm = true;
                    tripped = true;
                }
                break;
            case StateTag::Phi:
                result.report.phi.points.push_back(pt);
                if (phi_window.push(vis) < st.alarm_min_visibility) {
                    result.report.phi.alarm = true;
                    tripped = true;
                }
                break;
            case StateTag::Omega:
                result.report.omega.points.push_back(pt);
                if (omega_window.push(vis) > st.alarm_max_omega_visibility) {
                    result.report.omega.alarm = true;
                    tripped = true;
                }
                break;
        }
        const bool emit = prep.tag == StateTag::Omega && !tripped;
        if (sink) (*sink)(block, emit);
        if (emit && keep_omega) result.omega_blocks.push_back(std::move(block));

        ++result.blocks_produced;
        if (tripped && !result.report.any_alarm) {
            result.report.any_alarm = true;
            result.report.alarm_block = i;
        }
        if (tripped && st.stop_on_alarm) break;
    }
    result.total_pulses = cursor;

    finalize(result.report.psi);
    finalize(result.report.phi);
    finalize(result.report.omega);
    return result;
}

} // namespace

SelftestResult run_selftest(const DeviceConfig& device, const SelftestConfig& st, double v_omega,
                            uint64_t n_blocks, Prng& rng) {
    return run_selftest_impl(device, st, v_omega, n_blocks, rng, nullptr, true);
}

SelftestResult run_selftest_streaming(const DeviceConfig& device, const SelftestConfig& st,
                                      double v_omega, uint64_t n_blocks, Prng& rng,
                                      const BlockSink& sink) {
    return run_selftest_impl(device, st, v_omega, n_blocks, rng, &sink, false);
}

TrendFit visibility_trend(const StateSeries& series) {
    const size_t n = series.points.size();
    if (n < 3) throw std::invalid_argument("visibility_trend: need at least 3 points");
    double sx = 0, sy = 0;
    for (const auto& p : series.points) {
        sx += p.time_s;
        sy += p.visibility;
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (const auto& p : series.points) {
        sxx += (p.time_s - mx) * (p.time_s - mx);
        sxy += (p.time_s - mx) * (p.visibility - my);
    }
    if (sxx == 0) throw std::invalid_argument("visibility_trend: degenerate time axis");
    TrendFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (const auto& p : series.points) {
        const double r = p.visibility - (fit.intercept + fit.slope * p.time_s);
        ss_res += r * r;
    }
    fit.slope_stderr = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
    return fit;
}

} // namespace sqrn
