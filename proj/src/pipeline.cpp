#include "sqrn/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "sqrn/acquisition.hpp"
#include "sqrn/bits.hpp"
#include "sqrn/blockstream.hpp"
#include "sqrn/extractor.hpp"
#include "sqrn/metrics.hpp"

namespace sqrn {

namespace {

constexpr uint64_t kTuneSalt = 0x54554e45ull; // "TUNE"
constexpr uint64_t kAcqSalt = 0x41435121ull;  // "ACQ!"

struct QueueItem {
    RawBlock block;
    bool emit = false;
};

/// Bounded single-producer single-consumer hand-off; back-pressure
/// blocks the producer when the consumer lags.
class BlockQueue {
public:
    explicit BlockQueue(size_t capacity) : cap_(capacity) {}

    void push(QueueItem item) {
        std::unique_lock lock(m_);
        not_full_.wait(lock, [&] { return q_.size() < cap_; });
        q_.push_back(std::move(item));
        not_empty_.notify_one();
    }

    std::optional<QueueItem> pop() {
        std::unique_lock lock(m_);
        not_empty_.wait(lock, [&] { return !q_.empty() || closed_; });
        if (q_.empty()) return std::nullopt;
        QueueItem item = std::move(q_.front());
        q_.pop_front();
        not_full_.notify_one();
        return item;
    }

    void close() {
        std::lock_guard lock(m_);
        closed_ = true;
        not_empty_.notify_all();
    }

private:
    std::mutex m_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
    std::deque<QueueItem> q_;
    size_t cap_;
    bool closed_ = false;
};

uint64_t fnv1a64(std::span<const uint8_t> bytes) {
    uint64_t h = 1469598103934665603ull;
    for (uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "voltage_v,entropy_bits_per_byte,early,late,double,empty\n";
    out.precision(10);
    for (const auto& p : sweep.points)
        out << p.voltage << ',' << p.entropy << ',' << p.early << ',' << p.late << ','
            << p.double_click << ',' << p.empty << '\n';
}

void write_visibility_csv(const VisibilityReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "block_index,time_s,state,visibility\n";
    out.precision(10);
    auto dump = [&](const StateSeries& s, const char* name) {
        for (const auto& p : s.points)
            out << p.block_index << ',' << p.time_s << ',' << name << ',' << p.visibility << '\n';
    };
    dump(report.psi, "Psi");
    dump(report.phi, "Phi");
    dump(report.omega, "Omega");
}

nlohmann::json battery_json(const TestReport& report) {
    nlohmann::json tests = nlohmann::json::array();
    for (const auto& t : report.tests)
        tests.push_back({{"name", t.name},
                         {"statistic", t.statistic},
                         {"p_value", t.p_value},
                         {"verdict", to_string(t.verdict)}});
    return {{"tests", tests}, {"ks_aggregate_pvalue", report.ks_aggregate_pvalue}};
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const stage_error&) {
        throw;
    } catch (const std::exception& e) {
        throw stage_error(name, e.what());
    }
}

} // namespace

void PipelineConfig::validate() const {
    device.validate();
    selftest.validate();
    if (n_blocks < 1) throw std::invalid_argument("PipelineConfig: n_blocks must be >= 1");
    if (calibration_blocks < 1)
        throw std::invalid_argument("PipelineConfig: calibration_blocks must be >= 1");
    if (threads < 1) throw std::invalid_argument("PipelineConfig: threads must be >= 1");
    if (extractor_n == 0 || extractor_n % 8 != 0)
        throw std::invalid_argument("PipelineConfig: extractor_n must be a positive multiple of 8");
    if (epsilon_log2 <= 0) throw std::invalid_argument("PipelineConfig: epsilon_log2 must be > 0");
    if (h_min_override && (!(*h_min_override > 0.0) || *h_min_override > 8.0))
        throw std::invalid_argument("PipelineConfig: h_min override must be in (0, 8]");
}

bool apply_pipeline_key(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    if (apply_device_key(cfg.device, key, value)) return true;
    auto as_double = [&] { return std::stod(value); };
    auto as_u64 = [&] { return std::stoull(value); };
    if (key == "n_blocks") cfg.n_blocks = as_u64();
    else if (key == "tune_pulses_per_point") cfg.tune_pulses_per_point = as_u64();
    else if (key == "extractor_n") cfg.extractor_n = as_u64();
    else if (key == "epsilon_log2") cfg.epsilon_log2 = static_cast<int>(as_u64());
    else if (key == "h_min") cfg.h_min_override = as_double();
    else if (key == "calibration_blocks") cfg.calibration_blocks = as_u64();
    else if (key == "threads") cfg.threads = static_cast<int>(as_u64());
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "prob_psi") cfg.selftest.prob_psi = as_double();
    else if (key == "prob_phi") cfg.selftest.prob_phi = as_double();
    else if (key == "v_psi") cfg.selftest.v_psi = as_double();
    else if (key == "v_phi") cfg.selftest.v_phi = as_double();
    else if (key == "alarm_min_visibility") cfg.selftest.alarm_min_visibility = as_double();
    else if (key == "alarm_max_omega_visibility")
        cfg.selftest.alarm_max_omega_visibility = as_double();
    else if (key == "alarm_window") cfg.selftest.alarm_window = as_u64();
    else if (key == "stop_on_alarm") cfg.selftest.stop_on_alarm = value == "true" || value == "1";
    else return false;
    return true;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    PipelineConfig cfg;
    for (const auto& [key, value] : parse_flat_config(path)) {
        if (!apply_pipeline_key(cfg, key, value))
            throw std::runtime_error(path + ": unknown key `" + key + "`");
    }
    return cfg;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    stage("config", [&] { cfg.validate(); return 0; });

    namespace fs = std::filesystem;
    stage("config", [&] {
        fs::create_directories(cfg.out_dir);
        return 0;
    });
    const std::string frames_path = (fs::path(cfg.out_dir) / "frames.sqrn").string();
    const std::string raw_path = (fs::path(cfg.out_dir) / "raw.bin").string();
    const std::string extracted_path = (fs::path(cfg.out_dir) / "extracted.bin").string();
    const std::string report_path = (fs::path(cfg.out_dir) / "report.json").string();

    PipelineResult result;
    result.frames_path = frames_path;
    result.raw_path = raw_path;
    result.extracted_path = extracted_path;
    result.report_path = report_path;

    const uint64_t seed = cfg.device.rng_seed;

    // --- tune ---
    const TuneResult tune = stage("tune", [&] {
        return optimize(cfg.device, derive_seed(seed, kTuneSalt), cfg.tune_pulses_per_point,
                        cfg.threads);
    });
    result.v_opt = tune.v_opt;
    stage("tune", [&] {
        write_sweep_csv(tune.coarse, (fs::path(cfg.out_dir) / "tune_coarse.csv").string());
        write_sweep_csv(tune.fine, (fs::path(cfg.out_dir) / "tune_fine.csv").string());
        return 0;
    });

    // --- acquire + stream to disk ---
    BitVec raw;
    raw.reserve_bits(cfg.n_blocks * kBlockBits);
    ByteHistogram calibration_hist;
    uint64_t emitted_blocks = 0;
    SelftestResult st_result;

    stage("acquire", [&] {
        std::ofstream frames(frames_path, std::ios::binary);
        if (!frames) throw std::runtime_error("cannot write " + frames_path);

        BlockQueue queue(16);
        std::exception_ptr producer_error;
        std::thread producer([&] {
            try {
                Prng rng(derive_seed(seed, kAcqSalt));
                st_result = run_selftest_streaming(
                    cfg.device, cfg.selftest, tune.v_opt, cfg.n_blocks, rng,
                    [&](const RawBlock& block, bool emit) {
                        queue.push({block, emit});
                    });
            } catch (...) {
                producer_error = std::current_exception();
            }
            queue.close();
        });

        try {
            while (auto item = queue.pop()) {
                const auto frame = encode_frame(item->block);
                frames.write(reinterpret_cast<const char*>(frame.data()),
                             static_cast<std::streamsize>(frame.size()));
                if (item->emit) {
                    raw.append(BitVec::from_bytes(item->block.payload));
                    if (emitted_blocks < cfg.calibration_blocks)
                        calibration_hist.add(std::span<const uint8_t>(item->block.payload));
                    ++emitted_blocks;
                }
            }
        } catch (...) {
            while (queue.pop()) {} // unblock the producer so it can be joined
            producer.join();
            throw;
        }
        producer.join();
        if (producer_error) std::rethrow_exception(producer_error);
        if (!frames) throw std::runtime_error("write failed for " + frames_path);
        return 0;
    });

    result.visibility = st_result.report;
    result.alarm = st_result.report.any_alarm;
    result.raw_bits = raw.size();
    if (emitted_blocks == 0)
        throw stage_error("acquire", "no Omega blocks were emitted (alarm or audit-only run)");

    stage("acquire", [&] {
        std::ofstream out(raw_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + raw_path);
        out.write(reinterpret_cast<const char*>(raw.bytes().data()),
                  static_cast<std::streamsize>(raw.full_bytes()));
        return 0;
    });
    result.raw_bitrate_bps =
        static_cast<double>(raw.size()) /
        (static_cast<double>(st_result.total_pulses) / cfg.device.pulse_rate_hz);

    // --- calibrate H_min, size the extractor ---
    const double h_min = stage("calibrate", [&] {
        if (cfg.h_min_override) return *cfg.h_min_override;
        return min_entropy(calibration_hist);
    });
    result.h_min_calibration = h_min;
    const size_t m = stage("calibrate", [&] {
        return derive_output_length(cfg.extractor_n, h_min, cfg.epsilon_log2);
    });
    result.extractor_m = m;

    // --- extract ---
    BitVec extracted;
    uint64_t seed_digest = 0;
    stage("extract", [&] {
        auto [seed_bits, rest] = seed_from_raw(raw, cfg.extractor_n, m);
        seed_digest = fnv1a64(std::span<const uint8_t>(seed_bits.bytes()));
        const auto ext = ToeplitzExtractor::build(seed_bits, cfg.extractor_n, m);
        extracted = ext.extract(rest, cfg.threads);
        std::ofstream out(extracted_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + extracted_path);
        out.write(reinterpret_cast<const char*>(extracted.bytes().data()),
                  static_cast<std::streamsize>(extracted.full_bytes()));
        if (!out) throw std::runtime_error("write failed for " + extracted_path);
        return 0;
    });
    result.extracted_bits = extracted.size();

    // --- analyze ---
    stage("analyze", [&] {
        if (extracted.size() >= 1000000) result.battery = quick_battery(extracted);
        write_visibility_csv(st_result.report,
                             (fs::path(cfg.out_dir) / "visibility.csv").string());

        ByteHistogram out_hist;
        out_hist.add(extracted.full_byte_span());

        nlohmann::json j;
        j["seed"] = seed;
        j["v_opt_volts"] = tune.v_opt;
        j["blocks_requested"] = cfg.n_blocks;
        j["blocks_produced"] = st_result.blocks_produced;
        j["omega_blocks_emitted"] = emitted_blocks;
        j["raw_bits"] = result.raw_bits;
        j["raw_bitrate_bps"] = result.raw_bitrate_bps;
        j["h_min_calibration_bits_per_byte"] = h_min;
        j["extractor"] = {{"n", cfg.extractor_n},
                          {"m", m},
                          {"epsilon_log2", cfg.epsilon_log2},
                          {"seed_digest_fnv1a64", seed_digest},
                          {"efficiency", static_cast<double>(m) / static_cast<double>(cfg.extractor_n)}};
        j["extracted_bits"] = result.extracted_bits;
        j["extracted_shannon_entropy"] = shannon_entropy(out_hist);
        j["extracted_min_entropy"] = min_entropy(out_hist);
        j["alarm"] = result.alarm;
        if (st_result.report.alarm_block) j["alarm_block"] = *st_result.report.alarm_block;
        j["visibility"] = {{"psi_mean", st_result.report.psi.mean},
                           {"phi_mean", st_result.report.phi.mean},
                           {"omega_mean", st_result.report.omega.mean}};
        if (!result.battery.tests.empty()) j["quick_battery"] = battery_json(result.battery);
        j["artifacts"] = {{"frames", frames_path},
                          {"raw", raw_path},
                          {"extracted", extracted_path}};

        std::ofstream out(report_path);
        if (!out) throw std::runtime_error("cannot write " + report_path);
        out << j.dump(2) << '\n';
        return 0;
    });

    return result;
}

} // namespace sqrn
