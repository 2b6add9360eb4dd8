#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>

#include "sqrn/acquisition.hpp"
#include "sqrn/bits.hpp"
#include "sqrn/blockstream.hpp"
#include "sqrn/extractor.hpp"
#include "sqrn/metrics.hpp"
#include "sqrn/pipeline.hpp"
#include "sqrn/selftest.hpp"
#include "sqrn/testkit.hpp"
#include "sqrn/tuner.hpp"

namespace {

using sqrn::BitVec;

// Every config-file key is also a flag of the same name; flags override
// the file. parse order: defaults -> --config file -> flags.
const std::vector<std::string> kConfigKeys = {
    "pulse_rate_hz", "pulse_width_ns", "mean_photon_number", "v_pi_volts", "v_offset_volts",
    "transmittance_early", "transmittance_late", "detector_efficiency", "dark_count_prob",
    "dead_time_ns", "timebin_separation_ns", "n_blocks", "tune_pulses_per_point", "extractor_n",
    "epsilon_log2", "h_min", "calibration_blocks", "threads", "out_dir", "prob_psi", "prob_phi",
    "v_psi", "v_phi", "alarm_min_visibility", "alarm_max_omega_visibility", "alarm_window",
    "stop_on_alarm"};

struct CommonArgs {
    std::string config_path;
    std::map<std::string, std::string> values;
    CLI::App* app = nullptr;
    CLI::Option* seed_opt = nullptr;
    std::string seed_value;

    void attach(CLI::App& a) {
        app = &a;
        a.add_option("--config", config_path, "Flat key = value configuration file");
        seed_opt = a.add_option("--seed,--rng_seed", seed_value,
                                "Master seed for the pseudo-random streams");
        for (const auto& key : kConfigKeys)
            a.add_option("--" + key, values[key], "Override config key `" + key + "`");
    }

    /// true when a seed came from either the flag or the config file.
    bool build(sqrn::PipelineConfig& cfg) const {
        bool have_seed = false;
        if (!config_path.empty()) {
            for (const auto& [key, value] : sqrn::parse_flat_config(config_path)) {
                if (!sqrn::apply_pipeline_key(cfg, key, value))
                    throw std::runtime_error(config_path + ": unknown key `" + key + "`");
                if (key == "rng_seed") have_seed = true;
            }
        }
        for (const auto& key : kConfigKeys) {
            if (app->count("--" + key) > 0) {
                if (!sqrn::apply_pipeline_key(cfg, key, values.at(key)))
                    throw std::runtime_error("unhandled key `" + key + "`");
            }
        }
        if (seed_opt->count() > 0) {
            sqrn::apply_pipeline_key(cfg, "rng_seed", seed_value);
            have_seed = true;
        }
        return have_seed;
    }
};

BitVec read_bits_file(const std::string& path) {
    BitVec bits = sqrn::import_raw_bits(path);
    if (bits.empty()) throw std::runtime_error(path + ": empty input");
    return bits;
}

void write_bits_file(const BitVec& bits, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bits.bytes().data()),
              static_cast<std::streamsize>(bits.full_bytes()));
    if (!out) throw std::runtime_error("write failed for " + path);
}

void print_battery(const sqrn::TestReport& report) {
    for (const auto& t : report.tests)
        std::cout << "  " << t.name << ": statistic=" << t.statistic << " p=" << t.p_value << " "
                  << to_string(t.verdict) << "\n";
    std::cout << "  KS aggregate p-value: " << report.ks_aggregate_pvalue << "\n";
}

uint64_t fnv1a64(std::span<const uint8_t> bytes) {
    uint64_t h = 1469598103934665603ull;
    for (uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

void write_sweep_csv(std::ostream& out, const sqrn::SweepResult& sweep) {
    out << "voltage_v,entropy_bits_per_byte,early,late,double,empty\n";
    out.precision(10);
    for (const auto& p : sweep.points)
        out << p.voltage << ',' << p.entropy << ',' << p.early << ',' << p.late << ','
            << p.double_click << ',' << p.empty << '\n';
}

int cmd_tune(const sqrn::PipelineConfig& cfg, const std::string& csv_prefix) {
    const auto tune = sqrn::optimize(cfg.device, sqrn::derive_seed(cfg.device.rng_seed, 0x54554e45ull),
                                     cfg.tune_pulses_per_point, cfg.threads);
    if (!csv_prefix.empty()) {
        std::ofstream coarse(csv_prefix + "_coarse.csv");
        std::ofstream fine(csv_prefix + "_fine.csv");
        if (!coarse || !fine) throw std::runtime_error("cannot write sweep CSVs to " + csv_prefix);
        write_sweep_csv(coarse, tune.coarse);
        write_sweep_csv(fine, tune.fine);
    }
    std::cout << "v_opt = " << tune.v_opt << " V\n";
    return 0;
}

int cmd_simulate(const sqrn::PipelineConfig& cfg, double voltage, const std::string& frames_path,
                 const std::string& raw_path) {
    sqrn::Prng rng(cfg.device.rng_seed);
    const auto blocks = sqrn::run_acquisition(cfg.device, voltage, cfg.n_blocks, rng);
    if (!frames_path.empty()) {
        std::ofstream out(frames_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + frames_path);
        for (const auto& b : blocks) {
            const auto frame = sqrn::encode_frame(b);
            out.write(reinterpret_cast<const char*>(frame.data()),
                      static_cast<std::streamsize>(frame.size()));
        }
    }
    if (!raw_path.empty()) {
        std::ofstream out(raw_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + raw_path);
        for (const auto& b : blocks)
            out.write(reinterpret_cast<const char*>(b.payload.data()),
                      static_cast<std::streamsize>(b.payload.size()));
    }
    double mean_entropy = 0;
    for (const auto& b : blocks) mean_entropy += b.shannon_entropy;
    mean_entropy /= static_cast<double>(blocks.size());
    std::cout << "blocks = " << blocks.size() << "\n"
              << "mean shannon entropy = " << mean_entropy << " bits/byte\n"
              << "effective bitrate = " << sqrn::effective_bitrate(blocks, cfg.device) << " bps\n";
    return 0;
}

int cmd_selftest(const sqrn::PipelineConfig& cfg, double v_omega, const std::string& csv_path) {
    sqrn::Prng rng(cfg.device.rng_seed);
    const auto result =
        sqrn::run_selftest(cfg.device, cfg.selftest, v_omega, cfg.n_blocks, rng);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("cannot write " + csv_path);
        out << "block_index,time_s,state,visibility\n";
        out.precision(10);
        auto dump = [&](const sqrn::StateSeries& s, const char* name) {
            for (const auto& p : s.points)
                out << p.block_index << ',' << p.time_s << ',' << name << ',' << p.visibility
                    << '\n';
        };
        dump(result.report.psi, "Psi");
        dump(result.report.phi, "Phi");
        dump(result.report.omega, "Omega");
    }
    auto line = [](const char* name, const sqrn::StateSeries& s) {
        std::cout << "  " << name << ": blocks=" << s.points.size() << " mean=" << s.mean
                  << " stddev=" << s.stddev << (s.alarm ? "  ALARM" : "") << "\n";
    };
    std::cout << "visibility summary:\n";
    line("Psi  ", result.report.psi);
    line("Phi  ", result.report.phi);
    line("Omega", result.report.omega);
    std::cout << "omega blocks emitted: " << result.omega_blocks.size() << "\n";
    if (result.report.any_alarm) {
        std::cout << "ALARM tripped at block " << *result.report.alarm_block
                  << "; emission stopped\n";
        return 2;
    }
    return 0;
}

int cmd_serve(const sqrn::PipelineConfig& cfg, double v_omega, const std::string& sink) {
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (sink != "-") {
        file.open(sink, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write " + sink);
        out = &file;
    }
    sqrn::Prng rng(cfg.device.rng_seed);
    const auto result = sqrn::run_selftest_streaming(
        cfg.device, cfg.selftest, v_omega, cfg.n_blocks, rng,
        [&](const sqrn::RawBlock& block, bool) {
            const auto frame = sqrn::encode_frame(block);
            out->write(reinterpret_cast<const char*>(frame.data()),
                       static_cast<std::streamsize>(frame.size()));
        });
    out->flush();
    std::cerr << "served " << result.blocks_produced << " frames\n";
    return result.report.any_alarm ? 2 : 0;
}

int cmd_recv(const std::string& source, const std::string& raw_path, const std::string& csv_path,
             const sqrn::DeviceConfig& device) {
    std::ifstream file;
    std::istream* in = &std::cin;
    if (source != "-") {
        file.open(source, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open " + source);
        in = &file;
    }
    std::ofstream raw;
    if (!raw_path.empty()) {
        raw.open(raw_path, std::ios::binary);
        if (!raw) throw std::runtime_error("cannot write " + raw_path);
    }
    std::ofstream csv;
    if (!csv_path.empty()) {
        csv.open(csv_path);
        if (!csv) throw std::runtime_error("cannot write " + csv_path);
        csv << "index,state,entropy_bits_per_byte,early,late\n";
        csv.precision(10);
    }
    sqrn::FrameReader reader(*in);
    uint64_t frames = 0, omega = 0;
    while (auto block = reader.next()) {
        ++frames;
        if (block->state_tag == sqrn::StateTag::Omega) {
            ++omega;
            if (raw.is_open())
                raw.write(reinterpret_cast<const char*>(block->payload.data()),
                          static_cast<std::streamsize>(block->payload.size()));
        }
        if (csv.is_open())
            csv << block->index << ',' << to_string(block->state_tag) << ','
                << block->shannon_entropy << ',' << block->early << ',' << block->late << '\n';
    }
    std::cout << "frames decoded: " << frames << " (omega: " << omega
              << "), corrupt: " << reader.corrupt_frames()
              << ", bytes skipped: " << reader.skipped_bytes() << "\n";
    (void)device;
    return reader.corrupt_frames() > 0 ? 3 : 0;
}

int cmd_extract(const sqrn::PipelineConfig& cfg, const std::string& in_path,
                const std::string& out_path, std::optional<double> hmin,
                const std::string& hmin_from, const std::string& report_path, bool benchmark) {
    const BitVec raw = read_bits_file(in_path);

    double h_min_per_byte;
    if (hmin) {
        h_min_per_byte = *hmin;
    } else if (!hmin_from.empty()) {
        const BitVec calib = read_bits_file(hmin_from);
        sqrn::ByteHistogram hist;
        hist.add(calib.full_byte_span());
        h_min_per_byte = sqrn::min_entropy(hist);
    } else {
        throw std::runtime_error("extract: provide --hmin or --hmin-from");
    }

    const size_t n = cfg.extractor_n;
    const size_t m = sqrn::derive_output_length(n, h_min_per_byte, cfg.epsilon_log2);
    auto [seed_bits, rest] = sqrn::seed_from_raw(raw, n, m);
    const auto ext = sqrn::ToeplitzExtractor::build(seed_bits, n, m);

    const auto t0 = std::chrono::steady_clock::now();
    const BitVec extracted = ext.extract(rest, cfg.threads);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();

    write_bits_file(extracted, out_path);

    nlohmann::json j;
    j["n"] = n;
    j["m"] = m;
    j["epsilon_log2"] = cfg.epsilon_log2;
    j["h_min_bits_per_byte"] = h_min_per_byte;
    j["seed_digest_fnv1a64"] = fnv1a64(std::span<const uint8_t>(seed_bits.bytes()));
    j["input_bits"] = raw.size();
    j["output_bits"] = extracted.size();
    j["efficiency"] = static_cast<double>(m) / static_cast<double>(n);
    const std::string rp = report_path.empty() ? out_path + ".json" : report_path;
    std::ofstream rep(rp);
    if (!rep) throw std::runtime_error("cannot write " + rp);
    rep << j.dump(2) << '\n';

    std::cout << "n=" << n << " m=" << m << " efficiency=" << 100.0 * m / n << "%\n"
              << "extracted " << extracted.size() << " bits -> " << out_path << "\n";
    if (benchmark)
        std::cout << "throughput: " << (static_cast<double>(rest.size()) / 8e6) / secs
                  << " MB/s input (" << secs << " s)\n";
    return 0;
}

int cmd_check(const std::string& in_path, const std::string& jsonl_path) {
    const BitVec bits = read_bits_file(in_path);
    const auto report = sqrn::quick_battery(bits);
    std::cout << "quick battery over " << bits.size() << " bits:\n";
    print_battery(report);
    if (!jsonl_path.empty()) {
        std::ofstream out(jsonl_path);
        if (!out) throw std::runtime_error("cannot write " + jsonl_path);
        for (const auto& t : report.tests) {
            nlohmann::json j{{"name", t.name},
                             {"statistic", t.statistic},
                             {"p_value", t.p_value},
                             {"verdict", to_string(t.verdict)}};
            out << j.dump() << '\n';
        }
        nlohmann::json agg{{"name", "ks_aggregate"},
                           {"p_value", report.ks_aggregate_pvalue},
                           {"verdict", to_string(sqrn::classify_pvalue(report.ks_aggregate_pvalue))}};
        out << agg.dump() << '\n';
    }
    return report.any_fail() ? 1 : 0;
}

int cmd_export(const std::string& in_path, const std::string& nist_ascii,
               const std::string& nist_raw, const std::string& dieharder_raw) {
    const BitVec bits = read_bits_file(in_path);
    if (!nist_ascii.empty()) {
        sqrn::export_nist(bits, nist_ascii, nist_raw.empty() ? nist_ascii + ".bin" : nist_raw);
        std::cout << "NIST export: " << nist_ascii << " (+ companion binary)\n";
    }
    if (!dieharder_raw.empty()) {
        sqrn::export_dieharder(bits, dieharder_raw);
        std::cout << "Dieharder export: " << dieharder_raw << "\n";
    }
    if (nist_ascii.empty() && dieharder_raw.empty())
        throw std::runtime_error("export: provide --nist-ascii and/or --dieharder");
    return 0;
}

int cmd_analyze(const std::string& frames_path, const std::string& csv_path,
                const sqrn::DeviceConfig& device) {
    std::ifstream in(frames_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + frames_path);
    std::ofstream csv;
    if (!csv_path.empty()) {
        csv.open(csv_path);
        if (!csv) throw std::runtime_error("cannot write " + csv_path);
        csv << "index,state,entropy_bits_per_byte,min_entropy_bits,early,late\n";
        csv.precision(10);
    }
    sqrn::FrameReader reader(in);
    sqrn::ByteHistogram aggregate;
    uint64_t frames = 0, early = 0, late = 0;
    double entropy_sum = 0.0;
    while (auto block = reader.next()) {
        ++frames;
        sqrn::ByteHistogram hist;
        hist.add(std::span<const uint8_t>(block->payload));
        aggregate.merge(hist);
        entropy_sum += block->shannon_entropy;
        early += block->early;
        late += block->late;
        if (csv.is_open())
            csv << block->index << ',' << to_string(block->state_tag) << ','
                << block->shannon_entropy << ',' << sqrn::min_entropy(hist) << ',' << block->early
                << ',' << block->late << '\n';
    }
    if (frames == 0) throw std::runtime_error("no frames decoded from " + frames_path);
    if (csv.is_open())
        csv << frames << ",aggregate," << sqrn::shannon_entropy(aggregate) << ','
            << sqrn::min_entropy(aggregate) << ',' << early << ',' << late << '\n';
    std::cout << "frames: " << frames << "\n"
              << "mean block entropy: " << entropy_sum / static_cast<double>(frames)
              << " bits/byte\n"
              << "aggregate shannon entropy: " << sqrn::shannon_entropy(aggregate)
              << " bits/byte\n"
              << "aggregate min-entropy: " << sqrn::min_entropy(aggregate) << " bits\n"
              << "nominal bitrate at " << device.pulse_rate_hz << " Hz pulse rate: (see `run` "
              << "report for measured value)\n";
    return 0;
}

int cmd_run(const sqrn::PipelineConfig& cfg) {
    const auto result = sqrn::run_pipeline(cfg);
    std::cout << "v_opt = " << result.v_opt << " V\n"
              << "H_min calibration = " << result.h_min_calibration << " bits/byte\n"
              << "extractor m = " << result.extractor_m << " (n = " << cfg.extractor_n << ")\n"
              << "raw bits = " << result.raw_bits << " at " << result.raw_bitrate_bps / 1000.0
              << " kbps\n"
              << "extracted bits = " << result.extracted_bits << "\n";
    if (!result.battery.tests.empty()) print_battery(result.battery);
    std::cout << "report: " << result.report_path << "\n";
    if (result.alarm) {
        std::cout << "ALARM tripped; emission stopped early\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Digital twin of a tunable Sagnac-interferometer QRNG: simulation, tuning, "
                 "extraction and statistical checks"};
    app.require_subcommand(1);

    CommonArgs common;
    common.attach(app);

    auto* tune = app.add_subcommand("tune", "Two-stage entropy-maximizing voltage sweep");
    std::string tune_csv;
    tune->add_option("--csv", tune_csv, "Prefix for <prefix>_coarse.csv / <prefix>_fine.csv");

    auto* simulate = app.add_subcommand("simulate", "Fixed-voltage block acquisition");
    double sim_voltage = 2.15;
    std::string sim_frames, sim_raw;
    simulate->add_option("--voltage", sim_voltage, "Drive voltage in volts")->required();
    simulate->add_option("--frames-out", sim_frames, "Write framed blocks here");
    simulate->add_option("--raw-out", sim_raw, "Write bare payload concatenation here");

    auto* selftest = app.add_subcommand("selftest", "State-switching audit run");
    std::string st_csv;
    double st_vomega = -1.0;
    selftest->add_option("--v-omega", st_vomega, "Omega drive voltage (default: balance point)");
    selftest->add_option("--csv", st_csv, "Visibility series CSV");

    auto* serve = app.add_subcommand("serve", "Stream framed blocks to a sink");
    std::string serve_out = "-";
    double serve_vomega = -1.0;
    serve->add_option("--out", serve_out, "Output file, or - for stdout")->required();
    serve->add_option("--v-omega", serve_vomega, "Omega drive voltage (default: balance point)");

    auto* recv = app.add_subcommand("recv", "Decode framed blocks from a source");
    std::string recv_in = "-", recv_raw, recv_csv;
    recv->add_option("--in", recv_in, "Input file, or - for stdin")->required();
    recv->add_option("--raw-out", recv_raw, "Write Omega payload concatenation here");
    recv->add_option("--csv", recv_csv, "Per-block stats CSV");

    auto* extract = app.add_subcommand("extract", "Seeded Toeplitz extraction over a raw file");
    std::string ex_in, ex_out, ex_hmin_from, ex_report;
    double ex_hmin = -1.0;
    bool ex_bench = false;
    extract->add_option("--in", ex_in, "Raw input .bin")->required();
    extract->add_option("--out", ex_out, "Extracted output .bin")->required();
    extract->add_option("--hmin", ex_hmin, "Per-byte min-entropy used for sizing");
    extract->add_option("--hmin-from", ex_hmin_from, "Measure min-entropy from this .bin");
    extract->add_option("--report", ex_report, "Sidecar JSON path (default <out>.json)");
    extract->add_flag("--benchmark", ex_bench, "Print extraction throughput");

    auto* check = app.add_subcommand("check", "Quick statistical battery over a .bin");
    std::string chk_in, chk_jsonl;
    check->add_option("--in", chk_in, "Input .bin")->required();
    check->add_option("--jsonl", chk_jsonl, "Machine-readable report, one JSON line per test");

    auto* exp = app.add_subcommand("export", "Export for external NIST STS / Dieharder runs");
    std::string exp_in, exp_nist, exp_nist_raw, exp_dh;
    exp->add_option("--in", exp_in, "Input .bin")->required();
    exp->add_option("--nist-ascii", exp_nist, "NIST STS ASCII 0/1 file");
    exp->add_option("--nist-raw", exp_nist_raw, "Companion raw binary (default <ascii>.bin)");
    exp->add_option("--dieharder", exp_dh, "Dieharder raw binary file");

    auto* analyze = app.add_subcommand("analyze", "Per-block and aggregate stats of a frames file");
    std::string an_in, an_csv;
    analyze->add_option("--in", an_in, "Frames file")->required();
    analyze->add_option("--csv", an_csv, "Per-block CSV");

    auto* run = app.add_subcommand("run", "Full pipeline: tune, acquire, stream, extract, analyze");

    for (auto* sub : {tune, simulate, selftest, serve, recv, extract, check, exp, analyze, run})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        sqrn::PipelineConfig cfg;
        const bool have_seed = common.build(cfg);
        if (run->parsed() && !have_seed)
            throw std::runtime_error("run: --seed is mandatory unless the config provides rng_seed");

        if (tune->parsed()) return cmd_tune(cfg, tune_csv);
        if (simulate->parsed()) return cmd_simulate(cfg, sim_voltage, sim_frames, sim_raw);
        if (selftest->parsed()) {
            const double v = st_vomega >= 0 ? st_vomega : sqrn::predicted_balance_voltage(cfg.device);
            return cmd_selftest(cfg, v, st_csv);
        }
        if (serve->parsed()) {
            const double v =
                serve_vomega >= 0 ? serve_vomega : sqrn::predicted_balance_voltage(cfg.device);
            return cmd_serve(cfg, v, serve_out);
        }
        if (recv->parsed()) return cmd_recv(recv_in, recv_raw, recv_csv, cfg.device);
        if (extract->parsed())
            return cmd_extract(cfg, ex_in, ex_out,
                               ex_hmin >= 0 ? std::optional<double>(ex_hmin) : std::nullopt,
                               ex_hmin_from, ex_report, ex_bench);
        if (check->parsed()) return cmd_check(chk_in, chk_jsonl);
        if (exp->parsed()) return cmd_export(exp_in, exp_nist, exp_nist_raw, exp_dh);
        if (analyze->parsed()) return cmd_analyze(an_in, an_csv, cfg.device);
        if (run->parsed()) return cmd_run(cfg);
    } catch (const sqrn::stage_error& e) {
        std::cerr << "error in stage " << e.what() << "\n"; // what() carries the stage prefix
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
