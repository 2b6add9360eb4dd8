#include "sqrn/testkit.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "sqrn/metrics.hpp"

namespace sqrn {

ConfidenceInterval proportion_confidence_interval(double alpha, uint64_t n_streams) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("proportion_confidence_interval: alpha must be in (0,1)");
    if (n_streams < 1)
        throw std::invalid_argument("proportion_confidence_interval: n_streams must be >= 1");
    const double p_hat = 1.0 - alpha;
    const double half = 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n_streams));
    ConfidenceInterval ci{p_hat - half, p_hat + half, false};
    if (ci.lo < 0.0 || ci.hi > 1.0) {
        ci.lo = std::max(0.0, ci.lo);
        ci.hi = std::min(1.0, ci.hi);
        ci.clamped = true;
    }
    return ci;
}

namespace {

/// Survival function of the Kolmogorov distribution, Q(t) = P(K > t).
/// The alternating series converges fast for large t; for small t the
/// Jacobi-theta dual form is used instead (the alternating form loses
/// all precision there).
double kolmogorov_q(double t) {
    if (t <= 0.0) return 1.0;
    if (t < 1.18) {
        const double a = std::numbers::pi * std::numbers::pi / (8.0 * t * t);
        double cdf = 0.0;
        for (int j = 1; j <= 9; j += 2) {
            const double term = std::exp(-static_cast<double>(j) * static_cast<double>(j) * a);
            cdf += term;
            if (term < 1e-18 * cdf) break;
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / t;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double q = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * static_cast<double>(j) * static_cast<double>(j) * t * t);
        q += sign * term;
        sign = -sign;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * q, 0.0, 1.0);
}

} // namespace

double ks_uniformity_pvalue(std::span<const double> pvalues) {
    if (pvalues.size() < 2)
        throw std::invalid_argument("ks_uniformity_pvalue: need at least 2 values");
    std::vector<double> sorted(pvalues.begin(), pvalues.end());
    for (double v : sorted)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("ks_uniformity_pvalue: values must be in [0,1]");
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (size_t i = 0; i < sorted.size(); ++i) {
        const double fi = static_cast<double>(i);
        d = std::max(d, std::max((fi + 1.0) / n - sorted[i], sorted[i] - fi / n));
    }
    const double scale = std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n);
    return kolmogorov_q(scale * d);
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "Pass";
        case Verdict::Weak: return "Weak";
        case Verdict::Fail: return "Fail";
    }
    return "?";
}

Verdict classify_pvalue(double p) {
    if (p > 1e-2 && p < 1.0 - 1e-2) return Verdict::Pass;
    if ((p >= 1e-4 && p <= 1e-2) || (p >= 0.99 && p <= 0.9999)) return Verdict::Weak;
    return Verdict::Fail;
}

bool TestReport::all_pass() const {
    return std::all_of(tests.begin(), tests.end(),
                       [](const TestResult& t) { return t.verdict == Verdict::Pass; });
}

bool TestReport::any_fail() const {
    return std::any_of(tests.begin(), tests.end(),
                       [](const TestResult& t) { return t.verdict == Verdict::Fail; });
}

BitScanSummary scan_bits(const BitVec& bits) {
    BitScanSummary s;
    s.n = bits.size();
    const size_t nw = bits.word_count();
    for (size_t w = 0; w < nw; ++w) {
        const uint64_t x = bits.word(w);
        const size_t valid = std::min<size_t>(64, s.n - w * 64);
        if (valid == 64) {
            s.ones += static_cast<uint64_t>(std::popcount(x));
            const uint64_t shifted = x << 1;
            s.transitions += static_cast<uint64_t>(std::popcount((x ^ shifted) & ~1ull));
            s.ones_pairs += static_cast<uint64_t>(std::popcount((x & shifted) & ~1ull));
            if (w * 64 + 64 < s.n) {
                const uint64_t last = x & 1ull;
                const uint64_t next = bits.word(w + 1) >> 63;
                s.transitions += last ^ next;
                s.ones_pairs += last & next;
            }
        } else {
            // partial tail, bit by bit
            const size_t base = w * 64;
            for (size_t k = 0; k < valid; ++k) {
                const bool b = bits[base + k];
                s.ones += b;
                if (base + k + 1 < s.n) {
                    const bool c = bits[base + k + 1];
                    s.transitions += b != c;
                    s.ones_pairs += b && c;
                }
            }
        }
    }
    return s;
}

namespace {

TestResult monobit_test(const BitScanSummary& s) {
    const double n = static_cast<double>(s.n);
    const double diff = 2.0 * static_cast<double>(s.ones) - n;
    const double stat = std::abs(diff) / std::sqrt(n);
    return {"monobit_frequency", stat, std::erfc(stat / std::numbers::sqrt2), Verdict::Fail};
}

TestResult runs_test(const BitScanSummary& s) {
    const double n = static_cast<double>(s.n);
    const double pi = static_cast<double>(s.ones) / n;
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n))
        return {"runs", 0.0, 0.0, Verdict::Fail}; // monobit prerequisite failed
    const double v = static_cast<double>(s.transitions) + 1.0;
    const double expected = 2.0 * n * pi * (1.0 - pi);
    const double p =
        std::erfc(std::abs(v - expected) / (2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi)));
    return {"runs", v, p, Verdict::Fail};
}

TestResult byte_chi_square_test(const BitVec& bits) {
    ByteHistogram hist;
    hist.add(bits.full_byte_span());
    const double expected = static_cast<double>(hist.total) / 256.0;
    double chi2 = 0.0;
    for (uint64_t c : hist.counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    const double p = boost::math::gamma_q(255.0 / 2.0, chi2 / 2.0);
    return {"byte_chi_square", chi2, p, Verdict::Fail};
}

TestResult serial_correlation_test(const BitScanSummary& s) {
    const double pairs = static_cast<double>(s.n - 1);
    const double p_hat = static_cast<double>(s.ones) / static_cast<double>(s.n);
    const double var = p_hat * (1.0 - p_hat);
    if (var <= 0.0) return {"serial_correlation_lag1", 0.0, 0.0, Verdict::Fail};
    const double r = (static_cast<double>(s.ones_pairs) / pairs - p_hat * p_hat) / var;
    const double z = r * std::sqrt(pairs);
    return {"serial_correlation_lag1", r, std::erfc(std::abs(z) / std::numbers::sqrt2),
            Verdict::Fail};
}

} // namespace

TestReport quick_battery(const BitVec& bits) {
    if (bits.size() < 1000000)
        throw std::invalid_argument("quick_battery: need at least 1e6 bits");
    const BitScanSummary s = scan_bits(bits);

    TestReport report;
    report.tests.push_back(monobit_test(s));
    report.tests.push_back(runs_test(s));
    report.tests.push_back(byte_chi_square_test(bits));
    report.tests.push_back(serial_correlation_test(s));
    for (TestResult& t : report.tests) t.verdict = classify_pvalue(t.p_value);

    std::vector<double> ps;
    ps.reserve(report.tests.size());
    for (const TestResult& t : report.tests) ps.push_back(t.p_value);
    report.ks_aggregate_pvalue = ks_uniformity_pvalue(ps);
    return report;
}

void export_nist(const BitVec& bits, const std::string& ascii_path, const std::string& raw_path) {
    if (bits.empty()) throw std::invalid_argument("export_nist: empty bitstream");
    std::ofstream ascii(ascii_path, std::ios::binary);
    if (!ascii) throw std::runtime_error("export_nist: cannot write " + ascii_path);
    std::string buf;
    buf.reserve(1 << 16);
    for (size_t i = 0; i < bits.size(); ++i) {
        buf.push_back(bits[i] ? '1' : '0');
        if (buf.size() == buf.capacity()) {
            ascii.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    ascii.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!ascii) throw std::runtime_error("export_nist: write failed for " + ascii_path);
    export_dieharder(bits, raw_path);
}

void export_dieharder(const BitVec& bits, const std::string& raw_path) {
    if (bits.empty()) throw std::invalid_argument("export_dieharder: empty bitstream");
    std::ofstream raw(raw_path, std::ios::binary);
    if (!raw) throw std::runtime_error("export_dieharder: cannot write " + raw_path);
    const auto span = bits.full_byte_span();
    raw.write(reinterpret_cast<const char*>(span.data()),
              static_cast<std::streamsize>(span.size()));
    if (!raw) throw std::runtime_error("export_dieharder: write failed for " + raw_path);
}

BitVec import_raw_bits(const std::string& raw_path) {
    std::ifstream in(raw_path, std::ios::binary);
    if (!in) throw std::runtime_error("import_raw_bits: cannot open " + raw_path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return BitVec::from_bytes(std::move(bytes));
}

} // namespace sqrn
