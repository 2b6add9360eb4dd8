#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sqrn/bits.hpp"

namespace sqrn {

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool clamped = false; // true when the raw interval left [0, 1]
};

/// Pass-proportion bound for a battery of n_streams bitstreams tested
/// at significance alpha: p̂ ± 3·sqrt(α(1−α)/n) around p̂ = 1−α,
/// clamped to [0, 1] with the clamp flagged.
ConfidenceInterval proportion_confidence_interval(double alpha, uint64_t n_streams);

/// Two-sided Kolmogorov–Smirnov test of the values against the uniform
/// CDF on [0, 1]. The statistic is scaled by √N + 0.12 + 0.11/√N before
/// evaluating the asymptotic Kolmogorov distribution. Requires at
/// least 2 values, each in [0, 1].
double ks_uniformity_pvalue(std::span<const double> pvalues);

enum class Verdict : uint8_t { Pass, Weak, Fail };

const char* to_string(Verdict v);

/// Pass for p in (1e-2, 1−1e-2); Weak in [1e-4, 1e-2] ∪ [0.99, 0.9999];
/// Fail outside.
Verdict classify_pvalue(double p);

struct TestResult {
    std::string name;
    double statistic = 0.0;
    double p_value = 0.0;
    Verdict verdict = Verdict::Fail;
};

struct TestReport {
    std::vector<TestResult> tests;
    double ks_aggregate_pvalue = 0.0; // KS over the per-test p-values

    bool all_pass() const;
    bool any_fail() const;
};

/// One-pass word-parallel tallies the battery tests are built on.
struct BitScanSummary {
    uint64_t n = 0;
    uint64_t ones = 0;
    uint64_t transitions = 0; // adjacent unequal pairs
    uint64_t ones_pairs = 0;  // adjacent (1,1) pairs
};

BitScanSummary scan_bits(const BitVec& bits);

/// Quick internal battery: monobit frequency, runs test, byte
/// chi-square (255 dof) and lag-1 serial correlation. Requires at
/// least 1e6 bits. Tests are statistical: on truly uniform input each
/// p-value is itself uniform, so CI usage retries once with fresh data
/// when a Weak (not Fail) verdict appears.
TestReport quick_battery(const BitVec& bits);

/// ASCII '0'/'1' export plus a companion raw-binary file.
void export_nist(const BitVec& bits, const std::string& ascii_path,
                 const std::string& raw_path);

/// Raw binary export (packed bytes, first bit = MSB of byte 0).
void export_dieharder(const BitVec& bits, const std::string& raw_path);

/// Reads back a raw-binary export; inverse of export_dieharder and of
/// the companion file of export_nist for whole-byte streams.
BitVec import_raw_bits(const std::string& raw_path);

} // namespace sqrn
