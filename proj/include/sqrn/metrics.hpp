#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace sqrn {

/// Tally of 8-bit symbol occurrences. Histograms merge by addition,
/// so partial tallies accumulated in parallel combine into the same
/// result as a single pass.
struct ByteHistogram {
    std::array<uint64_t, 256> counts{};
    uint64_t total = 0;

    void add(uint8_t symbol) {
        ++counts[symbol];
        ++total;
    }

    void add(std::span<const uint8_t> bytes) {
        for (uint8_t b : bytes) ++counts[b];
        total += bytes.size();
    }

    void merge(const ByteHistogram& other) {
        for (size_t i = 0; i < 256; ++i) counts[i] += other.counts[i];
        total += other.total;
    }
};

/// Plug-in Shannon entropy in bits per byte, in [0, 8].
/// Throws std::invalid_argument on an empty histogram.
double shannon_entropy(const ByteHistogram& h);

/// Min-entropy −log2(max_i p_i) in bits, in [0, 8].
/// Throws std::invalid_argument on an empty histogram.
double min_entropy(const ByteHistogram& h);

/// |n_early − n_late| / (n_early + n_late), in [0, 1].
/// Throws std::invalid_argument when both counts are zero.
double visibility(uint64_t n_early, uint64_t n_late);

} // namespace sqrn
