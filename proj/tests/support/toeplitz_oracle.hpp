#pragma once

// Brute-force dense-matrix reference for the Toeplitz hash. Built
// directly from the indexing rule T[r][c] = seed[r + n - 1 - c] and
// multiplied bit by bit; deliberately independent of the word-packed
// fast path it checks.

#include <cstdint>
#include <vector>

#include "sqrn/bits.hpp"

namespace sqrn::testing {

inline std::vector<std::vector<uint8_t>> dense_toeplitz_matrix(const sqrn::BitVec& seed, size_t n,
                                                               size_t m) {
    std::vector<std::vector<uint8_t>> t(m, std::vector<uint8_t>(n, 0));
    for (size_t r = 0; r < m; ++r)
        for (size_t c = 0; c < n; ++c) t[r][c] = seed[r + n - 1 - c] ? 1 : 0;
    return t;
}

inline sqrn::BitVec dense_extract(const std::vector<std::vector<uint8_t>>& t,
                                  const sqrn::BitVec& raw) {
    const size_t m = t.size();
    const size_t n = t[0].size();
    const size_t blocks = raw.size() / n;
    sqrn::BitVec out;
    for (size_t b = 0; b < blocks; ++b) {
        for (size_t r = 0; r < m; ++r) {
            uint8_t acc = 0;
            for (size_t c = 0; c < n; ++c) acc ^= t[r][c] & (raw[b * n + c] ? 1 : 0);
            out.push_back(acc != 0);
        }
    }
    return out;
}

} // namespace sqrn::testing
