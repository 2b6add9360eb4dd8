#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sqrn/bits.hpp"

namespace sqrn {

class insufficient_entropy_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Output bits per n-bit subsequence under the leftover hash lemma:
/// m = floor(n · h_min_per_byte / 8 − 2 · epsilon_log2). The per-byte
/// min-entropy is scaled by n/8 to total input min-entropy; the
/// security term is 2·(−log2 ε). Throws insufficient_entropy_error
/// when the formula yields m ≤ 0.
size_t derive_output_length(size_t n, double h_min_per_byte, int epsilon_log2);

/// Takes the first n+m−1 bits of `raw` as the extractor seed and
/// returns (seed, remainder). The seed bits are consumed: they are not
/// part of the extractor input. Throws when raw is shorter than the
/// seed.
std::pair<BitVec, BitVec> seed_from_raw(const BitVec& raw, size_t n, size_t m);

/// Seeded m×n binary Toeplitz hash over GF(2).
///
/// Matrix indexing convention (normative, test-locked):
///   T[r][c] = seed_bits[r − c + n − 1]
/// i.e. seed_bits[0..n−1] is the first row reversed and
/// seed_bits[n..n+m−2] supplies the remaining first-column entries.
///
/// The matrix is immutable after build and reused for every n-bit
/// subsequence; subsequences may be hashed in parallel as long as the
/// outputs are concatenated in input order.
class ToeplitzExtractor {
public:
    /// Requires seed_bits.size() == n + m − 1 and 1 ≤ m < n.
    static ToeplitzExtractor build(const BitVec& seed_bits, size_t n, size_t m);

    size_t input_bits() const { return n_; }
    size_t output_bits() const { return m_; }

    bool matrix_bit(size_t row, size_t col) const;

    /// Hashes each consecutive n-bit subsequence of `raw` and
    /// concatenates the m-bit results in order. A trailing remainder
    /// shorter than n bits is dropped, not zero-padded. Throws when
    /// raw holds fewer than n bits. `threads` > 1 splits subsequences
    /// across workers; the result is identical for any thread count.
    BitVec extract(const BitVec& raw, int threads = 1) const;

private:
    ToeplitzExtractor() = default;

    void hash_range(const BitVec& raw, size_t first_block, size_t last_block, BitVec& out) const;

    size_t n_ = 0;
    size_t m_ = 0;
    size_t words_per_row_ = 0;
    // Row r occupies words [r*words_per_row_, (r+1)*words_per_row_);
    // column c sits at word c/64, bit 63−(c%64), matching BitVec::word.
    std::vector<uint64_t> rows_;
};

} // namespace sqrn
