#include "sqrn/extractor.hpp"

#include <bit>
#include <cmath>
#include <future>
#include <thread>

namespace sqrn {

size_t derive_output_length(size_t n, double h_min_per_byte, int epsilon_log2) {
    if (n == 0 || n % 8 != 0)
        throw std::invalid_argument("derive_output_length: n must be a positive multiple of 8");
    if (!(h_min_per_byte > 0.0) || h_min_per_byte > 8.0)
        throw std::invalid_argument("derive_output_length: h_min_per_byte must be in (0, 8]");
    if (epsilon_log2 <= 0)
        throw std::invalid_argument("derive_output_length: epsilon_log2 must be positive");
    const double total_min_entropy = static_cast<double>(n) * h_min_per_byte / 8.0;
    const double m = std::floor(total_min_entropy - 2.0 * static_cast<double>(epsilon_log2));
    if (m <= 0.0)
        throw insufficient_entropy_error(
            "derive_output_length: input min-entropy does not cover the security margin");
    if (m >= static_cast<double>(n))
        throw std::invalid_argument("derive_output_length: m must stay below n");
    return static_cast<size_t>(m);
}

std::pair<BitVec, BitVec> seed_from_raw(const BitVec& raw, size_t n, size_t m) {
    const size_t seed_len = n + m - 1;
    if (raw.size() < seed_len)
        throw std::invalid_argument("seed_from_raw: raw sequence shorter than the seed");
    return {raw.slice(0, seed_len), raw.slice(seed_len, raw.size() - seed_len)};
}

ToeplitzExtractor ToeplitzExtractor::build(const BitVec& seed_bits, size_t n, size_t m) {
    if (m < 1 || m >= n) throw std::invalid_argument("ToeplitzExtractor: need 1 <= m < n");
    if (seed_bits.size() != n + m - 1)
        throw std::invalid_argument("ToeplitzExtractor: seed must hold exactly n+m-1 bits");
    ToeplitzExtractor ext;
    ext.n_ = n;
    ext.m_ = m;
    ext.words_per_row_ = (n + 63) / 64;
    ext.rows_.assign(m * ext.words_per_row_, 0);
    for (size_t r = 0; r < m; ++r) {
        uint64_t* row = ext.rows_.data() + r * ext.words_per_row_;
        for (size_t c = 0; c < n; ++c) {
            if (seed_bits[r + n - 1 - c]) row[c / 64] |= 0x8000000000000000ull >> (c % 64);
        }
    }
    return ext;
}

bool ToeplitzExtractor::matrix_bit(size_t row, size_t col) const {
    return (rows_[row * words_per_row_ + col / 64] >> (63 - col % 64)) & 1u;
}

namespace {

/// Packs n bits starting at bit offset `from` into words, stream bit
/// order (first bit = MSB of word 0). Tail bits beyond n are zero.
void pack_block(const BitVec& raw, size_t from, size_t n, uint64_t* out, size_t nwords) {
    if ((from & 7) == 0) {
        const uint8_t* bytes = raw.bytes().data() + from / 8;
        const size_t nbytes = (n + 7) / 8;
        for (size_t w = 0; w < nwords; ++w) {
            uint64_t x = 0;
            const size_t base = w * 8;
            for (size_t k = 0; k < 8 && base + k < nbytes; ++k)
                x |= static_cast<uint64_t>(bytes[base + k]) << (56 - 8 * k);
            out[w] = x;
        }
    } else {
        for (size_t w = 0; w < nwords; ++w) out[w] = 0;
        for (size_t j = 0; j < n; ++j)
            if (raw[from + j]) out[j / 64] |= 0x8000000000000000ull >> (j % 64);
    }
    // mask the tail so stray bits of the next subsequence cannot leak in
    if (n % 64) out[nwords - 1] &= ~0ull << (64 - n % 64);
}

} // namespace

void ToeplitzExtractor::hash_range(const BitVec& raw, size_t first_block, size_t last_block,
                                   BitVec& out) const {
    std::vector<uint64_t> block(words_per_row_);
    for (size_t b = first_block; b < last_block; ++b) {
        pack_block(raw, b * n_, n_, block.data(), words_per_row_);
        const uint64_t* row = rows_.data();
        for (size_t r = 0; r < m_; ++r) {
            uint64_t acc = 0;
            for (size_t w = 0; w < words_per_row_; ++w) acc ^= row[w] & block[w];
            out.push_back(std::popcount(acc) & 1u);
            row += words_per_row_;
        }
    }
}

BitVec ToeplitzExtractor::extract(const BitVec& raw, int threads) const {
    if (raw.size() < n_) throw std::invalid_argument("extract: input shorter than n bits");
    const size_t blocks = raw.size() / n_; // trailing remainder dropped

    if (threads < 2 || blocks < 64) {
        BitVec out;
        out.reserve_bits(blocks * m_);
        hash_range(raw, 0, blocks, out);
        return out;
    }

    const size_t nt = std::min<size_t>(static_cast<size_t>(threads), blocks);
    std::vector<std::future<BitVec>> parts;
    parts.reserve(nt);
    for (size_t t = 0; t < nt; ++t) {
        const size_t first = blocks * t / nt;
        const size_t last = blocks * (t + 1) / nt;
        parts.push_back(std::async(std::launch::async, [&, first, last] {
            BitVec part;
            part.reserve_bits((last - first) * m_);
            hash_range(raw, first, last, part);
            return part;
        }));
    }
    BitVec out;
    out.reserve_bits(blocks * m_);
    for (auto& f : parts) out.append(f.get());
    return out;
}

} // namespace sqrn
