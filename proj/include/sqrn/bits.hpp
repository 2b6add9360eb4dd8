#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace sqrn {

/// Growable bit sequence with a fixed normative packing: bit 0 of the
/// sequence is the most significant bit of byte 0. This is the order
/// used for block payloads, extractor input/output and exported files,
/// so files are byte-identical across implementations.
class BitVec {
public:
    BitVec() = default;

    static BitVec from_bytes(std::vector<uint8_t> bytes) {
        BitVec v;
        v.nbits_ = bytes.size() * 8;
        v.bytes_ = std::move(bytes);
        return v;
    }

    static BitVec from_bytes(std::vector<uint8_t> bytes, size_t nbits) {
        if (nbits > bytes.size() * 8) throw std::invalid_argument("BitVec: bit count exceeds byte data");
        BitVec v;
        v.bytes_ = std::move(bytes);
        v.nbits_ = nbits;
        v.clear_tail();
        return v;
    }

    void reserve_bits(size_t n) { bytes_.reserve((n + 7) / 8); }

    void push_back(bool bit) {
        if ((nbits_ & 7) == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<uint8_t>(0x80u >> (nbits_ & 7));
        ++nbits_;
    }

    /// Appends all bits of `other`, shifting when this vector is not
    /// byte aligned.
    void append(const BitVec& other) {
        if ((nbits_ & 7) == 0) {
            bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
            nbits_ += other.nbits_;
            clear_tail();
            return;
        }
        for (size_t i = 0; i < other.nbits_; ++i) push_back(other[i]);
    }

    bool operator[](size_t i) const { return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u; }

    size_t size() const { return nbits_; }
    bool empty() const { return nbits_ == 0; }

    /// Backing bytes, ceil(size()/8) of them; unused tail bits are zero.
    const std::vector<uint8_t>& bytes() const { return bytes_; }

    /// Number of complete bytes (trailing partial byte excluded).
    size_t full_bytes() const { return nbits_ / 8; }

    std::span<const uint8_t> full_byte_span() const { return {bytes_.data(), full_bytes()}; }

    /// 64 consecutive stream bits starting at bit 64*w, packed so that
    /// stream bit 64*w is the most significant bit. Bits past the end
    /// read as zero.
    uint64_t word(size_t w) const {
        uint64_t x = 0;
        const size_t base = w * 8;
        for (size_t k = 0; k < 8; ++k) {
            x <<= 8;
            if (base + k < bytes_.size()) x |= bytes_[base + k];
        }
        return x;
    }

    size_t word_count() const { return (nbits_ + 63) / 64; }

    /// Copy of bits [from, from+count), re-aligned to start at bit 0.
    BitVec slice(size_t from, size_t count) const {
        if (from + count > nbits_) throw std::out_of_range("BitVec::slice past end");
        BitVec out;
        out.reserve_bits(count);
        if ((from & 7) == 0) {
            const size_t nb = (count + 7) / 8;
            out.bytes_.assign(bytes_.begin() + from / 8, bytes_.begin() + from / 8 + nb);
            out.nbits_ = count;
            out.clear_tail();
            return out;
        }
        for (size_t i = 0; i < count; ++i) out.push_back((*this)[from + i]);
        return out;
    }

    bool operator==(const BitVec& o) const { return nbits_ == o.nbits_ && bytes_ == o.bytes_; }

private:
    void clear_tail() {
        bytes_.resize((nbits_ + 7) / 8);
        if (nbits_ & 7) bytes_.back() &= static_cast<uint8_t>(0xFF00u >> (nbits_ & 7));
    }

    std::vector<uint8_t> bytes_;
    size_t nbits_ = 0;
};

} // namespace sqrn
