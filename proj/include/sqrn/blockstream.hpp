#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqrn/acquisition.hpp"

namespace sqrn {

/// Wire format, normative and bit-exact:
///   magic      4 bytes  ASCII "SQRN"
///   version    1 byte   0x01
///   block_index  8 bytes  little-endian
///   state_tag  1 byte   0 = Omega, 1 = Psi, 2 = Phi
///   payload_len  4 bytes  little-endian (always 32768 for v1)
///   payload    payload_len bytes
///   crc32      4 bytes  little-endian, CRC-32 (IEEE) over all
///              preceding frame bytes
///
/// Counts and entropy are not serialized; the decoder derives what it
/// can from the payload (early = zero bits, late = one bits, entropy)
/// and leaves the rest zero.
inline constexpr uint8_t kFrameMagic[4] = {'S', 'Q', 'R', 'N'};
inline constexpr uint8_t kFrameVersion = 0x01;
inline constexpr size_t kFrameHeaderBytes = 4 + 1 + 8 + 1 + 4;
inline constexpr size_t kFrameBytes = kFrameHeaderBytes + kBlockBytes + 4;

std::vector<uint8_t> encode_frame(const RawBlock& block);

enum class DecodeError : uint8_t {
    BadMagic,
    UnsupportedVersion,
    LengthMismatch,
    ChecksumFailure,
    Truncated,
};

const char* to_string(DecodeError e);

struct DecodeResult {
    bool ok = false;
    DecodeError error = DecodeError::Truncated;
    RawBlock block;           // valid only when ok
    size_t bytes_consumed = 0; // frame size on success, 0 otherwise
};

DecodeResult decode_frame(std::span<const uint8_t> bytes);

/// Pulls frames off a byte stream. After a corrupt frame it
/// resynchronizes by scanning forward for the next magic sequence.
class FrameReader {
public:
    explicit FrameReader(std::istream& in) : in_(in) {}

    /// Next successfully decoded block, or nullopt at end of stream.
    std::optional<RawBlock> next();

    uint64_t corrupt_frames() const { return corrupt_; }
    uint64_t skipped_bytes() const { return skipped_; }

private:
    bool refill(size_t want);

    std::istream& in_;
    std::vector<uint8_t> buf_;
    size_t pos_ = 0;
    uint64_t corrupt_ = 0;
    uint64_t skipped_ = 0;
};

} // namespace sqrn
