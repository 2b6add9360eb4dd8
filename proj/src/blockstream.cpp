#include "sqrn/blockstream.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>

#include "sqrn/metrics.hpp"

namespace sqrn {

namespace {

void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 24));
}

void put_u64le(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t get_u32le(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint64_t get_u64le(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

uint32_t frame_crc(std::span<const uint8_t> bytes) {
    return static_cast<uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

} // namespace

const char* to_string(DecodeError e) {
    switch (e) {
        case DecodeError::BadMagic: return "BadMagic";
        case DecodeError::UnsupportedVersion: return "UnsupportedVersion";
        case DecodeError::LengthMismatch: return "LengthMismatch";
        case DecodeError::ChecksumFailure: return "ChecksumFailure";
        case DecodeError::Truncated: return "Truncated";
    }
    return "?";
}

std::vector<uint8_t> encode_frame(const RawBlock& block) {
    if (block.payload.size() != kBlockBytes)
        throw std::invalid_argument("encode_frame: payload must be exactly 32768 bytes");
    std::vector<uint8_t> out;
    out.reserve(kFrameBytes);
    out.insert(out.end(), std::begin(kFrameMagic), std::end(kFrameMagic));
    out.push_back(kFrameVersion);
    put_u64le(out, block.index);
    out.push_back(static_cast<uint8_t>(block.state_tag));
    put_u32le(out, static_cast<uint32_t>(kBlockBytes));
    out.insert(out.end(), block.payload.begin(), block.payload.end());
    put_u32le(out, frame_crc({out.data(), out.size()}));
    return out;
}

DecodeResult decode_frame(std::span<const uint8_t> bytes) {
    DecodeResult res;
    if (bytes.size() < kFrameHeaderBytes) {
        res.error = DecodeError::Truncated;
        return res;
    }
    if (!std::equal(std::begin(kFrameMagic), std::end(kFrameMagic), bytes.begin())) {
        res.error = DecodeError::BadMagic;
        return res;
    }
    if (bytes[4] != kFrameVersion) {
        res.error = DecodeError::UnsupportedVersion;
        return res;
    }
    const uint32_t payload_len = get_u32le(bytes.data() + 14);
    if (payload_len != kBlockBytes) {
        res.error = DecodeError::LengthMismatch;
        return res;
    }
    const size_t total = kFrameHeaderBytes + payload_len + 4;
    if (bytes.size() < total) {
        res.error = DecodeError::Truncated;
        return res;
    }
    const uint32_t stored = get_u32le(bytes.data() + kFrameHeaderBytes + payload_len);
    if (frame_crc(bytes.subspan(0, kFrameHeaderBytes + payload_len)) != stored) {
        res.error = DecodeError::ChecksumFailure;
        return res;
    }
    const uint8_t tag = bytes[13];
    if (tag > 2) {
        // checksummed but not interpretable by a v1 decoder
        res.error = DecodeError::UnsupportedVersion;
        return res;
    }

    RawBlock block;
    block.index = get_u64le(bytes.data() + 5);
    block.state_tag = static_cast<StateTag>(tag);
    block.payload.assign(bytes.begin() + kFrameHeaderBytes,
                         bytes.begin() + kFrameHeaderBytes + payload_len);

    // Statistics are derived from the payload, never trusted from the
    // wire. Only the early/late split is recoverable.
    ByteHistogram hist;
    hist.add(std::span<const uint8_t>(block.payload));
    block.shannon_entropy = shannon_entropy(hist);
    uint64_t ones = 0;
    for (uint8_t b : block.payload) ones += static_cast<uint64_t>(__builtin_popcount(b));
    block.late = ones;
    block.early = kBlockBits - ones;

    res.ok = true;
    res.block = std::move(block);
    res.bytes_consumed = total;
    return res;
}

bool FrameReader::refill(size_t want) {
    if (pos_ > 0) {
        buf_.erase(buf_.begin(), buf_.begin() + static_cast<ptrdiff_t>(pos_));
        pos_ = 0;
    }
    while (buf_.size() < want && in_.good()) {
        uint8_t chunk[65536];
        in_.read(reinterpret_cast<char*>(chunk), sizeof chunk);
        buf_.insert(buf_.end(), chunk, chunk + in_.gcount());
        if (in_.gcount() == 0) break;
    }
    return buf_.size() >= want;
}

std::optional<RawBlock> FrameReader::next() {
    for (;;) {
        refill(kFrameBytes);
        const bool at_eof = !in_.good();
        if (buf_.size() - pos_ < sizeof kFrameMagic && at_eof) return std::nullopt;

        const auto it = std::search(buf_.begin() + static_cast<ptrdiff_t>(pos_), buf_.end(),
                                    std::begin(kFrameMagic), std::end(kFrameMagic));
        if (it == buf_.end()) {
            // no magic found; keep a short tail in case one straddles reads
            const size_t keep = std::min<size_t>(sizeof kFrameMagic - 1, buf_.size() - pos_);
            const size_t new_pos = buf_.size() - keep;
            skipped_ += new_pos - pos_;
            pos_ = new_pos;
            if (at_eof) return std::nullopt;
            continue;
        }
        skipped_ += static_cast<uint64_t>(it - buf_.begin()) - pos_;
        pos_ = static_cast<size_t>(it - buf_.begin());
        refill(kFrameBytes); // compacts, so the candidate frame now sits at the head

        const DecodeResult res = decode_frame({buf_.data(), buf_.size()});
        if (res.ok) {
            pos_ = res.bytes_consumed;
            return res.block;
        }
        if (res.error == DecodeError::Truncated && !in_.good()) return std::nullopt;
        ++corrupt_;
        pos_ = 1; // step past this magic and rescan
        skipped_ += 1;
    }
}

} // namespace sqrn
