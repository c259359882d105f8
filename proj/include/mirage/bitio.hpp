#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mirage/errors.hpp"

namespace mirage {

// Growable bit sequence, MSB-first within each byte. Bits past size() in the
// last byte are kept zero so byte-level comparison and CRC are well defined.
class Bitstream {
public:
    Bitstream() = default;
    explicit Bitstream(size_t nbits) : bytes_((nbits + 7) / 8, 0), nbits_(nbits) {}

    size_t size() const { return nbits_; }
    bool empty() const { return nbits_ == 0; }

    bool get(size_t i) const { return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u; }

    void set(size_t i, bool v) {
        const uint8_t mask = static_cast<uint8_t>(1u << (7 - (i & 7)));
        if (v)
            bytes_[i >> 3] |= mask;
        else
            bytes_[i >> 3] &= static_cast<uint8_t>(~mask);
    }

    void flip(size_t i) { bytes_[i >> 3] ^= static_cast<uint8_t>(1u << (7 - (i & 7))); }

    void push_back(bool v) {
        if ((nbits_ & 7) == 0) bytes_.push_back(0);
        ++nbits_;
        if (v) set(nbits_ - 1, true);
    }

    // Append the low `width` bits of `value`, most significant first.
    void append_bits(uint64_t value, int width) {
        for (int k = width - 1; k >= 0; --k) push_back((value >> k) & 1u);
    }

    void append(const Bitstream& other) {
        for (size_t i = 0; i < other.size(); ++i) push_back(other.get(i));
    }

    uint64_t read_bits(size_t pos, int width) const {
        uint64_t v = 0;
        for (int k = 0; k < width; ++k) v = (v << 1) | (get(pos + k) ? 1u : 0u);
        return v;
    }

    Bitstream slice(size_t pos, size_t len) const {
        Bitstream out;
        for (size_t i = 0; i < len; ++i) out.push_back(get(pos + i));
        return out;
    }

    // Zero-padded to a byte boundary.
    const std::vector<uint8_t>& bytes() const { return bytes_; }

    static Bitstream from_bytes(const std::vector<uint8_t>& data, size_t nbits) {
        if (data.size() < (nbits + 7) / 8) throw ConfigError("bitstream: byte buffer shorter than bit count");
        Bitstream out;
        out.bytes_.assign(data.begin(), data.begin() + static_cast<long>((nbits + 7) / 8));
        out.nbits_ = nbits;
        // clear padding so equality stays byte-wise
        if (nbits & 7) out.bytes_.back() &= static_cast<uint8_t>(0xFFu << (8 - (nbits & 7)));
        return out;
    }

    bool operator==(const Bitstream&) const = default;

private:
    std::vector<uint8_t> bytes_;
    size_t nbits_ = 0;
};

// Number of positions at which two equal-length streams differ.
inline uint64_t hamming_distance(const Bitstream& a, const Bitstream& b) {
    if (a.size() != b.size()) throw DimensionError("hamming_distance: length mismatch");
    uint64_t n = 0;
    const auto& ba = a.bytes();
    const auto& bb = b.bytes();
    for (size_t i = 0; i < ba.size(); ++i) n += static_cast<uint64_t>(__builtin_popcount(ba[i] ^ bb[i]));
    return n;
}

}  // namespace mirage
