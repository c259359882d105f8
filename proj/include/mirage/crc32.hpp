#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace mirage {

namespace detail {
// Reflected CRC-32 (IEEE 802.3 polynomial, same parametrization as zlib/DEFLATE containers).
constexpr std::array<uint32_t, 256> make_crc32_table() {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
        t[i] = c;
    }
    return t;
}
inline constexpr std::array<uint32_t, 256> kCrc32Table = make_crc32_table();
}  // namespace detail

inline uint32_t crc32_update(uint32_t crc, const uint8_t* data, size_t len) {
    crc = ~crc;
    for (size_t i = 0; i < len; ++i) crc = detail::kCrc32Table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return ~crc;
}

inline uint32_t crc32(const uint8_t* data, size_t len) { return crc32_update(0, data, len); }

inline uint32_t crc32(const std::vector<uint8_t>& data) { return crc32(data.data(), data.size()); }

}  // namespace mirage
