#pragma once

// Block file layout (all integers little-endian):
//   "PRSEQ1" | version 0x01 | kind | lo:u64 | hi:u64 | packed payload | crc32
// The CRC covers header and payload.

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "prlab/error.hpp"
#include "prlab/seqkernel.hpp"

namespace prlab {

inline constexpr std::array<char, 6> kBlockMagic{'P', 'R', 'S', 'E', 'Q', '1'};
inline constexpr std::uint8_t kBlockVersion = 0x01;
inline constexpr std::size_t kBlockHeaderSize = 6 + 1 + 1 + 8 + 8;

namespace detail {

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline std::uint32_t crc32_of(const std::uint8_t* data, std::size_t len) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    while (len > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(len, 1u << 30));
        crc = ::crc32(crc, data, chunk);
        data += chunk;
        len -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_block(const SeqBlock& block) {
    std::vector<std::uint8_t> out;
    out.reserve(kBlockHeaderSize + block.packed().bytes().size() + 4);
    out.insert(out.end(), kBlockMagic.begin(), kBlockMagic.end());
    out.push_back(kBlockVersion);
    out.push_back(static_cast<std::uint8_t>(block.kind()));
    detail::put_u64(out, block.lo());
    detail::put_u64(out, block.hi());
    out.insert(out.end(), block.packed().bytes().begin(), block.packed().bytes().end());
    const std::uint32_t crc = detail::crc32_of(out.data(), out.size());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
    return out;
}

inline SeqBlock decode_block(const std::vector<std::uint8_t>& in) {
    if (in.size() < kBlockMagic.size() || std::memcmp(in.data(), kBlockMagic.data(), kBlockMagic.size()) != 0)
        throw FormatError("not a block file (bad magic)");
    if (in.size() < kBlockHeaderSize) throw FormatError("truncated block header");
    if (in[6] != kBlockVersion) throw FormatError("unsupported block version " + std::to_string(in[6]));
    if (in[7] > static_cast<std::uint8_t>(SeqKind::custom)) throw FormatError("unknown sequence kind byte");

    const auto kind = static_cast<SeqKind>(in[7]);
    const std::uint64_t lo = detail::get_u64(in.data() + 8);
    const std::uint64_t hi = detail::get_u64(in.data() + 16);
    if (lo >= hi) throw FormatError("block header has lo >= hi");
    const std::uint64_t count = hi - lo;
    if (count > (std::uint64_t{1} << 40)) throw FormatError("block header declares an implausible length");
    const std::size_t payload = static_cast<std::size_t>((count + 3) / 4);
    if (in.size() < kBlockHeaderSize + payload + 4) throw FormatError("truncated block payload");
    if (in.size() > kBlockHeaderSize + payload + 4) throw FormatError("trailing bytes after block checksum");

    const std::uint8_t* tail = in.data() + kBlockHeaderSize + payload;
    const std::uint32_t stored = static_cast<std::uint32_t>(tail[0]) | static_cast<std::uint32_t>(tail[1]) << 8 |
                                 static_cast<std::uint32_t>(tail[2]) << 16 | static_cast<std::uint32_t>(tail[3]) << 24;
    if (stored != detail::crc32_of(in.data(), kBlockHeaderSize + payload)) throw FormatError("block checksum mismatch");

    std::vector<std::uint8_t> bytes(in.begin() + kBlockHeaderSize, in.begin() + kBlockHeaderSize + payload);
    return SeqBlock(lo, hi, kind, PackedTernary::from_bytes(std::move(bytes), count));
}

inline void save_block(const SeqBlock& block, const std::filesystem::path& path) {
    const auto bytes = encode_block(block);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

inline SeqBlock load_block(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open block file '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_block(bytes);
}

}  // namespace prlab
