#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sotpuf/bit_array.hpp"
#include "sotpuf/postproc.hpp"

namespace sotpuf::io {

inline constexpr int kSchemaVersion = 1;

/// Packed bitmap header, little-endian:
///   0  char[4] magic "SPUF"
///   4  u16     format version (1)
///   6  u16     flags (bit 0: payload is a ResponseSet)
///   8  u64     payload length in bits
///  16  u64     producing seed
/// ResponseSet files continue with u32 response width and u32 XOR arity.
/// The payload stores bit i in byte i/8 at bit position i%8; unused high bits
/// of the last byte are zero.
inline constexpr char kMagic[4] = {'S', 'P', 'U', 'F'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint16_t kFlagResponseSet = 1;
inline constexpr std::size_t kHeaderSize = 24;

/// Malformed input. offset is the byte (packed) or line (CSV) where parsing stopped.
struct FormatError : std::runtime_error {
    FormatError(const std::string& what, std::uint64_t offset);
    std::uint64_t offset;
};

struct PackedBitmap {
    BitArray bits;
    std::uint64_t seed = 0;
    std::uint16_t flags = 0;
    std::uint32_t width = 0;
    std::uint32_t xor_arity = 0;
};

[[nodiscard]] std::string encode_packed(const BitArray& bits, std::uint64_t seed);
[[nodiscard]] std::string encode_packed(const ResponseSet& responses, std::uint64_t seed);
[[nodiscard]] PackedBitmap decode_packed(std::string_view data);

/// Writes through a temporary file in the same directory, then renames it over path.
void atomic_write(const std::filesystem::path& path, std::string_view content);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

void write_packed(const std::filesystem::path& path, const BitArray& bits, std::uint64_t seed);
void write_packed(const std::filesystem::path& path, const ResponseSet& responses, std::uint64_t seed);
[[nodiscard]] PackedBitmap read_packed(const std::filesystem::path& path);
[[nodiscard]] ResponseSet to_response_set(const PackedBitmap& packed);

/// First line of every CSV artifact: "# sotpuf schema=<v> seed=<seed>".
[[nodiscard]] std::string csv_preamble(std::uint64_t seed);

/// One 0/1 per line after the preamble.
[[nodiscard]] std::string bits_to_csv(const BitArray& bits, std::uint64_t seed);
[[nodiscard]] BitArray bits_from_csv(std::string_view text);

/// Header "response", then one hex string per response (first bit = most significant bit of the first digit).
[[nodiscard]] std::string responses_to_csv(const ResponseSet& responses, std::uint64_t seed);

[[nodiscard]] std::uint32_t crc32(std::string_view data);

}  // namespace sotpuf::io
