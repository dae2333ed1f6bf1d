#include "sotpuf/io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace sotpuf::io {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(std::string_view data, std::size_t offset) {
    if (data.size() < offset + sizeof(T))
        throw FormatError("truncated header: need " + std::to_string(offset + sizeof(T)) + " bytes, have " +
                              std::to_string(data.size()),
                          data.size());
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        value |= static_cast<T>(static_cast<unsigned char>(data[offset + i])) << (8 * i);
    return value;
}

std::string encode(const BitArray& bits, std::uint64_t seed, std::uint16_t flags, std::uint32_t width,
                   std::uint32_t arity) {
    std::string out(kMagic, 4);
    put_le(out, kFormatVersion);
    put_le(out, flags);
    put_le(out, static_cast<std::uint64_t>(bits.size()));
    put_le(out, seed);
    if (flags & kFlagResponseSet) {
        put_le(out, width);
        put_le(out, arity);
    }
    const std::size_t nbytes = (bits.size() + 7) / 8;
    const auto words = bits.words();
    for (std::size_t b = 0; b < nbytes; ++b) out.push_back(static_cast<char>((words[b / 8] >> (8 * (b % 8))) & 0xff));
    return out;
}

}  // namespace

FormatError::FormatError(const std::string& what, std::uint64_t offset_)
    : std::runtime_error(what + " (at offset " + std::to_string(offset_) + ")"), offset(offset_) {}

std::string encode_packed(const BitArray& bits, std::uint64_t seed) { return encode(bits, seed, 0, 0, 0); }

std::string encode_packed(const ResponseSet& responses, std::uint64_t seed) {
    return encode(responses.concatenated(), seed, kFlagResponseSet, static_cast<std::uint32_t>(responses.width),
                  static_cast<std::uint32_t>(responses.xor_arity));
}

PackedBitmap decode_packed(std::string_view data) {
    if (data.size() < 4 || std::memcmp(data.data(), kMagic, 4) != 0) throw FormatError("bad magic, expected SPUF", 0);
    const auto version = get_le<std::uint16_t>(data, 4);
    if (version != kFormatVersion)
        throw FormatError("unsupported format version " + std::to_string(version), 4);
    PackedBitmap out;
    out.flags = get_le<std::uint16_t>(data, 6);
    const auto length = get_le<std::uint64_t>(data, 8);
    out.seed = get_le<std::uint64_t>(data, 16);
    std::size_t offset = kHeaderSize;
    if (out.flags & kFlagResponseSet) {
        out.width = get_le<std::uint32_t>(data, offset);
        out.xor_arity = get_le<std::uint32_t>(data, offset + 4);
        offset += 8;
        if (out.width == 0) throw FormatError("response width must be > 0", kHeaderSize);
    }
    const std::uint64_t nbytes = (length + 7) / 8;
    if (data.size() - offset < nbytes)
        throw FormatError("truncated payload: expected " + std::to_string(nbytes) + " bytes", data.size());
    if (data.size() - offset > nbytes) throw FormatError("trailing bytes after payload", offset + nbytes);
    out.bits = BitArray(length);
    for (std::uint64_t i = 0; i < length; ++i)
        if ((static_cast<unsigned char>(data[offset + i / 8]) >> (i % 8)) & 1u) out.bits.set(i, true);
    if (length % 8 && (static_cast<unsigned char>(data[offset + nbytes - 1]) >> (length % 8)) != 0)
        throw FormatError("nonzero padding bits", offset + nbytes - 1);
    return out;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::random_device rd;
    auto tmp = path;
    tmp += ".tmp" + std::to_string(rd());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) {
            std::filesystem::remove(tmp);
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_packed(const std::filesystem::path& path, const BitArray& bits, std::uint64_t seed) {
    atomic_write(path, encode_packed(bits, seed));
}

void write_packed(const std::filesystem::path& path, const ResponseSet& responses, std::uint64_t seed) {
    atomic_write(path, encode_packed(responses, seed));
}

PackedBitmap read_packed(const std::filesystem::path& path) { return decode_packed(read_file(path)); }

ResponseSet to_response_set(const PackedBitmap& packed) {
    if (!(packed.flags & kFlagResponseSet)) throw std::invalid_argument("packed file holds a bitmap, not responses");
    ResponseSet rs = segment(packed.bits, packed.width);
    rs.xor_arity = packed.xor_arity;
    return rs;
}

std::string csv_preamble(std::uint64_t seed) {
    return "# sotpuf schema=" + std::to_string(kSchemaVersion) + " seed=" + std::to_string(seed) + "\n";
}

std::string bits_to_csv(const BitArray& bits, std::uint64_t seed) {
    std::string out = csv_preamble(seed);
    out.reserve(out.size() + 2 * bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        out.push_back(bits.get(i) ? '1' : '0');
        out.push_back('\n');
    }
    return out;
}

BitArray bits_from_csv(std::string_view text) {
    BitArray bits;
    std::uint64_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (line == "0")
            bits.push_back(false);
        else if (line == "1")
            bits.push_back(true);
        else
            throw FormatError("expected 0 or 1, got '" + std::string(line) + "'", line_no);
    }
    return bits;
}

std::string responses_to_csv(const ResponseSet& responses, std::uint64_t seed) {
    std::string out = csv_preamble(seed) + "response\n";
    for (const auto& r : responses.responses) out += r.to_hex() + "\n";
    return out;
}

std::uint32_t crc32(std::string_view data) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size()));
    return static_cast<std::uint32_t>(crc);
}

}  // namespace sotpuf::io
