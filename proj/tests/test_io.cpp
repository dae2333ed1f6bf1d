#include <doctest.h>

#include <stdexcept>

#include <filesystem>

#include "sotpuf/io.hpp"

using namespace sotpuf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "sotpuf_test_io";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_SUITE("io") {
    TEST_CASE("packed header is byte exact") {
        const auto bits = BitArray::from_string("1000000011");
        const std::string blob = io::encode_packed(bits, 0x0102030405060708ull);
        const std::string expected = std::string("SPUF") + std::string("\x01\x00\x00\x00", 4) +
                                     std::string("\x0a\x00\x00\x00\x00\x00\x00\x00", 8) +
                                     std::string("\x08\x07\x06\x05\x04\x03\x02\x01", 8) + std::string("\x01\x03", 2);
        CHECK(blob == expected);
    }

    TEST_CASE("bitmap round trip") {
        for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 64u, 1000u}) {
            BitArray b(n);
            for (std::size_t i = 0; i < n; i += 3) b.set(i, true);
            const auto p = io::decode_packed(io::encode_packed(b, 42));
            CHECK(p.bits == b);
            CHECK(p.seed == 42);
            CHECK(p.flags == 0);
        }
    }

    TEST_CASE("response set round trip through a file") {
        BitArray raw(7 * 128 * 3);
        for (std::size_t i = 0; i < raw.size(); i += 5) raw.set(i, true);
        const auto rs = make_responses(raw, 7, 128);
        const auto path = scratch("rs.bin");
        io::write_packed(path, rs, 9);
        const auto p = io::read_packed(path);
        CHECK(p.flags == io::kFlagResponseSet);
        CHECK(p.width == 128);
        CHECK(p.xor_arity == 7);
        const auto back = io::to_response_set(p);
        REQUIRE(back.size() == rs.size());
        for (std::size_t i = 0; i < rs.size(); ++i) CHECK(back.responses[i] == rs.responses[i]);
        CHECK_THROWS_AS((void)io::to_response_set(io::decode_packed(io::encode_packed(raw, 0))), std::invalid_argument);
    }

    TEST_CASE("malformed packed data") {
        const std::string good = io::encode_packed(BitArray::from_string("101"), 1);
        auto offset_of = [](const std::string& data) -> std::uint64_t {
            try {
                (void)io::decode_packed(data);
            } catch (const io::FormatError& e) {
                return e.offset;
            }
            FAIL("no error");
            return 0;
        };
        CHECK(offset_of("SPUX" + good.substr(4)) == 0);
        CHECK(offset_of(good.substr(0, 10)) == 10);
        CHECK(offset_of(good.substr(0, 24)) == 24);
        CHECK(offset_of(good + "x") == 25);
        std::string bad_version = good;
        bad_version[4] = 2;
        CHECK(offset_of(bad_version) == 4);
        std::string padding = good;
        padding[24] = static_cast<char>(0x85);
        CHECK(offset_of(padding) == 24);
    }

    TEST_CASE("csv") {
        const auto bits = BitArray::from_string("0110");
        const std::string csv = io::bits_to_csv(bits, 5);
        CHECK(csv == "# sotpuf schema=1 seed=5\n0\n1\n1\n0\n");
        CHECK(io::bits_from_csv(csv) == bits);
        CHECK(io::bits_from_csv("1\r\n0\r\n\n") == BitArray::from_string("10"));
        try {
            (void)io::bits_from_csv("# x\n1\n2\n");
            FAIL("no error");
        } catch (const io::FormatError& e) {
            CHECK(e.offset == 3);
        }
        const auto rs = segment(BitArray::from_string("10100000" "00001111"), 8);
        CHECK(io::responses_to_csv(rs, 1) == "# sotpuf schema=1 seed=1\nresponse\na0\n0f\n");
    }

    TEST_CASE("crc32 check value") { CHECK(io::crc32("123456789") == 0xCBF43926u); }

    TEST_CASE("atomic write replaces content and leaves no temporaries") {
        const auto dir = scratch("atomic");
        fs::remove_all(dir);
        const auto path = dir / "nested" / "f.txt";
        io::atomic_write(path, "first");
        io::atomic_write(path, "second");
        CHECK(io::read_file(path) == "second");
        std::size_t entries = 0;
        for ([[maybe_unused]] const auto& e : fs::directory_iterator(path.parent_path())) ++entries;
        CHECK(entries == 1);
        CHECK_THROWS_AS((void)io::read_file(dir / "missing"), std::runtime_error);
    }
}
