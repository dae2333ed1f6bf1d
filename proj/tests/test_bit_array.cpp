#include <doctest.h>

#include <stdexcept>

#include "sotpuf/bit_array.hpp"

using sotpuf::BitArray;

TEST_SUITE("bit_array") {
    TEST_CASE("set, get and count across word boundaries") {
        BitArray b(130);
        b.set(0, true);
        b.set(63, true);
        b.set(64, true);
        b.set(129, true);
        CHECK(b.count_ones() == 4);
        CHECK(b.get(63));
        CHECK_FALSE(b.get(65));
        b.flip(63);
        CHECK_FALSE(b.get(63));
    }

    TEST_CASE("string round trip and hex digits are most significant bit first") {
        const auto b = BitArray::from_string("10110001");
        CHECK(b.to_string() == "10110001");
        CHECK(b.to_hex() == "b1");
        CHECK(BitArray::from_string("1").to_hex() == "8");
        CHECK_THROWS_AS((void)BitArray::from_string("10x"), std::invalid_argument);
    }

    TEST_CASE("complement clears padding so counts stay exact") {
        BitArray b(70);
        const auto c = ~b;
        CHECK(c.count_ones() == 70);
        CHECK((c ^ b).count_ones() == 70);
    }

    TEST_CASE("slice and append") {
        const auto b = BitArray::from_string("0011010111");
        CHECK(b.slice(2, 5).to_string() == "11010");
        BitArray c = b.slice(0, 3);
        c.append(BitArray::from_string("11"));
        CHECK(c.to_string() == "00111");
        CHECK_THROWS((void)b.slice(8, 5));
    }

    TEST_CASE("count_diff requires equal sizes") {
        CHECK(BitArray::from_string("1100").count_diff(BitArray::from_string("1010")) == 2);
        CHECK_THROWS((void)BitArray(3).count_diff(BitArray(4)));
    }
}
