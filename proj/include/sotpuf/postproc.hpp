#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sotpuf/bit_array.hpp"

namespace sotpuf {

inline constexpr std::size_t kDefaultResponseWidth = 128;
inline constexpr std::size_t kDefaultXorArity = 7;

/// Fixed-width PUF responses cut from one bitmap.
struct ResponseSet {
    std::vector<BitArray> responses;
    std::size_t width = kDefaultResponseWidth;
    std::size_t xor_arity = 1;
    std::string source_tag;

    [[nodiscard]] std::size_t size() const noexcept { return responses.size(); }
    /// All responses concatenated in order.
    [[nodiscard]] BitArray concatenated() const;
};

/// output[i] = bits[arity*i] ^ ... ^ bits[arity*i + arity - 1]. Trailing bits
/// that do not fill a whole group are dropped.
[[nodiscard]] BitArray xor_fold(const BitArray& bits, std::size_t arity);

/// Consecutive, non-overlapping chunks of `width` bits; the partial tail is dropped.
[[nodiscard]] ResponseSet segment(const BitArray& bits, std::size_t width, std::string source_tag = {});

/// xor_fold followed by segment.
[[nodiscard]] ResponseSet make_responses(const BitArray& raw, std::size_t xor_arity,
                                         std::size_t width = kDefaultResponseWidth, std::string source_tag = {});

/// P(1) after XOR-folding k i.i.d. bits with P(1) = p: (1 - (1 - 2p)^k) / 2.
[[nodiscard]] double xor_bias(std::size_t arity, double p);

}  // namespace sotpuf
