#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sotpuf {

/// Dense bit vector, one bit per cell. Bit i lives in word i/64 at position i%64.
class BitArray {
public:
    BitArray() = default;
    explicit BitArray(std::size_t size, bool value = false);

    static BitArray from_string(const std::string& zeros_and_ones);

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] bool empty() const noexcept { return size_ == 0; }

    [[nodiscard]] bool get(std::size_t i) const noexcept {
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::size_t i, bool value) noexcept {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (value)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }
    void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    void fill(bool value) noexcept;
    void push_back(bool value);
    void append(const BitArray& other);

    [[nodiscard]] std::size_t count_ones() const noexcept;
    /// Number of positions where this and other differ. Sizes must match.
    [[nodiscard]] std::size_t count_diff(const BitArray& other) const;

    [[nodiscard]] BitArray slice(std::size_t offset, std::size_t length) const;
    [[nodiscard]] BitArray operator~() const;
    [[nodiscard]] BitArray operator^(const BitArray& other) const;

    [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }
    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] std::string to_hex() const;

    friend bool operator==(const BitArray&, const BitArray&) = default;

private:
    void clear_tail() noexcept;

    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

}  // namespace sotpuf
