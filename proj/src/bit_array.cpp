#include "sotpuf/bit_array.hpp"

#include <bit>
#include <stdexcept>

namespace sotpuf {

BitArray::BitArray(std::size_t size, bool value) : words_((size + 63) / 64, 0), size_(size) {
    fill(value);
}

BitArray BitArray::from_string(const std::string& zeros_and_ones) {
    BitArray out(zeros_and_ones.size());
    for (std::size_t i = 0; i < zeros_and_ones.size(); ++i) {
        const char c = zeros_and_ones[i];
        if (c != '0' && c != '1') throw std::invalid_argument("bit string may only contain '0' and '1'");
        out.set(i, c == '1');
    }
    return out;
}

void BitArray::fill(bool value) noexcept {
    for (auto& w : words_) w = value ? ~std::uint64_t{0} : 0;
    clear_tail();
}

void BitArray::push_back(bool value) {
    if ((size_ & 63) == 0) words_.push_back(0);
    ++size_;
    set(size_ - 1, value);
}

void BitArray::append(const BitArray& other) {
    words_.reserve((size_ + other.size_ + 63) / 64);
    for (std::size_t i = 0; i < other.size_; ++i) push_back(other.get(i));
}

std::size_t BitArray::count_ones() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

std::size_t BitArray::count_diff(const BitArray& other) const {
    if (other.size_ != size_) throw std::invalid_argument("bit arrays differ in length");
    std::size_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
        n += static_cast<std::size_t>(std::popcount(words_[i] ^ other.words_[i]));
    return n;
}

BitArray BitArray::slice(std::size_t offset, std::size_t length) const {
    if (offset + length > size_) throw std::out_of_range("slice exceeds bit array");
    BitArray out(length);
    if ((offset & 63) == 0) {
        const std::size_t first = offset >> 6;
        for (std::size_t w = 0; w < out.words_.size(); ++w) out.words_[w] = words_[first + w];
        out.clear_tail();
        return out;
    }
    for (std::size_t i = 0; i < length; ++i) out.set(i, get(offset + i));
    return out;
}

BitArray BitArray::operator~() const {
    BitArray out = *this;
    for (auto& w : out.words_) w = ~w;
    out.clear_tail();
    return out;
}

BitArray BitArray::operator^(const BitArray& other) const {
    if (other.size_ != size_) throw std::invalid_argument("bit arrays differ in length");
    BitArray out = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] ^= other.words_[i];
    return out;
}

std::string BitArray::to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

// Nibbles are formed MSB-first from consecutive bits: bits 1,0,0,0 -> "8".
std::string BitArray::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve((size_ + 3) / 4);
    for (std::size_t i = 0; i < size_; i += 4) {
        unsigned nibble = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            nibble <<= 1;
            if (i + j < size_ && get(i + j)) nibble |= 1u;
        }
        s.push_back(digits[nibble]);
    }
    return s;
}

void BitArray::clear_tail() noexcept {
    if (size_ & 63) words_.back() &= (std::uint64_t{1} << (size_ & 63)) - 1;
}

}  // namespace sotpuf
