#include "sotpuf/postproc.hpp"

#include <cmath>
#include <stdexcept>

namespace sotpuf {

BitArray ResponseSet::concatenated() const {
    BitArray out;
    for (const auto& r : responses) out.append(r);
    return out;
}

BitArray xor_fold(const BitArray& bits, std::size_t arity) {
    if (arity == 0) throw std::domain_error("XOR arity must be >= 1");
    if (arity == 1) return bits;
    const std::size_t n_out = bits.size() / arity;
    BitArray out(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        bool acc = false;
        const std::size_t base = i * arity;
        for (std::size_t j = 0; j < arity; ++j) acc ^= bits.get(base + j);
        out.set(i, acc);
    }
    return out;
}

ResponseSet segment(const BitArray& bits, std::size_t width, std::string source_tag) {
    if (width == 0) throw std::domain_error("response width must be > 0");
    ResponseSet set;
    set.width = width;
    set.source_tag = std::move(source_tag);
    const std::size_t n = bits.size() / width;
    set.responses.reserve(n);
    for (std::size_t r = 0; r < n; ++r) set.responses.push_back(bits.slice(r * width, width));
    return set;
}

ResponseSet make_responses(const BitArray& raw, std::size_t xor_arity, std::size_t width, std::string source_tag) {
    ResponseSet set = segment(xor_fold(raw, xor_arity), width, std::move(source_tag));
    set.xor_arity = xor_arity;
    return set;
}

double xor_bias(std::size_t arity, double p) {
    return 0.5 * (1.0 - std::pow(1.0 - 2.0 * p, static_cast<double>(arity)));
}

}  // namespace sotpuf
