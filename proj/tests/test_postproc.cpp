#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "sotpuf/metrics.hpp"
#include "sotpuf/postproc.hpp"

using namespace sotpuf;

namespace {

BitArray biased(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution d(p);
    BitArray b(n);
    for (std::size_t i = 0; i < n; ++i) b.set(i, d(rng));
    return b;
}

}  // namespace

TEST_SUITE("postproc") {
    TEST_CASE("xor fold truth table") {
        CHECK(xor_fold(BitArray::from_string("11"), 2).to_string() == "0");
        CHECK(xor_fold(BitArray::from_string("00"), 2).to_string() == "0");
        CHECK(xor_fold(BitArray::from_string("111"), 3).to_string() == "1");
        CHECK(xor_fold(BitArray::from_string("10110100"), 1).to_string() == "10110100");
        CHECK(xor_fold(BitArray::from_string("1011010"), 2).to_string() == "101");
        CHECK_THROWS_AS((void)xor_fold(BitArray(8), 0), std::domain_error);
    }

    TEST_CASE("xor fold of folds equals one fold with the product arity") {
        const auto b = biased(3 * 5 * 700, 0.7, 1);
        CHECK(xor_fold(xor_fold(b, 3), 5) == xor_fold(b, 15));
    }

    TEST_CASE("bias closed form") {
        CHECK(xor_bias(2, 0.6) == doctest::Approx(0.48));
        CHECK(xor_bias(1, 0.3) == doctest::Approx(0.3));
        for (std::size_t k = 1; k <= 9; ++k) {
            const double p = 0.62;
            // P(odd number of ones) by direct enumeration over the count of ones.
            double odd = 0;
            for (std::size_t j = 1; j <= k; j += 2) {
                double c = 1;
                for (std::size_t i = 0; i < j; ++i) c = c * static_cast<double>(k - i) / static_cast<double>(i + 1);
                odd += c * std::pow(p, j) * std::pow(1 - p, k - j);
            }
            CHECK(xor_bias(k, p) == doctest::Approx(odd));
        }
        const auto b = biased(700000, 0.6, 2);
        CHECK(hamming_weight(xor_fold(b, 2)) == doctest::Approx(0.48).epsilon(0.01));
    }

    TEST_CASE("segment drops the partial tail") {
        CHECK(segment(BitArray(1024), 128).size() == 8);
        const auto rs = segment(BitArray(1000), 128, "tag");
        CHECK(rs.size() == 7);
        CHECK(rs.source_tag == "tag");
        CHECK(rs.concatenated().size() == 896);
        CHECK(make_responses(BitArray(131072), 7).size() == 146);
        CHECK(make_responses(BitArray(131072), 7).xor_arity == 7);
        CHECK_THROWS_AS((void)segment(BitArray(10), 0), std::domain_error);
    }

    TEST_CASE("response weights move toward 0.5 with arity") {
        const auto raw = biased(131072 * 4, 0.57, 3);
        for (std::size_t arity : {1, 3, 5, 7}) {
            const auto rs = make_responses(raw, arity);
            const auto fit = uniformity(rs);
            const double expected = std::abs(xor_bias(arity, 0.57) - 0.5);
            const double se = fit.sigma / std::sqrt(static_cast<double>(rs.size()));
            INFO(arity);
            CHECK(std::abs(std::abs(fit.mu - 0.5) - expected) < 4 * se);
        }
        const auto fit7 = uniformity(make_responses(raw, 7));
        CHECK(fit7.sigma == doctest::Approx(std::sqrt(0.25 / 128)).epsilon(0.1));
    }
}
