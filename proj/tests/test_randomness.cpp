#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>

#include "sotpuf/randomness.hpp"

using namespace sotpuf;
using namespace sotpuf::nist;

namespace {

// First 100 bits of the binary expansion of pi, the SP800-22 worked-example input.
const char* kPi100 =
    "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";

BitArray periodic(std::size_t n, const std::string& pattern) {
    BitArray b(n);
    for (std::size_t i = 0; i < n; ++i) b.set(i, pattern[i % pattern.size()] == '1');
    return b;
}

// Fibonacci LFSR output with taps given as a bit mask over the last `degree` bits.
std::vector<std::uint8_t> lfsr(unsigned degree, std::uint32_t taps, std::uint32_t state, std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = state & 1u;
        const std::uint32_t fb = static_cast<std::uint32_t>(__builtin_popcount(state & taps) & 1);
        state = (state >> 1) | (fb << (degree - 1));
    }
    return out;
}

// Asymptotic Kolmogorov tail P(sqrt(n) D > x).
double kolmogorov_tail(double x) {
    double sum = 0;
    for (int k = 1; k < 100; ++k) sum += 2 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
    return sum;
}

double ks_uniform_p(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        d = std::max({d, (i + 1) / n - v[i], v[i] - i / n});
    const double sn = std::sqrt(n);
    return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

bool is_aperiodic(std::uint32_t t, unsigned m) {
    std::string s;
    for (unsigned i = m; i-- > 0;) s.push_back(((t >> i) & 1u) ? '1' : '0');
    for (unsigned len = 1; len < m; ++len)
        if (s.compare(0, len, s, m - len, len) == 0) return false;
    return true;
}

}  // namespace

TEST_SUITE("randomness") {
    TEST_CASE("worked examples on the pi bits") {
        const auto eps = BitArray::from_string(kPi100);
        CHECK(frequency(eps) == doctest::Approx(0.109599).epsilon(1e-5));
        CHECK(block_frequency(eps, 10) == doctest::Approx(0.706438).epsilon(1e-5));
        CHECK(runs(eps) == doctest::Approx(0.500798).epsilon(1e-5));
        CHECK(cumulative_sums(eps, true) == doctest::Approx(0.219194).epsilon(1e-5));
        CHECK(cumulative_sums(eps, false) == doctest::Approx(0.114866).epsilon(1e-5));
    }

    TEST_CASE("longest run worked example") {
        const auto eps = BitArray::from_string(
            "11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111001100"
            "111001101101100010110010");
        CHECK(eps.size() == 128);
        CHECK(longest_run(eps) == doctest::Approx(0.180609).epsilon(1e-3));
    }

    TEST_CASE("frequency matches the erfc formula by hand") {
        const auto balanced = periodic(1000, "1100");
        CHECK(frequency(balanced) == doctest::Approx(1.0));
        auto skew = periodic(1000, "1100");
        for (std::size_t i = 0; i < 40; ++i) skew.set(4 * i + 2, true);  // S = 80
        CHECK(frequency(skew) == doctest::Approx(std::erfc(80.0 / std::sqrt(2000.0))));
    }

    TEST_CASE("cumulative sums agree in both directions on palindromes") {
        std::mt19937_64 rng(1);
        BitArray half(500);
        for (std::size_t i = 0; i < half.size(); ++i) half.set(i, rng() & 1u);
        BitArray pal = half;
        for (std::size_t i = half.size(); i-- > 0;) pal.push_back(half.get(i));
        CHECK(cumulative_sums(pal, true) == doctest::Approx(cumulative_sums(pal, false)));
    }

    TEST_CASE("canonical adversarial inputs are rejected") {
        const BitArray zeros(100000);
        CHECK(frequency(zeros) < 0.01);
        CHECK(block_frequency(zeros) < 0.01);
        CHECK(cumulative_sums(zeros, true) < 0.01);
        CHECK(runs(zeros) < 0.01);
        CHECK(longest_run(zeros) < 0.01);

        const auto alt = periodic(100000, "01");
        CHECK(frequency(alt) >= 0.01);
        CHECK(runs(alt) < 0.01);
        CHECK(serial(alt).first < 0.01);
        CHECK(approximate_entropy(alt) < 0.01);
        CHECK(spectral(alt) < 0.01);
        CHECK(rank(periodic(100000, "0110")) < 0.01);
        CHECK(overlapping_template(periodic(100000, "111111111000")) < 0.01);
        const auto nt = non_overlapping_template(periodic(100000, "000000001"));
        CHECK(nt.front() < 0.01);

        const auto seq = lfsr(20, (1u << 0) | (1u << 3), 0xACE1u, 100000);
        BitArray low(seq.size());
        for (std::size_t i = 0; i < seq.size(); ++i) low.set(i, seq[i]);
        CHECK(linear_complexity(low) < 0.01);
    }

    TEST_CASE("Berlekamp-Massey recovers LFSR length") {
        // x^5 + x^2 + 1
        CHECK(berlekamp_massey(lfsr(5, 0b00101, 0b10011, 64)) == 5);
        std::mt19937 rng(2);
        for (unsigned degree : {7u, 13u, 20u}) {
            // Primitive-ish random taps with the constant term set; complexity is at most the degree.
            const std::uint32_t taps = (rng() & ((1u << degree) - 1u)) | 1u;
            const auto s = lfsr(degree, taps, 1u, 4 * degree);
            CHECK(berlekamp_massey(s) <= degree);
        }
        CHECK(berlekamp_massey(std::vector<std::uint8_t>(50, 0)) == 0);
        std::vector<std::uint8_t> impulse(10, 0);
        impulse[9] = 1;
        CHECK(berlekamp_massey(impulse) == 10);
    }

    TEST_CASE("binary rank") {
        std::vector<std::uint64_t> identity(32);
        for (int i = 0; i < 32; ++i) identity[i] = std::uint64_t{1} << i;
        CHECK(binary_rank(identity, 32) == 32);
        CHECK(binary_rank(std::vector<std::uint64_t>(32, 0xffffffffu), 32) == 1);
        CHECK(binary_rank({0b011, 0b110, 0b101}, 3) == 2);
    }

    TEST_CASE("aperiodic template counts match a brute-force enumeration") {
        const std::size_t known[] = {0, 0, 2, 4, 6, 12, 20, 40, 74, 148, 284};
        for (unsigned m = 2; m <= 10; ++m) {
            std::size_t brute = 0;
            for (std::uint32_t t = 0; t < (1u << m); ++t) brute += is_aperiodic(t, m) ? 1 : 0;
            const auto lib = aperiodic_templates(m);
            CHECK(lib.size() == brute);
            CHECK(lib.size() == known[m]);
            CHECK(std::is_sorted(lib.begin(), lib.end()));
        }
        CHECK(aperiodic_templates(9).front() == 1u);
    }

    TEST_CASE("dispatch by name") {
        const auto seq = reference_sequences(1, 100000, 3).front();
        CHECK(test_names().size() == 14);
        CHECK(single_test("Frequency", seq) == frequency(seq));
        CHECK(single_test("CumulativeSums-2", seq) == cumulative_sums(seq, false));
        CHECK(test_p_values("NonOverlappingTemplate", seq).size() == 148);
        CHECK_THROWS_AS((void)single_test("RandomExcursions", seq), std::invalid_argument);
        CHECK(single_test("Serial-2", seq) == single_test("Serial-2", seq));
    }

    TEST_CASE("proportion threshold") {
        CHECK(proportion_threshold(0.01, 10) == doctest::Approx(0.99 - 3 * std::sqrt(0.99 * 0.01 / 10)));
        CHECK(proportion_threshold(0.01, 10) * 10 <= 9.0);
        CHECK(p_value_uniformity(std::vector<double>(100, 0.55)) < 1e-10);
    }

    TEST_CASE("short sequences are skipped, never passed") {
        const auto result = run_battery(reference_sequences(10, 2000, 4));
        const auto& rank_row = result.row("Rank");
        CHECK(rank_row.skipped);
        CHECK_FALSE(rank_row.pass);
        CHECK_FALSE(result.all_pass());
        CHECK_FALSE(result.row("Frequency").skipped);
    }

    TEST_CASE("reference generator passes the battery") {
        const auto result = run_battery(reference_sequences(10, 100000, 5));
        for (const auto& row : result.rows) {
            INFO(row.name);
            CHECK(row.pass);
            CHECK(row.passed <= row.total);
            CHECK(row.uniformity_p >= 0.0);
            CHECK(row.uniformity_p <= 1.0);
        }
    }

    TEST_CASE("p-values of the reference generator are uniform") {
        const auto seqs = reference_sequences(200, 100000, 6);
        for (const auto& name : test_names()) {
            std::vector<double> p;
            for (const auto& s : seqs) p.push_back(single_test(name, s));
            INFO(name);
            CHECK(ks_uniform_p(p) > 0.001);
        }
    }
}
