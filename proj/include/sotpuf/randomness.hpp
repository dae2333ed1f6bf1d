#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sotpuf/bit_array.hpp"

namespace sotpuf::nist {

// SP800-22 statistical tests. Every function returns the test's p-value(s);
// a test that cannot run on the given length throws SequenceTooShort.

struct SequenceTooShort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[nodiscard]] double frequency(const BitArray& bits);
[[nodiscard]] double block_frequency(const BitArray& bits, std::size_t block = 128);
/// forward = true scans from the first bit, false from the last.
[[nodiscard]] double cumulative_sums(const BitArray& bits, bool forward);
[[nodiscard]] double runs(const BitArray& bits);
[[nodiscard]] double longest_run(const BitArray& bits);
[[nodiscard]] double rank(const BitArray& bits);
[[nodiscard]] double spectral(const BitArray& bits);
/// One p-value per aperiodic template of length m, in lexicographic order.
[[nodiscard]] std::vector<double> non_overlapping_template(const BitArray& bits, unsigned m = 9,
                                                           std::size_t blocks = 8);
[[nodiscard]] double overlapping_template(const BitArray& bits, unsigned m = 9);
/// m = 0 picks the largest block length the sequence supports (at most 10).
[[nodiscard]] double approximate_entropy(const BitArray& bits, unsigned m = 0);
/// Returns {p1, p2}. m = 0 picks the largest supported length (at most 16).
[[nodiscard]] std::pair<double, double> serial(const BitArray& bits, unsigned m = 0);
[[nodiscard]] double linear_complexity(const BitArray& bits, std::size_t block = 500);

/// Shortest LFSR generating the sequence (Berlekamp-Massey over GF(2)).
[[nodiscard]] std::size_t berlekamp_massey(const std::vector<std::uint8_t>& s);
/// Rank of a binary matrix whose rows are given as bit masks.
[[nodiscard]] int binary_rank(std::vector<std::uint64_t> rows, int cols);
/// All aperiodic (non-self-overlapping) templates of length m as bit strings, MSB first.
[[nodiscard]] std::vector<std::uint32_t> aperiodic_templates(unsigned m);

/// Row names in report order.
[[nodiscard]] const std::vector<std::string>& test_names();

/// Every p-value a named row produces for one sequence (several for NonOverlappingTemplate).
[[nodiscard]] std::vector<double> test_p_values(std::string_view name, const BitArray& bits);
/// The row's p-value; for NonOverlappingTemplate the first template (000000001).
[[nodiscard]] double single_test(std::string_view name, const BitArray& bits);

struct TestRow {
    std::string name;
    bool skipped = false;
    std::string skip_reason;
    /// χ² uniformity of p-values across sequences (the tool's summary p-value).
    double uniformity_p = 0;
    /// p-value of the first sequence.
    double representative_p = 0;
    std::size_t passed = 0;
    std::size_t total = 0;
    /// Sub-tests (templates) that failed the proportion rule; only for aggregated rows.
    std::size_t failed_subtests = 0;
    std::size_t subtests = 1;
    std::size_t allowed_failed_subtests = 0;
    bool pass = false;
};

struct BatteryResult {
    double alpha = 0.01;
    std::size_t sequences = 0;
    std::size_t sequence_length = 0;
    /// Minimum pass fraction p̂ - 3·sqrt(p̂(1-p̂)/m), p̂ = 1 - alpha.
    double proportion_threshold = 0;
    std::vector<TestRow> rows;
    [[nodiscard]] bool all_pass() const;
    [[nodiscard]] const TestRow& row(std::string_view name) const;
};

/// χ² test over ten equal bins on [0, 1].
[[nodiscard]] double p_value_uniformity(const std::vector<double>& p_values);
[[nodiscard]] double proportion_threshold(double alpha, std::size_t sequences);

[[nodiscard]] BatteryResult run_battery(const std::vector<BitArray>& sequences, double alpha = 0.01);

/// Splits a bitstream into `count` consecutive sequences of `length` bits.
[[nodiscard]] std::vector<BitArray> split_sequences(const BitArray& stream, std::size_t count, std::size_t length);
/// Sequences from the reference generator (std::mt19937_64).
[[nodiscard]] std::vector<BitArray> reference_sequences(std::size_t count, std::size_t length, std::uint64_t seed);

}  // namespace sotpuf::nist
