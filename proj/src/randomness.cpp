#include "sotpuf/randomness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fftw3.h>

namespace sotpuf::nist {

namespace {

double igamc(double a, double x) {
    if (x <= 0) return 1.0;
    return boost::math::gamma_q(a, x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void require_length(const BitArray& bits, std::size_t n, const char* test) {
    if (bits.size() < n)
        throw SequenceTooShort(std::string(test) + " needs at least " + std::to_string(n) + " bits, got " +
                               std::to_string(bits.size()));
}

std::vector<std::uint8_t> as_bytes(const BitArray& bits) {
    std::vector<std::uint8_t> out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) out[i] = bits.get(i) ? 1 : 0;
    return out;
}

// Overlapping pattern counts of length m with wrap-around.
std::vector<std::size_t> pattern_counts(const std::vector<std::uint8_t>& x, unsigned m) {
    std::vector<std::size_t> counts(std::size_t{1} << m, 0);
    if (m == 0) return counts;
    const std::size_t n = x.size();
    const std::uint32_t mask = (m == 32) ? ~0u : ((1u << m) - 1u);
    std::uint32_t window = 0;
    for (unsigned j = 0; j < m - 1; ++j) window = (window << 1) | x[j];
    for (std::size_t i = 0; i < n; ++i) {
        window = ((window << 1) | x[(i + m - 1) % n]) & mask;
        ++counts[window];
    }
    return counts;
}

double chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
    double chi2 = 0;
    for (std::size_t i = 0; i < observed.size(); ++i)
        chi2 += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    return chi2;
}

}  // namespace

double frequency(const BitArray& bits) {
    require_length(bits, 100, "Frequency");
    const double n = static_cast<double>(bits.size());
    const double s = 2.0 * static_cast<double>(bits.count_ones()) - n;
    return std::erfc(std::abs(s) / std::sqrt(n) / std::numbers::sqrt2);
}

double block_frequency(const BitArray& bits, std::size_t block) {
    require_length(bits, std::max<std::size_t>(100, block), "BlockFrequency");
    const std::size_t blocks = bits.size() / block;
    double sum = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < block; ++j) ones += bits.get(b * block + j) ? 1 : 0;
        const double pi = static_cast<double>(ones) / static_cast<double>(block) - 0.5;
        sum += pi * pi;
    }
    const double chi2 = 4.0 * static_cast<double>(block) * sum;
    return igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0);
}

double cumulative_sums(const BitArray& bits, bool forward) {
    require_length(bits, 100, "CumulativeSums");
    const auto n = static_cast<long long>(bits.size());
    long long s = 0, z = 0;
    for (long long k = 0; k < n; ++k) {
        const std::size_t idx = forward ? static_cast<std::size_t>(k) : static_cast<std::size_t>(n - 1 - k);
        s += bits.get(idx) ? 1 : -1;
        z = std::max(z, std::abs(s));
    }
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double zd = static_cast<double>(z);
    // Summation limits use truncating integer division, as in the reference implementation.
    double sum1 = 0;
    for (long long k = (-n / z + 1) / 4; k <= (n / z - 1) / 4; ++k)
        sum1 += normal_cdf(static_cast<double>(4 * k + 1) * zd / sqrt_n) -
                normal_cdf(static_cast<double>(4 * k - 1) * zd / sqrt_n);
    double sum2 = 0;
    for (long long k = (-n / z - 3) / 4; k <= (n / z - 1) / 4; ++k)
        sum2 += normal_cdf(static_cast<double>(4 * k + 3) * zd / sqrt_n) -
                normal_cdf(static_cast<double>(4 * k + 1) * zd / sqrt_n);
    return std::clamp(1.0 - sum1 + sum2, 0.0, 1.0);
}

double runs(const BitArray& bits) {
    require_length(bits, 100, "Runs");
    const double n = static_cast<double>(bits.size());
    const double pi = static_cast<double>(bits.count_ones()) / n;
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) return 0.0;
    std::size_t v = 1;
    for (std::size_t i = 1; i < bits.size(); ++i)
        if (bits.get(i) != bits.get(i - 1)) ++v;
    const double num = std::abs(static_cast<double>(v) - 2.0 * n * pi * (1.0 - pi));
    const double den = 2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi);
    return std::erfc(num / den);
}

double longest_run(const BitArray& bits) {
    require_length(bits, 128, "LongestRun");
    const std::size_t n = bits.size();
    std::size_t m;
    unsigned k;
    std::vector<unsigned> edges;  // category i holds runs <= edges[i]; last holds the rest
    std::vector<double> pi;
    if (n < 6272) {
        m = 8;
        k = 3;
        edges = {1, 2, 3};
        pi = {0.21484375, 0.3671875, 0.23046875, 0.1875};
    } else if (n < 750000) {
        m = 128;
        k = 5;
        edges = {4, 5, 6, 7, 8};
        pi = {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847};
    } else {
        m = 10000;
        k = 6;
        edges = {10, 11, 12, 13, 14, 15};
        pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
    }
    const std::size_t blocks = n / m;
    std::vector<double> v(k + 1, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        unsigned run = 0, longest = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (bits.get(b * m + j)) {
                longest = std::max(longest, ++run);
            } else {
                run = 0;
            }
        }
        std::size_t cat = 0;
        while (cat < edges.size() && longest > edges[cat]) ++cat;
        // The first category also absorbs runs shorter than its edge.
        v[cat] += 1.0;
    }
    std::vector<double> expected(k + 1);
    for (unsigned i = 0; i <= k; ++i) expected[i] = static_cast<double>(blocks) * pi[i];
    return igamc(static_cast<double>(k) / 2.0, chi_square(v, expected) / 2.0);
}

int binary_rank(std::vector<std::uint64_t> rows, int cols) {
    int rank = 0;
    for (int col = cols - 1; col >= 0 && rank < static_cast<int>(rows.size()); --col) {
        const std::uint64_t bit = std::uint64_t{1} << col;
        auto pivot = std::find_if(rows.begin() + rank, rows.end(), [&](std::uint64_t r) { return (r & bit) != 0; });
        if (pivot == rows.end()) continue;
        std::iter_swap(rows.begin() + rank, pivot);
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (static_cast<int>(r) != rank && (rows[r] & bit)) rows[r] ^= rows[rank];
        ++rank;
    }
    return rank;
}

double rank(const BitArray& bits) {
    constexpr int M = 32, Q = 32;
    require_length(bits, 38 * M * Q, "Rank");
    const std::size_t matrices = bits.size() / (M * Q);
    auto prob = [](int r) {
        double product = 1;
        for (int i = 0; i < r; ++i)
            product *= (1.0 - std::ldexp(1.0, i - Q)) * (1.0 - std::ldexp(1.0, i - M)) / (1.0 - std::ldexp(1.0, i - r));
        return std::ldexp(1.0, r * (Q + M - r) - M * Q) * product;
    };
    const double p_full = prob(M), p_minus1 = prob(M - 1), p_rest = 1.0 - p_full - p_minus1;
    double f_full = 0, f_minus1 = 0;
    for (std::size_t k = 0; k < matrices; ++k) {
        std::vector<std::uint64_t> rows(M, 0);
        for (int r = 0; r < M; ++r)
            for (int c = 0; c < Q; ++c)
                if (bits.get(k * M * Q + static_cast<std::size_t>(r * Q + c))) rows[r] |= std::uint64_t{1} << (Q - 1 - c);
        const int rk = binary_rank(rows, Q);
        if (rk == M)
            f_full += 1;
        else if (rk == M - 1)
            f_minus1 += 1;
    }
    const double n = static_cast<double>(matrices);
    const double chi2 = chi_square({f_full, f_minus1, n - f_full - f_minus1}, {p_full * n, p_minus1 * n, p_rest * n});
    return std::exp(-chi2 / 2.0);
}

double spectral(const BitArray& bits) {
    require_length(bits, 1000, "FFT");
    const std::size_t n = bits.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = bits.get(i) ? 1.0 : -1.0;
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), x.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                          FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    const double threshold = std::sqrt(std::log(1.0 / 0.05) * static_cast<double>(n));
    const double n0 = 0.95 * static_cast<double>(n) / 2.0;
    std::size_t n1 = 0;
    for (std::size_t i = 0; i < n / 2; ++i)
        if (std::abs(out[i]) < threshold) ++n1;
    const double d = (static_cast<double>(n1) - n0) / std::sqrt(static_cast<double>(n) * 0.95 * 0.05 / 4.0);
    return std::erfc(std::abs(d) / std::numbers::sqrt2);
}

std::vector<std::uint32_t> aperiodic_templates(unsigned m) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t t = 0; t < (1u << m); ++t) {
        bool periodic = false;
        for (unsigned shift = 1; shift < m && !periodic; ++shift) {
            // Template overlaps itself at this shift when its top m-shift bits equal its low m-shift bits.
            const std::uint32_t mask = (1u << (m - shift)) - 1u;
            if (((t >> shift) & mask) == (t & mask)) periodic = true;
        }
        if (!periodic) out.push_back(t);
    }
    return out;
}

std::vector<double> non_overlapping_template(const BitArray& bits, unsigned m, std::size_t blocks) {
    const std::size_t n = bits.size();
    const std::size_t block_len = n / blocks;
    if (block_len < 8 * (std::size_t{1} << m) || m > 20)
        throw SequenceTooShort("NonOverlappingTemplate needs blocks of at least 8·2^m bits");
    const auto x = as_bytes(bits);
    const double mu = static_cast<double>(block_len - m + 1) / std::ldexp(1.0, static_cast<int>(m));
    const double var = static_cast<double>(block_len) *
                       (1.0 / std::ldexp(1.0, static_cast<int>(m)) -
                        static_cast<double>(2 * m - 1) / std::ldexp(1.0, static_cast<int>(2 * m)));
    // Window value starting at each position.
    std::vector<std::uint32_t> windows(n - m + 1);
    std::uint32_t w = 0;
    const std::uint32_t mask = (1u << m) - 1u;
    for (std::size_t i = 0; i < n; ++i) {
        w = ((w << 1) | x[i]) & mask;
        if (i + 1 >= m) windows[i + 1 - m] = w;
    }
    std::vector<double> p_values;
    for (std::uint32_t tmpl : aperiodic_templates(m)) {
        double chi2 = 0;
        for (std::size_t b = 0; b < blocks; ++b) {
            std::size_t count = 0;
            const std::size_t start = b * block_len;
            for (std::size_t i = 0; i + m <= block_len;) {
                if (windows[start + i] == tmpl) {
                    ++count;
                    i += m;
                } else {
                    ++i;
                }
            }
            chi2 += (static_cast<double>(count) - mu) * (static_cast<double>(count) - mu) / var;
        }
        p_values.push_back(igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0));
    }
    return p_values;
}

double overlapping_template(const BitArray& bits, unsigned m) {
    constexpr std::size_t block_len = 1032;
    constexpr unsigned k = 5;
    // Category probabilities for m = 9, M = 1032 from the revised reference implementation.
    static constexpr std::array<double, 6> pi = {0.364091, 0.185659, 0.139381, 0.100571, 0.070432, 0.139865};
    if (m != 9) throw std::invalid_argument("OverlappingTemplate is tabulated for m = 9 only");
    const std::size_t blocks = bits.size() / block_len;
    // Smallest expected count must stay above 5.
    if (static_cast<double>(blocks) * pi[4] < 5.0) throw SequenceTooShort("OverlappingTemplate needs more blocks");
    std::vector<double> v(k + 1, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        unsigned run = 0, count = 0;
        for (std::size_t i = 0; i < block_len; ++i) {
            run = bits.get(b * block_len + i) ? run + 1 : 0;
            if (run >= m) ++count;
        }
        v[std::min(count, k)] += 1.0;
    }
    std::vector<double> expected(k + 1);
    for (unsigned i = 0; i <= k; ++i) expected[i] = static_cast<double>(blocks) * pi[i];
    return igamc(static_cast<double>(k) / 2.0, chi_square(v, expected) / 2.0);
}

double approximate_entropy(const BitArray& bits, unsigned m) {
    const std::size_t n = bits.size();
    require_length(bits, 100, "ApproximateEntropy");
    const int log2n = static_cast<int>(std::floor(std::log2(static_cast<double>(n))));
    if (m == 0) m = static_cast<unsigned>(std::clamp(log2n - 6, 0, 10));
    if (m < 1 || static_cast<int>(m) >= log2n - 5) throw SequenceTooShort("ApproximateEntropy block length too large");
    const auto x = as_bytes(bits);
    auto phi = [&](unsigned len) {
        double sum = 0;
        for (std::size_t c : pattern_counts(x, len)) {
            if (c == 0) continue;
            const double p = static_cast<double>(c) / static_cast<double>(n);
            sum += p * std::log(p);
        }
        return sum;
    };
    const double apen = phi(m) - phi(m + 1);
    const double chi2 = 2.0 * static_cast<double>(n) * (std::log(2.0) - apen);
    return igamc(std::ldexp(1.0, static_cast<int>(m) - 1), chi2 / 2.0);
}

std::pair<double, double> serial(const BitArray& bits, unsigned m) {
    const std::size_t n = bits.size();
    require_length(bits, 100, "Serial");
    const int log2n = static_cast<int>(std::floor(std::log2(static_cast<double>(n))));
    if (m == 0) m = static_cast<unsigned>(std::clamp(log2n - 3, 0, 16));
    if (m < 3 || static_cast<int>(m) >= log2n - 2) throw SequenceTooShort("Serial block length too large");
    const auto x = as_bytes(bits);
    auto psi2 = [&](unsigned len) {
        if (len == 0) return 0.0;
        double sum = 0;
        for (std::size_t c : pattern_counts(x, len)) sum += static_cast<double>(c) * static_cast<double>(c);
        return std::ldexp(1.0, static_cast<int>(len)) / static_cast<double>(n) * sum - static_cast<double>(n);
    };
    const double pm = psi2(m), pm1 = psi2(m - 1), pm2 = psi2(m - 2);
    const double del1 = pm - pm1;
    const double del2 = pm - 2.0 * pm1 + pm2;
    return {igamc(std::ldexp(1.0, static_cast<int>(m) - 2), del1 / 2.0),
            igamc(std::ldexp(1.0, static_cast<int>(m) - 3), del2 / 2.0)};
}

std::size_t berlekamp_massey(const std::vector<std::uint8_t>& s) {
    const std::size_t n = s.size();
    std::vector<std::uint8_t> c(n + 1, 0), b(n + 1, 0), t;
    c[0] = b[0] = 1;
    std::size_t l = 0;
    long long m = -1;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t d = s[i];
        for (std::size_t j = 1; j <= l; ++j) d ^= static_cast<std::uint8_t>(c[j] & s[i - j]);
        if (d == 0) continue;
        t = c;
        const std::size_t shift = i - static_cast<std::size_t>(m);
        for (std::size_t j = 0; j + shift <= n; ++j) c[j + shift] ^= b[j];
        if (2 * l <= i) {
            l = i + 1 - l;
            m = static_cast<long long>(i);
            b = t;
        }
    }
    return l;
}

double linear_complexity(const BitArray& bits, std::size_t block) {
    const std::size_t blocks = bits.size() / block;
    if (blocks < 200) throw SequenceTooShort("LinearComplexity needs at least 200 blocks");
    static constexpr std::array<double, 7> pi = {0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833};
    const double M = static_cast<double>(block);
    const double sign = (block % 2 == 0) ? 1.0 : -1.0;  // (-1)^M
    const double mu = M / 2.0 + (9.0 - sign) / 36.0 - (M / 3.0 + 2.0 / 9.0) / std::pow(2.0, M);
    std::vector<double> v(7, 0.0);
    std::vector<std::uint8_t> chunk(block);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t j = 0; j < block; ++j) chunk[j] = bits.get(b * block + j) ? 1 : 0;
        const double l = static_cast<double>(berlekamp_massey(chunk));
        const double t = sign * (l - mu) + 2.0 / 9.0;
        std::size_t cat;
        if (t <= -2.5) cat = 0;
        else if (t <= -1.5) cat = 1;
        else if (t <= -0.5) cat = 2;
        else if (t <= 0.5) cat = 3;
        else if (t <= 1.5) cat = 4;
        else if (t <= 2.5) cat = 5;
        else cat = 6;
        v[cat] += 1.0;
    }
    std::vector<double> expected(7);
    for (std::size_t i = 0; i < 7; ++i) expected[i] = static_cast<double>(blocks) * pi[i];
    return igamc(3.0, chi_square(v, expected) / 2.0);
}

const std::vector<std::string>& test_names() {
    static const std::vector<std::string> names = {
        "Frequency", "BlockFrequency", "CumulativeSums-1", "CumulativeSums-2", "Runs",
        "LongestRun", "Rank", "FFT", "NonOverlappingTemplate", "OverlappingTemplate",
        "ApproximateEntropy", "Serial-1", "Serial-2", "LinearComplexity"};
    return names;
}

std::vector<double> test_p_values(std::string_view name, const BitArray& bits) {
    if (name == "Frequency") return {frequency(bits)};
    if (name == "BlockFrequency") return {block_frequency(bits)};
    if (name == "CumulativeSums-1") return {cumulative_sums(bits, true)};
    if (name == "CumulativeSums-2") return {cumulative_sums(bits, false)};
    if (name == "Runs") return {runs(bits)};
    if (name == "LongestRun") return {longest_run(bits)};
    if (name == "Rank") return {rank(bits)};
    if (name == "FFT") return {spectral(bits)};
    if (name == "NonOverlappingTemplate") return non_overlapping_template(bits);
    if (name == "OverlappingTemplate") return {overlapping_template(bits)};
    if (name == "ApproximateEntropy") return {approximate_entropy(bits)};
    if (name == "Serial-1") return {serial(bits).first};
    if (name == "Serial-2") return {serial(bits).second};
    if (name == "LinearComplexity") return {linear_complexity(bits)};
    throw std::invalid_argument("unknown NIST test \"" + std::string(name) + "\"");
}

double single_test(std::string_view name, const BitArray& bits) { return test_p_values(name, bits).front(); }

bool BatteryResult::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const TestRow& r) { return r.pass; });
}

const TestRow& BatteryResult::row(std::string_view name) const {
    for (const auto& r : rows)
        if (r.name == name) return r;
    throw std::invalid_argument("no battery row named \"" + std::string(name) + "\"");
}

double p_value_uniformity(const std::vector<double>& p_values) {
    if (p_values.empty()) return 0.0;
    std::vector<double> bins(10, 0.0);
    for (double p : p_values) bins[std::min<std::size_t>(static_cast<std::size_t>(p * 10.0), 9)] += 1.0;
    const std::vector<double> expected(10, static_cast<double>(p_values.size()) / 10.0);
    return igamc(4.5, chi_square(bins, expected) / 2.0);
}

double proportion_threshold(double alpha, std::size_t sequences) {
    const double p = 1.0 - alpha;
    return p - 3.0 * std::sqrt(p * alpha / static_cast<double>(sequences));
}

namespace {

// Largest number of sub-tests that may fail the proportion rule while staying
// within the 1 - alpha quantile of the failure count under the null hypothesis.
std::size_t allowed_subtest_failures(std::size_t subtests, std::size_t sequences, std::size_t min_passed,
                                     double alpha) {
    // A sub-test fails when more than (sequences - min_passed) sequences fall below alpha.
    const boost::math::binomial_distribution<double> per_seq(static_cast<double>(sequences), alpha);
    const double q = boost::math::cdf(
        boost::math::complement(per_seq, static_cast<double>(sequences - min_passed)));
    if (q <= 0) return 0;
    const boost::math::binomial_distribution<double> failures(static_cast<double>(subtests), q);
    std::size_t c = 0;
    while (c < subtests && boost::math::cdf(boost::math::complement(failures, static_cast<double>(c))) > alpha) ++c;
    return c;
}

}  // namespace

BatteryResult run_battery(const std::vector<BitArray>& sequences, double alpha) {
    if (sequences.empty()) throw std::invalid_argument("battery needs at least one sequence");
    BatteryResult result;
    result.alpha = alpha;
    result.sequences = sequences.size();
    result.sequence_length = sequences.front().size();
    result.proportion_threshold = proportion_threshold(alpha, sequences.size());
    const auto min_passed = static_cast<std::size_t>(
        std::ceil(result.proportion_threshold * static_cast<double>(sequences.size()) - 1e-12));

    for (const auto& name : test_names()) {
        TestRow row;
        row.name = name;
        row.total = sequences.size();
        std::vector<std::vector<double>> per_seq;  // per_seq[s][subtest]
        try {
            for (const auto& s : sequences) per_seq.push_back(test_p_values(name, s));
        } catch (const SequenceTooShort& e) {
            row.skipped = true;
            row.skip_reason = e.what();
            result.rows.push_back(std::move(row));
            continue;
        }
        row.subtests = per_seq.front().size();
        row.representative_p = per_seq.front().front();
        std::vector<double> pooled;
        for (std::size_t t = 0; t < row.subtests; ++t) {
            std::size_t passed = 0;
            for (const auto& ps : per_seq) {
                passed += ps[t] >= alpha ? 1 : 0;
                pooled.push_back(ps[t]);
            }
            if (passed < min_passed) ++row.failed_subtests;
            if (t == 0) row.passed = passed;
        }
        row.uniformity_p = p_value_uniformity(pooled);
        if (row.subtests == 1) {
            row.pass = row.passed >= min_passed;
        } else {
            row.allowed_failed_subtests = allowed_subtest_failures(row.subtests, sequences.size(), min_passed, alpha);
            row.pass = row.failed_subtests <= row.allowed_failed_subtests;
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

std::vector<BitArray> split_sequences(const BitArray& stream, std::size_t count, std::size_t length) {
    if (stream.size() < count * length)
        throw std::invalid_argument("stream has " + std::to_string(stream.size()) + " bits, need " +
                                    std::to_string(count * length));
    std::vector<BitArray> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(stream.slice(i * length, length));
    return out;
}

std::vector<BitArray> reference_sequences(std::size_t count, std::size_t length, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<BitArray> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        BitArray bits(length);
        std::uint64_t word = 0;
        for (std::size_t i = 0; i < length; ++i) {
            if (i % 64 == 0) word = gen();
            bits.set(i, (word >> (i % 64)) & 1u);
        }
        out.push_back(std::move(bits));
    }
    return out;
}

}  // namespace sotpuf::nist
