#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sotpuf/bit_array.hpp"
#include "sotpuf/postproc.hpp"

namespace sotpuf {

/// Gaussian fitted to a histogram of per-response Hamming weights.
struct GaussFit {
    double mu = 0;
    double sigma = 0;
    double amplitude = 0;
    std::size_t bin_count = 0;
    std::size_t samples = 0;
    double bin_width = 0;
    /// Set when fewer than kMinUniformitySamples values were available.
    bool underpowered = false;
};

inline constexpr std::size_t kMinUniformitySamples = 30;

struct HdDistribution {
    std::vector<double> values;
    double mean = 0;
    double stddev = 0;
    double distance_from_half = 0;
};

struct PswMapStats {
    std::vector<double> per_cell_p;
    double mu = 0;
    double sigma = 0;
    std::size_t n_trials = 0;
    /// Every cell is either always or never switched.
    bool bimodal = false;
};

struct AcfResult {
    std::vector<double> coefficients;  ///< lags 1..max_lag
    double bound = 0;                  ///< ±z/√N
    double confidence = 0.95;
    std::size_t n = 0;
    bool degenerate = false;           ///< constant stream, correlation undefined
    [[nodiscard]] double fraction_within() const;
};

struct CorrelationMatrix {
    std::size_t n = 0;
    std::vector<double> values;     ///< row-major n×n, NaN where undefined
    std::vector<bool> zero_variance;
    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
    [[nodiscard]] double max_abs_off_diagonal() const;
};

[[nodiscard]] double hamming_weight(const BitArray& bits);
[[nodiscard]] double normalized_hd(const BitArray& a, const BitArray& b);

/// Least-squares Gaussian fit to binned values. Bins follow Scott's rule; when
/// lattice_step > 0 the bin width is rounded to a whole number of lattice steps
/// so discrete values never straddle bin edges.
[[nodiscard]] GaussFit fit_gaussian(std::span<const double> values, double lattice_step = 0);
/// Gaussian fit of the per-response Hamming-weight histogram.
[[nodiscard]] GaussFit uniformity(const ResponseSet& responses);

[[nodiscard]] HdDistribution make_hd_distribution(std::vector<double> values);
/// Pairwise HD between whole keys (each key = all of its responses concatenated).
[[nodiscard]] HdDistribution inter_reconfig_hd(const std::vector<ResponseSet>& keys);
/// For each key, its mean HD to every other key.
[[nodiscard]] std::vector<double> per_key_mean_hd(const std::vector<ResponseSet>& keys);
/// HD between responses at matched addresses, over every pair of chips.
[[nodiscard]] HdDistribution inter_die_hd(const std::vector<ResponseSet>& chips);
[[nodiscard]] HdDistribution intra_hd(const BitArray& golden, const std::vector<BitArray>& reads);

[[nodiscard]] AcfResult acf(const BitArray& bits, std::size_t max_lag, double confidence = 0.95);

/// Pearson correlation of ±1-mapped keys (the phi coefficient).
[[nodiscard]] CorrelationMatrix correlation_matrix(const std::vector<BitArray>& keys);

/// Per-cell frequency of event bits over n_trials runs. run(t) returns the
/// event bitmap of trial t (1 = the cell switched in that trial).
[[nodiscard]] PswMapStats psw_map(const std::function<BitArray(std::size_t)>& run, std::size_t n_trials);
/// Bits that differ from the initialized state.
[[nodiscard]] BitArray switched_from(bool initial_bit, const BitArray& bits);

/// Mean over cells of 2p(1-p): expected inter-reconfiguration HD between two
/// independent draws from the same map.
[[nodiscard]] double expected_same_map_hd(std::span<const double> p);

/// Normal(loc, scale) restricted to [0, 1].
struct TruncatedNormal {
    double loc = 0.5;
    double scale = 0.1;
    [[nodiscard]] double mean() const;
    [[nodiscard]] double stddev() const;
    [[nodiscard]] double quantile(double u) const;
};

/// Finds the truncated normal on [0, 1] whose mean and standard deviation
/// equal (mu, sigma). Throws std::domain_error if no such distribution exists.
[[nodiscard]] TruncatedNormal calibrate_truncated_normal(double mu, double sigma);

/// Spread of the underlying map whose empirical per-cell frequencies over
/// n_trials draws have standard deviation empirical_sigma. The binomial noise
/// of each frequency adds p(1-p)/n_trials to the observed variance.
/// Throws std::domain_error when the observed spread is below the noise floor.
[[nodiscard]] double remove_trial_noise(double mu, double empirical_sigma, std::size_t n_trials);

/// Per-cell switching probabilities drawn from the calibrated truncated normal.
[[nodiscard]] std::vector<double> sample_calibrated_map(double mu, double sigma, std::size_t n_cells,
                                                        std::uint64_t seed);
/// One reconfiguration from a probability map: bit i is 1 with probability p[i].
[[nodiscard]] BitArray draw_from_map(std::span<const double> p, std::uint64_t seed, std::uint64_t trial);

}  // namespace sotpuf
