#include "sotpuf/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "sotpuf/stream_rng.hpp"

namespace sotpuf {

namespace {

struct Moments {
    double mean = 0;
    double stddev = 0;
};

Moments moments(std::span<const double> v) {
    if (v.empty()) return {};
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0};
}

// Solves the 3×3 system a·x = b in place by Gaussian elimination with partial pivoting.
bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b, std::array<double, 3>& x) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

// Levenberg-Marquardt on h(x) = A exp(-(x - mu)^2 / (2 sigma^2)).
void levenberg_marquardt(std::span<const double> xs, std::span<const double> ys, GaussFit& fit) {
    std::array<double, 3> p{fit.amplitude, fit.mu, fit.sigma};
    auto residual_ss = [&](const std::array<double, 3>& q) {
        double s = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double z = (xs[i] - q[1]) / q[2];
            const double r = ys[i] - q[0] * std::exp(-0.5 * z * z);
            s += r * r;
        }
        return s;
    };
    double lambda = 1e-3;
    double cost = residual_ss(p);
    bool converged = false;
    for (int iter = 0; iter < 200 && !converged; ++iter) {
        std::array<std::array<double, 3>, 3> jtj{};
        std::array<double, 3> jtr{};
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double z = (xs[i] - p[1]) / p[2];
            const double e = std::exp(-0.5 * z * z);
            const double model = p[0] * e;
            const std::array<double, 3> j{e, model * z / p[2], model * z * z / p[2]};
            const double r = ys[i] - model;
            for (int a = 0; a < 3; ++a) {
                jtr[a] += j[a] * r;
                for (int b = 0; b < 3; ++b) jtj[a][b] += j[a] * j[b];
            }
        }
        bool improved = false;
        while (lambda < 1e12) {
            auto damped = jtj;
            for (int a = 0; a < 3; ++a) damped[a][a] *= (1.0 + lambda);
            std::array<double, 3> step{};
            if (!solve3(damped, jtr, step)) {
                lambda *= 10;
                continue;
            }
            std::array<double, 3> trial{p[0] + step[0], p[1] + step[1], std::abs(p[2] + step[2])};
            if (trial[2] <= 0) {
                lambda *= 10;
                continue;
            }
            const double trial_cost = residual_ss(trial);
            if (trial_cost < cost) {
                const double rel = (cost - trial_cost) / std::max(cost, 1e-300);
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 10, 1e-12);
                improved = true;
                converged = rel < 1e-12;
                break;
            }
            lambda *= 10;
        }
        if (!improved) break;
    }
    fit.amplitude = p[0];
    fit.mu = p[1];
    fit.sigma = std::abs(p[2]);
}

const boost::math::normal_distribution<double> kStdNormal{};

}  // namespace

double hamming_weight(const BitArray& bits) {
    if (bits.empty()) throw std::invalid_argument("Hamming weight of an empty bit array");
    return static_cast<double>(bits.count_ones()) / static_cast<double>(bits.size());
}

double normalized_hd(const BitArray& a, const BitArray& b) {
    if (a.size() != b.size()) throw std::invalid_argument("Hamming distance needs equal lengths");
    if (a.empty()) throw std::invalid_argument("Hamming distance of empty bit arrays");
    return static_cast<double>(a.count_diff(b)) / static_cast<double>(a.size());
}

GaussFit fit_gaussian(std::span<const double> values, double lattice_step) {
    GaussFit fit;
    fit.samples = values.size();
    fit.underpowered = values.size() < kMinUniformitySamples;
    if (values.empty()) return fit;
    const Moments m = moments(values);
    fit.mu = m.mean;
    fit.sigma = m.stddev;
    if (m.stddev == 0) {
        fit.bin_count = 1;
        fit.amplitude = static_cast<double>(values.size());
        return fit;
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double width = 3.49 * m.stddev * std::pow(static_cast<double>(values.size()), -1.0 / 3.0);
    double start = *lo_it;
    if (lattice_step > 0) {
        width = std::max(1.0, std::round(width / lattice_step)) * lattice_step;
        start = *lo_it - 0.5 * lattice_step;
    }
    const auto bins = static_cast<std::size_t>(std::floor((*hi_it - start) / width)) + 1;
    std::vector<double> counts(bins, 0.0);
    for (double v : values) {
        auto idx = static_cast<std::size_t>(std::floor((v - start) / width));
        counts[std::min(idx, bins - 1)] += 1.0;
    }
    std::vector<double> centers(bins);
    for (std::size_t i = 0; i < bins; ++i) centers[i] = start + (static_cast<double>(i) + 0.5) * width;
    fit.bin_count = bins;
    fit.bin_width = width;
    fit.amplitude = *std::max_element(counts.begin(), counts.end());
    if (bins >= 3) levenberg_marquardt(centers, counts, fit);
    return fit;
}

GaussFit uniformity(const ResponseSet& responses) {
    std::vector<double> hw;
    hw.reserve(responses.size());
    for (const auto& r : responses.responses) hw.push_back(hamming_weight(r));
    return fit_gaussian(hw, 1.0 / static_cast<double>(responses.width));
}

HdDistribution make_hd_distribution(std::vector<double> values) {
    HdDistribution d;
    const Moments m = moments(values);
    d.values = std::move(values);
    d.mean = m.mean;
    d.stddev = m.stddev;
    d.distance_from_half = std::abs(m.mean - 0.5);
    return d;
}

HdDistribution inter_reconfig_hd(const std::vector<ResponseSet>& keys) {
    if (keys.size() < 2) throw std::invalid_argument("inter-reconfiguration HD needs at least two keys");
    std::vector<BitArray> flat;
    flat.reserve(keys.size());
    for (const auto& k : keys) {
        if (k.width != keys.front().width) throw std::invalid_argument("keys have different response widths");
        flat.push_back(k.concatenated());
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < flat.size(); ++i)
        for (std::size_t j = i + 1; j < flat.size(); ++j) values.push_back(normalized_hd(flat[i], flat[j]));
    return make_hd_distribution(std::move(values));
}

std::vector<double> per_key_mean_hd(const std::vector<ResponseSet>& keys) {
    if (keys.size() < 2) throw std::invalid_argument("per-key HD needs at least two keys");
    std::vector<BitArray> flat;
    for (const auto& k : keys) flat.push_back(k.concatenated());
    const std::size_t n = flat.size();
    std::vector<double> sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double hd = normalized_hd(flat[i], flat[j]);
            sums[i] += hd;
            sums[j] += hd;
        }
    for (auto& s : sums) s /= static_cast<double>(n - 1);
    return sums;
}

HdDistribution inter_die_hd(const std::vector<ResponseSet>& chips) {
    if (chips.size() < 2) throw std::invalid_argument("inter-die HD needs at least two chips");
    std::vector<double> values;
    for (std::size_t a = 0; a < chips.size(); ++a)
        for (std::size_t b = a + 1; b < chips.size(); ++b) {
            if (chips[a].width != chips[b].width) throw std::invalid_argument("chips have different response widths");
            const std::size_t n = std::min(chips[a].size(), chips[b].size());
            for (std::size_t r = 0; r < n; ++r)
                values.push_back(normalized_hd(chips[a].responses[r], chips[b].responses[r]));
        }
    return make_hd_distribution(std::move(values));
}

HdDistribution intra_hd(const BitArray& golden, const std::vector<BitArray>& reads) {
    if (reads.empty()) throw std::invalid_argument("intra HD needs at least one read");
    std::vector<double> values;
    values.reserve(reads.size());
    for (const auto& r : reads) values.push_back(normalized_hd(golden, r));
    return make_hd_distribution(std::move(values));
}

double AcfResult::fraction_within() const {
    if (coefficients.empty() || degenerate) return 0.0;
    const auto inside = std::count_if(coefficients.begin(), coefficients.end(),
                                      [&](double r) { return std::abs(r) <= bound; });
    return static_cast<double>(inside) / static_cast<double>(coefficients.size());
}

AcfResult acf(const BitArray& bits, std::size_t max_lag, double confidence) {
    if (bits.size() <= max_lag) throw std::invalid_argument("ACF needs more bits than the maximum lag");
    if (!(confidence > 0 && confidence < 1)) throw std::invalid_argument("ACF confidence must be in (0, 1)");
    AcfResult out;
    out.n = bits.size();
    out.confidence = confidence;
    const double z = boost::math::quantile(kStdNormal, 0.5 + 0.5 * confidence);
    out.bound = z / std::sqrt(static_cast<double>(out.n));
    std::vector<double> x(out.n);
    double mean = 0;
    for (std::size_t i = 0; i < out.n; ++i) {
        x[i] = bits.get(i) ? 1.0 : -1.0;
        mean += x[i];
    }
    mean /= static_cast<double>(out.n);
    double denom = 0;
    for (auto& v : x) {
        v -= mean;
        denom += v * v;
    }
    if (denom <= 1e-12 * static_cast<double>(out.n)) {
        out.degenerate = true;
        out.coefficients.assign(max_lag, std::numeric_limits<double>::quiet_NaN());
        return out;
    }
    out.coefficients.reserve(max_lag);
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double s = 0;
        for (std::size_t t = 0; t + lag < out.n; ++t) s += x[t] * x[t + lag];
        out.coefficients.push_back(s / denom);
    }
    return out;
}

double CorrelationMatrix::max_abs_off_diagonal() const {
    double m = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && !std::isnan(at(i, j))) m = std::max(m, std::abs(at(i, j)));
    return m;
}

CorrelationMatrix correlation_matrix(const std::vector<BitArray>& keys) {
    if (keys.size() < 2) throw std::invalid_argument("correlation matrix needs at least two keys");
    const std::size_t len = keys.front().size();
    for (const auto& k : keys)
        if (k.size() != len || len == 0) throw std::invalid_argument("keys must be non-empty and equally long");
    CorrelationMatrix m;
    m.n = keys.size();
    m.values.assign(m.n * m.n, 0.0);
    m.zero_variance.assign(m.n, false);
    const double n = static_cast<double>(len);
    std::vector<double> mean(m.n), sd(m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
        const double ones = static_cast<double>(keys[i].count_ones());
        mean[i] = (2.0 * ones - n) / n;  // mean of ±1 values
        const double var = 1.0 - mean[i] * mean[i];
        sd[i] = std::sqrt(std::max(var, 0.0));
        m.zero_variance[i] = var <= 0;
    }
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = i; j < m.n; ++j) {
            double r;
            if (m.zero_variance[i] || m.zero_variance[j]) {
                r = std::numeric_limits<double>::quiet_NaN();
            } else {
                // E[x y] for ±1 values = 1 - 2·HD
                const double exy = 1.0 - 2.0 * static_cast<double>(keys[i].count_diff(keys[j])) / n;
                r = (exy - mean[i] * mean[j]) / (sd[i] * sd[j]);
            }
            m.values[i * m.n + j] = r;
            m.values[j * m.n + i] = r;
        }
    return m;
}

PswMapStats psw_map(const std::function<BitArray(std::size_t)>& run, std::size_t n_trials) {
    if (n_trials < 2) throw std::invalid_argument("a switching-probability map needs at least two trials");
    std::vector<std::uint32_t> counts;
    for (std::size_t t = 0; t < n_trials; ++t) {
        const BitArray events = run(t);
        if (t == 0) counts.assign(events.size(), 0);
        if (events.size() != counts.size()) throw std::invalid_argument("trial bitmaps differ in length");
        for (std::size_t i = 0; i < events.size(); ++i) counts[i] += events.get(i) ? 1u : 0u;
    }
    PswMapStats stats;
    stats.n_trials = n_trials;
    stats.per_cell_p.resize(counts.size());
    bool bimodal = true;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        stats.per_cell_p[i] = static_cast<double>(counts[i]) / static_cast<double>(n_trials);
        if (counts[i] != 0 && counts[i] != n_trials) bimodal = false;
    }
    const double n = static_cast<double>(counts.size());
    stats.mu = std::accumulate(stats.per_cell_p.begin(), stats.per_cell_p.end(), 0.0) / n;
    double ss = 0;
    for (double p : stats.per_cell_p) ss += (p - stats.mu) * (p - stats.mu);
    stats.sigma = std::sqrt(ss / n);
    stats.bimodal = bimodal;
    return stats;
}

BitArray switched_from(bool initial_bit, const BitArray& bits) { return initial_bit ? ~bits : bits; }

double expected_same_map_hd(std::span<const double> p) {
    if (p.empty()) throw std::invalid_argument("empty probability map");
    double s = 0;
    for (double q : p) s += 2.0 * q * (1.0 - q);
    return s / static_cast<double>(p.size());
}

double TruncatedNormal::mean() const {
    const double a = (0.0 - loc) / scale, b = (1.0 - loc) / scale;
    const double z = boost::math::cdf(kStdNormal, b) - boost::math::cdf(kStdNormal, a);
    return loc + scale * (boost::math::pdf(kStdNormal, a) - boost::math::pdf(kStdNormal, b)) / z;
}

double TruncatedNormal::stddev() const {
    const double a = (0.0 - loc) / scale, b = (1.0 - loc) / scale;
    const double pa = boost::math::pdf(kStdNormal, a), pb = boost::math::pdf(kStdNormal, b);
    const double z = boost::math::cdf(kStdNormal, b) - boost::math::cdf(kStdNormal, a);
    const double d = (pa - pb) / z;
    const double var = scale * scale * (1.0 + (a * pa - b * pb) / z - d * d);
    return std::sqrt(std::max(var, 0.0));
}

double TruncatedNormal::quantile(double u) const {
    const double fa = boost::math::cdf(kStdNormal, (0.0 - loc) / scale);
    const double fb = boost::math::cdf(kStdNormal, (1.0 - loc) / scale);
    const double target = std::clamp(fa + u * (fb - fa), 1e-300, 1.0 - 1e-16);
    return std::clamp(loc + scale * boost::math::quantile(kStdNormal, target), 0.0, 1.0);
}

TruncatedNormal calibrate_truncated_normal(double mu, double sigma) {
    if (!(mu > 0 && mu < 1 && sigma > 0)) throw std::domain_error("calibration needs 0 < mu < 1 and sigma > 0");
    // The uniform distribution bounds how spread a unimodal map on [0,1] can be.
    if (sigma >= std::sqrt(mu * (1 - mu))) throw std::domain_error("sigma too large for a map on [0, 1]");
    TruncatedNormal t{mu, sigma};
    for (int iter = 0; iter < 100; ++iter) {
        const double em = t.mean() - mu, es = t.stddev() - sigma;
        if (std::abs(em) < 1e-12 && std::abs(es) < 1e-12) return t;
        const double h = 1e-6;
        const TruncatedNormal tl{t.loc + h, t.scale}, ts{t.loc, t.scale + h};
        const double j11 = (tl.mean() - t.mean()) / h, j12 = (ts.mean() - t.mean()) / h;
        const double j21 = (tl.stddev() - t.stddev()) / h, j22 = (ts.stddev() - t.stddev()) / h;
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-300) break;
        double dl = -(j22 * em - j12 * es) / det;
        double ds = -(-j21 * em + j11 * es) / det;
        // Damp steps that would leave the valid region.
        while (t.scale + ds <= 1e-6) ds *= 0.5;
        t.loc += dl;
        t.scale += ds;
    }
    if (std::abs(t.mean() - mu) > 1e-8 || std::abs(t.stddev() - sigma) > 1e-8)
        throw std::domain_error("truncated-normal calibration did not converge");
    return t;
}

double remove_trial_noise(double mu, double empirical_sigma, std::size_t n_trials) {
    if (n_trials < 2) throw std::domain_error("noise removal needs at least two trials");
    const double n = static_cast<double>(n_trials);
    // σ_emp² = σ² + (μ - μ² - σ²)/n
    const double var = (empirical_sigma * empirical_sigma - (mu - mu * mu) / n) / (1.0 - 1.0 / n);
    if (!(var > 0)) throw std::domain_error("empirical spread is below the trial-noise floor");
    return std::sqrt(var);
}

std::vector<double> sample_calibrated_map(double mu, double sigma, std::size_t n_cells, std::uint64_t seed) {
    const TruncatedNormal t = calibrate_truncated_normal(mu, sigma);
    const std::uint64_t key = derive_key(seed, rng_domain::calibration);
    std::vector<double> p(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) p[i] = t.quantile(stream_uniform(key, i, 0));
    return p;
}

BitArray draw_from_map(std::span<const double> p, std::uint64_t seed, std::uint64_t trial) {
    const std::uint64_t key = derive_key(seed, rng_domain::write);
    BitArray out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out.set(i, stream_uniform(key, i, trial) < p[i]);
    return out;
}

}  // namespace sotpuf
