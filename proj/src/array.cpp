#include "sotpuf/array.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>

#include "sotpuf/stream_rng.hpp"

namespace sotpuf {

const char* polarity_name(Polarity p) noexcept { return p == Polarity::SetToOne ? "FF" : "00"; }

Polarity parse_polarity(const std::string& text) {
    if (text == "FF" || text == "ff" || text == "1") return Polarity::SetToOne;
    if (text == "00" || text == "0") return Polarity::SetToZero;
    throw std::invalid_argument("polarity must be \"00\" or \"FF\", got \"" + text + "\"");
}

void PulseSpec::validate() const {
    if (!(amplitude >= 0)) throw std::domain_error("pulse amplitude must be >= 0");
    if (!(width > 0)) throw std::domain_error("pulse width must be > 0");
    check_temperature(temperature);
}

void DualPulseSpec::validate() const {
    if (!(v1 >= 0)) throw std::domain_error("v1 must be >= 0");
    if (!(v1 - beta >= 0)) throw std::domain_error("v1 - beta must be >= 0");
    if (!(width > 0)) throw std::domain_error("pulse width must be > 0");
    check_temperature(temperature);
}

void ReadModel::validate() const {
    if (!(flip_prob_swb >= 0 && flip_prob_swb <= flip_prob_raw && flip_prob_raw <= 1))
        throw std::invalid_argument("read model requires 0 <= flip_prob_swb <= flip_prob_raw <= 1");
    if (!(temp_slope >= 0 && vdd_slope >= 0)) throw std::invalid_argument("read model slopes must be >= 0");
}

double ReadModel::effective_flip_prob(bool stabilized, double temperature, double vdd) const {
    const double base = stabilized ? flip_prob_swb : flip_prob_raw;
    const double p = base * (1.0 + temp_slope * std::abs(temperature - kReferenceTemperature)) *
                     (1.0 + vdd_slope * std::abs(vdd - nominal_vdd));
    return std::min(p, 1.0);
}

MramArray::MramArray(std::vector<CellParams> cells, std::uint64_t seed, PulseWidthLaw law)
    : bits_(cells.size()),
      cells_(std::move(cells)),
      seed_(seed),
      write_key_(derive_key(seed, rng_domain::write)),
      read_key_(derive_key(seed, rng_domain::read)),
      law_(law) {
    if (cells_.empty()) throw std::invalid_argument("array needs at least one cell");
}

void MramArray::initialize(Polarity polarity) {
    bits_.fill(polarity_bit(polarity));
    stabilized_ = false;
}

void MramArray::apply_pulse(const PulseSpec& pulse) {
    pulse.validate();
    const bool target = polarity_bit(pulse.polarity);
    const std::uint64_t counter = pulse_counter_++;
    stabilized_ = false;
    if (pulse.amplitude <= 0) return;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (bits_.get(i) == target) continue;
        const auto& c = cells_[i];
        const double vc = critical_voltage(c, pulse.temperature, pulse.width, law_);
        const double p = psw_from_vc(c.steepness, vc, pulse.amplitude);
        if (stream_uniform(write_key_, i, counter) < p) bits_.set(i, target);
    }
}

void MramArray::reconfigure_dual(const DualPulseSpec& spec) {
    spec.validate();
    initialize(opposite(spec.first_polarity));
    apply_pulse({spec.v1, spec.first_polarity, spec.width, spec.temperature});
    apply_pulse({spec.v2(), opposite(spec.first_polarity), spec.width, spec.temperature});
    ++history_;
}

void MramArray::reconfigure_single(const PulseSpec& pulse) {
    pulse.validate();
    initialize(opposite(pulse.polarity));
    apply_pulse(pulse);
    ++history_;
}

BitArray MramArray::read(const ReadModel& model, const ReadConditions& cond) {
    model.validate();
    check_temperature(cond.temperature);
    const double p = model.effective_flip_prob(stabilized_, cond.temperature, cond.vdd);
    const std::uint64_t counter = read_counter_++;
    BitArray out = bits_;
    if (p <= 0) return out;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (stream_uniform(read_key_, i, counter) < p) out.flip(i);
    return out;
}

BitArray MramArray::tmv(const ReadModel& model, unsigned n_reads, const ReadConditions& cond) {
    if (n_reads == 0 || n_reads % 2 == 0) throw std::domain_error("TMV needs an odd number of reads");
    std::vector<unsigned> ones(size(), 0);
    for (unsigned r = 0; r < n_reads; ++r) {
        const BitArray sample = read(model, cond);
        for (std::size_t i = 0; i < sample.size(); ++i) ones[i] += sample.get(i) ? 1u : 0u;
    }
    BitArray out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out.set(i, 2 * ones[i] > n_reads);
    return out;
}

void MramArray::swb(const BitArray& readout) {
    if (readout.size() != bits_.size()) throw std::invalid_argument("SWB readout length differs from array");
    bits_ = readout;
    stabilized_ = true;
}

double wsr(const BitArray& before, const BitArray& after, Polarity polarity) {
    if (before.size() != after.size()) throw std::invalid_argument("WSR states differ in length");
    if (before.empty()) throw std::invalid_argument("WSR of an empty array");
    const bool target = polarity_bit(polarity);
    std::size_t switched = 0;
    for (std::size_t i = 0; i < before.size(); ++i)
        if (before.get(i) != target && after.get(i) == target) ++switched;
    return static_cast<double>(switched) / static_cast<double>(before.size());
}

double majority_error_probability(double p, unsigned n) {
    if (n == 0 || n % 2 == 0) throw std::domain_error("majority vote needs an odd number of reads");
    if (p <= 0) return 0.0;
    if (p >= 1) return 1.0;
    // P(X >= (n+1)/2) for X ~ Binomial(n, p)
    const boost::math::binomial_distribution<double> dist(n, p);
    return boost::math::cdf(boost::math::complement(dist, static_cast<double>(n / 2)));
}

ShmooGrid write_shmoo(const std::vector<CellParams>& population, std::uint64_t seed, std::span<const double> voltages,
                      std::span<const double> widths, double temperature, const PulseWidthLaw& law) {
    if (voltages.empty() || widths.empty()) throw std::invalid_argument("shmoo grids must be non-empty");
    ShmooGrid grid{{voltages.begin(), voltages.end()}, {widths.begin(), widths.end()}, temperature, {}};
    for (double width : widths) {
        std::vector<double> row;
        row.reserve(voltages.size());
        for (double v : voltages) {
            MramArray array(population, seed, law);
            array.initialize(Polarity::SetToZero);
            const BitArray before = array.bits();
            array.apply_pulse({v, Polarity::SetToOne, width, temperature});
            row.push_back(wsr(before, array.bits(), Polarity::SetToOne));
        }
        grid.wsr.push_back(std::move(row));
    }
    return grid;
}

}  // namespace sotpuf
