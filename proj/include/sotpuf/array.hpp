#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sotpuf/bit_array.hpp"
#include "sotpuf/device.hpp"

namespace sotpuf {

/// Write polarity. "00" drives cells to 0, "FF" drives them to 1.
enum class Polarity : std::uint8_t { SetToZero, SetToOne };

[[nodiscard]] constexpr bool polarity_bit(Polarity p) noexcept { return p == Polarity::SetToOne; }
[[nodiscard]] constexpr Polarity opposite(Polarity p) noexcept {
    return p == Polarity::SetToOne ? Polarity::SetToZero : Polarity::SetToOne;
}
[[nodiscard]] const char* polarity_name(Polarity p) noexcept;
[[nodiscard]] Polarity parse_polarity(const std::string& text);

struct PulseSpec {
    double amplitude = 1.8;
    Polarity polarity = Polarity::SetToOne;
    double width = kDefaultPulseWidth;
    double temperature = kReferenceTemperature;

    void validate() const;
};

/// Two opposite-polarity pulses with |V2| = |V1| - beta.
struct DualPulseSpec {
    double v1 = 1.8;
    double beta = 0.15;
    Polarity first_polarity = Polarity::SetToZero;
    double width = kDefaultPulseWidth;
    double temperature = kReferenceTemperature;

    [[nodiscard]] double v2() const noexcept { return v1 - beta; }
    void validate() const;
};

/// Read-disturb model: independent per-bit flips, with a higher rate before
/// self-write-back than after it. Rates scale linearly with the distance
/// from the nominal 25 °C / 1.8 V operating point.
struct ReadModel {
    double flip_prob_raw = 474.0 * 3.29e-5;
    double flip_prob_swb = 3.29e-5;
    double temp_slope = 0.02;  ///< 1/°C
    double vdd_slope = 10.0;   ///< 1/V
    double nominal_vdd = 1.8;

    void validate() const;
    [[nodiscard]] double effective_flip_prob(bool stabilized, double temperature, double vdd) const;
};

struct ReadConditions {
    double temperature = kReferenceTemperature;
    double vdd = 1.8;
};

/// Simulated SOT-MRAM array. Every stochastic decision draws from a
/// counter-based stream keyed by (seed, cell index, event counter).
class MramArray {
public:
    MramArray(std::vector<CellParams> cells, std::uint64_t seed, PulseWidthLaw law = {});

    [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }
    [[nodiscard]] const BitArray& bits() const noexcept { return bits_; }
    [[nodiscard]] std::span<const CellParams> cells() const noexcept { return cells_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t history() const noexcept { return history_; }
    [[nodiscard]] std::uint64_t pulse_count() const noexcept { return pulse_counter_; }
    [[nodiscard]] bool stabilized() const noexcept { return stabilized_; }
    [[nodiscard]] const PulseWidthLaw& pulse_width_law() const noexcept { return law_; }

    void initialize(Polarity polarity);
    void apply_pulse(const PulseSpec& pulse);
    void reconfigure_dual(const DualPulseSpec& spec);
    /// Single-pulse reconfiguration: initialize to the opposite state, then one pulse.
    void reconfigure_single(const PulseSpec& pulse);

    [[nodiscard]] BitArray read(const ReadModel& model, const ReadConditions& cond = {});
    /// Per-bit majority over n_reads independent reads; n_reads must be odd.
    [[nodiscard]] BitArray tmv(const ReadModel& model, unsigned n_reads = 15, const ReadConditions& cond = {});
    /// Self-write-back: store the readout deterministically; later reads use the post-SWB rate.
    void swb(const BitArray& readout);

private:
    BitArray bits_;
    std::vector<CellParams> cells_;
    std::uint64_t seed_;
    std::uint64_t write_key_;
    std::uint64_t read_key_;
    std::uint64_t history_ = 0;
    std::uint64_t pulse_counter_ = 0;
    std::uint64_t read_counter_ = 0;
    bool stabilized_ = false;
    PulseWidthLaw law_;
};

/// Fraction of all cells that hold the pulse polarity after the write but did not before.
[[nodiscard]] double wsr(const BitArray& before, const BitArray& after, Polarity polarity);

/// Exact probability that a majority of n independent reads flip, each with probability p.
[[nodiscard]] double majority_error_probability(double p, unsigned n);

struct ShmooGrid {
    std::vector<double> voltages;
    std::vector<double> widths;
    double temperature = kReferenceTemperature;
    /// wsr[w][v]: rows follow widths, columns follow voltages.
    std::vector<std::vector<double>> wsr;
};

/// WSR of a 00 -> FF write for every (voltage, pulse width). Each grid point
/// starts from a fresh array with the same seed, so the grid is monotone along both axes.
[[nodiscard]] ShmooGrid write_shmoo(const std::vector<CellParams>& population, std::uint64_t seed,
                                    std::span<const double> voltages, std::span<const double> widths,
                                    double temperature, const PulseWidthLaw& law = {});

}  // namespace sotpuf
