#pragma once

#include <cstdint>
#include <vector>

namespace sotpuf {

inline constexpr double kReferenceTemperature = 25.0;  // °C
inline constexpr double kMinTemperature = -40.0;
inline constexpr double kMaxTemperature = 125.0;
inline constexpr double kDefaultPulseWidth = 20e-9;  // s

/// Physical parameters of one SOT-MTJ and its write path (2T1J cell).
///
/// The critical voltage is the product of the critical switching current and
/// the write-path resistance (SOT track plus write-transistor on-resistance).
/// The track resistance is temperature independent; the transistor has a
/// positive temperature coefficient while the critical current falls with
/// temperature, so the two trends partially cancel in the voltage domain.
struct CellParams {
    double vc0 = 1.8;                 ///< V, critical voltage at 25 °C (= ic_ref * (track + ron_ref))
    double steepness = 17.3;          ///< 1/V, logistic slope of the switching probability
    double track_resistance = 678.0;  ///< Ω
    double ron_ref = 822.0;           ///< Ω at 25 °C
    double ron_tc = 1.2;              ///< Ω/°C
    double ic_ref = 1.2e-3;           ///< A at 25 °C
    double ic_tc = -1.2e-3 * 0.15 / 165.0;  ///< A/°C, ~15 % drop over -40..125 °C
    double width_factor = 1.0;        ///< SOT-track width relative to nominal

    /// Throws std::invalid_argument when a field violates its sign constraint.
    void validate() const;
    /// Recomputes vc0 from the current and resistance fields.
    void refresh_vc0() noexcept;
};

/// Pulse-width dependence of the critical voltage:
/// Vc(T, tw) = Vc(T) * (1 + coeff * ln(reference / tw)).
struct PulseWidthLaw {
    double coeff = 0.03;
    double reference = kDefaultPulseWidth;
};

struct VariationConfig {
    double cv = 0.05;  ///< σ/μ of the track width
    std::uint64_t seed = 1;
    std::size_t n_cells = 131072;

    void validate() const;
};

/// Track width is clamped from below at this value under large variation.
inline constexpr double kMinWidthFactor = 0.1;

[[nodiscard]] double critical_current(const CellParams& params, double temperature);
[[nodiscard]] double write_path_resistance(const CellParams& params, double temperature);
[[nodiscard]] double critical_voltage(const CellParams& params, double temperature);
/// Critical voltage including the pulse-width shift.
[[nodiscard]] double critical_voltage(const CellParams& params, double temperature, double pulse_width,
                                      const PulseWidthLaw& law = {});

/// Logistic switching probability 1 / (1 + exp(-steepness * (V - Vc(T, tw)))).
/// A zero-amplitude pulse drives no current and never switches.
[[nodiscard]] double psw_single(const CellParams& params, double v_write, double pulse_width, double temperature,
                                const PulseWidthLaw& law = {});

/// Same curve with the critical voltage already resolved (hot loops cache it).
[[nodiscard]] double psw_from_vc(double steepness, double vc, double v_write) noexcept;

/// Cell with a given track width: Ic scales with the width at fixed critical
/// current density, the track resistance scales inversely, the transistor is unchanged.
[[nodiscard]] CellParams scale_width(const CellParams& baseline, double width_factor);

/// Draws one cell per index from N(1, cv) track widths; cell i depends only on (seed, i).
[[nodiscard]] std::vector<CellParams> sample_population(const VariationConfig& config, const CellParams& baseline);

/// Throws std::domain_error outside [-40, 125] °C.
void check_temperature(double temperature);

}  // namespace sotpuf
