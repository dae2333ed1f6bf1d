#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sotpuf/device.hpp"

namespace sotpuf {

/// WSR sampled against write voltage at fixed temperature and pulse width.
struct WsrCurve {
    std::vector<double> voltages;
    std::vector<double> wsr;
    double temperature = kReferenceTemperature;
};

struct Interval {
    double lo = 0;
    double hi = 0;
    bool lo_closed = true;
    bool hi_closed = true;

    [[nodiscard]] bool contains(double x) const noexcept {
        return (lo_closed ? x >= lo : x > lo) && (hi_closed ? x <= hi : x < hi);
    }
    [[nodiscard]] double length() const noexcept { return hi - lo; }
};

/// Local linearization WSR(V) ≈ k·V + b around the 50 % crossing.
struct TangentModel {
    double k = 3.733;
    double b = 0.5 - 3.733 * 1.8;
    double v_center = 1.8;
    Interval validity{1.8 - 0.5 / 3.733, 1.8 + 0.5 / 3.733};

    /// Tangent through (v_center, 0.5) with validity v_center ± half_width
    /// (default 0.5/k, the span where the line stays inside [0, 1]).
    static TangentModel through_center(double k, double v_center, std::optional<double> half_width = {});

    [[nodiscard]] double line(double v) const noexcept { return k * v + b; }
    /// Line clamped to [0, 1].
    [[nodiscard]] double wsr(double v) const noexcept;
};

/// First and second pulses with their own slopes and intercepts.
struct ExtendedTangentModel {
    TangentModel first;
    TangentModel second;
};

/// Target HW/WSR window (lower, upper].
struct TargetWindow {
    double lower = 0.4;
    double upper = 0.6;

    void validate() const;
    [[nodiscard]] bool contains(double f) const noexcept { return f > lower && f <= upper; }
};

struct VoltageWindow {
    double lo = 0;
    double hi = 0;
    double temperature = kReferenceTemperature;
};

/// Fit a tangent at the 50 % crossing. v_center comes from inverse linear
/// interpolation; k is the derivative at v_center of a least-squares cubic
/// through the points with WSR in [band_lo, band_hi] (a straight line when
/// fewer than four points fall in the band). Throws std::runtime_error if the
/// curve never crosses 0.5.
[[nodiscard]] TangentModel fit_tangent(const WsrCurve& curve, double band_lo = 0.3, double band_hi = 0.7);

[[nodiscard]] double compose_independent(double wsr1, double wsr2);

struct DependentComposition {
    double value = 0;
    bool premise_violated = false;  ///< wsr2 > wsr1: second-pulse switches cannot be a subset
};
[[nodiscard]] DependentComposition compose_dependent(double wsr1, double wsr2);

/// Expanded quadratic F(V1) = -k²V1² + (k + k²β - 2kb)V1 + (b + kβb - b²).
[[nodiscard]] double f_quadratic(const TangentModel& model, double v1, double beta) noexcept;
[[nodiscard]] std::vector<double> f_curve(const TangentModel& model, std::span<const double> v1_grid, double beta);
/// F evaluated with WSR clamped to [0, 1] (single = true ignores the second pulse).
[[nodiscard]] double f_clamped(const TangentModel& model, double v1, double beta, bool single = false) noexcept;
[[nodiscard]] double f_clamped(const ExtendedTangentModel& model, double v1, double beta) noexcept;

/// ¼(1 + kβ)²
[[nodiscard]] double f_extreme(double k, double beta) noexcept;

enum class BetaTarget { Upper, Center };

struct BetaSolution {
    std::vector<Interval> kept;
    std::vector<Interval> discarded;  ///< branches whose vertex leaves the tangent validity
    double optimal_beta = 0;
    bool feasible = false;
};

/// Solves lower < F_extreme(β) ≤ upper. Optimal β puts F_extreme on the
/// upper bound (or the window center with BetaTarget::Center).
[[nodiscard]] BetaSolution solve_beta(const TangentModel& model, const TargetWindow& window,
                                      BetaTarget target = BetaTarget::Upper);
/// Convenience overload with the validity default for slope k.
[[nodiscard]] BetaSolution solve_beta(double k, const TargetWindow& window, BetaTarget target = BetaTarget::Upper);

/// F extreme of the asymmetric model: (k1(1 + k2β - b2) + b1k2)² / (4k1k2).
[[nodiscard]] double f_extreme_extended(const ExtendedTangentModel& model, double beta) noexcept;
[[nodiscard]] BetaSolution solve_beta_extended(const ExtendedTangentModel& model, const TargetWindow& window,
                                               BetaTarget target = BetaTarget::Upper);

/// Total length of {V1 ≤ v_max : F(V1, β) ∈ window}, F with clamped WSR.
[[nodiscard]] double window_width(const TangentModel& model, double beta, const TargetWindow& window,
                                  double v_max = 2.4, double step = 1e-4);

/// Largest contiguous V1 range whose F lands in the window (β = 0 with
/// single = true gives the single-pulse operation window).
[[nodiscard]] std::optional<VoltageWindow> operation_window(const TangentModel& model, double beta,
                                                            const TargetWindow& window, bool single, double v_lo,
                                                            double v_hi, double step = 1e-4);

/// Intersection of two voltage windows; touching endpoints count.
[[nodiscard]] std::optional<VoltageWindow> common_window(const VoltageWindow& w1, const VoltageWindow& w2);

struct PhaseDiagram {
    std::vector<double> temperatures;
    std::vector<double> beta_grid;
    std::vector<double> v1_grid;
    /// feasible[t][i_beta * v1_grid.size() + i_v1]
    std::vector<std::vector<bool>> feasible;
    std::vector<bool> overlap;
    std::size_t overlap_count = 0;
    bool reference_inside = false;

    [[nodiscard]] bool at(std::size_t t, std::size_t ib, std::size_t iv) const {
        return feasible[t][ib * v1_grid.size() + iv];
    }
    [[nodiscard]] bool overlap_at(std::size_t ib, std::size_t iv) const { return overlap[ib * v1_grid.size() + iv]; }
};

[[nodiscard]] PhaseDiagram phase_diagram(const std::vector<TangentModel>& models, const std::vector<double>& temperatures,
                                         std::span<const double> beta_grid, std::span<const double> v1_grid,
                                         const TargetWindow& window, double reference_beta = 0.15,
                                         double reference_v1 = 1.8);

/// Inclusive grid lo, lo+step, ..., hi.
[[nodiscard]] std::vector<double> linspace_step(double lo, double hi, double step);

/// HW curve of a population: sample, sweep voltage, simulate a 00 -> FF write per point.
[[nodiscard]] WsrCurve population_wsr_curve(const std::vector<CellParams>& population, std::uint64_t seed,
                                            std::span<const double> voltages, double temperature,
                                            double pulse_width = kDefaultPulseWidth);

struct SlopeStudyPoint {
    double cv = 0;
    std::optional<TangentModel> model;  ///< empty when the curve did not cross 0.5
    WsrCurve curve;
};

[[nodiscard]] std::vector<SlopeStudyPoint> slope_k_study(std::span<const double> cv_grid, const CellParams& baseline,
                                                         std::span<const double> signal_grid, std::size_t n_cells,
                                                         std::uint64_t seed, double temperature = kReferenceTemperature);

}  // namespace sotpuf
