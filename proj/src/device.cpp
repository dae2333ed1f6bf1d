#include "sotpuf/device.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sotpuf/stream_rng.hpp"

namespace sotpuf {

void check_temperature(double temperature) {
    if (!(temperature >= kMinTemperature && temperature <= kMaxTemperature))
        throw std::domain_error("temperature " + std::to_string(temperature) + " °C outside [-40, 125]");
}

void CellParams::validate() const {
    if (!(track_resistance > 0)) throw std::invalid_argument("track_resistance must be > 0");
    if (!(ron_ref > 0)) throw std::invalid_argument("ron_ref must be > 0");
    if (!(ron_tc >= 0)) throw std::invalid_argument("ron_tc must be >= 0");
    if (!(ic_tc <= 0)) throw std::invalid_argument("ic_tc must be <= 0");
    if (!(ic_ref > 0)) throw std::invalid_argument("ic_ref must be > 0");
    if (!(steepness > 0)) throw std::invalid_argument("steepness must be > 0");
    if (!(width_factor > 0)) throw std::invalid_argument("width_factor must be > 0");
}

void CellParams::refresh_vc0() noexcept { vc0 = ic_ref * (track_resistance + ron_ref); }

void VariationConfig::validate() const {
    if (!(cv >= 0)) throw std::invalid_argument("cv must be >= 0");
    if (n_cells < 1) throw std::invalid_argument("n_cells must be >= 1");
}

double critical_current(const CellParams& params, double temperature) {
    check_temperature(temperature);
    return params.ic_ref + params.ic_tc * (temperature - kReferenceTemperature);
}

double write_path_resistance(const CellParams& params, double temperature) {
    check_temperature(temperature);
    return params.track_resistance + params.ron_ref + params.ron_tc * (temperature - kReferenceTemperature);
}

double critical_voltage(const CellParams& params, double temperature) {
    return critical_current(params, temperature) * write_path_resistance(params, temperature);
}

double critical_voltage(const CellParams& params, double temperature, double pulse_width, const PulseWidthLaw& law) {
    if (!(pulse_width > 0)) throw std::domain_error("pulse width must be > 0");
    return critical_voltage(params, temperature) * (1.0 + law.coeff * std::log(law.reference / pulse_width));
}

double psw_from_vc(double steepness, double vc, double v_write) noexcept {
    if (v_write <= 0) return 0.0;
    return 1.0 / (1.0 + std::exp(-steepness * (v_write - vc)));
}

double psw_single(const CellParams& params, double v_write, double pulse_width, double temperature,
                  const PulseWidthLaw& law) {
    if (v_write < 0) throw std::domain_error("write voltage must be >= 0");
    const double vc = critical_voltage(params, temperature, pulse_width, law);
    return psw_from_vc(params.steepness, vc, v_write);
}

CellParams scale_width(const CellParams& baseline, double width_factor) {
    CellParams cell = baseline;
    cell.width_factor = baseline.width_factor * width_factor;
    cell.ic_ref = baseline.ic_ref * width_factor;
    cell.ic_tc = baseline.ic_tc * width_factor;
    cell.track_resistance = baseline.track_resistance / width_factor;
    cell.refresh_vc0();
    return cell;
}

std::vector<CellParams> sample_population(const VariationConfig& config, const CellParams& baseline) {
    config.validate();
    baseline.validate();
    std::vector<CellParams> cells(config.n_cells, baseline);
    if (config.cv == 0) return cells;
    const std::uint64_t key = derive_key(config.seed, rng_domain::population);
    for (std::size_t i = 0; i < config.n_cells; ++i) {
        double w = 0;
        // Rejection keeps the draw a pure function of (seed, i).
        for (std::uint64_t attempt = 0;; ++attempt) {
            w = 1.0 + config.cv * stream_normal(key, i, attempt);
            if (w >= kMinWidthFactor) break;
        }
        cells[i] = scale_width(baseline, w);
    }
    return cells;
}

}  // namespace sotpuf
