#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sotpuf/array.hpp"
#include "sotpuf/device.hpp"
#include "sotpuf/dualpulse.hpp"
#include "sotpuf/postproc.hpp"

namespace sotpuf {

/// Invalid configuration; field is the dotted path of the offending key.
struct ConfigError : std::runtime_error {
    ConfigError(std::string field, const std::string& message);
    std::string field;
};

enum class WriteMode { Dual, Single };

/// "physical": cells from the device model. "calibrated": per-cell switching
/// probabilities drawn from a truncated normal with the given mean and spread.
struct CalibratedMap {
    double mu = 0.5356;
    double sigma = 0.2120;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    std::size_t n_cells = 131072;
    double cv = 0.05;
    CellParams device;
    PulseWidthLaw pulse_width_law;

    std::vector<double> temperatures{-40.0, 25.0, 125.0};
    double temperature = kReferenceTemperature;

    WriteMode mode = WriteMode::Dual;
    DualPulseSpec dual;
    double single_voltage = 1.8;
    Polarity single_polarity = Polarity::SetToOne;

    std::size_t reconfigurations = 50;
    std::size_t xor_arity = kDefaultXorArity;
    std::size_t response_width = kDefaultResponseWidth;

    ReadModel read_model;
    unsigned tmv_reads = 15;

    std::optional<CalibratedMap> calibrated;

    TargetWindow window;
    double tangent_k = 3.733;
    double tangent_v_center = 1.8;
    std::optional<double> validity_half_width;
    bool fit_k = false;
    BetaTarget beta_target = BetaTarget::Upper;
    double beta_step = 0.001;
    double beta_max = 0.4;
    double v1_min = 1.4;
    double v1_max = 2.4;
    double v1_step = 0.01;

    double shmoo_v_min = 1.2;
    double shmoo_v_max = 2.4;
    double shmoo_v_step = 0.02;
    std::vector<double> shmoo_widths{5e-9, 10e-9, 20e-9, 50e-9, 100e-9};

    std::size_t nist_sequences = 10;
    std::size_t nist_length = 100000;
    double nist_alpha = 0.01;

    void validate() const;
};

/// Parses a JSON config object (or a manifest holding one under "config").
/// Unknown keys and type mismatches raise ConfigError naming the field.
[[nodiscard]] RunConfig parse_config(const std::string& json_text);
[[nodiscard]] std::string config_to_json(const RunConfig& config, int indent = 2);

}  // namespace sotpuf
