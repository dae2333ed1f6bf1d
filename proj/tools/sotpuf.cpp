// sotpuf: simulate, post-process, measure and optimize a reconfigurable SOT-MRAM PUF.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sotpuf/array.hpp"
#include "sotpuf/config.hpp"
#include "sotpuf/device.hpp"
#include "sotpuf/dualpulse.hpp"
#include "sotpuf/io.hpp"
#include "sotpuf/metrics.hpp"
#include "sotpuf/postproc.hpp"
#include "sotpuf/randomness.hpp"

using namespace sotpuf;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> temperature;
    std::optional<double> beta;
    std::optional<std::size_t> xor_arity;
};

RunConfig resolve(const Globals& g) {
    RunConfig c;
    if (!g.config_path.empty()) {
        std::string text;
        try {
            text = io::read_file(g.config_path);
        } catch (const std::exception& e) {
            throw ConfigError("--config", e.what());
        }
        c = parse_config(text);
    }
    if (g.seed) c.seed = *g.seed;
    if (g.out) c.output_dir = *g.out;
    if (g.temperature) c.temperature = c.dual.temperature = *g.temperature;
    if (g.beta) c.dual.beta = *g.beta;
    if (g.xor_arity) c.xor_arity = *g.xor_arity;
    c.validate();
    try {
        check_temperature(c.temperature);
    } catch (const std::exception& e) {
        throw ConfigError("temperature", e.what());
    }
    return c;
}

/// Collects every file a command writes so the manifest can list it with a checksum.
class Artifacts {
public:
    Artifacts(const RunConfig& config, std::string command) : config_(config), command_(std::move(command)) {}

    [[nodiscard]] fs::path dir() const { return config_.output_dir; }

    void write(const std::string& name, const std::string& content) {
        io::atomic_write(dir() / name, content);
        files_.push_back({{"path", name}, {"bytes", content.size()}, {"crc32", io::crc32(content)}});
    }

    void write_json(const std::string& name, json body) {
        json doc{{"schema_version", io::kSchemaVersion}, {"seed", config_.seed}, {"command", command_}};
        for (auto& [k, v] : body.items()) doc[k] = std::move(v);
        write(name, doc.dump(2) + "\n");
    }

    void write_manifest(const json& extra = json::object()) {
        json m{{"schema_version", io::kSchemaVersion},
               {"tool", "sotpuf"},
               {"command", command_},
               {"seed", config_.seed},
               {"config", json::parse(config_to_json(config_))},
               {"outputs", files_}};
        for (auto& [k, v] : extra.items()) m[k] = v;
        io::atomic_write(dir() / ("manifest_" + command_ + ".json"), m.dump(2) + "\n");
    }

private:
    const RunConfig& config_;
    std::string command_;
    json files_ = json::array();
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<CellParams> population(const RunConfig& c, std::size_t n_cells) {
    return sample_population({c.cv, c.seed, n_cells}, c.device);
}

/// Expands directories to their *.bin files (sorted); defaults to <out>/bitmaps.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs, const RunConfig& c) {
    std::vector<std::string> roots = inputs;
    if (roots.empty()) roots.push_back((fs::path(c.output_dir) / "bitmaps").string());
    std::vector<fs::path> out;
    for (const auto& r : roots) {
        const fs::path p(r);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p))
                if (e.path().extension() == ".bin") found.push_back(e.path());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::exists(p)) {
            out.push_back(p);
        } else {
            throw std::runtime_error("missing input: " + r);
        }
    }
    if (out.empty()) throw std::runtime_error("no packed inputs found");
    return out;
}

struct LoadedInput {
    fs::path path;
    io::PackedBitmap packed;
    std::uint32_t crc = 0;
};

LoadedInput load_input(const fs::path& p) {
    const auto data = io::read_file(p);
    try {
        return {p, io::decode_packed(data), io::crc32(data)};
    } catch (const io::FormatError& e) {
        throw std::runtime_error(p.string() + ": " + e.what());
    }
}

/// Responses of an input: ResponseSet files as stored, bitmaps folded with the configured arity.
ResponseSet responses_of(const io::PackedBitmap& p, std::size_t arity, std::size_t width) {
    if (p.flags & io::kFlagResponseSet) return io::to_response_set(p);
    return make_responses(p.bits, arity, width);
}

json input_record(const LoadedInput& in) {
    return {{"path", in.path.string()}, {"seed", in.packed.seed}, {"bits", in.packed.bits.size()}, {"crc32", in.crc}};
}

// ---------------------------------------------------------------- reconfigure

int cmd_reconfigure(const RunConfig& c, bool calibrated_flag) {
    Artifacts art(c, "reconfigure");
    const bool calibrated = calibrated_flag || c.calibrated.has_value();
    const std::size_t n = c.reconfigurations;
    std::vector<BitArray> events;
    events.reserve(n);
    json hw = json::array();
    std::string hw_csv = io::csv_preamble(c.seed) + "reconfiguration,hamming_weight\n";

    auto record = [&](std::size_t r, const BitArray& bits, const BitArray& event) {
        art.write(fmt("bitmaps/reconfig_%03zu.bin", r), io::encode_packed(bits, c.seed));
        const double w = hamming_weight(bits);
        hw.push_back(w);
        hw_csv += fmt("%zu,%.6f\n", r, w);
        events.push_back(event);
    };

    std::string mode_label;
    if (calibrated) {
        const CalibratedMap m = c.calibrated.value_or(CalibratedMap{});
        // The configured sigma is the spread of frequencies observed over the run's reconfigurations.
        const double map_sigma = n >= 2 ? remove_trial_noise(m.mu, m.sigma, n) : m.sigma;
        const auto p = sample_calibrated_map(m.mu, map_sigma, c.n_cells, c.seed);
        for (std::size_t r = 0; r < n; ++r) {
            const BitArray bits = draw_from_map(p, c.seed, r);
            record(r, bits, bits);
        }
        mode_label = fmt("calibrated map (mu %.4f, sigma %.4f)", m.mu, m.sigma);
    } else {
        MramArray array(population(c, c.n_cells), c.seed, c.pulse_width_law);
        bool initial = false;
        for (std::size_t r = 0; r < n; ++r) {
            if (c.mode == WriteMode::Dual) {
                array.reconfigure_dual(c.dual);
                initial = polarity_bit(opposite(c.dual.first_polarity));
            } else {
                array.reconfigure_single({c.single_voltage, c.single_polarity, c.dual.width, c.temperature});
                initial = polarity_bit(opposite(c.single_polarity));
            }
            record(r, array.bits(), switched_from(initial, array.bits()));
        }
        mode_label = c.mode == WriteMode::Dual
                         ? fmt("dual pulse V1 %.3f V, beta %.3f V, %s first, %.1f C", c.dual.v1, c.dual.beta,
                               polarity_name(c.dual.first_polarity), c.temperature)
                         : fmt("single pulse %.3f V %s, %.1f C", c.single_voltage, polarity_name(c.single_polarity),
                               c.temperature);
    }

    const auto stats = psw_map([&](std::size_t t) { return events[t]; }, n);
    std::string psw_csv = io::csv_preamble(c.seed) + "cell,psw\n";
    psw_csv.reserve(psw_csv.size() + stats.per_cell_p.size() * 12);
    for (std::size_t i = 0; i < stats.per_cell_p.size(); ++i) psw_csv += fmt("%zu,%.4f\n", i, stats.per_cell_p[i]);
    art.write("psw_map.csv", psw_csv);
    art.write("hamming_weight.csv", hw_csv);
    art.write_json("psw_map.json", {{"mode", calibrated ? "calibrated" : "physical"},
                                    {"description", mode_label},
                                    {"cells", stats.per_cell_p.size()},
                                    {"trials", stats.n_trials},
                                    {"mu", stats.mu},
                                    {"sigma", stats.sigma},
                                    {"bimodal", stats.bimodal},
                                    {"expected_same_map_hd", expected_same_map_hd(stats.per_cell_p)},
                                    {"hamming_weight", hw}});
    art.write_manifest();

    std::printf("reconfigure: %zu x %zu cells, %s\n", n, c.n_cells, mode_label.c_str());
    double hw_min = 1, hw_max = 0;
    for (const auto& v : hw) hw_min = std::min(hw_min, v.get<double>()), hw_max = std::max(hw_max, v.get<double>());
    std::printf("  HW range [%.4f, %.4f]\n", hw_min, hw_max);
    std::printf("  Psw map mu %.4f, sigma %.4f over %zu trials%s\n", stats.mu, stats.sigma, stats.n_trials,
                stats.bimodal ? " (bimodal)" : "");
    std::printf("  wrote %s\n", art.dir().string().c_str());
    return kExitOk;
}

// ---------------------------------------------------------------- metrics

int cmd_metrics(const RunConfig& c, const std::vector<std::string>& inputs, std::size_t max_lag) {
    Artifacts art(c, "metrics");
    std::vector<ResponseSet> keys;
    json in_json = json::array();
    for (const auto& p : expand_inputs(inputs, c)) {
        const auto in = load_input(p);
        keys.push_back(responses_of(in.packed, c.xor_arity, c.response_width));
        in_json.push_back(input_record(in));
    }

    ResponseSet pooled;
    pooled.width = keys.front().width;
    pooled.xor_arity = keys.front().xor_arity;
    std::string hw_csv = io::csv_preamble(c.seed) + "key,response,hamming_weight\n";
    json per_key = json::array();
    for (std::size_t k = 0; k < keys.size(); ++k) {
        for (std::size_t r = 0; r < keys[k].size(); ++r) {
            pooled.responses.push_back(keys[k].responses[r]);
            hw_csv += fmt("%zu,%zu,%.6f\n", k, r, hamming_weight(keys[k].responses[r]));
        }
        per_key.push_back(hamming_weight(keys[k].concatenated()));
    }
    art.write("hw_responses.csv", hw_csv);
    const auto fit = uniformity(pooled);
    const double ideal = 0.5 / std::sqrt(static_cast<double>(pooled.width));
    double hw_mean = 0;
    for (const auto& v : per_key) hw_mean += v.get<double>();
    hw_mean /= static_cast<double>(per_key.size());

    json report;
    report["inputs"] = in_json;
    report["xor_arity"] = pooled.xor_arity;
    report["response_width"] = pooled.width;
    report["uniformity"] = {{"mu", fit.mu},
                            {"sigma", fit.sigma},
                            {"ideal_sigma", ideal},
                            {"amplitude", fit.amplitude},
                            {"bins", fit.bin_count},
                            {"bin_width", fit.bin_width},
                            {"responses", fit.samples},
                            {"underpowered", fit.underpowered}};
    report["hamming_weight"] = {{"mean", hw_mean}, {"per_key", per_key}};

    std::vector<BitArray> flat;
    for (const auto& k : keys) flat.push_back(k.concatenated());
    if (keys.size() >= 2) {
        const auto hd = inter_reconfig_hd(keys);
        std::string hd_csv = io::csv_preamble(c.seed) + "key_a,key_b,hd\n";
        for (std::size_t i = 0; i < flat.size(); ++i)
            for (std::size_t j = i + 1; j < flat.size(); ++j)
                hd_csv += fmt("%zu,%zu,%.6f\n", i, j, normalized_hd(flat[i], flat[j]));
        art.write("hd_pairs.csv", hd_csv);
        report["inter_reconfig_hd"] = {{"mean", hd.mean},
                                       {"stddev", hd.stddev},
                                       {"distance_from_half", hd.distance_from_half},
                                       {"pairs", hd.values.size()}};

        const auto cm = correlation_matrix(flat);
        const double bound = 3.0 / std::sqrt(static_cast<double>(flat.front().size()));
        double max_abs = 0;
        std::size_t exceeding = 0, pairs = 0;
        std::string cm_csv = io::csv_preamble(c.seed);
        for (std::size_t i = 0; i < cm.n; ++i) {
            for (std::size_t j = 0; j < cm.n; ++j) {
                const double r = cm.values[i * cm.n + j];
                cm_csv += (j ? "," : "") + (std::isnan(r) ? std::string("nan") : fmt("%.6f", r));
                if (j > i && !std::isnan(r)) {
                    ++pairs;
                    max_abs = std::max(max_abs, std::abs(r));
                    if (std::abs(r) > bound) ++exceeding;
                }
            }
            cm_csv += "\n";
        }
        art.write("correlation.csv", cm_csv);
        report["correlation"] = {{"max_abs_offdiag", max_abs},
                                 {"bound", bound},
                                 {"pairs", pairs},
                                 {"pairs_exceeding", exceeding},
                                 {"expected_exceeding_under_null", 0.0027 * static_cast<double>(pairs)}};
    } else {
        report["inter_reconfig_hd"] = nullptr;
        report["correlation"] = nullptr;
    }

    const auto a = acf(flat.front(), std::min<std::size_t>(max_lag, flat.front().size() - 1));
    std::size_t inside = 0;
    std::string acf_csv = io::csv_preamble(c.seed) + "lag,coefficient,bound\n";
    for (std::size_t l = 0; l < a.coefficients.size(); ++l) {
        if (std::abs(a.coefficients[l]) <= a.bound) ++inside;
        acf_csv += fmt("%zu,%.6f,%.6f\n", l + 1, a.coefficients[l], a.bound);
    }
    art.write("acf.csv", acf_csv);
    const double in_bounds = a.coefficients.empty() ? 0.0 : static_cast<double>(inside) / a.coefficients.size();
    report["acf"] = {{"max_lag", a.coefficients.size()},
                     {"bound", a.bound},
                     {"confidence", a.confidence},
                     {"in_bounds_fraction", in_bounds},
                     {"majority_in_bounds", !a.degenerate && in_bounds > 0.5},
                     {"degenerate", a.degenerate}};
    report["nist"] = nullptr;
    report["attack"] = nullptr;
    art.write_json("metrics.json", report);
    art.write_manifest();

    std::printf("metrics: %zu keys, %zu responses of %zu bits (XOR %zu)\n", keys.size(), pooled.size(), pooled.width,
                pooled.xor_arity);
    std::printf("  uniformity  mu %.4f  sigma %.4f  (ideal %.4f)%s\n", fit.mu, fit.sigma, ideal,
                fit.underpowered ? "  [underpowered]" : "");
    if (keys.size() >= 2) {
        const auto& hd = report["inter_reconfig_hd"];
        const auto& cr = report["correlation"];
        std::printf("  inter-reconfiguration HD  mean %.4f  sd %.4f\n", hd["mean"].get<double>(),
                    hd["stddev"].get<double>());
        std::printf("  correlation  max |r| %.4f  bound %.4f  (%zu of %zu pairs above)\n",
                    cr["max_abs_offdiag"].get<double>(), cr["bound"].get<double>(),
                    cr["pairs_exceeding"].get<std::size_t>(), cr["pairs"].get<std::size_t>());
    }
    std::printf("  ACF  %.0f%% of %zu lags inside +-%.4f\n", 100 * in_bounds, a.coefficients.size(), a.bound);
    return kExitOk;
}

// ---------------------------------------------------------------- nist

std::string nist_table(const nist::BatteryResult& r) {
    std::ostringstream out;
    out << fmt("%-26s %-10s %-12s %s\n", "Statistical test", "P-value", "Proportion", "Result");
    for (const auto& row : r.rows) {
        if (row.skipped) {
            out << fmt("%-26s %-10s %-12s %s\n", row.name.c_str(), "-", "-", ("skipped: " + row.skip_reason).c_str());
            continue;
        }
        std::string prop = fmt("%zu/%zu", row.passed, row.total);
        if (row.subtests > 1) prop += fmt(" (%zu/%zu)", row.subtests - row.failed_subtests, row.subtests);
        out << fmt("%-26s %-10.6f %-12s %s\n", row.name.c_str(), row.uniformity_p, prop.c_str(),
                   row.pass ? "YES" : "NO");
    }
    out << fmt("\nsequences %zu x %zu bits, alpha %.3g, minimum pass rate %.4f\n", r.sequences, r.sequence_length,
               r.alpha, r.proportion_threshold);
    return out.str();
}

json nist_json(const nist::BatteryResult& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"name", row.name},
                        {"skipped", row.skipped},
                        {"skip_reason", row.skip_reason},
                        {"p_value", row.uniformity_p},
                        {"first_sequence_p", row.representative_p},
                        {"passed", row.passed},
                        {"total", row.total},
                        {"subtests", row.subtests},
                        {"failed_subtests", row.failed_subtests},
                        {"allowed_failed_subtests", row.allowed_failed_subtests},
                        {"pass", row.pass}});
    return {{"alpha", r.alpha},
            {"sequences", r.sequences},
            {"sequence_length", r.sequence_length},
            {"proportion_threshold", r.proportion_threshold},
            {"all_pass", r.all_pass()},
            {"rows", rows}};
}

int cmd_nist(const RunConfig& c, const std::vector<std::string>& inputs, bool reference, bool raw) {
    Artifacts art(c, "nist");
    std::vector<BitArray> seqs;
    json source;
    if (reference) {
        seqs = nist::reference_sequences(c.nist_sequences, c.nist_length, c.seed);
        source = {{"generator", "mt19937_64"}};
    } else {
        BitArray stream;
        json in_json = json::array();
        for (const auto& p : expand_inputs(inputs, c)) {
            const auto in = load_input(p);
            const BitArray bits = (raw || (in.packed.flags & io::kFlagResponseSet)) ? in.packed.bits
                                                                                     : xor_fold(in.packed.bits, c.xor_arity);
            for (std::size_t i = 0; i < bits.size(); ++i) stream.push_back(bits.get(i));
            in_json.push_back(input_record(in));
        }
        std::size_t count = c.nist_sequences;
        if (stream.size() < count * c.nist_length) {
            count = stream.size() / c.nist_length;
            if (count == 0)
                throw std::runtime_error(fmt("inputs hold %zu bits, fewer than one %zu-bit sequence", stream.size(),
                                             c.nist_length));
            std::fprintf(stderr, "warning: %zu bits available, running %zu sequences instead of %zu\n", stream.size(),
                         count, c.nist_sequences);
        }
        seqs = nist::split_sequences(stream, count, c.nist_length);
        source = {{"inputs", in_json}, {"xor_arity", raw ? 1 : c.xor_arity}};
    }
    const auto result = nist::run_battery(seqs, c.nist_alpha);
    const std::string table = nist_table(result);
    art.write("nist.txt", table);
    art.write_json("nist.json", {{"source", source}, {"battery", nist_json(result)}});
    std::string csv = io::csv_preamble(c.seed) + "test,p_value,passed,total,result\n";
    for (const auto& row : result.rows)
        csv += fmt("%s,%.6f,%zu,%zu,%s\n", row.name.c_str(), row.uniformity_p, row.passed, row.total,
                   row.skipped ? "SKIPPED" : (row.pass ? "YES" : "NO"));
    art.write("nist.csv", csv);
    art.write_manifest();
    std::fputs(table.c_str(), stdout);
    return kExitOk;
}

// ---------------------------------------------------------------- optimize

std::string interval_text(const Interval& iv) {
    return fmt("%s%.3f, %.3f%s", iv.lo_closed ? "[" : "(", iv.lo, iv.hi, iv.hi_closed ? "]" : ")");
}

json interval_json(const Interval& iv) {
    return {{"lo", iv.lo}, {"hi", iv.hi}, {"lo_closed", iv.lo_closed}, {"hi_closed", iv.hi_closed}};
}

/// Every V1 run (grid step 1e-4) on which F lands in the window for all models at once.
std::vector<VoltageWindow> in_window_runs(const std::vector<TangentModel>& models, double beta, bool single,
                                          const TargetWindow& window, double lo, double hi) {
    constexpr double step = 1e-4;
    std::vector<VoltageWindow> runs;
    bool open = false;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step));
    for (std::size_t i = 0; i <= n; ++i) {
        const double v = lo + static_cast<double>(i) * step;
        const bool in = std::all_of(models.begin(), models.end(), [&](const TangentModel& m) {
            return window.contains(f_clamped(m, v, beta, single));
        });
        if (in && !open) runs.push_back({v, v});
        if (in) runs.back().hi = v;
        open = in;
    }
    return runs;
}

std::string runs_text(const std::vector<VoltageWindow>& runs) {
    if (runs.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < runs.size(); ++i) out += fmt("%s[%.4f, %.4f]", i ? " U " : "", runs[i].lo, runs[i].hi);
    return out;
}

json runs_json(const std::vector<VoltageWindow>& runs) {
    json out = json::array();
    for (const auto& r : runs) out.push_back({{"lo", r.lo}, {"hi", r.hi}});
    return out;
}

int cmd_optimize(const RunConfig& c, std::size_t fit_cells) {
    Artifacts art(c, "optimize");
    const auto pop = population(c, std::min(c.n_cells, fit_cells));
    const auto grid = linspace_step(std::max(0.05, c.v1_min - 0.4), c.v1_max + 0.4, 0.005);
    auto fitted = [&](double t) { return fit_tangent(population_wsr_curve(pop, c.seed, grid, t, c.dual.width)); };

    const TangentModel model = c.fit_k ? fitted(kReferenceTemperature)
                                       : TangentModel::through_center(c.tangent_k, c.tangent_v_center,
                                                                      c.validity_half_width);
    const auto sol = solve_beta(model, c.window, c.beta_target);

    std::string kept_text;
    for (std::size_t i = 0; i < sol.kept.size(); ++i) kept_text += (i ? " U " : "") + interval_text(sol.kept[i]);
    std::printf("tangent model: k %.3f 1/V, center %.3f V\n", model.k, model.v_center);
    if (sol.feasible)
        std::printf("β ∈ %s, optimal %.3f V\n", kept_text.c_str(), sol.optimal_beta);
    else
        std::printf("β set empty for window (%.3f, %.3f]\n", c.window.lower, c.window.upper);
    for (const auto& d : sol.discarded)
        std::printf("  discarded branch %s (vertex outside the tangent validity range)\n", interval_text(d).c_str());

    json kept = json::array(), discarded = json::array();
    for (const auto& k : sol.kept) kept.push_back(interval_json(k));
    for (const auto& d : sol.discarded) discarded.push_back(interval_json(d));
    json out{{"model", {{"k", model.k}, {"b", model.b}, {"v_center", model.v_center}, {"validity", interval_json(model.validity)}}},
             {"window", {c.window.lower, c.window.upper}},
             {"target", c.beta_target == BetaTarget::Upper ? "upper" : "center"},
             {"beta", {{"feasible", sol.feasible}, {"kept", kept}, {"discarded", discarded}, {"optimal", sol.optimal_beta}}}};

    // Common-window condition across temperatures, from fitted per-temperature tangents.
    std::vector<TangentModel> models;
    json per_t = json::array();
    const double beta_eval = c.dual.beta;
    for (double t : c.temperatures) {
        models.push_back(fitted(t));
        const auto& m = models.back();
        const auto ws = in_window_runs({m}, 0.0, true, c.window, grid.front(), grid.back());
        const auto wd = in_window_runs({m}, beta_eval, false, c.window, grid.front(), grid.back());
        per_t.push_back({{"temperature", t},
                         {"k", m.k},
                         {"v_center", m.v_center},
                         {"single_window", runs_json(ws)},
                         {"dual_window", runs_json(wd)}});
        std::printf("  T %6.1f C: k %.3f, center %.4f V, single %s, dual %s\n", t, m.k, m.v_center,
                    runs_text(ws).c_str(), runs_text(wd).c_str());
    }
    const auto common_single = in_window_runs(models, 0.0, true, c.window, grid.front(), grid.back());
    const auto common_dual = in_window_runs(models, beta_eval, false, c.window, grid.front(), grid.back());
    auto verdict = [](const std::vector<VoltageWindow>& w) {
        return w.empty() ? std::string("none (infeasible)") : runs_text(w) + " V (feasible)";
    };
    std::printf("common window, single pulse: %s\n", verdict(common_single).c_str());
    std::printf("common window, dual pulse (β = %.3f V): %s\n", beta_eval, verdict(common_dual).c_str());
    out["temperatures"] = per_t;
    out["common_window"] = {{"single", runs_json(common_single)},
                            {"dual", runs_json(common_dual)},
                            {"dual_beta", beta_eval}};

    if (models.size() >= 2) {
        const auto betas = linspace_step(0.0, c.beta_max, c.beta_step);
        const auto v1s = linspace_step(c.v1_min, c.v1_max, c.v1_step);
        const auto pd = phase_diagram(models, c.temperatures, betas, v1s, c.window, c.dual.beta, c.dual.v1);
        for (std::size_t t = 0; t < c.temperatures.size(); ++t) {
            std::string csv = io::csv_preamble(c.seed) + "beta,v1,feasible\n";
            for (std::size_t ib = 0; ib < betas.size(); ++ib)
                for (std::size_t iv = 0; iv < v1s.size(); ++iv)
                    csv += fmt("%.4f,%.4f,%d\n", betas[ib], v1s[iv], pd.at(t, ib, iv) ? 1 : 0);
            art.write(fmt("phase_%gC.csv", c.temperatures[t]), csv);
        }
        std::string csv = io::csv_preamble(c.seed) + "beta,v1,overlap\n";
        for (std::size_t ib = 0; ib < betas.size(); ++ib)
            for (std::size_t iv = 0; iv < v1s.size(); ++iv)
                csv += fmt("%.4f,%.4f,%d\n", betas[ib], v1s[iv], pd.overlap_at(ib, iv) ? 1 : 0);
        art.write("phase_overlap.csv", csv);
        out["phase_diagram"] = {{"overlap_points", pd.overlap_count},
                                {"grid_points", pd.overlap.size()},
                                {"reference", {{"beta", c.dual.beta}, {"v1", c.dual.v1}}},
                                {"reference_inside", pd.reference_inside}};
        std::printf("phase diagram: %zu of %zu points feasible at every temperature; (β %.3f, V1 %.3f) %s\n",
                    pd.overlap_count, pd.overlap.size(), c.dual.beta, c.dual.v1,
                    pd.reference_inside ? "inside" : "outside");
    }
    art.write_json("optimize.json", out);
    art.write_manifest();
    if (!sol.feasible) throw Infeasible("no β satisfies the target window");
    if ((c.mode == WriteMode::Single ? common_single : common_dual).empty())
        throw Infeasible("no V1 keeps the configured write mode inside the window at every temperature");
    return kExitOk;
}

// ---------------------------------------------------------------- shmoo

std::optional<double> crossing(const std::vector<double>& v, const std::vector<double>& w, double level = 0.5) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (w[i - 1] < level && w[i] >= level) return v[i - 1] + (level - w[i - 1]) * (v[i] - v[i - 1]) / (w[i] - w[i - 1]);
    return std::nullopt;
}

int cmd_shmoo(RunConfig c, bool no_compensation) {
    if (no_compensation) {
        c.device.ron_tc = 0;
        c.device.refresh_vc0();
    }
    Artifacts art(c, "shmoo");
    const auto pop = population(c, c.n_cells);
    const auto volts = linspace_step(c.shmoo_v_min, c.shmoo_v_max, c.shmoo_v_step);
    json grids = json::array();
    std::vector<std::vector<std::optional<double>>> contour;
    for (double t : c.temperatures) {
        const auto g = write_shmoo(pop, c.seed, volts, c.shmoo_widths, t, c.pulse_width_law);
        std::string csv = io::csv_preamble(c.seed) + "width_ns,voltage,wsr\n";
        json cross = json::array();
        contour.emplace_back();
        for (std::size_t w = 0; w < g.widths.size(); ++w) {
            for (std::size_t v = 0; v < g.voltages.size(); ++v)
                csv += fmt("%g,%.4f,%.6f\n", g.widths[w] * 1e9, g.voltages[v], g.wsr[w][v]);
            const auto x = crossing(g.voltages, g.wsr[w]);
            contour.back().push_back(x);
            cross.push_back({{"width_ns", g.widths[w] * 1e9}, {"v50", x ? json(*x) : json(nullptr)}});
        }
        art.write(fmt("shmoo_%gC.csv", t), csv);
        grids.push_back({{"temperature", t}, {"file", fmt("shmoo_%gC.csv", t)}, {"wsr50_contour", cross}});
    }
    // Direction of the 50 % contour shift between consecutive temperatures, per width.
    bool monotone = true;
    std::vector<double> order(c.temperatures);
    for (std::size_t w = 0; w < c.shmoo_widths.size() && c.temperatures.size() >= 2; ++w) {
        int direction = 0;
        for (std::size_t t = 1; t < c.temperatures.size(); ++t) {
            if (!contour[t][w] || !contour[t - 1][w]) {
                monotone = false;
                continue;
            }
            const double d = (*contour[t][w] - *contour[t - 1][w]) * (c.temperatures[t] - c.temperatures[t - 1]);
            const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
            if (s == 0 || (direction != 0 && s != direction)) monotone = false;
            direction = s;
        }
    }
    art.write_json("shmoo.json", {{"compensation", !no_compensation},
                                  {"voltages", {c.shmoo_v_min, c.shmoo_v_max, c.shmoo_v_step}},
                                  {"widths_ns", [&] {
                                       json w = json::array();
                                       for (double x : c.shmoo_widths) w.push_back(x * 1e9);
                                       return w;
                                   }()},
                                  {"grids", grids},
                                  {"contour_monotone_in_temperature", monotone}});
    art.write_manifest();
    std::printf("shmoo: %zu temperatures x %zu widths x %zu voltages, %zu cells%s\n", c.temperatures.size(),
                c.shmoo_widths.size(), volts.size(), c.n_cells, no_compensation ? ", compensation off" : "");
    for (std::size_t t = 0; t < c.temperatures.size(); ++t) {
        std::printf("  T %6.1f C  V50:", c.temperatures[t]);
        for (std::size_t w = 0; w < c.shmoo_widths.size(); ++w)
            std::printf("  %gns %s", c.shmoo_widths[w] * 1e9, contour[t][w] ? fmt("%.3f", *contour[t][w]).c_str() : "-");
        std::printf("\n");
    }
    std::printf("  50%% contour monotone in temperature: %s\n", monotone ? "yes" : "no");
    return kExitOk;
}

// ---------------------------------------------------------------- export-attack

int cmd_export_attack(const RunConfig& c, const std::vector<std::string>& inputs, bool raw) {
    Artifacts art(c, "export-attack");
    for (const auto& p : expand_inputs(inputs, c)) {
        const auto in = load_input(p);
        const ResponseSet rs = (in.packed.flags & io::kFlagResponseSet) ? io::to_response_set(in.packed)
                               : raw ? segment(in.packed.bits, c.response_width)
                                     : make_responses(in.packed.bits, c.xor_arity, c.response_width);
        const BitArray bits = rs.concatenated();
        std::string csv = io::csv_preamble(in.packed.seed) + "address,bit\n";
        csv.reserve(csv.size() + bits.size() * 9);
        for (std::size_t i = 0; i < bits.size(); ++i) csv += fmt("%zu,%d\n", i, bits.get(i) ? 1 : 0);
        const std::string stem = "attack_" + p.stem().string() + (raw ? "_raw" : "");
        art.write(stem + ".csv", csv);
        art.write_json(stem + ".json", {{"dataset", stem + ".csv"},
                                        {"crc32", io::crc32(csv)},
                                        {"labeled_bits", bits.size()},
                                        {"responses", rs.size()},
                                        {"response_width", rs.width},
                                        {"xor_arity", rs.xor_arity},
                                        {"hamming_weight", hamming_weight(bits)},
                                        {"provenance", {{"source", input_record(in)}, {"tool", "sotpuf"}}}});
        std::printf("export-attack: %s -> %s.csv (%zu responses x %zu bits = %zu labeled bits, XOR %zu)\n",
                    p.string().c_str(), stem.c_str(), rs.size(), rs.width, bits.size(), rs.xor_arity);
    }
    art.write_manifest();
    return kExitOk;
}

// ---------------------------------------------------------------- report

std::optional<json> read_artifact(const fs::path& p) {
    if (!fs::exists(p)) return std::nullopt;
    json j;
    try {
        j = json::parse(io::read_file(p));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(p.string() + ": " + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"] != io::kSchemaVersion)
        throw std::runtime_error(p.string() + ": schema version mismatch (expected " +
                                 std::to_string(io::kSchemaVersion) + ")");
    return j;
}

int cmd_report(const RunConfig& c) {
    Artifacts art(c, "report");
    const fs::path dir = c.output_dir;
    json rep;
    std::ostringstream txt;
    txt << "sotpuf report for " << dir.string() << "\n\n";
    json manifests = json::array();
    if (fs::is_directory(dir))
        for (const auto& e : fs::directory_iterator(dir)) {
            const auto name = e.path().filename().string();
            if (name.rfind("manifest_", 0) == 0 && name != "manifest_report.json")
                if (auto m = read_artifact(e.path()))
                    manifests.push_back({{"file", name}, {"command", (*m)["command"]}, {"seed", (*m)["seed"]}});
        }
    if (manifests.empty()) throw std::runtime_error("no manifests in " + dir.string());
    rep["manifests"] = manifests;

    auto metrics = read_artifact(dir / "metrics.json");
    if (auto attack = read_artifact(dir / "attack_report.json"); attack && metrics)
        (*metrics)["attack"] = attack->contains("attack") ? (*attack)["attack"] : *attack;
    if (metrics) {
        const auto& u = (*metrics)["uniformity"];
        txt << fmt("uniformity: mu %.4f, sigma %.4f (ideal %.4f)\n", u["mu"].get<double>(), u["sigma"].get<double>(),
                   u["ideal_sigma"].get<double>());
        if (!(*metrics)["inter_reconfig_hd"].is_null())
            txt << fmt("inter-reconfiguration HD: %.4f\n", (*metrics)["inter_reconfig_hd"]["mean"].get<double>());
        if (!(*metrics)["correlation"].is_null())
            txt << fmt("correlation: max |r| %.4f vs bound %.4f\n",
                       (*metrics)["correlation"]["max_abs_offdiag"].get<double>(),
                       (*metrics)["correlation"]["bound"].get<double>());
        txt << fmt("ACF in bounds: %.0f%%\n", 100 * (*metrics)["acf"]["in_bounds_fraction"].get<double>());
        if (!(*metrics)["attack"].is_null()) txt << "attack: " << (*metrics)["attack"].dump() << "\n";
        rep["metrics"] = *metrics;
    }
    if (auto n = read_artifact(dir / "nist.json")) {
        if (metrics) rep["metrics"]["nist"] = (*n)["battery"];
        rep["nist"] = (*n)["battery"];
        txt << fmt("NIST battery: %s\n", (*n)["battery"]["all_pass"].get<bool>() ? "all rows pass" : "some rows fail");
    }
    if (auto o = read_artifact(dir / "optimize.json")) {
        rep["optimize"] = *o;
        const auto& b = (*o)["beta"];
        txt << (b["feasible"].get<bool>() ? fmt("optimal beta: %.3f V\n", b["optimal"].get<double>())
                                          : std::string("beta set empty\n"));
        txt << "common window, dual pulse: " << ((*o)["common_window"]["dual"].empty() ? "infeasible" : "feasible") << "\n";
    }
    if (auto s = read_artifact(dir / "shmoo.json")) {
        rep["shmoo"] = *s;
        txt << fmt("shmoo 50%% contour monotone in temperature: %s\n",
                   (*s)["contour_monotone_in_temperature"].get<bool>() ? "yes" : "no");
    }
    if (auto p = read_artifact(dir / "psw_map.json")) {
        rep["psw_map"] = *p;
        txt << fmt("Psw map: mu %.4f, sigma %.4f over %zu trials\n", (*p)["mu"].get<double>(),
                   (*p)["sigma"].get<double>(), (*p)["trials"].get<std::size_t>());
    }
    art.write_json("report.json", rep);
    art.write("report.txt", txt.str());
    art.write_manifest();
    std::fputs(txt.str().c_str(), stdout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator and analysis toolkit for a reconfigurable SOT-MRAM PUF"};
    app.fallthrough();
    app.require_subcommand(0, 1);
    Globals g;
    bool print_defaults = false;
    app.add_option("--config", g.config_path, "JSON config file (or a manifest to replay)");
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--temperature", g.temperature, "Operating temperature in C");
    app.add_option("--beta", g.beta, "Dual-pulse voltage offset in V");
    app.add_option("--xor-arity", g.xor_arity, "Bits folded into each response bit");
    app.add_flag("--print-defaults", print_defaults, "Print the default config and exit");

    std::vector<std::string> inputs;
    bool calibrated = false, reference = false, raw = false, no_comp = false;
    std::size_t max_lag = 100, fit_cells = 16384;

    auto* reconf = app.add_subcommand("reconfigure", "Run N reconfigurations; write bitmaps and the Psw map");
    reconf->add_flag("--calibrated", calibrated, "Draw from a calibrated probability map instead of the device model");
    auto* met = app.add_subcommand("metrics", "Uniformity, HD, correlation and ACF of packed bitmaps");
    met->add_option("inputs", inputs, "Packed files or directories (default <out>/bitmaps)");
    met->add_option("--max-lag", max_lag, "Largest ACF lag");
    auto* nis = app.add_subcommand("nist", "SP800-22 battery as a pass-proportion table");
    nis->add_option("inputs", inputs, "Packed files or directories (default <out>/bitmaps)");
    nis->add_flag("--reference", reference, "Test the reference generator instead of inputs");
    nis->add_flag("--raw", raw, "Skip XOR folding of bitmap inputs");
    auto* opt = app.add_subcommand("optimize", "Solve for beta and check the common window across temperatures");
    opt->add_option("--fit-cells", fit_cells, "Cells simulated for per-temperature tangent fits");
    auto* shm = app.add_subcommand("shmoo", "WSR grid over voltage and pulse width per temperature");
    shm->add_flag("--no-compensation", no_comp, "Zero the on-resistance temperature coefficient");
    auto* exp = app.add_subcommand("export-attack", "Address/bit CSV datasets for the attack harness");
    exp->add_option("inputs", inputs, "Packed files or directories (default <out>/bitmaps)");
    exp->add_flag("--raw", raw, "Export raw bits without XOR folding");
    auto* rep = app.add_subcommand("report", "Summarize the artifacts in the output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (print_defaults) {
            std::cout << config_to_json(RunConfig{}) << "\n";
            return kExitOk;
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return kExitConfig;
        }
        const RunConfig c = resolve(g);
        if (*reconf) return cmd_reconfigure(c, calibrated);
        if (*met) return cmd_metrics(c, inputs, max_lag);
        if (*nis) return cmd_nist(c, inputs, reference, raw);
        if (*opt) return cmd_optimize(c, fit_cells);
        if (*shm) return cmd_shmoo(c, no_comp);
        if (*exp) return cmd_export_attack(c, inputs, raw);
        if (*rep) return cmd_report(c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitOther;
}
