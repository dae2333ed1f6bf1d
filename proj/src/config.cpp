#include "sotpuf/config.hpp"

#include <json.hpp>
#include <set>

#include "sotpuf/metrics.hpp"

namespace sotpuf {

using nlohmann::json;

ConfigError::ConfigError(std::string field_, const std::string& message)
    : std::runtime_error(field_ + ": " + message), field(std::move(field_)) {}

namespace {

const char* type_label(const json& j) { return j.type_name(); }

// Reads fields from one JSON object, remembering which keys were consumed so
// leftovers can be reported as unknown.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    [[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(field(key), std::string("expected a number, got ") + type_label(*v));
            out = v->get<double>();
        }
    }

    template <typename Int>
    void integer(const std::string& key, Int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0))
                throw ConfigError(field(key), std::string("expected a non-negative integer, got ") + v->dump());
            out = static_cast<Int>(v->get<std::uint64_t>());
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(field(key), std::string("expected true/false, got ") + type_label(*v));
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(field(key), std::string("expected a string, got ") + type_label(*v));
            out = v->get<std::string>();
        }
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) throw ConfigError(field(key), std::string("expected an array, got ") + type_label(*v));
            std::vector<double> values;
            for (std::size_t i = 0; i < v->size(); ++i) {
                if (!(*v)[i].is_number())
                    throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a number");
                values.push_back((*v)[i].get<double>());
            }
            out = std::move(values);
        }
    }

    std::optional<Section> section(const std::string& key) {
        const json* v = find(key);
        if (!v || v->is_null()) return std::nullopt;
        return Section(*v, field(key));
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.contains(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Fn>
void checked(const std::string& field, Fn fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(field, e.what());
    }
}

Polarity polarity_field(Section& s, const std::string& key, Polarity fallback) {
    std::string text = polarity_name(fallback);
    s.string(key, text);
    Polarity p = fallback;
    checked(s.field(key), [&] { p = parse_polarity(text); });
    return p;
}

}  // namespace

void RunConfig::validate() const {
    if (n_cells == 0) throw ConfigError("array.n_cells", "must be > 0");
    checked("array.cv", [&] { VariationConfig{cv, seed, n_cells}.validate(); });
    checked("device", [&] { device.validate(); });
    if (!(pulse_width_law.coeff >= 0)) throw ConfigError("device.pulse_width_coeff", "must be >= 0");
    if (!(pulse_width_law.reference > 0)) throw ConfigError("device.pulse_width_reference", "must be > 0");
    if (temperatures.empty()) throw ConfigError("temperatures", "must list at least one temperature");
    for (std::size_t i = 0; i < temperatures.size(); ++i)
        checked("temperatures[" + std::to_string(i) + "]", [&] { check_temperature(temperatures[i]); });
    checked("temperature", [&] { check_temperature(temperature); });
    checked("write", [&] { dual.validate(); });
    if (!(single_voltage >= 0)) throw ConfigError("write.single_voltage", "must be >= 0");
    if (reconfigurations == 0) throw ConfigError("reconfigurations", "must be > 0");
    if (xor_arity == 0) throw ConfigError("xor_arity", "must be >= 1");
    if (response_width == 0) throw ConfigError("response_width", "must be > 0");
    checked("read", [&] { read_model.validate(); });
    if (tmv_reads % 2 == 0) throw ConfigError("read.tmv_reads", "must be odd");
    if (calibrated) {
        if (!(calibrated->mu > 0 && calibrated->mu < 1)) throw ConfigError("calibrated.mu", "must lie in (0, 1)");
        if (!(calibrated->sigma > 0)) throw ConfigError("calibrated.sigma", "must be > 0");
        checked("calibrated", [&] { (void)calibrate_truncated_normal(calibrated->mu, calibrated->sigma); });
    }
    checked("optimize.window", [&] { window.validate(); });
    if (!(tangent_k > 0)) throw ConfigError("optimize.k", "must be > 0");
    if (validity_half_width && !(*validity_half_width > 0))
        throw ConfigError("optimize.validity_half_width", "must be > 0");
    if (!(beta_step > 0)) throw ConfigError("optimize.beta_step", "must be > 0");
    if (!(beta_max > 0)) throw ConfigError("optimize.beta_max", "must be > 0");
    if (!(v1_step > 0)) throw ConfigError("optimize.v1_step", "must be > 0");
    if (!(v1_max > v1_min)) throw ConfigError("optimize.v1_max", "must exceed optimize.v1_min");
    if (!(shmoo_v_step > 0)) throw ConfigError("shmoo.v_step", "must be > 0");
    if (!(shmoo_v_max > shmoo_v_min)) throw ConfigError("shmoo.v_max", "must exceed shmoo.v_min");
    if (shmoo_widths.empty()) throw ConfigError("shmoo.widths", "must list at least one width");
    for (std::size_t i = 0; i < shmoo_widths.size(); ++i)
        if (!(shmoo_widths[i] > 0)) throw ConfigError("shmoo.widths[" + std::to_string(i) + "]", "must be > 0");
    if (nist_sequences == 0) throw ConfigError("nist.sequences", "must be > 0");
    if (nist_length == 0) throw ConfigError("nist.length", "must be > 0");
    if (!(nist_alpha > 0 && nist_alpha < 1)) throw ConfigError("nist.alpha", "must lie in (0, 1)");
}

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    if (doc.is_object() && doc.contains("config") && doc.contains("schema_version")) {
        json inner = doc["config"];
        doc = std::move(inner);
    }

    RunConfig c;
    Section root(doc, "");
    root.integer("seed", c.seed);
    root.string("output_dir", c.output_dir);
    if (auto s = root.section("array")) {
        s->integer("n_cells", c.n_cells);
        s->number("cv", c.cv);
        s->finish();
    }
    if (auto s = root.section("device")) {
        s->number("steepness", c.device.steepness);
        s->number("track_resistance", c.device.track_resistance);
        s->number("ron_ref", c.device.ron_ref);
        s->number("ron_tc", c.device.ron_tc);
        s->number("ic_ref", c.device.ic_ref);
        s->number("ic_tc", c.device.ic_tc);
        s->number("pulse_width_coeff", c.pulse_width_law.coeff);
        s->number("pulse_width_reference", c.pulse_width_law.reference);
        s->finish();
    }
    c.device.refresh_vc0();
    root.numbers("temperatures", c.temperatures);
    root.number("temperature", c.temperature);
    if (auto s = root.section("write")) {
        std::string mode = c.mode == WriteMode::Dual ? "dual" : "single";
        s->string("mode", mode);
        if (mode == "dual")
            c.mode = WriteMode::Dual;
        else if (mode == "single")
            c.mode = WriteMode::Single;
        else
            throw ConfigError(s->field("mode"), "expected \"dual\" or \"single\", got \"" + mode + "\"");
        s->number("v1", c.dual.v1);
        s->number("beta", c.dual.beta);
        c.dual.first_polarity = polarity_field(*s, "first_polarity", c.dual.first_polarity);
        s->number("pulse_width", c.dual.width);
        s->number("single_voltage", c.single_voltage);
        c.single_polarity = polarity_field(*s, "single_polarity", c.single_polarity);
        s->finish();
    }
    c.dual.temperature = c.temperature;
    root.integer("reconfigurations", c.reconfigurations);
    root.integer("xor_arity", c.xor_arity);
    root.integer("response_width", c.response_width);
    if (auto s = root.section("read")) {
        s->number("flip_prob_raw", c.read_model.flip_prob_raw);
        s->number("flip_prob_swb", c.read_model.flip_prob_swb);
        s->number("temp_slope", c.read_model.temp_slope);
        s->number("vdd_slope", c.read_model.vdd_slope);
        s->number("nominal_vdd", c.read_model.nominal_vdd);
        s->integer("tmv_reads", c.tmv_reads);
        s->finish();
    }
    if (auto s = root.section("calibrated")) {
        CalibratedMap m;
        s->number("mu", m.mu);
        s->number("sigma", m.sigma);
        s->finish();
        c.calibrated = m;
    }
    if (auto s = root.section("optimize")) {
        std::vector<double> window{c.window.lower, c.window.upper};
        s->numbers("window", window);
        if (window.size() != 2) throw ConfigError(s->field("window"), "expected [lower, upper]");
        c.window = {window[0], window[1]};
        s->number("k", c.tangent_k);
        s->number("v_center", c.tangent_v_center);
        if (const json* v = s->find("validity_half_width"); v && !v->is_null()) {
            if (!v->is_number()) throw ConfigError(s->field("validity_half_width"), "expected a number or null");
            c.validity_half_width = v->get<double>();
        }
        s->boolean("fit_k", c.fit_k);
        std::string target = c.beta_target == BetaTarget::Upper ? "upper" : "center";
        s->string("target", target);
        if (target == "upper")
            c.beta_target = BetaTarget::Upper;
        else if (target == "center")
            c.beta_target = BetaTarget::Center;
        else
            throw ConfigError(s->field("target"), "expected \"upper\" or \"center\", got \"" + target + "\"");
        s->number("beta_step", c.beta_step);
        s->number("beta_max", c.beta_max);
        s->number("v1_min", c.v1_min);
        s->number("v1_max", c.v1_max);
        s->number("v1_step", c.v1_step);
        s->finish();
    }
    if (auto s = root.section("shmoo")) {
        s->number("v_min", c.shmoo_v_min);
        s->number("v_max", c.shmoo_v_max);
        s->number("v_step", c.shmoo_v_step);
        s->numbers("widths", c.shmoo_widths);
        s->finish();
    }
    if (auto s = root.section("nist")) {
        s->integer("sequences", c.nist_sequences);
        s->integer("length", c.nist_length);
        s->number("alpha", c.nist_alpha);
        s->finish();
    }
    root.finish();
    c.validate();
    return c;
}

std::string config_to_json(const RunConfig& c, int indent) {
    json j;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["array"] = {{"n_cells", c.n_cells}, {"cv", c.cv}};
    j["device"] = {{"steepness", c.device.steepness},
                   {"track_resistance", c.device.track_resistance},
                   {"ron_ref", c.device.ron_ref},
                   {"ron_tc", c.device.ron_tc},
                   {"ic_ref", c.device.ic_ref},
                   {"ic_tc", c.device.ic_tc},
                   {"pulse_width_coeff", c.pulse_width_law.coeff},
                   {"pulse_width_reference", c.pulse_width_law.reference}};
    j["temperatures"] = c.temperatures;
    j["temperature"] = c.temperature;
    j["write"] = {{"mode", c.mode == WriteMode::Dual ? "dual" : "single"},
                  {"v1", c.dual.v1},
                  {"beta", c.dual.beta},
                  {"first_polarity", polarity_name(c.dual.first_polarity)},
                  {"pulse_width", c.dual.width},
                  {"single_voltage", c.single_voltage},
                  {"single_polarity", polarity_name(c.single_polarity)}};
    j["reconfigurations"] = c.reconfigurations;
    j["xor_arity"] = c.xor_arity;
    j["response_width"] = c.response_width;
    j["read"] = {{"flip_prob_raw", c.read_model.flip_prob_raw},
                 {"flip_prob_swb", c.read_model.flip_prob_swb},
                 {"temp_slope", c.read_model.temp_slope},
                 {"vdd_slope", c.read_model.vdd_slope},
                 {"nominal_vdd", c.read_model.nominal_vdd},
                 {"tmv_reads", c.tmv_reads}};
    j["calibrated"] = c.calibrated ? json{{"mu", c.calibrated->mu}, {"sigma", c.calibrated->sigma}} : json(nullptr);
    j["optimize"] = {{"window", {c.window.lower, c.window.upper}},
                     {"k", c.tangent_k},
                     {"v_center", c.tangent_v_center},
                     {"validity_half_width", c.validity_half_width ? json(*c.validity_half_width) : json(nullptr)},
                     {"fit_k", c.fit_k},
                     {"target", c.beta_target == BetaTarget::Upper ? "upper" : "center"},
                     {"beta_step", c.beta_step},
                     {"beta_max", c.beta_max},
                     {"v1_min", c.v1_min},
                     {"v1_max", c.v1_max},
                     {"v1_step", c.v1_step}};
    j["shmoo"] = {{"v_min", c.shmoo_v_min}, {"v_max", c.shmoo_v_max}, {"v_step", c.shmoo_v_step}, {"widths", c.shmoo_widths}};
    j["nist"] = {{"sequences", c.nist_sequences}, {"length", c.nist_length}, {"alpha", c.nist_alpha}};
    return j.dump(indent);
}

}  // namespace sotpuf
