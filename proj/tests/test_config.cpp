#include <doctest.h>

#include <stdexcept>

#include "sotpuf/config.hpp"

using namespace sotpuf;

namespace {

std::string field_of(const std::string& json) {
    try {
        (void)parse_config(json);
    } catch (const ConfigError& e) {
        return e.field;
    }
    return "<no error>";
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("empty object gives defaults") {
        const auto c = parse_config("{}");
        CHECK(c.seed == 1);
        CHECK(c.n_cells == 131072);
        CHECK(c.xor_arity == 7);
        CHECK(c.dual.v1 == doctest::Approx(1.8));
        CHECK_FALSE(c.calibrated);
    }

    TEST_CASE("serialized config parses back to the same document") {
        RunConfig c;
        c.seed = 77;
        c.calibrated = CalibratedMap{0.6, 0.1};
        c.mode = WriteMode::Single;
        c.temperatures = {0, 50};
        const std::string j = config_to_json(c);
        CHECK(config_to_json(parse_config(j)) == j);
    }

    TEST_CASE("values are applied") {
        const auto c = parse_config(R"({"seed": 9, "array": {"cv": 0.1}, "write": {"beta": 0.12, "mode": "single"},
                                        "optimize": {"window": [0.45, 0.55], "target": "center"}})");
        CHECK(c.seed == 9);
        CHECK(c.cv == doctest::Approx(0.1));
        CHECK(c.dual.beta == doctest::Approx(0.12));
        CHECK(c.mode == WriteMode::Single);
        CHECK(c.window.lower == doctest::Approx(0.45));
        CHECK(c.beta_target == BetaTarget::Center);
    }

    TEST_CASE("errors name the offending field") {
        CHECK(field_of(R"({"sede": 1})") == "sede");
        CHECK(field_of(R"({"array": {"cells": 1}})") == "array.cells");
        CHECK(field_of(R"({"array": {"cv": "big"}})") == "array.cv");
        CHECK(field_of(R"({"seed": -3})") == "seed");
        CHECK(field_of(R"({"write": {"mode": "triple"}})") == "write.mode");
        CHECK(field_of(R"({"temperatures": [25, "hot"]})") == "temperatures[1]");
        CHECK(field_of(R"({"read": {"tmv_reads": 4}})") == "read.tmv_reads");
        CHECK(field_of(R"({"optimize": {"window": [0.6, 0.4]}})").rfind("optimize.window", 0) == 0);
        CHECK(field_of("{not json") == "<root>");
        CHECK(field_of("[]") == "<root>");
    }

    TEST_CASE("manifest is accepted as a config") {
        const auto c = parse_config(R"({"schema_version": 1, "config": {"seed": 5}, "outputs": []})");
        CHECK(c.seed == 5);
    }
}
