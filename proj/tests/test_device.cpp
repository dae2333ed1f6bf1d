#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "sotpuf/device.hpp"

using namespace sotpuf;

namespace {

CellParams simple_cell() {
    CellParams p;
    p.ic_ref = 100e-6;
    p.ic_tc = 0;
    p.track_resistance = 700;
    p.ron_ref = 300;
    p.ron_tc = 0;
    p.refresh_vc0();
    return p;
}

}  // namespace

TEST_SUITE("device") {
    TEST_CASE("critical current is linear in temperature") {
        CellParams p = simple_cell();
        CHECK(critical_current(p, 125) == doctest::Approx(100e-6));
        p.ic_tc = -0.1e-6;
        CHECK(critical_current(p, 125) == doctest::Approx(90e-6));
        CHECK(critical_current(p, -40) > critical_current(p, 25));
        CHECK(critical_current(p, 25) > critical_current(p, 125));
    }

    TEST_CASE("write path resistance") {
        CellParams p = simple_cell();
        p.ron_tc = 0.5;
        CHECK(write_path_resistance(p, 125) == doctest::Approx(1050));
        CHECK(write_path_resistance(p, 125) >= write_path_resistance(p, 25));
        CHECK(write_path_resistance(p, 25) >= write_path_resistance(p, -40));
        p.ron_tc = 0;
        CHECK(write_path_resistance(p, -40) == write_path_resistance(p, 125));
    }

    TEST_CASE("temperatures outside the operating range are rejected") {
        const CellParams p;
        CHECK_THROWS_AS((void)critical_current(p, -41), std::domain_error);
        CHECK_THROWS_AS((void)write_path_resistance(p, 126), std::domain_error);
        CHECK_NOTHROW((void)critical_voltage(p, 125));
    }

    TEST_CASE("critical voltage is the product of current and resistance") {
        const CellParams p;
        for (double t : {-40.0, 0.0, 25.0, 80.0, 125.0})
            CHECK(critical_voltage(p, t) == doctest::Approx(critical_current(p, t) * write_path_resistance(p, t)));
        CellParams flat = simple_cell();
        CHECK(critical_voltage(flat, -40) == doctest::Approx(critical_voltage(flat, 125)));
    }

    TEST_CASE("compensating on-resistance slope shrinks the voltage spread") {
        CellParams p = simple_cell();
        p.ic_tc = -0.1e-6;
        // d(I*R)/dT = 0 at 25 °C: ic_tc * R + ic_ref * ron_tc = 0
        p.ron_tc = -p.ic_tc * (p.track_resistance + p.ron_ref) / p.ic_ref;
        const double v_spread = std::abs(critical_voltage(p, 125) - critical_voltage(p, -40)) / critical_voltage(p, 25);
        const double i_spread = std::abs(critical_current(p, 125) - critical_current(p, -40)) / critical_current(p, 25);
        CHECK(v_spread < i_spread);
    }

    TEST_CASE("default calibration: Vc spread at most a quarter of the Ic spread") {
        const CellParams p;
        double vmin = 1e9, vmax = 0, imin = 1e9, imax = 0;
        for (double t = -40; t <= 125; t += 1) {
            vmin = std::min(vmin, critical_voltage(p, t));
            vmax = std::max(vmax, critical_voltage(p, t));
            imin = std::min(imin, critical_current(p, t));
            imax = std::max(imax, critical_current(p, t));
        }
        CHECK((vmax - vmin) / critical_voltage(p, 25) <= 0.25 * (imax - imin) / critical_current(p, 25));
        CHECK(critical_voltage(p, 25) == doctest::Approx(p.vc0));
        CHECK(p.vc0 == doctest::Approx(1.8));
    }

    TEST_CASE("switching probability") {
        const CellParams p;
        CHECK(psw_single(p, 0, 20e-9, 25) < 1e-6);
        CHECK(psw_single(p, critical_voltage(p, 25), 20e-9, 25) == doctest::Approx(0.5));
        CHECK(psw_single(p, 1.8, 20e-9, 25) == doctest::Approx(0.5));
        CHECK_THROWS_AS((void)psw_single(p, 1.8, 0, 25), std::domain_error);
        CHECK_THROWS_AS((void)psw_single(p, 1.8, -1e-9, 25), std::domain_error);
        // Longer pulses switch at lower voltage.
        CHECK(psw_single(p, 1.8, 50e-9, 25) > psw_single(p, 1.8, 20e-9, 25));
        CHECK(critical_voltage(p, 25, 10e-9) == doctest::Approx(1.8 * (1 + 0.03 * std::log(2.0))));
    }

    TEST_CASE("switching probability is monotone in voltage for random parameters") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0, 1);
        for (int trial = 0; trial < 200; ++trial) {
            CellParams p;
            p.steepness = 1 + 40 * u(rng);
            p.track_resistance = 200 + 1000 * u(rng);
            p.ron_ref = 200 + 1000 * u(rng);
            p.ron_tc = 3 * u(rng);
            p.ic_ref = 0.5e-3 + 2e-3 * u(rng);
            p.ic_tc = -2e-6 * u(rng);
            p.refresh_vc0();
            const double t = -40 + 165 * u(rng);
            double prev = 0;
            for (double v = 0; v <= 4; v += 0.05) {
                const double s = psw_single(p, v, 20e-9, t);
                REQUIRE(s >= prev);
                REQUIRE(s <= 1.0);
                prev = s;
            }
        }
    }

    TEST_CASE("width scaling keeps the transistor and moves Vc only second order") {
        const CellParams base;
        const CellParams wide = scale_width(base, 1.1);
        CHECK(wide.ic_ref == doctest::Approx(base.ic_ref * 1.1));
        CHECK(wide.ic_tc == doctest::Approx(base.ic_tc * 1.1));
        CHECK(wide.track_resistance == doctest::Approx(base.track_resistance / 1.1));
        CHECK(wide.ron_ref == base.ron_ref);
        CHECK(wide.vc0 == doctest::Approx(base.ic_ref * (base.track_resistance + 1.1 * base.ron_ref)));
        const double vc_change = wide.vc0 / base.vc0 - 1;
        CHECK(vc_change > 0);
        CHECK(vc_change < 0.1);
    }

    TEST_CASE("population sampling") {
        const CellParams base;
        const auto flat = sample_population({0.0, 4, 100}, base);
        for (const auto& c : flat) CHECK(c.vc0 == doctest::Approx(base.vc0));

        const auto a = sample_population({0.1, 9, 20000}, base);
        double sum = 0, sq = 0;
        for (const auto& c : a) {
            sum += c.width_factor;
            sq += c.width_factor * c.width_factor;
        }
        const double mean = sum / a.size();
        const double sd = std::sqrt(sq / a.size() - mean * mean);
        CHECK(sd / mean >= 0.09);
        CHECK(sd / mean <= 0.11);

        const auto b = sample_population({0.1, 9, 20000}, base);
        for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].width_factor == b[i].width_factor);
        // Cell i depends only on (seed, i): a shorter population is a prefix.
        const auto prefix = sample_population({0.1, 9, 50}, base);
        for (std::size_t i = 0; i < prefix.size(); ++i) REQUIRE(prefix[i].width_factor == a[i].width_factor);

        const auto wild = sample_population({2.0, 1, 5000}, base);
        for (const auto& c : wild) REQUIRE(c.width_factor >= kMinWidthFactor);
        CHECK_THROWS((void)sample_population({-0.1, 1, 10}, base));
    }
}
