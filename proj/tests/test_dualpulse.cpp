#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "sotpuf/dualpulse.hpp"

using namespace sotpuf;

namespace {

const TargetWindow kWindow{0.4, 0.6};

// Brute-force maximum over V1 of WSR1(V1)·(1 - WSR2(V1 - β)) with unclamped lines.
double numeric_peak(const TangentModel& a, const TangentModel& b, double beta) {
    double best = -1e9;
    for (double v = 0.5; v <= 3.5; v += 1e-5) best = std::max(best, a.line(v) * (1.0 - b.line(v - beta)));
    return best;
}

WsrCurve sampled(double (*f)(double), double lo, double hi, double step) {
    WsrCurve c;
    for (double v = lo; v <= hi + 1e-12; v += step) {
        c.voltages.push_back(v);
        c.wsr.push_back(f(v));
    }
    return c;
}

}  // namespace

TEST_SUITE("dualpulse") {
    TEST_CASE("tangent fit recovers a line") {
        const auto curve = sampled([](double v) { return std::clamp(2.5 * v - 4.0, 0.0, 1.0); }, 1.0, 2.5, 0.01);
        const auto m = fit_tangent(curve);
        CHECK(m.k == doctest::Approx(2.5).epsilon(1e-9));
        CHECK(m.b == doctest::Approx(-4.0).epsilon(1e-9));
        CHECK(m.v_center == doctest::Approx(1.8).epsilon(1e-9));
        CHECK(m.validity.contains(1.8 + 0.19));
        CHECK_FALSE(m.validity.contains(1.8 + 0.21));
    }

    TEST_CASE("tangent of a logistic has slope s/4") {
        const auto curve = sampled([](double v) { return 1.0 / (1.0 + std::exp(-17.3 * (v - 1.8))); }, 1.2, 2.4, 0.005);
        const auto m = fit_tangent(curve);
        CHECK(m.k == doctest::Approx(17.3 / 4).epsilon(0.02));
        CHECK(m.v_center == doctest::Approx(1.8).epsilon(1e-4));
    }

    TEST_CASE("fit fails without a crossing") {
        WsrCurve c{{1.0, 1.1, 1.2}, {0.1, 0.2, 0.3}};
        CHECK_THROWS_AS((void)fit_tangent(c), std::runtime_error);
        CHECK_THROWS_AS((void)TangentModel::through_center(0.0, 1.8), std::domain_error);
    }

    TEST_CASE("event composition") {
        CHECK(compose_independent(0.7459, 0.7183) == doctest::Approx(0.2101).epsilon(1e-3));
        const auto d = compose_dependent(0.8, 0.3);
        CHECK(d.value == doctest::Approx(0.5));
        CHECK_FALSE(d.premise_violated);
        CHECK(compose_dependent(0.3, 0.8).premise_violated);
    }

    TEST_CASE("expanded quadratic equals the product of lines") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> k(0.5, 10), b(-20, 1), v(0, 3), beta(-0.5, 0.5);
        for (int i = 0; i < 200; ++i) {
            TangentModel m;
            m.k = k(rng);
            m.b = b(rng);
            const double v1 = v(rng), be = beta(rng);
            const double direct = (m.k * v1 + m.b) * (1.0 - (m.k * (v1 - be) + m.b));
            CHECK(f_quadratic(m, v1, be) == doctest::Approx(direct).epsilon(1e-9));
        }
    }

    TEST_CASE("vertex of the quadratic is the extreme value") {
        const auto m = TangentModel::through_center(3.733, 1.8);
        for (double beta : {-0.1, 0.0, 0.05, 0.147, 0.3}) {
            INFO(beta);
            CHECK(numeric_peak(m, m, beta) == doctest::Approx(f_extreme(m.k, beta)).epsilon(1e-8));
        }
        const auto grid = linspace_step(1.4, 2.2, 0.001);
        const auto f0 = f_curve(m, grid, 0.0);
        CHECK(*std::max_element(f0.begin(), f0.end()) == doctest::Approx(0.25).epsilon(1e-6));
    }

    TEST_CASE("extreme value at the window edges") {
        const double k = 3.733;
        CHECK(f_extreme(k, (std::sqrt(2.4) - 1) / k) == doctest::Approx(0.6));
        CHECK(f_extreme(k, (std::sqrt(1.6) - 1) / k) == doctest::Approx(0.4));
    }

    TEST_CASE("beta solver reference case") {
        const auto s = solve_beta(3.733, kWindow);
        REQUIRE(s.feasible);
        REQUIRE(s.kept.size() == 1);
        CHECK(s.kept[0].lo == doctest::Approx((std::sqrt(1.6) - 1) / 3.733));
        CHECK(s.kept[0].hi == doctest::Approx((std::sqrt(2.4) - 1) / 3.733));
        CHECK_FALSE(s.kept[0].lo_closed);
        CHECK(s.kept[0].hi_closed);
        CHECK(s.optimal_beta == doctest::Approx(0.14712).epsilon(1e-4));
        REQUIRE(s.discarded.size() == 1);
        CHECK(s.discarded[0].lo == doctest::Approx((-std::sqrt(2.4) - 1) / 3.733));
        CHECK(s.discarded[0].hi == doctest::Approx((-std::sqrt(1.6) - 1) / 3.733));
        // Every kept β lands F_extreme in the window.
        for (double t = 0.001; t < 1; t += 0.01) {
            const double beta = s.kept[0].lo + t * s.kept[0].length();
            CHECK(kWindow.contains(f_extreme(3.733, beta)));
        }
        const auto c = solve_beta(3.733, kWindow, BetaTarget::Center);
        CHECK(f_extreme(3.733, c.optimal_beta) == doctest::Approx(0.5));
    }

    TEST_CASE("optimal beta scales as 1/k") {
        for (double k : {1.0, 2.0, 3.733, 6.0}) {
            const double a = solve_beta(k, kWindow).optimal_beta;
            const double b = solve_beta(2 * k, kWindow).optimal_beta;
            CHECK(b == doctest::Approx(a / 2));
        }
    }

    TEST_CASE("window reachable without a second pulse shift") {
        const auto s = solve_beta(3.733, TargetWindow{0.2, 0.25});
        CHECK(s.feasible);
        CHECK(s.optimal_beta == doctest::Approx(0.0).epsilon(1e-12));
        CHECK_THROWS_AS(TargetWindow({0.6, 0.4}).validate(), std::invalid_argument);
    }

    TEST_CASE("window width") {
        const auto m = TangentModel::through_center(3.733, 1.8);
        CHECK(window_width(m, 0.0, kWindow) == 0.0);
        CHECK(window_width(m, 0.05, kWindow) == 0.0);
        double best = 0, best_beta = 0;
        for (double beta = 0.0; beta <= 0.4; beta += 0.001) {
            const double w = window_width(m, beta, kWindow, 2.4, 1e-3);
            if (w > best) best = w, best_beta = beta;
        }
        const double at_opt = window_width(m, solve_beta(m, kWindow).optimal_beta, kWindow);
        CHECK(at_opt >= 0.95 * best);
        CHECK(best_beta == doctest::Approx(0.147).epsilon(0.05));
    }

    TEST_CASE("common window") {
        const auto w = common_window({1.0, 2.0}, {1.5, 2.5});
        REQUIRE(w);
        CHECK(w->lo == 1.5);
        CHECK(w->hi == 2.0);
        const auto touch = common_window({1.0, 1.5}, {1.5, 2.0});
        REQUIRE(touch);
        CHECK(touch->lo == touch->hi);
        CHECK_FALSE(common_window({1.0, 1.4}, {1.5, 2.0}));
    }

    TEST_CASE("operation window of a single pulse") {
        const auto m = TangentModel::through_center(3.733, 1.8);
        const auto w = operation_window(m, 0.0, kWindow, true, 1.0, 2.6);
        REQUIRE(w);
        CHECK(w->lo == doctest::Approx((0.4 - m.b) / m.k).epsilon(1e-3));
        CHECK(w->hi == doctest::Approx((0.6 - m.b) / m.k).epsilon(1e-3));
    }

    TEST_CASE("phase diagram") {
        const auto m = TangentModel::through_center(3.733, 1.8);
        const auto betas = linspace_step(0.0, 0.3, 0.01);
        const auto v1s = linspace_step(1.5, 2.2, 0.01);
        const auto same = phase_diagram({m, m}, {25, 125}, betas, v1s, kWindow);
        CHECK(same.overlap == same.feasible[0]);
        CHECK(same.overlap_count > 0);
        CHECK(same.reference_inside);
        const auto shifted = TangentModel::through_center(3.733, 1.95);
        const auto apart = phase_diagram({m, shifted}, {25, 125}, betas, v1s, kWindow);
        CHECK(apart.overlap_count < same.overlap_count);
        for (std::size_t i = 0; i < apart.overlap.size(); ++i)
            if (apart.overlap[i]) CHECK((apart.feasible[0][i] && apart.feasible[1][i]));
        CHECK_THROWS_AS((void)phase_diagram({m}, {25}, betas, v1s, kWindow), std::invalid_argument);
    }

    TEST_CASE("extended model reduces to the symmetric one") {
        const auto m = TangentModel::through_center(3.733, 1.8);
        const ExtendedTangentModel e{m, m};
        for (double beta : {0.0, 0.1, 0.147})
            CHECK(f_extreme_extended(e, beta) == doctest::Approx(f_extreme(m.k, beta)));
        const auto a = solve_beta(m, kWindow), b = solve_beta_extended(e, kWindow);
        CHECK(b.optimal_beta == doctest::Approx(a.optimal_beta));
    }

    TEST_CASE("extended model against a numeric sweep") {
        const auto first = TangentModel::through_center(3.733, 1.8);
        const auto second = TangentModel::through_center(1.1 * 3.733, 1.8);
        const ExtendedTangentModel e{first, second};
        for (double beta : {0.0, 0.1, 0.2})
            CHECK(f_extreme_extended(e, beta) == doctest::Approx(numeric_peak(first, second, beta)).epsilon(1e-7));
        // Smallest β on the positive side whose peak exceeds the upper bound.
        double lo = 0.0, hi = 0.4;
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (numeric_peak(first, second, mid) <= 0.6 ? lo : hi) = mid;
        }
        CHECK(solve_beta_extended(e, kWindow).optimal_beta == doctest::Approx(lo).epsilon(1e-4));
    }

    TEST_CASE("slope falls with variation") {
        const auto grid = linspace_step(1.2, 2.4, 0.01);
        const std::vector<double> cvs{0.0, 0.05, 0.1};
        const auto study = slope_k_study(cvs, CellParams{}, grid, 4096, 3);
        REQUIRE(study.size() == 3);
        for (const auto& p : study) REQUIRE(p.model);
        CHECK(study[0].model->k > study[1].model->k);
        CHECK(study[1].model->k > study[2].model->k);
    }

    TEST_CASE("population curves are deterministic") {
        const auto pop = sample_population({0.05, 9, 2048}, CellParams{});
        const auto v = linspace_step(1.5, 2.1, 0.05);
        const auto a = population_wsr_curve(pop, 4, v, 25.0);
        const auto b = population_wsr_curve(pop, 4, v, 25.0);
        CHECK(a.wsr == b.wsr);
        CHECK(a.wsr.front() < a.wsr.back());
    }
}
