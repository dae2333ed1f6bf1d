#include "sotpuf/dualpulse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sotpuf/array.hpp"

namespace sotpuf {

namespace {

// Least-squares polynomial coefficients (lowest order first) via normal equations.
std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, std::size_t degree) {
    const std::size_t n = degree + 1;
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<double> pw(2 * n - 1, 1.0);
        for (std::size_t p = 1; p < pw.size(); ++p) pw[p] = pw[p - 1] * x[i];
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) a[r][c] += pw[r + c];
            a[r][n] += pw[r] * y[i];
        }
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        if (std::abs(a[col][col]) < 1e-300) throw std::runtime_error("singular polynomial fit");
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> coeffs(n);
    for (std::size_t r = 0; r < n; ++r) coeffs[r] = a[r][n] / a[r][r];
    return coeffs;
}

struct Vertex {
    double v1;
    double v2;
};

Vertex symmetric_vertex(const TangentModel& m, double beta) {
    const double v1 = (1.0 + m.k * beta - 2.0 * m.b) / (2.0 * m.k);
    return {v1, v1 - beta};
}

Vertex extended_vertex(const ExtendedTangentModel& m, double beta) {
    const double k1 = m.first.k, b1 = m.first.b, k2 = m.second.k, b2 = m.second.b;
    const double c2 = 1.0 + k2 * beta - b2;
    const double v1 = (k1 * c2 - b1 * k2) / (2.0 * k1 * k2);
    return {v1, v1 - beta};
}

bool within(const Interval& iv, double x) { return x >= iv.lo - 1e-12 && x <= iv.hi + 1e-12; }

template <typename VertexFn>
void classify(BetaSolution& sol, Interval iv, const Interval& valid1, const Interval& valid2, VertexFn vertex) {
    if (!(iv.hi > iv.lo)) return;
    const Vertex a = vertex(iv.lo), b = vertex(iv.hi);
    const bool ok = within(valid1, a.v1) && within(valid1, b.v1) && within(valid2, a.v2) && within(valid2, b.v2);
    (ok ? sol.kept : sol.discarded).push_back(iv);
}

// Chooses the β inside a kept interval whose extreme equals target_f.
void pick_optimal(BetaSolution& sol, const std::vector<double>& candidates) {
    sol.feasible = !sol.kept.empty();
    for (double beta : candidates)
        for (const auto& iv : sol.kept)
            if (beta >= iv.lo - 1e-12 && beta <= iv.hi + 1e-12) {
                sol.optimal_beta = beta;
                return;
            }
    if (sol.feasible) sol.optimal_beta = sol.kept.front().hi;
}

double target_value(const TargetWindow& w, BetaTarget t) { return t == BetaTarget::Upper ? w.upper : 0.5 * (w.lower + w.upper); }

}  // namespace

TangentModel TangentModel::through_center(double k, double v_center, std::optional<double> half_width) {
    if (!(k > 0)) throw std::domain_error("tangent slope must be > 0");
    const double h = half_width.value_or(0.5 / k);
    return {k, 0.5 - k * v_center, v_center, {v_center - h, v_center + h}};
}

double TangentModel::wsr(double v) const noexcept { return std::clamp(line(v), 0.0, 1.0); }

void TargetWindow::validate() const {
    if (!(lower >= 0 && lower < upper && upper <= 1)) throw std::invalid_argument("target window needs 0 <= lower < upper <= 1");
}

TangentModel fit_tangent(const WsrCurve& curve, double band_lo, double band_hi) {
    const auto& v = curve.voltages;
    const auto& w = curve.wsr;
    if (v.size() != w.size() || v.size() < 2) throw std::invalid_argument("WSR curve needs matching voltage/WSR samples");
    std::optional<double> center;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (w[i] == 0.5) {
            center = v[i];
            break;
        }
        if (w[i] < 0.5 && w[i + 1] >= 0.5) {
            center = v[i] + (0.5 - w[i]) * (v[i + 1] - v[i]) / (w[i + 1] - w[i]);
            break;
        }
    }
    if (!center) throw std::runtime_error("WSR curve does not cross 0.5");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (w[i] >= band_lo && w[i] <= band_hi) {
            xs.push_back(v[i] - *center);
            ys.push_back(w[i]);
        }
    double k = 0;
    if (xs.size() >= 4) {
        // Scale x for conditioning; the derivative at 0 is c1 / scale.
        double scale = 0;
        for (double x : xs) scale = std::max(scale, std::abs(x));
        if (scale == 0) scale = 1;
        for (auto& x : xs) x /= scale;
        k = polyfit(xs, ys, 3)[1] / scale;
    } else if (xs.size() >= 2) {
        k = polyfit(xs, ys, 1)[1];
    } else {
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            if (v[i] <= *center && v[i + 1] >= *center) {
                k = (w[i + 1] - w[i]) / (v[i + 1] - v[i]);
                break;
            }
    }
    if (!(k > 0)) throw std::runtime_error("WSR curve has no positive slope at 0.5");
    return TangentModel::through_center(k, *center);
}

double compose_independent(double wsr1, double wsr2) { return wsr1 - wsr1 * wsr2; }

DependentComposition compose_dependent(double wsr1, double wsr2) {
    const double d = wsr1 - wsr2;
    return {std::max(d, 0.0), d < 0};
}

double f_quadratic(const TangentModel& m, double v1, double beta) noexcept {
    const double k = m.k, b = m.b;
    return -k * k * v1 * v1 + (k + k * k * beta - 2.0 * k * b) * v1 + (b + k * beta * b - b * b);
}

std::vector<double> f_curve(const TangentModel& model, std::span<const double> v1_grid, double beta) {
    std::vector<double> out;
    out.reserve(v1_grid.size());
    for (double v : v1_grid) out.push_back(f_quadratic(model, v, beta));
    return out;
}

double f_clamped(const TangentModel& model, double v1, double beta, bool single) noexcept {
    const double w1 = model.wsr(v1);
    if (single) return w1;
    return compose_independent(w1, model.wsr(v1 - beta));
}

double f_clamped(const ExtendedTangentModel& model, double v1, double beta) noexcept {
    return compose_independent(model.first.wsr(v1), model.second.wsr(v1 - beta));
}

double f_extreme(double k, double beta) noexcept { return 0.25 * (1.0 + k * beta) * (1.0 + k * beta); }

BetaSolution solve_beta(const TangentModel& model, const TargetWindow& window, BetaTarget target) {
    window.validate();
    const double k = model.k;
    if (!(k > 0)) throw std::domain_error("tangent slope must be > 0");
    const double rl = 2.0 * std::sqrt(window.lower), ru = 2.0 * std::sqrt(window.upper);
    BetaSolution sol;
    auto vertex = [&](double beta) { return symmetric_vertex(model, beta); };
    classify(sol, {(-ru - 1.0) / k, (-rl - 1.0) / k, true, false}, model.validity, model.validity, vertex);
    classify(sol, {(rl - 1.0) / k, (ru - 1.0) / k, false, true}, model.validity, model.validity, vertex);
    const double rt = 2.0 * std::sqrt(target_value(window, target));
    pick_optimal(sol, {(rt - 1.0) / k, (-rt - 1.0) / k});
    return sol;
}

BetaSolution solve_beta(double k, const TargetWindow& window, BetaTarget target) {
    return solve_beta(TangentModel::through_center(k, 1.8), window, target);
}

double f_extreme_extended(const ExtendedTangentModel& m, double beta) noexcept {
    const double k1 = m.first.k, b1 = m.first.b, k2 = m.second.k, b2 = m.second.b;
    const double u = k1 * (1.0 + k2 * beta - b2) + b1 * k2;
    return u * u / (4.0 * k1 * k2);
}

BetaSolution solve_beta_extended(const ExtendedTangentModel& model, const TargetWindow& window, BetaTarget target) {
    window.validate();
    const double k1 = model.first.k, b1 = model.first.b, k2 = model.second.k, b2 = model.second.b;
    if (!(k1 > 0 && k2 > 0)) throw std::domain_error("tangent slopes must be > 0");
    const double kk = k1 * k2;
    BetaSolution sol;
    if (kk > 1e-9) {
        const double c0 = k1 * (1.0 - b2) + b1 * k2;
        const double rl = 2.0 * std::sqrt(kk * window.lower), ru = 2.0 * std::sqrt(kk * window.upper);
        auto vertex = [&](double beta) { return extended_vertex(model, beta); };
        classify(sol, {(-ru - c0) / kk, (-rl - c0) / kk, true, false}, model.first.validity, model.second.validity, vertex);
        classify(sol, {(rl - c0) / kk, (ru - c0) / kk, false, true}, model.first.validity, model.second.validity, vertex);
        const double rt = 2.0 * std::sqrt(kk * target_value(window, target));
        pick_optimal(sol, {(rt - c0) / kk, (-rt - c0) / kk});
        return sol;
    }
    // Nearly flat second pulse: F is almost linear in V1, so scan β and take
    // the maximum of F over the first pulse's validity interval.
    const auto& valid = model.first.validity;
    auto f_max = [&](double beta) {
        auto f = [&](double v) { return model.first.line(v) * (1.0 - model.second.line(v - beta)); };
        double best = std::max(f(valid.lo), f(valid.hi));
        const double vx = extended_vertex(model, beta).v1;
        if (vx > valid.lo && vx < valid.hi) best = std::max(best, f(vx));
        return best;
    };
    const double t = target_value(window, target);
    const double step = 1e-4;
    std::optional<Interval> run;
    double best_gap = std::numeric_limits<double>::infinity();
    for (double beta = -1.0; beta <= 1.0 + 1e-12; beta += step) {
        const double fm = f_max(beta);
        if (window.contains(fm)) {
            if (!run) run = Interval{beta, beta};
            run->hi = beta;
            if (std::abs(fm - t) < best_gap) {
                best_gap = std::abs(fm - t);
                sol.optimal_beta = beta;
            }
        } else if (run) {
            sol.kept.push_back(*run);
            run.reset();
        }
    }
    if (run) sol.kept.push_back(*run);
    sol.feasible = !sol.kept.empty();
    return sol;
}

double window_width(const TangentModel& model, double beta, const TargetWindow& window, double v_max, double step) {
    const double start = model.v_center - 0.5 / model.k - step;
    if (v_max <= start) return 0.0;
    const auto n = static_cast<std::size_t>(std::ceil((v_max - start) / step));
    double width = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = start + (static_cast<double>(i) + 0.5) * step;
        if (v > v_max) break;
        if (window.contains(f_clamped(model, v, beta))) width += step;
    }
    return width;
}

std::optional<VoltageWindow> operation_window(const TangentModel& model, double beta, const TargetWindow& window,
                                              bool single, double v_lo, double v_hi, double step) {
    std::optional<VoltageWindow> best;
    std::optional<double> run_start;
    double prev = v_lo;
    const auto n = static_cast<std::size_t>(std::floor((v_hi - v_lo) / step + 1e-9));
    for (std::size_t i = 0; i <= n + 1; ++i) {
        const double v = v_lo + static_cast<double>(i) * step;
        const bool in = i <= n && window.contains(f_clamped(model, v, beta, single));
        if (in && !run_start) run_start = v;
        if (!in && run_start) {
            if (!best || prev - *run_start > best->hi - best->lo) best = VoltageWindow{*run_start, prev, 0};
            run_start.reset();
        }
        prev = v;
    }
    return best;
}

std::optional<VoltageWindow> common_window(const VoltageWindow& w1, const VoltageWindow& w2) {
    const double lo = std::max(w1.lo, w2.lo), hi = std::min(w1.hi, w2.hi);
    if (lo > hi) return std::nullopt;
    return VoltageWindow{lo, hi, w1.temperature};
}

PhaseDiagram phase_diagram(const std::vector<TangentModel>& models, const std::vector<double>& temperatures,
                           std::span<const double> beta_grid, std::span<const double> v1_grid,
                           const TargetWindow& window, double reference_beta, double reference_v1) {
    if (models.size() < 2 || models.size() != temperatures.size())
        throw std::invalid_argument("phase diagram needs one model per temperature and at least two temperatures");
    PhaseDiagram pd;
    pd.temperatures = temperatures;
    pd.beta_grid.assign(beta_grid.begin(), beta_grid.end());
    pd.v1_grid.assign(v1_grid.begin(), v1_grid.end());
    const std::size_t cells = beta_grid.size() * v1_grid.size();
    pd.overlap.assign(cells, true);
    for (const auto& m : models) {
        std::vector<bool> grid(cells);
        for (std::size_t ib = 0; ib < beta_grid.size(); ++ib)
            for (std::size_t iv = 0; iv < v1_grid.size(); ++iv) {
                const bool ok = window.contains(f_clamped(m, v1_grid[iv], beta_grid[ib]));
                grid[ib * v1_grid.size() + iv] = ok;
                if (!ok) pd.overlap[ib * v1_grid.size() + iv] = false;
            }
        pd.feasible.push_back(std::move(grid));
    }
    pd.overlap_count = static_cast<std::size_t>(std::count(pd.overlap.begin(), pd.overlap.end(), true));
    pd.reference_inside = std::all_of(models.begin(), models.end(), [&](const TangentModel& m) {
        return window.contains(f_clamped(m, reference_v1, reference_beta));
    });
    return pd;
}

std::vector<double> linspace_step(double lo, double hi, double step) {
    if (!(step > 0) || hi < lo) throw std::invalid_argument("grid needs step > 0 and hi >= lo");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
    return out;
}

WsrCurve population_wsr_curve(const std::vector<CellParams>& population, std::uint64_t seed,
                              std::span<const double> voltages, double temperature, double pulse_width) {
    const double widths[] = {pulse_width};
    const ShmooGrid grid = write_shmoo(population, seed, voltages, widths, temperature);
    return {grid.voltages, grid.wsr.front(), temperature};
}

std::vector<SlopeStudyPoint> slope_k_study(std::span<const double> cv_grid, const CellParams& baseline,
                                           std::span<const double> signal_grid, std::size_t n_cells,
                                           std::uint64_t seed, double temperature) {
    std::vector<SlopeStudyPoint> out;
    for (double cv : cv_grid) {
        if (!(cv >= 0)) throw std::invalid_argument("coefficient of variation must be >= 0");
        const auto population = sample_population({cv, seed, n_cells}, baseline);
        SlopeStudyPoint point;
        point.cv = cv;
        point.curve = population_wsr_curve(population, seed, signal_grid, temperature);
        try {
            point.model = fit_tangent(point.curve);
        } catch (const std::runtime_error&) {
            point.model.reset();
        }
        out.push_back(std::move(point));
    }
    return out;
}

}  // namespace sotpuf
