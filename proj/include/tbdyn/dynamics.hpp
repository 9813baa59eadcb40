#pragma once

// Reference integrator (adaptive Dormand-Prince 5(4) with cubic-Hermite dense
// output and terminal events), regime classification into the five outcome
// categories, and the parameter-sweep engine.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tbdyn/model.hpp"
#include "tbdyn/stability.hpp"

namespace tbdyn {

enum class Terminal { Completed, Extinct, DomainViolation, SolverFailure };

inline const char* to_string(Terminal t) {
    switch (t) {
        case Terminal::Completed: return "Completed";
        case Terminal::Extinct: return "Extinct";
        case Terminal::DomainViolation: return "DomainViolation";
        default: return "SolverFailure";
    }
}

struct TrajectoryEvent {
    double time;
    std::string kind; // "x-floor", "y-floor", "domain", "step-underflow"
};

inline constexpr double kExtinctionEventFloor = 1e-12;

struct Trajectory {
    std::vector<double> times;       // accepted step times, strictly increasing
    std::vector<State> states;
    std::vector<Derivative> derivs;  // rhs at each accepted point, for dense output
    Terminal terminal = Terminal::Completed;
    std::vector<TrajectoryEvent> events;

    double end_time() const { return times.empty() ? 0.0 : times.back(); }

    // Cubic Hermite interpolation between accepted steps.
    State sample(double t) const {
        if (times.empty()) throw evaluation_error("empty trajectory");
        if (t <= times.front()) return states.front();
        if (t >= times.back()) return states.back();
        size_t hi = std::upper_bound(times.begin(), times.end(), t) - times.begin();
        size_t lo = hi - 1;
        const double h = times[hi] - times[lo];
        const double u = (t - times[lo]) / h;
        auto hermite = [&](double y0, double y1, double d0, double d1) {
            const double u2 = u * u, u3 = u2 * u;
            return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 +
                   (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * d1;
        };
        return {hermite(states[lo].x, states[hi].x, derivs[lo].dx_dt, derivs[hi].dx_dt),
                hermite(states[lo].y, states[hi].y, derivs[lo].dy_dt, derivs[hi].dy_dt)};
    }
};

namespace detail {

// Dormand-Prince 5(4) tableau (Hairer-Norsett-Wanner DOPRI5).
namespace dp {
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
} // namespace dp

struct RhsGuard {
    const ModelParams& p;
    bool domain_failed = false;

    bool operator()(const State& s, Derivative& d) {
        try {
            d = rhs(p, s);
        } catch (const argument_domain_error&) {
            domain_failed = true;
            return false;
        } catch (const evaluation_error&) {
            return false;
        }
        return true;
    }
};

} // namespace detail

inline Trajectory integrate(const ModelParams& p, const State& s0, double t_end,
                            double rel_tol = 1e-9, double abs_tol = 1e-12) {
    p.validate();
    if (!(t_end > 0)) throw validation_error("t_end must be > 0");
    if (!(rel_tol > 0 && rel_tol < 1) || !(abs_tol > 0 && abs_tol < 1))
        throw validation_error("tolerances must lie in (0, 1)");
    if (!std::isfinite(s0.x) || !std::isfinite(s0.y))
        throw validation_error("initial state must be finite");
    if (s0.x < 0 && !is_integer_mu(p.mu))
        throw argument_domain_error("x0 < 0 invalid for fractional mu");

    using namespace detail::dp;
    Trajectory traj;
    detail::RhsGuard f{p};

    double t = 0.0;
    State y = s0;
    Derivative k1;
    if (!f(y, k1))
        throw validation_error("rhs not evaluable at the initial state");
    traj.times.push_back(t);
    traj.states.push_back(y);
    traj.derivs.push_back(k1);

    const double h_floor = 1e-14 * t_end;
    // initial step from the scaled derivative norm
    double h;
    {
        const double sx = abs_tol + rel_tol * std::abs(y.x);
        const double sy = abs_tol + rel_tol * std::abs(y.y);
        const double d0 = std::hypot(y.x / sx, y.y / sy);
        const double d1 = std::hypot(k1.dx_dt / sx, k1.dy_dt / sy);
        h = (d0 > 1e-10 && d1 > 1e-10) ? 0.01 * d0 / d1 : 1e-6;
        h = std::min(h, t_end);
    }

    double facold = 1e-4;
    constexpr double safe = 0.9, facl = 0.2, facr = 10.0, beta_stab = 0.04;
    const double expo = 0.2 - beta_stab * 0.75;

    auto finish = [&](Terminal term, const char* event_kind, double at) {
        traj.terminal = term;
        if (event_kind) traj.events.push_back({at, event_kind});
        return traj;
    };

    while (t < t_end) {
        if (h < h_floor) {
            if (f.domain_failed)
                return finish(Terminal::DomainViolation, "domain", t);
            return finish(Terminal::SolverFailure, "step-underflow", t);
        }
        bool last = false;
        if (t + 1.01 * h >= t_end) {
            h = t_end - t;
            last = true;
        }

        State ytmp;
        Derivative k2, k3, k4, k5, k6, k7;
        f.domain_failed = false;

        ytmp = {y.x + h * a21 * k1.dx_dt, y.y + h * a21 * k1.dy_dt};
        if (!f(ytmp, k2)) { h *= 0.5; continue; }
        ytmp = {y.x + h * (a31 * k1.dx_dt + a32 * k2.dx_dt),
                y.y + h * (a31 * k1.dy_dt + a32 * k2.dy_dt)};
        if (!f(ytmp, k3)) { h *= 0.5; continue; }
        ytmp = {y.x + h * (a41 * k1.dx_dt + a42 * k2.dx_dt + a43 * k3.dx_dt),
                y.y + h * (a41 * k1.dy_dt + a42 * k2.dy_dt + a43 * k3.dy_dt)};
        if (!f(ytmp, k4)) { h *= 0.5; continue; }
        ytmp = {y.x + h * (a51 * k1.dx_dt + a52 * k2.dx_dt + a53 * k3.dx_dt + a54 * k4.dx_dt),
                y.y + h * (a51 * k1.dy_dt + a52 * k2.dy_dt + a53 * k3.dy_dt + a54 * k4.dy_dt)};
        if (!f(ytmp, k5)) { h *= 0.5; continue; }
        ytmp = {y.x + h * (a61 * k1.dx_dt + a62 * k2.dx_dt + a63 * k3.dx_dt + a64 * k4.dx_dt +
                           a65 * k5.dx_dt),
                y.y + h * (a61 * k1.dy_dt + a62 * k2.dy_dt + a63 * k3.dy_dt + a64 * k4.dy_dt +
                           a65 * k5.dy_dt)};
        if (!f(ytmp, k6)) { h *= 0.5; continue; }
        State ynew{y.x + h * (a71 * k1.dx_dt + a73 * k3.dx_dt + a74 * k4.dx_dt +
                              a75 * k5.dx_dt + a76 * k6.dx_dt),
                   y.y + h * (a71 * k1.dy_dt + a73 * k3.dy_dt + a74 * k4.dy_dt +
                              a75 * k5.dy_dt + a76 * k6.dy_dt)};
        if (!f(ynew, k7)) { h *= 0.5; continue; }

        const double ee_x = h * (e1 * k1.dx_dt + e3 * k3.dx_dt + e4 * k4.dx_dt +
                                 e5 * k5.dx_dt + e6 * k6.dx_dt + e7 * k7.dx_dt);
        const double ee_y = h * (e1 * k1.dy_dt + e3 * k3.dy_dt + e4 * k4.dy_dt +
                                 e5 * k5.dy_dt + e6 * k6.dy_dt + e7 * k7.dy_dt);
        const double sx = abs_tol + rel_tol * std::max(std::abs(y.x), std::abs(ynew.x));
        const double sy = abs_tol + rel_tol * std::max(std::abs(y.y), std::abs(ynew.y));
        double err = std::sqrt(0.5 * ((ee_x / sx) * (ee_x / sx) + (ee_y / sy) * (ee_y / sy)));
        if (!std::isfinite(err)) err = 1e10;

        const double fac11 = std::pow(err, expo);
        double fac = fac11 / std::pow(facold, beta_stab);
        fac = std::max(1.0 / facr, std::min(1.0 / facl, fac / safe));

        if (err > 1.0) {
            h /= std::min(1.0 / facl, fac11 / safe);
            continue;
        }

        facold = std::max(err, 1e-4);
        const double t_new = t + h;

        // terminal floor events, localized on the Hermite interpolant
        const double prev_x = y.x, prev_y = y.y;
        traj.times.push_back(t_new);
        traj.states.push_back(ynew);
        traj.derivs.push_back(k7);

        const bool x_cross = prev_x >= kExtinctionEventFloor && ynew.x < kExtinctionEventFloor;
        const bool y_cross = prev_y >= kExtinctionEventFloor && ynew.y < kExtinctionEventFloor;
        if (x_cross || y_cross) {
            double lo = t, hi = t_new;
            auto below = [&](double tc) {
                const State sc = traj.sample(tc);
                return (x_cross && sc.x < kExtinctionEventFloor) ||
                       (y_cross && sc.y < kExtinctionEventFloor);
            };
            for (int it = 0; it < 80 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (below(mid) ? hi : lo) = mid;
            }
            const double t_cross = hi;
            const State s_cross = traj.sample(t_cross);
            Derivative d_cross;
            const bool have_d = f(s_cross, d_cross);
            const bool x_falling = !have_d || d_cross.dx_dt < 0;
            const bool y_falling = !have_d || d_cross.dy_dt < 0;
            if ((x_cross && x_falling) || (y_cross && y_falling)) {
                traj.times.back() = t_cross;
                traj.states.back() = s_cross;
                if (have_d) traj.derivs.back() = d_cross;
                const char* kind = x_cross && y_cross ? "x-floor" : (x_cross ? "x-floor" : "y-floor");
                if (x_cross && !is_integer_mu(p.mu))
                    return finish(Terminal::DomainViolation, kind, t_cross);
                return finish(Terminal::Extinct, kind, t_cross);
            }
        }

        t = t_new;
        y = ynew;
        k1 = k7; // FSAL
        if (last) break;
        h = h / fac;
    }
    return traj;
}

enum class Regime {
    StableFocus,
    StableLimitCycle,
    Extinction,
    IntegrationError,
    ArgumentDomainError
};

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::StableFocus: return "StableFocus";
        case Regime::StableLimitCycle: return "StableLimitCycle";
        case Regime::Extinction: return "Extinction";
        case Regime::IntegrationError: return "IntegrationError";
        default: return "ArgumentDomainError";
    }
}

struct PeakRecord {
    double time;
    double value;
};

struct RegimeEvidence {
    double final_distance = std::numeric_limits<double>::quiet_NaN(); // to E*, final 10%
    double amplitude_final_quarter = 0;
    double min_x = 0, min_y = 0;
    std::string amplitude_trend; // "decaying", "steady", "growing", "none"
    std::vector<PeakRecord> peaks; // last detected x-maxima (up to 10)
};

struct ClassifierConfig {
    double extinction_floor = 1e-6;   // on y over the final 25%
    double focus_distance_tol = 1e-3; // to E* over the final 10%
    double cycle_band_lo = 0.99, cycle_band_hi = 1.01;
    double cycle_min_amplitude = 1e-3;
    int cycle_min_peaks = 5;
    double peak_prominence = 1e-6; // maxima must rise this far above the running minimum
    int resample_points = 8192;
};

struct RegimeLabel {
    Regime kind;
    RegimeEvidence evidence;
};

namespace detail {

// Maxima of x(t): +/- sign changes of dx/dt on the resampled grid, refined by
// a parabola through the neighbouring samples, then prominence-filtered.
inline std::vector<PeakRecord> detect_maxima(std::span<const double> ts,
                                             std::span<const double> xs,
                                             std::span<const double> dx, double prominence) {
    std::vector<PeakRecord> out;
    if (ts.size() < 3) return out;
    double run_min = xs.front();
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        run_min = std::min(run_min, xs[i]);
        if (!(dx[i] > 0.0 && dx[i + 1] <= 0.0)) continue;
        size_t j = std::clamp<size_t>(i, 1, ts.size() - 2);
        double tpk = ts[i], vpk = xs[i];
        const double den = xs[j - 1] - 2.0 * xs[j] + xs[j + 1];
        if (den < 0.0) {
            const double d = 0.5 * (xs[j - 1] - xs[j + 1]) / den;
            tpk = ts[j] + d * (ts[j + 1] - ts[j]);
            vpk = xs[j] - 0.25 * (xs[j - 1] - xs[j + 1]) * d;
        }
        if (vpk - run_min >= prominence) {
            out.push_back({tpk, vpk});
            run_min = vpk;
        }
    }
    return out;
}

} // namespace detail

inline RegimeLabel classify(const Trajectory& traj, const ModelParams& p,
                            const std::vector<Equilibrium>& eqs,
                            const ClassifierConfig& cfg = {}) {
    RegimeLabel label;
    RegimeEvidence& ev = label.evidence;

    if (traj.terminal == Terminal::SolverFailure) {
        label.kind = Regime::IntegrationError;
        return label;
    }
    if (traj.terminal == Terminal::DomainViolation) {
        label.kind = Regime::ArgumentDomainError;
        return label;
    }

    const double T = traj.end_time();
    if (traj.times.size() < 3 || !(T > 0))
        throw inconclusive_error("trajectory too short to classify; integrate a longer horizon");

    const int n = cfg.resample_points;
    std::vector<double> ts(n), xs(n), ys(n), dx(n);
    for (int i = 0; i < n; ++i) {
        ts[i] = T * i / (n - 1);
        const State s = traj.sample(ts[i]);
        xs[i] = s.x;
        ys[i] = s.y;
        try {
            dx[i] = rhs(p, {std::max(s.x, 0.0), s.y}).dx_dt;
        } catch (const std::exception&) {
            dx[i] = 0.0;
        }
    }
    const int i25 = static_cast<int>(0.75 * (n - 1));
    const int i10 = static_cast<int>(0.90 * (n - 1));
    ev.min_x = *std::min_element(xs.begin(), xs.end());
    ev.min_y = *std::min_element(ys.begin(), ys.end());
    ev.amplitude_final_quarter = *std::max_element(xs.begin() + i25, xs.end()) -
                                 *std::min_element(xs.begin() + i25, xs.end());

    // (3) extinction: terminal event, or y pinned near zero over the tail
    const double tail_min_y = *std::min_element(ys.begin() + i25, ys.end());
    if (traj.terminal == Terminal::Extinct || tail_min_y < cfg.extinction_floor) {
        label.kind = Regime::Extinction;
        return label;
    }

    const Equilibrium* interior = nullptr;
    for (const auto& e : eqs)
        if (e.kind == EquilibriumKind::Interior) { interior = &e; break; }

    auto tail = [](const std::vector<double>& v, int from) {
        return std::span<const double>(v.data() + from, v.size() - from);
    };
    const auto peaks25 = detail::detect_maxima(tail(ts, i25), tail(xs, i25), tail(dx, i25),
                                               cfg.peak_prominence);
    for (size_t k = peaks25.size() > 10 ? peaks25.size() - 10 : 0; k < peaks25.size(); ++k)
        ev.peaks.push_back(peaks25[k]);

    // (4) stable focus: parked at E* with non-increasing oscillation maxima
    if (interior) {
        double dmax = 0.0;
        for (int i = i10; i < n; ++i)
            dmax = std::max(dmax, std::hypot(xs[i] - interior->state.x,
                                             ys[i] - interior->state.y));
        ev.final_distance = dmax;
        bool decaying = true;
        for (size_t k = 0; k + 1 < peaks25.size(); ++k)
            if (peaks25[k + 1].value > peaks25[k].value) decaying = false;
        if (dmax < cfg.focus_distance_tol && decaying) {
            ev.amplitude_trend = peaks25.empty() ? "none" : "decaying";
            label.kind = Regime::StableFocus;
            return label;
        }
    }

    // (5) limit cycle: last >= 5 maxima with near-unit successive ratios
    const int ihalf = (n - 1) / 2;
    const auto peaks50 = detail::detect_maxima(tail(ts, ihalf), tail(xs, ihalf),
                                               tail(dx, ihalf), cfg.peak_prominence);
    if (static_cast<int>(peaks50.size()) >= cfg.cycle_min_peaks) {
        bool in_band = true;
        for (size_t k = peaks50.size() - cfg.cycle_min_peaks; k + 1 < peaks50.size(); ++k) {
            const double ratio = peaks50[k + 1].value / peaks50[k].value;
            if (!(ratio >= cfg.cycle_band_lo && ratio <= cfg.cycle_band_hi)) in_band = false;
        }
        if (in_band && ev.amplitude_final_quarter > cfg.cycle_min_amplitude) {
            ev.amplitude_trend = "steady";
            label.kind = Regime::StableLimitCycle;
            return label;
        }
    }

    // (6) fallback on the net amplitude trend over the final half
    if (peaks50.size() >= 2) {
        const double first = peaks50.front().value, last = peaks50.back().value;
        if (last < 0.99 * first) {
            ev.amplitude_trend = "decaying";
            label.kind = Regime::StableFocus;
        } else {
            ev.amplitude_trend = last > 1.01 * first ? "growing" : "steady";
            label.kind = Regime::StableLimitCycle;
        }
        return label;
    }
    throw inconclusive_error("no decisive oscillation or convergence signature; "
                             "integrate a longer horizon");
}

enum class VaryingParam { Alpha, Lambda, Beta, Gamma };

inline const char* to_string(VaryingParam v) {
    switch (v) {
        case VaryingParam::Alpha: return "alpha";
        case VaryingParam::Lambda: return "lambda";
        case VaryingParam::Beta: return "beta";
        default: return "gamma";
    }
}

inline VaryingParam varying_from_string(const std::string& s) {
    if (s == "alpha") return VaryingParam::Alpha;
    if (s == "lambda") return VaryingParam::Lambda;
    if (s == "beta") return VaryingParam::Beta;
    if (s == "gamma") return VaryingParam::Gamma;
    throw validation_error("unknown sweep parameter '" + s + "'");
}

struct SweepSpec {
    ModelParams base;
    State initial;
    VaryingParam varying = VaryingParam::Gamma;
    std::vector<double> grid; // ascending
    double t_end = 500.0;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    ClassifierConfig classifier;

    void validate() const {
        base.validate();
        if (grid.empty()) throw validation_error("sweep grid must be non-empty");
        if (!std::is_sorted(grid.begin(), grid.end()))
            throw validation_error("sweep grid must be ascending");
        if (!(t_end > 0)) throw validation_error("t_end must be > 0");
    }
};

struct SweepRow {
    double value;
    std::string label; // Regime name or "Inconclusive"
    State final_state;
    RegimeEvidence evidence;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepRow> rows;
};

inline ModelParams with_varying(const ModelParams& base, VaryingParam which, double value) {
    ModelParams p = base;
    switch (which) {
        case VaryingParam::Alpha: p.alpha = value; break;
        case VaryingParam::Lambda: p.lambda = value; break;
        case VaryingParam::Beta: p.beta = value; break;
        case VaryingParam::Gamma: p.gamma = value; break;
    }
    return p;
}

inline SweepResult sweep(const SweepSpec& spec) {
    spec.validate();
    SweepResult result;
    result.spec = spec;
    for (double value : spec.grid) {
        const ModelParams p = with_varying(spec.base, spec.varying, value);
        SweepRow row;
        row.value = value;
        try {
            p.validate();
            const Trajectory traj = integrate(p, spec.initial, spec.t_end, spec.rel_tol,
                                              spec.abs_tol);
            row.final_state = traj.states.back();
            const RegimeLabel label = classify(traj, p, equilibria(p), spec.classifier);
            row.label = to_string(label.kind);
            row.evidence = label.evidence;
        } catch (const inconclusive_error&) {
            row.label = "Inconclusive";
        } catch (const validation_error&) {
            row.label = "Inconclusive";
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

// Plot-ready tables: a resampled time series and the corresponding orbit.
struct PhasePortraitData {
    std::vector<double> t;
    std::vector<State> series; // time-series rows; orbit is the (x, y) projection
};

inline PhasePortraitData phase_portrait_data(const Trajectory& traj, int points = 2001) {
    if (traj.times.empty()) throw evaluation_error("empty trajectory");
    if (points < 2) throw validation_error("need at least 2 resample points");
    PhasePortraitData out;
    const double T = traj.end_time();
    out.t.reserve(points);
    out.series.reserve(points);
    for (int i = 0; i < points; ++i) {
        const double t = T * i / (points - 1);
        out.t.push_back(t);
        out.series.push_back(traj.sample(t));
    }
    return out;
}

} // namespace tbdyn
