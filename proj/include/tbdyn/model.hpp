#pragma once

// Generalized Truscott-Brindley phytoplankton-zooplankton model:
//
//   dx/dt = alpha x (1 - x) - x^(2+mu) y / (lambda^2 + x^2)
//   dy/dt = beta x^(2+mu) y / (lambda^2 + x^2) - gamma y
//
// with nondimensional prey x, predator y, and generalization exponent mu >= 0.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tbdyn/errors.hpp"

namespace tbdyn {

inline constexpr double kIntegerMuTol = 1e-12;

inline bool is_integer_mu(double mu) {
    return std::abs(mu - std::round(mu)) <= kIntegerMuTol;
}

// Dimensional parameters of the original system (1).
struct DimensionalParams {
    double r;     // maximum phytoplankton growth rate (1/time)
    double K;     // carrying capacity (biomass)
    double omega; // maximum specific predation rate (1/time)
    double a;     // predation half-shape parameter (biomass)
    double eta;   // zooplankton removal rate (1/time)
    double beta;  // biomass conversion ratio

    void validate() const {
        if (!(r > 0 && K > 0 && omega > 0 && a > 0 && eta > 0 && beta > 0))
            throw validation_error("dimensional parameters must all be strictly positive");
    }
};

// Nondimensional parameter set driving all dynamics.
struct ModelParams {
    double alpha;  // r / omega
    double lambda; // a / K
    double beta;   // conversion ratio
    double gamma;  // eta / omega
    double mu = 0; // generalization exponent, >= 0

    void validate() const {
        if (!(alpha > 0) || !std::isfinite(alpha)) throw validation_error("alpha must be > 0");
        if (!(lambda > 0) || !std::isfinite(lambda)) throw validation_error("lambda must be > 0");
        if (!(beta > 0) || !std::isfinite(beta)) throw validation_error("beta must be > 0");
        if (!(gamma > 0) || !std::isfinite(gamma)) throw validation_error("gamma must be > 0");
        if (!(mu >= 0) || !std::isfinite(mu)) throw validation_error("mu must be >= 0");
    }
};

inline ModelParams nondimensionalize(const DimensionalParams& dim, double mu = 0.0) {
    dim.validate();
    ModelParams p{dim.r / dim.omega, dim.a / dim.K, dim.beta, dim.eta / dim.omega, mu};
    p.validate();
    return p;
}

struct State {
    double x = 0;
    double y = 0;
};

struct Derivative {
    double dx_dt = 0;
    double dy_dt = 0;
};

enum class EquilibriumKind { Origin, PhytoOnly, Interior };

inline const char* to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::Origin: return "Origin";
        case EquilibriumKind::PhytoOnly: return "PhytoOnly";
        default: return "Interior";
    }
}

struct Equilibrium {
    EquilibriumKind kind;
    State state;
};

namespace detail {

// x^n for integer n >= 0 by repeated squaring; exact for the exponents used here.
inline double powi(double x, long n) {
    double r = 1.0, b = x;
    for (; n > 0; n >>= 1) {
        if (n & 1) r *= b;
        b *= b;
    }
    return r;
}

// x^e with e = base + mu. Integer mu uses the integer power (valid for x < 0);
// fractional mu demands x >= 0.
inline double pow_mu(double x, long base, double mu) {
    if (is_integer_mu(mu))
        return powi(x, base + static_cast<long>(std::llround(mu)));
    if (x < 0.0)
        throw argument_domain_error("x^(" + std::to_string(base + mu) +
                                    ") undefined for x < 0 with fractional mu");
    return std::pow(x, static_cast<double>(base) + mu);
}

} // namespace detail

// Predation kernel f(x) = x^(2+mu) / (lambda^2 + x^2).
inline double predation_kernel(const ModelParams& p, double x) {
    return detail::pow_mu(x, 2, p.mu) / (p.lambda * p.lambda + x * x);
}

// f'(x) = x^(1+mu) [(2+mu) lambda^2 + mu x^2] / (lambda^2 + x^2)^2.
inline double predation_kernel_derivative(const ModelParams& p, double x) {
    const double l2 = p.lambda * p.lambda;
    const double den = l2 + x * x;
    return detail::pow_mu(x, 1, p.mu) * ((2.0 + p.mu) * l2 + p.mu * x * x) / (den * den);
}

inline Derivative rhs(const ModelParams& p, const State& s) {
    const double f = predation_kernel(p, s.x);
    Derivative d;
    d.dx_dt = p.alpha * s.x * (1.0 - s.x) - f * s.y;
    d.dy_dt = p.beta * f * s.y - p.gamma * s.y;
    if (!std::isfinite(d.dx_dt) || !std::isfinite(d.dy_dt))
        throw evaluation_error("rhs produced a non-finite value");
    return d;
}

namespace detail {

// g(x) = beta x^(2+mu) - gamma (lambda^2 + x^2); interior equilibria are its
// roots in (0, 1].
inline double interior_gap(const ModelParams& p, double x) {
    return p.beta * pow_mu(x, 2, p.mu) - p.gamma * (p.lambda * p.lambda + x * x);
}

inline double interior_gap_derivative(const ModelParams& p, double x) {
    return p.beta * (2.0 + p.mu) * pow_mu(x, 1, p.mu) - 2.0 * p.gamma * x;
}

} // namespace detail

// All equilibria: Origin, PhytoOnly, and every interior root of g on (0, 1].
// The scan grid includes x = 0 as a bracketing endpoint (g(0) = -gamma lambda^2 < 0),
// so roots below the first positive grid node are still found.
inline std::vector<Equilibrium> equilibria(const ModelParams& p, int scan_points = 10000) {
    p.validate();
    std::vector<Equilibrium> out;
    out.push_back({EquilibriumKind::Origin, {0.0, 0.0}});
    out.push_back({EquilibriumKind::PhytoOnly, {1.0, 0.0}});

    const double h = 1.0 / scan_points;
    double g_prev = detail::interior_gap(p, 0.0);
    for (int i = 1; i <= scan_points; ++i) {
        const double x1 = i * h;
        const double g1 = detail::interior_gap(p, x1);
        double root = -1.0;
        if (g1 == 0.0) {
            root = x1;
        } else if (g_prev * g1 < 0.0) {
            double lo = (i - 1) * h, hi = x1;
            double glo = g_prev;
            for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double gm = detail::interior_gap(p, mid);
                if (glo * gm <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            root = 0.5 * (lo + hi);
            // Newton polish drives |g| to the rounding floor so rhs vanishes
            // at the returned point even for extreme parameter magnitudes.
            for (int it = 0; it < 4; ++it) {
                const double gd = detail::interior_gap_derivative(p, root);
                if (gd == 0.0) break;
                const double next = root - detail::interior_gap(p, root) / gd;
                if (!(next > 0.0 && next <= 1.0)) break;
                root = next;
            }
        }
        if (root > 0.0) {
            const double ys = (p.alpha * p.beta / p.gamma) * root * (1.0 - root);
            out.push_back({EquilibriumKind::Interior, {root, ys}});
        }
        g_prev = g1;
    }
    return out;
}

inline std::vector<Equilibrium> interior_equilibria(const ModelParams& p) {
    std::vector<Equilibrium> out;
    for (const auto& e : equilibria(p))
        if (e.kind == EquilibriumKind::Interior) out.push_back(e);
    return out;
}

} // namespace tbdyn
