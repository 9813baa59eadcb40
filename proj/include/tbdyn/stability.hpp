#pragma once

// Local stability via the variational matrix and Routh-Hurwitz, plus the
// global Lyapunov machinery: the finite sums M, N, P, Q and the sampled
// sufficient condition
//
//   beta { lambda^2 P + x^2 x*^2 Q } < x^(1+mu) { x*^2 + lambda^2 }   (*)

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "tbdyn/model.hpp"

namespace tbdyn {

struct JacobianMatrix {
    double j11, j12, j21, j22;
    double trace() const { return j11 + j22; }
    double determinant() const { return j11 * j22 - j12 * j21; }
    double norm() const {
        return std::max(std::max(std::abs(j11), std::abs(j12)),
                        std::max(std::abs(j21), std::abs(j22)));
    }
};

// Analytic partial derivatives of rhs. At x = 0 the predation terms vanish
// for mu >= 0, so the formulas need no special-casing there.
inline JacobianMatrix jacobian(const ModelParams& p, const State& s) {
    const double f = predation_kernel(p, s.x);
    const double fp = predation_kernel_derivative(p, s.x);
    JacobianMatrix j;
    j.j11 = p.alpha * (1.0 - 2.0 * s.x) - s.y * fp;
    j.j12 = -f;
    j.j21 = p.beta * s.y * fp;
    j.j22 = p.beta * f - p.gamma;
    return j;
}

enum class StabilityKind {
    Saddle,
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    Center,
    NonHyperbolic
};

inline const char* to_string(StabilityKind k) {
    switch (k) {
        case StabilityKind::Saddle: return "Saddle";
        case StabilityKind::StableNode: return "StableNode";
        case StabilityKind::StableFocus: return "StableFocus";
        case StabilityKind::UnstableNode: return "UnstableNode";
        case StabilityKind::UnstableFocus: return "UnstableFocus";
        case StabilityKind::Center: return "Center";
        default: return "NonHyperbolic";
    }
}

struct LocalVerdict {
    StabilityKind kind;
    double trace;
    double determinant;
    std::complex<double> eig1, eig2;

    bool stable() const {
        return kind == StabilityKind::StableNode || kind == StabilityKind::StableFocus;
    }
    bool unstable() const {
        return kind == StabilityKind::UnstableNode || kind == StabilityKind::UnstableFocus ||
               kind == StabilityKind::Saddle;
    }
};

inline constexpr double kHyperbolicityTol = 1e-10;

inline LocalVerdict classify_jacobian(const JacobianMatrix& j) {
    LocalVerdict v;
    v.trace = j.trace();
    v.determinant = j.determinant();
    const double t = v.trace, d = v.determinant;
    const double disc = t * t - 4.0 * d;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        v.eig1 = {0.5 * (t + s), 0.0};
        v.eig2 = {0.5 * (t - s), 0.0};
    } else {
        const double s = std::sqrt(-disc);
        v.eig1 = {0.5 * t, 0.5 * s};
        v.eig2 = {0.5 * t, -0.5 * s};
    }
    const double scale = std::max(j.norm(), 1e-300);
    if (std::abs(d) < kHyperbolicityTol * scale * scale) {
        v.kind = StabilityKind::NonHyperbolic;
    } else if (d < 0.0) {
        v.kind = StabilityKind::Saddle;
    } else if (std::abs(t) < kHyperbolicityTol * scale) {
        v.kind = StabilityKind::NonHyperbolic;
    } else if (t < 0.0) {
        v.kind = disc >= 0.0 ? StabilityKind::StableNode : StabilityKind::StableFocus;
    } else {
        v.kind = disc >= 0.0 ? StabilityKind::UnstableNode : StabilityKind::UnstableFocus;
    }
    return v;
}

// E0 = (0,0): Jacobian diag(alpha, -gamma), always a saddle. The unstable
// manifold is the x-axis, the stable manifold the y-axis.
struct OriginVerdict {
    LocalVerdict local;
    State unstable_direction{1.0, 0.0};
    State stable_direction{0.0, 1.0};
};

inline OriginVerdict classify_origin(const ModelParams& p) {
    p.validate();
    OriginVerdict o;
    o.local = classify_jacobian(jacobian(p, {0.0, 0.0}));
    return o;
}

// Verdict of one of the closed-form stability inequalities, evaluated
// verbatim and cross-checked against the numeric Jacobian verdict.
enum class InequalityVerdict { Stable, Unstable, Boundary, Undefined };

inline const char* to_string(InequalityVerdict v) {
    switch (v) {
        case InequalityVerdict::Stable: return "Stable";
        case InequalityVerdict::Unstable: return "Unstable";
        case InequalityVerdict::Boundary: return "Boundary";
        default: return "Undefined";
    }
}

struct InequalityReport {
    double lhs = 0;
    double rhs = 0;
    InequalityVerdict verdict = InequalityVerdict::Undefined;
    bool agrees_with_numeric = true; // false only when both sides are decisive and differ
};

namespace detail {

inline bool ineq_agrees(const InequalityReport& ineq, const LocalVerdict& num) {
    if (ineq.verdict == InequalityVerdict::Undefined ||
        ineq.verdict == InequalityVerdict::Boundary)
        return true;
    if (!num.stable() && !num.unstable()) return true; // numeric non-hyperbolic
    return (ineq.verdict == InequalityVerdict::Stable) == num.stable();
}

} // namespace detail

struct EquilibriumClassification {
    LocalVerdict numeric;
    InequalityReport printed;
};

// E1 = (1,0): printed condition 1^(1+mu)/(1+lambda^2) vs gamma/beta
// (the 1^(1+mu) factor is literally 1 and is implemented as such).
inline EquilibriumClassification classify_phyto_only(const ModelParams& p) {
    p.validate();
    EquilibriumClassification c;
    c.numeric = classify_jacobian(jacobian(p, {1.0, 0.0}));
    c.printed.lhs = 1.0 / (1.0 + p.lambda * p.lambda);
    c.printed.rhs = p.gamma / p.beta;
    const double scale = std::max(std::abs(c.printed.lhs), std::abs(c.printed.rhs));
    if (std::abs(c.printed.lhs - c.printed.rhs) <= 1e-12 * scale) {
        c.printed.verdict = InequalityVerdict::Boundary;
        c.numeric.kind = StabilityKind::NonHyperbolic;
    } else {
        c.printed.verdict = c.printed.lhs < c.printed.rhs ? InequalityVerdict::Stable
                                                          : InequalityVerdict::Unstable;
    }
    c.printed.agrees_with_numeric = detail::ineq_agrees(c.printed, c.numeric);
    return c;
}

// E*: numeric Routh-Hurwitz verdict plus the closed-form condition
//   (x*-1)/(lambda^2+x*^2) < x*/((mu+1) lambda^2 + (mu-1) x*^2).
// The numeric verdict is authoritative; the printed one is reported as-is.
inline EquilibriumClassification classify_interior(const ModelParams& p, const Equilibrium& e) {
    p.validate();
    if (e.kind != EquilibriumKind::Interior)
        throw validation_error("classify_interior requires an Interior equilibrium");
    EquilibriumClassification c;
    c.numeric = classify_jacobian(jacobian(p, e.state));
    const double xs = e.state.x;
    const double l2 = p.lambda * p.lambda;
    c.printed.lhs = (xs - 1.0) / (l2 + xs * xs);
    const double den = (p.mu + 1.0) * l2 + (p.mu - 1.0) * xs * xs;
    if (std::abs(den) < 1e-14 * (l2 + xs * xs)) {
        c.printed.verdict = InequalityVerdict::Undefined;
        c.printed.rhs = std::numeric_limits<double>::quiet_NaN();
    } else {
        c.printed.rhs = xs / den;
        c.printed.verdict = c.printed.lhs < c.printed.rhs ? InequalityVerdict::Stable
                                                          : InequalityVerdict::Unstable;
    }
    c.printed.agrees_with_numeric = detail::ineq_agrees(c.printed, c.numeric);
    return c;
}

// Finite sums from the Lyapunov proof, for integer mu (empty sums are 0):
//   M = sum_{k=0}^{mu-2} x^(mu-2-k) x*^k      N = sum_{k=0}^{mu}   x^(mu-k)   x*^k
//   P = sum_{k=0}^{mu+1} x^(mu+1-k) x*^k      Q = sum_{k=0}^{mu-1} x^(mu-1-k) x*^k
struct SeriesValues {
    double m_val, n_val, p_val, q_val;
};

inline SeriesValues series_values(double x, double x_star, double mu) {
    if (!is_integer_mu(mu) || mu < 0)
        throw unsupported_exponent("series M, N, P, Q require integer mu >= 0");
    if (!(x > 0) || !(x_star > 0))
        throw domain_error("series_values requires x > 0 and x_star > 0");
    const long m = std::llround(mu);
    auto homogeneous_sum = [&](long top) {
        // sum_{k=0}^{top} x^(top-k) x*^k; top < 0 gives the empty sum
        double s = 0.0;
        for (long k = 0; k <= top; ++k)
            s += detail::powi(x, top - k) * detail::powi(x_star, k);
        return s;
    };
    return {homogeneous_sum(m - 2), homogeneous_sum(m), homogeneous_sum(m + 1),
            homogeneous_sum(m - 1)};
}

struct XDomain {
    double lo = 0.0;
    double hi = 1.0;
};

struct GlobalReport {
    bool holds = false;
    double worst_margin = 0;  // min over samples of RHS - LHS of (*)
    double worst_x = 0;
    int samples = 0;
    XDomain domain;
    double c1 = 0.5, c2 = 0.5;
};

// Samples condition (*) at `samples` uniformly spaced x in (lo, hi]; holds
// iff strictly satisfied at every sample.
inline GlobalReport global_condition(const ModelParams& p, const Equilibrium& e,
                                     XDomain domain = {}, int samples = 10001) {
    p.validate();
    if (e.kind != EquilibriumKind::Interior)
        throw validation_error("global_condition requires an Interior equilibrium");
    if (!is_integer_mu(p.mu))
        throw unsupported_exponent("global_condition requires integer mu");
    if (!(domain.lo >= 0) || !(domain.hi > domain.lo))
        throw validation_error("invalid x domain");
    if (samples < 1) throw validation_error("samples must be >= 1");

    const double xs = e.state.x;
    const double l2 = p.lambda * p.lambda;
    GlobalReport r;
    r.samples = samples;
    r.domain = domain;
    r.worst_margin = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= samples; ++i) {
        const double x = domain.lo + i * (domain.hi - domain.lo) / samples;
        const SeriesValues sv = series_values(x, xs, p.mu);
        const double lhs = p.beta * (l2 * sv.p_val + x * x * xs * xs * sv.q_val);
        const double rhsv = detail::pow_mu(x, 1, p.mu) * (xs * xs + l2);
        const double margin = rhsv - lhs;
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.worst_x = x;
        }
    }
    r.holds = r.worst_margin > 0.0;
    return r;
}

// V = c1 [x - x* - x* ln(x/x*)] + c2 [y - y* - y* ln(y/y*)], positive
// definite about the interior equilibrium on the open positive quadrant.
inline double lyapunov_value(const Equilibrium& e, const State& s, double c1 = 0.5,
                             double c2 = 0.5) {
    if (e.kind != EquilibriumKind::Interior)
        throw validation_error("lyapunov_value requires an Interior equilibrium");
    if (!(s.x > 0) || !(s.y > 0))
        throw domain_error("lyapunov_value requires x > 0 and y > 0");
    const double xs = e.state.x, ys = e.state.y;
    return c1 * (s.x - xs - xs * std::log(s.x / xs)) +
           c2 * (s.y - ys - ys * std::log(s.y / ys));
}

// dV/dt along the flow, by the chain rule.
inline double lyapunov_derivative(const ModelParams& p, const Equilibrium& e, const State& s,
                                  double c1 = 0.5, double c2 = 0.5) {
    if (e.kind != EquilibriumKind::Interior)
        throw validation_error("lyapunov_derivative requires an Interior equilibrium");
    if (!(s.x > 0) || !(s.y > 0))
        throw domain_error("lyapunov_derivative requires x > 0 and y > 0");
    const Derivative d = rhs(p, s);
    return c1 * (1.0 - e.state.x / s.x) * d.dx_dt + c2 * (1.0 - e.state.y / s.y) * d.dy_dt;
}

// Aggregate per-parameter-set report, the payload of the `stability` CLI command.
struct StabilityReport {
    ModelParams params;
    OriginVerdict origin;
    EquilibriumClassification phyto_only;
    std::vector<Equilibrium> interior;
    std::vector<EquilibriumClassification> interior_classification;
    std::vector<GlobalReport> global; // one per interior point; empty if mu fractional
    bool series_supported = false;
};

inline StabilityReport stability_report(const ModelParams& p) {
    p.validate();
    StabilityReport rep;
    rep.params = p;
    rep.origin = classify_origin(p);
    rep.phyto_only = classify_phyto_only(p);
    rep.interior = interior_equilibria(p);
    rep.series_supported = is_integer_mu(p.mu);
    for (const auto& e : rep.interior) {
        rep.interior_classification.push_back(classify_interior(p, e));
        if (rep.series_supported) rep.global.push_back(global_condition(p, e));
    }
    return rep;
}

} // namespace tbdyn
