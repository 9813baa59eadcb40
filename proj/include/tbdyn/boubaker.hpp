#pragma once

// Boubaker polynomials B_m and the minimal positive roots v_q of B_{4q}.
//
// The defining three-term recurrence (the standard one from the BPES
// literature; the property the expansion scheme relies on, B_{4q}(0) = -2,
// is reproduced exactly):
//
//   B_0 = 1,  B_1 = x,  B_2 = x^2 + 2,  B_m = x B_{m-1} - B_{m-2}  (m > 2)

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tbdyn/errors.hpp"

namespace tbdyn {

// Exact integer coefficients, ascending powers; degree = order.
struct BoubakerPolynomial {
    int order = 0;
    std::vector<std::int64_t> coeffs;
};

namespace detail {

inline std::int64_t checked_sub(std::int64_t a, std::int64_t b, int order) {
    std::int64_t out;
    if (__builtin_sub_overflow(a, b, &out))
        throw coefficient_overflow("Boubaker coefficients overflow int64 at order " +
                                   std::to_string(order));
    return out;
}

} // namespace detail

inline BoubakerPolynomial boubaker_generate(int m) {
    if (m < 0) throw validation_error("polynomial order must be >= 0");
    if (m == 0) return {0, {1}};
    if (m == 1) return {1, {0, 1}};
    if (m == 2) return {2, {2, 0, 1}};
    std::vector<std::int64_t> prev2{0, 1};    // B_1
    std::vector<std::int64_t> prev1{2, 0, 1}; // B_2
    for (int cur = 3; cur <= m; ++cur) {
        std::vector<std::int64_t> cur_c(static_cast<size_t>(cur) + 1, 0);
        for (size_t k = 0; k < prev1.size(); ++k) cur_c[k + 1] = prev1[k]; // x * B_{m-1}
        for (size_t k = 0; k < prev2.size(); ++k)
            cur_c[k] = detail::checked_sub(cur_c[k], prev2[k], cur);
        prev2 = std::move(prev1);
        prev1 = std::move(cur_c);
    }
    return {m, std::move(prev1)};
}

// Horner evaluation of the stored coefficients.
inline double boubaker_eval(const BoubakerPolynomial& poly, double t) {
    double acc = 0.0;
    for (size_t k = poly.coeffs.size(); k-- > 0;)
        acc = acc * t + static_cast<double>(poly.coeffs[k]);
    return acc;
}

inline double boubaker_eval_derivative(const BoubakerPolynomial& poly, double t) {
    double acc = 0.0;
    for (size_t k = poly.coeffs.size(); k-- > 1;)
        acc = acc * t + static_cast<double>(poly.coeffs[k]) * static_cast<double>(k);
    return acc;
}

// (B_m(t), B'_m(t)) straight from the recurrence; no coefficient storage, so
// it works for arbitrarily large m and is well-conditioned on the root region.
inline std::pair<double, double> boubaker_value(int m, double t) {
    if (m < 0) throw validation_error("polynomial order must be >= 0");
    if (m == 0) return {1.0, 0.0};
    if (m == 1) return {t, 1.0};
    double b2 = 1.0, d2 = 0.0;          // B_{m-2}, B'_{m-2}
    double b1 = t, d1 = 1.0;            // B_{m-1}, B'_{m-1}
    double b = t * t + 2.0, d = 2.0 * t; // B_m
    for (int cur = 3; cur <= m; ++cur) {
        b2 = b1; d2 = d1;
        b1 = b; d1 = d;
        b = t * b1 - b2;
        d = b1 + t * d1 - d2;
    }
    return {b, d};
}

// Smallest positive root of B_{4q}: sign-change scan on (0, 2 sqrt(4q)] with
// step 1e-4, then bisection to bracket width < 1e-13.
inline double minimal_positive_root(int q) {
    if (q < 1) throw validation_error("q must be >= 1");
    const int m = 4 * q;
    const double hi_bound = 2.0 * std::sqrt(static_cast<double>(m));
    const double step = 1e-4;
    double t_prev = 0.0;
    double f_prev = boubaker_value(m, 0.0).first; // -2 for every 4q
    double lo = -1.0, hi = -1.0;
    for (double t = step; t <= hi_bound; t += step) {
        const double f = boubaker_value(m, t).first;
        if (f == 0.0) return t;
        if (f_prev * f < 0.0) {
            lo = t_prev;
            hi = t;
            break;
        }
        t_prev = t;
        f_prev = f;
    }
    if (lo < 0.0)
        throw root_search_error("no sign change of B_" + std::to_string(m) +
                                " found in (0, " + std::to_string(hi_bound) + "]");
    double flo = boubaker_value(m, lo).first;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        const double fm = boubaker_value(m, mid).first;
        if (flo * fm <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    // Newton refinement inside the certified bracket
    double v = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        auto [b, d] = boubaker_value(m, v);
        if (d == 0.0) break;
        const double next = v - b / d;
        if (!(next >= lo && next <= hi)) break;
        v = next;
    }
    return v;
}

// Write-once cache of minimal roots, populated eagerly.
class RootTable {
public:
    RootTable() = default;
    explicit RootTable(int q_max) { populate(q_max); }

    void populate(int q_max) {
        for (int q = 1; q <= q_max; ++q)
            if (!entries_.count(q)) entries_[q] = minimal_positive_root(q);
    }

    double at(int q) const {
        auto it = entries_.find(q);
        if (it == entries_.end())
            throw root_search_error("root table not populated for q = " + std::to_string(q));
        return it->second;
    }

    const std::map<int, double>& entries() const { return entries_; }

private:
    std::map<int, double> entries_;
};

} // namespace tbdyn
