#pragma once

// Boubaker polynomials expansion scheme for system (3):
//
//   x(t) = 1/(2 N0) sum_q xi_q  B_{4q}(v_q t / t_m)
//   y(t) = 1/(2 N0) sum_q xi'_q B_{4q}(v_q t / t_m)
//
// with sum xi_q = -N0 x0 and sum xi'_q = -N0 y0 (since B_{4q}(0) = -2).
// Coefficients minimize the squared-residual functionals Lambda (combined
// first equation, assembled from W_q, M_q, Z_q) and Lambda' (second
// equation), by damped Gauss-Newton with the two linear constraints
// eliminated through the last coefficient of each set.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "tbdyn/boubaker.hpp"
#include "tbdyn/model.hpp"

namespace tbdyn {

// t_m = 2 pi / sqrt(alpha gamma)
inline double characteristic_time(const ModelParams& p) {
    p.validate();
    return 2.0 * std::numbers::pi / std::sqrt(p.alpha * p.gamma);
}

struct BpesConfig {
    int n0 = 20;               // truncation order N0
    double t_m = 0.0;          // 0 -> characteristic_time(p)
    double x0 = 0.0, y0 = 0.0; // initial populations
    int quadrature_nodes = 257; // composite Simpson; odd, >= 4 n0 + 1
    int max_iterations = 200;
    double step_tolerance = 1e-10;
    double residual_tolerance = 1e-14;
    // false: the combined-equation residual keeps its natural 2 N0 factor
    // from the W/M/Z assembly; true: divide it out so both equations carry
    // the same scale.
    bool consistent_scaling = false;

    void validate() const {
        if (n0 < 2) throw validation_error("n0 must be >= 2");
        if (t_m < 0 || !std::isfinite(t_m)) throw validation_error("t_m must be >= 0");
        if (quadrature_nodes < 4 * n0 + 1)
            throw validation_error("quadrature_nodes must be >= 4 n0 + 1");
        if (quadrature_nodes % 2 == 0)
            throw validation_error("quadrature_nodes must be odd (composite Simpson)");
        if (max_iterations < 1) throw validation_error("max_iterations must be >= 1");
    }
};

struct CoefficientSet {
    std::vector<double> xi;
    std::vector<double> xi_prime;
};

// The per-index residual building blocks, exactly as printed:
//   W_q = beta (v_q/t_m) B'_{4q}(t*) - beta alpha B_{4q}(t*)
//   M_q = sqrt(beta alpha / (2 N0)) B_{4q}(t*)
//   Z_q = -(v_q/t_m) B'_{4q}(t*) - gamma B_{4q}(t*)
//   P_q = (v_q/t_m) B'_{4q}(t*)              with t* = v_q t / t_m.
class ResidualTerms {
public:
    ResidualTerms(const ModelParams& p, const BpesConfig& cfg, const RootTable& roots)
        : p_(p), n0_(cfg.n0), t_m_(cfg.t_m > 0 ? cfg.t_m : characteristic_time(p)) {
        for (int q = 1; q <= n0_; ++q) v_.push_back(roots.at(q));
    }

    double t_m() const { return t_m_; }
    double root(int q) const { return v_.at(q - 1); }

    double w(int q, double t) const {
        auto [b, d] = basis(q, t);
        return p_.beta * (root(q) / t_m_) * d - p_.beta * p_.alpha * b;
    }
    double m(int q, double t) const {
        return std::sqrt(p_.beta * p_.alpha / (2.0 * n0_)) * basis(q, t).first;
    }
    double z(int q, double t) const {
        auto [b, d] = basis(q, t);
        return -(root(q) / t_m_) * d - p_.gamma * b;
    }
    double pterm(int q, double t) const { return (root(q) / t_m_) * basis(q, t).second; }

    // (B_{4q}(t*), B'_{4q}(t*)) at time t
    std::pair<double, double> basis(int q, double t) const {
        return boubaker_value(4 * q, root(q) * t / t_m_);
    }

private:
    ModelParams p_;
    int n0_;
    double t_m_;
    std::vector<double> v_;
};

inline ResidualTerms build_residuals(const ModelParams& p, const BpesConfig& cfg,
                                     const RootTable& roots) {
    p.validate();
    cfg.validate();
    return ResidualTerms(p, cfg, roots);
}

struct BpesDiagnostics {
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
    std::vector<double> objective_history; // accepted iterates, non-increasing
    double lambda_value = 0;        // Lambda at the solution, active convention
    double lambda_prime_value = 0;  // Lambda' at the solution
    double lambda_other_convention = 0; // Lambda under the other scaling, for comparison
};

namespace detail {

// Precomputed basis tables over the quadrature grid.
struct BpesTables {
    int n0;
    double t_m;
    std::vector<double> nodes;   // quadrature times
    std::vector<double> weights; // Simpson weights
    std::vector<double> B;       // [node * n0 + q]  B_{4(q+1)}(t*)
    std::vector<double> dB;      //                  B'_{4(q+1)}(t*)
    std::vector<double> vt;      // v_q / t_m

    BpesTables(const ModelParams& p, const BpesConfig& cfg, const RootTable& roots)
        : n0(cfg.n0), t_m(cfg.t_m > 0 ? cfg.t_m : characteristic_time(p)) {
        const int n = cfg.quadrature_nodes;
        const double h = t_m / (n - 1);
        nodes.resize(n);
        weights.assign(n, h / 3.0);
        for (int i = 0; i < n; ++i) {
            nodes[i] = i * h;
            if (i > 0 && i < n - 1) weights[i] *= (i % 2 == 1) ? 4.0 : 2.0;
        }
        B.resize(static_cast<size_t>(n) * n0);
        dB.resize(static_cast<size_t>(n) * n0);
        for (int q = 0; q < n0; ++q) {
            const double v = roots.at(q + 1);
            vt.push_back(v / t_m);
            for (int i = 0; i < n; ++i) {
                auto [b, d] = boubaker_value(4 * (q + 1), v * nodes[i] / t_m);
                B[static_cast<size_t>(i) * n0 + q] = b;
                dB[static_cast<size_t>(i) * n0 + q] = d;
            }
        }
    }
};

// Gaussian elimination with partial pivoting; A is n x n row-major.
inline bool solve_linear(std::vector<double> A, std::vector<double> b,
                         std::vector<double>& x) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
        if (A[piv * n + col] == 0.0) return false;
        if (piv != col) {
            for (int c = col; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        const double inv = 1.0 / A[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = A[r * n + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * x[c];
        x[r] = s / A[r * n + r];
    }
    return true;
}

} // namespace detail

class BpesProblem;

struct BpesSolution {
    CoefficientSet coeffs;
    double objective_value = 0; // Lambda + Lambda' surrogate at the solution
    BpesDiagnostics diagnostics;
    // evaluation context
    ModelParams params;
    BpesConfig config;
    std::vector<double> roots; // v_1 .. v_{N0}
    double t_m = 0;

    State evaluate(double t) const {
        const int n0 = config.n0;
        double x = 0.0, y = 0.0;
        for (int q = 0; q < n0; ++q) {
            const double b = boubaker_value(4 * (q + 1), roots[q] * t / t_m).first;
            x += coeffs.xi[q] * b;
            y += coeffs.xi_prime[q] * b;
        }
        return {x / (2.0 * n0), y / (2.0 * n0)};
    }
};

// Assembles residual vectors and analytic Jacobians over the quadrature grid
// for the eliminated coefficient vector [xi_1..xi_{N0-1}, xi'_1..xi'_{N0-1}].
class BpesProblem {
public:
    BpesProblem(const ModelParams& p, const BpesConfig& cfg, const RootTable& roots)
        : p_(p), cfg_(cfg), tab_(p, cfg, roots) {
        p_.validate();
        cfg_.validate();
    }

    const detail::BpesTables& tables() const { return tab_; }
    int free_size() const { return 2 * (cfg_.n0 - 1); }

    CoefficientSet expand(const std::vector<double>& free) const {
        const int n0 = cfg_.n0;
        CoefficientSet c;
        c.xi.assign(n0, 0.0);
        c.xi_prime.assign(n0, 0.0);
        double sx = 0.0, sy = 0.0;
        for (int q = 0; q < n0 - 1; ++q) {
            c.xi[q] = free[q];
            c.xi_prime[q] = free[n0 - 1 + q];
            sx += free[q];
            sy += free[n0 - 1 + q];
        }
        c.xi[n0 - 1] = -n0 * cfg_.x0 - sx;
        c.xi_prime[n0 - 1] = -n0 * cfg_.y0 - sy;
        return c;
    }

    // Weighted residual vector: sqrt(w_i) r1(t_i) then sqrt(w_i) r2(t_i).
    std::vector<double> residual_vector(const CoefficientSet& c) const {
        const int n = static_cast<int>(tab_.nodes.size());
        const int n0 = cfg_.n0;
        std::vector<double> r(2 * n);
        const double scale1 = cfg_.consistent_scaling ? 1.0 / (2.0 * n0) : 1.0;
        const double wfac = std::sqrt(p_.beta * p_.alpha / (2.0 * n0));
        for (int i = 0; i < n; ++i) {
            const double* Bi = &tab_.B[static_cast<size_t>(i) * n0];
            const double* dBi = &tab_.dB[static_cast<size_t>(i) * n0];
            double sw = 0.0, sm = 0.0, sz = 0.0, sx = 0.0, sy = 0.0, sdy = 0.0;
            for (int q = 0; q < n0; ++q) {
                const double db_scaled = tab_.vt[q] * dBi[q];
                sw += c.xi[q] * (p_.beta * db_scaled - p_.beta * p_.alpha * Bi[q]);
                sm += c.xi[q] * wfac * Bi[q];
                sz += c.xi_prime[q] * (-db_scaled - p_.gamma * Bi[q]);
                sx += c.xi[q] * Bi[q];
                sy += c.xi_prime[q] * Bi[q];
                sdy += c.xi_prime[q] * db_scaled;
            }
            const double sqw = std::sqrt(tab_.weights[i]);
            r[i] = sqw * scale1 * (sw + sm * sm - sz);
            const double xs = sx / (2.0 * n0);
            const double ys = sy / (2.0 * n0);
            const double dys = sdy / (2.0 * n0);
            const double f = predation_kernel(p_, xs); // throws for xs<0, fractional mu
            r[n + i] = sqw * (dys - p_.beta * f * ys + p_.gamma * ys);
            if (!std::isfinite(r[i]) || !std::isfinite(r[n + i]))
                throw evaluation_error("non-finite BPES residual");
        }
        return r;
    }

    // Analytic Jacobian of residual_vector w.r.t. the free coefficients.
    std::vector<double> residual_jacobian(const CoefficientSet& c) const {
        const int n = static_cast<int>(tab_.nodes.size());
        const int n0 = cfg_.n0;
        const int nf = free_size();
        std::vector<double> J(static_cast<size_t>(2 * n) * nf, 0.0);
        const double scale1 = cfg_.consistent_scaling ? 1.0 / (2.0 * n0) : 1.0;
        const double wfac = std::sqrt(p_.beta * p_.alpha / (2.0 * n0));
        for (int i = 0; i < n; ++i) {
            const double* Bi = &tab_.B[static_cast<size_t>(i) * n0];
            const double* dBi = &tab_.dB[static_cast<size_t>(i) * n0];
            double sm = 0.0, sx = 0.0, sy = 0.0;
            for (int q = 0; q < n0; ++q) {
                sm += c.xi[q] * wfac * Bi[q];
                sx += c.xi[q] * Bi[q];
                sy += c.xi_prime[q] * Bi[q];
            }
            const double xs = sx / (2.0 * n0);
            const double ys = sy / (2.0 * n0);
            const double f = predation_kernel(p_, xs);
            const double fp = predation_kernel_derivative(p_, xs);
            const double sqw = std::sqrt(tab_.weights[i]);
            auto wq = [&](int q) { return p_.beta * tab_.vt[q] * dBi[q] -
                                          p_.beta * p_.alpha * Bi[q]; };
            const double w_last = wq(n0 - 1);
            const double m_last = wfac * Bi[n0 - 1];
            const double z_last = -tab_.vt[n0 - 1] * dBi[n0 - 1] - p_.gamma * Bi[n0 - 1];
            const double p_last = tab_.vt[n0 - 1] * dBi[n0 - 1];
            for (int q = 0; q < n0 - 1; ++q) {
                const double dW = wq(q) - w_last;
                const double dM = wfac * Bi[q] - m_last;
                const double dZ = (-tab_.vt[q] * dBi[q] - p_.gamma * Bi[q]) - z_last;
                const double dBq = (Bi[q] - Bi[n0 - 1]) / (2.0 * n0);
                const double dPq = (tab_.vt[q] * dBi[q] - p_last) / (2.0 * n0);
                // r1 rows
                J[static_cast<size_t>(i) * nf + q] = sqw * scale1 * (dW + 2.0 * sm * dM);
                J[static_cast<size_t>(i) * nf + (n0 - 1 + q)] = sqw * scale1 * (-dZ);
                // r2 rows
                J[static_cast<size_t>(n + i) * nf + q] = sqw * (-p_.beta * fp * ys * dBq);
                J[static_cast<size_t>(n + i) * nf + (n0 - 1 + q)] =
                    sqw * (dPq - (p_.beta * f - p_.gamma) * dBq);
            }
        }
        return J;
    }

    // Split objective: (Lambda, Lambda') under the active scaling.
    std::pair<double, double> functionals(const CoefficientSet& c) const {
        const std::vector<double> r = residual_vector(c);
        const int n = static_cast<int>(tab_.nodes.size());
        double l1 = 0.0, l2 = 0.0;
        for (int i = 0; i < n; ++i) {
            l1 += r[i] * r[i];
            l2 += r[n + i] * r[n + i];
        }
        return {l1, l2};
    }

    const ModelParams& params() const { return p_; }
    const BpesConfig& config() const { return cfg_; }

private:
    ModelParams p_;
    BpesConfig cfg_;
    detail::BpesTables tab_;
};

// Squared-residual quadrature of the combined first equation.
inline double lambda_functional(const CoefficientSet& c, const ModelParams& p,
                                const BpesConfig& cfg, const RootTable& roots) {
    if (static_cast<int>(c.xi.size()) != cfg.n0 ||
        static_cast<int>(c.xi_prime.size()) != cfg.n0)
        throw validation_error("coefficient lengths must equal n0");
    return BpesProblem(p, cfg, roots).functionals(c).first;
}

// Squared-residual quadrature of the second equation, with
// x(t), y(t) reconstructed from the series including the 1/(2 N0) factor.
inline double lambda_prime_functional(const CoefficientSet& c, const ModelParams& p,
                                      const BpesConfig& cfg, const RootTable& roots) {
    if (static_cast<int>(c.xi.size()) != cfg.n0 ||
        static_cast<int>(c.xi_prime.size()) != cfg.n0)
        throw validation_error("coefficient lengths must equal n0");
    return BpesProblem(p, cfg, roots).functionals(c).second;
}

inline BpesSolution solve(const ModelParams& p, BpesConfig cfg, const RootTable* roots = nullptr) {
    p.validate();
    cfg.validate();
    RootTable local;
    if (!roots) {
        local.populate(cfg.n0);
        roots = &local;
    }
    if (cfg.t_m <= 0) cfg.t_m = characteristic_time(p);
    BpesProblem prob(p, cfg, *roots);

    const int n0 = cfg.n0;
    const int nf = prob.free_size();
    // xi_q = -x0, xi'_q = -y0 uniformly: satisfies both constraints exactly
    std::vector<double> free(nf);
    for (int q = 0; q < n0 - 1; ++q) {
        free[q] = -cfg.x0;
        free[n0 - 1 + q] = -cfg.y0;
    }

    CoefficientSet c = prob.expand(free);
    std::vector<double> r = prob.residual_vector(c);
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    double obj = dot(r, r);

    BpesDiagnostics diag;
    diag.objective_history.push_back(obj);
    double lm = 1e-6;
    std::string stop = "max_iterations";
    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
        const std::vector<double> J = prob.residual_jacobian(c);
        const int m = static_cast<int>(r.size());
        std::vector<double> H(static_cast<size_t>(nf) * nf, 0.0);
        std::vector<double> g(nf, 0.0);
        for (int row = 0; row < m; ++row) {
            const double* Jr = &J[static_cast<size_t>(row) * nf];
            const double rv = r[row];
            for (int a = 0; a < nf; ++a) {
                g[a] += Jr[a] * rv;
                for (int b = a; b < nf; ++b) H[static_cast<size_t>(a) * nf + b] += Jr[a] * Jr[b];
            }
        }
        for (int a = 0; a < nf; ++a)
            for (int b = 0; b < a; ++b)
                H[static_cast<size_t>(a) * nf + b] = H[static_cast<size_t>(b) * nf + a];

        // Levenberg-Marquardt: inflate the diagonal until the step decreases
        // the objective; shrink the damping after each accepted step.
        bool accepted = false;
        std::vector<double> delta, cand_free;
        CoefficientSet cand_c;
        std::vector<double> cand_r;
        double cand_obj = 0.0;
        for (int tries = 0; tries < 60 && !accepted; ++tries) {
            std::vector<double> Hd = H;
            for (int a = 0; a < nf; ++a) {
                const double dia = H[static_cast<size_t>(a) * nf + a];
                Hd[static_cast<size_t>(a) * nf + a] = dia + lm * (dia > 0 ? dia : 1.0);
            }
            std::vector<double> neg_g(nf);
            for (int a = 0; a < nf; ++a) neg_g[a] = -g[a];
            if (!detail::solve_linear(Hd, neg_g, delta)) {
                lm *= 10.0;
                continue;
            }
            cand_free = free;
            for (int a = 0; a < nf; ++a) cand_free[a] += delta[a];
            cand_c = prob.expand(cand_free);
            cand_r = prob.residual_vector(cand_c); // argument_domain_error propagates
            cand_obj = dot(cand_r, cand_r);
            if (cand_obj < obj)
                accepted = true;
            else
                lm *= 4.0;
        }
        if (!accepted) {
            stop = "no_descent";
            break;
        }
        lm = std::max(lm * 0.3, 1e-14);
        double step_norm = 0.0;
        for (double d : delta) step_norm += d * d;
        step_norm = std::sqrt(step_norm);
        free = cand_free;
        c = cand_c;
        r = cand_r;
        obj = cand_obj;
        diag.objective_history.push_back(obj);
        if (step_norm < cfg.step_tolerance) {
            stop = "step_tolerance";
            ++it;
            break;
        }
        if (obj < cfg.residual_tolerance) {
            stop = "residual_tolerance";
            ++it;
            break;
        }
    }

    diag.iterations = it;
    diag.converged = stop == "step_tolerance" || stop == "residual_tolerance";
    diag.stop_reason = stop;
    auto [l1, l2] = prob.functionals(c);
    diag.lambda_value = l1;
    diag.lambda_prime_value = l2;
    {
        BpesConfig other = cfg;
        other.consistent_scaling = !cfg.consistent_scaling;
        diag.lambda_other_convention = BpesProblem(p, other, *roots).functionals(c).first;
    }

    BpesSolution sol;
    sol.coeffs = c;
    sol.objective_value = obj;
    sol.diagnostics = std::move(diag);
    sol.params = p;
    sol.config = cfg;
    sol.t_m = cfg.t_m;
    for (int q = 1; q <= n0; ++q) sol.roots.push_back(roots->at(q));
    return sol;
}

} // namespace tbdyn
