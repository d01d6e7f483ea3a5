#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "graphflow/errors.hpp"
#include "graphflow/graph.hpp"
#include "graphflow/linsolve.hpp"
#include "graphflow/potential.hpp"

namespace graphflow {

// Model for dh/dt = -alpha L h - alpha_p Lap_p(h) - grad psi(h) + s(t).
struct ModelParams {
    double alpha;
    double alpha_p;
    double p;
    DissipationPotential potential;
};

inline void validate(const ModelParams& mp) {
    if (mp.alpha < 0.0 || mp.alpha_p < 0.0)
        throw std::invalid_argument("alpha and alpha_p must be nonnegative");
    if (mp.alpha_p > 0.0 && mp.p < 2.0)
        throw std::invalid_argument("p must be >= 2");
}

// F(h) = alpha L h + alpha_p Lap_p(h) + grad psi(h); the flow is
// dh/dt = -F(h) + s.
inline Eigen::VectorXd drift(const ModelParams& mp, const Graph& g,
                             const Eigen::VectorXd& h) {
    Eigen::VectorXd f = mp.potential.grad(h);
    if (mp.alpha != 0.0) f += mp.alpha * laplacian_apply(g, h);
    if (mp.alpha_p != 0.0) f += mp.alpha_p * p_laplacian_apply(g, h, mp.p);
    return f;
}

// E(h) = alpha/2 <h, L h> + alpha_p/p sum_E W |h_i - h_j|^p + psi(h),
// so that grad E = F.
inline double energy(const ModelParams& mp, const Graph& g,
                     const Eigen::VectorXd& h) {
    double e = mp.potential.value(h);
    if (mp.alpha != 0.0) e += 0.5 * mp.alpha * h.dot(laplacian_apply(g, h));
    if (mp.alpha_p != 0.0)
        e += mp.alpha_p / mp.p * dirichlet_energy_p(g, h, mp.p);
    return e;
}

inline double total_mass(const Eigen::VectorXd& h) { return h.sum(); }

namespace detail {

// Jacobian of F at h applied to v. The p-term linearization carries edge
// coefficients (p-1)|h_i - h_j|^{p-2}; together with the psi Hessian this is
// SPD whenever mu > 0.
inline Eigen::VectorXd drift_jacobian_apply(const ModelParams& mp, const Graph& g,
                                            const Eigen::VectorXd& h,
                                            const Eigen::VectorXd& hess_diag,
                                            const Eigen::VectorXd& v) {
    Eigen::VectorXd y = hess_diag.cwiseProduct(v);
    for (const auto& e : g.edges()) {
        double c = mp.alpha * e.w;
        if (mp.alpha_p != 0.0) {
            const double d = h[e.u] - h[e.v];
            double coef;
            if (mp.p == 2.0)
                coef = 1.0;
            else
                coef = d == 0.0 ? 0.0 : std::pow(std::abs(d), mp.p - 2.0);
            c += mp.alpha_p * e.w * (mp.p - 1.0) * coef;
        }
        const double t = c * (v[e.u] - v[e.v]);
        y[e.u] += t;
        y[e.v] -= t;
    }
    return y;
}

inline Eigen::MatrixXd drift_jacobian_dense(const ModelParams& mp, const Graph& g,
                                            const Eigen::VectorXd& h,
                                            const Eigen::VectorXd& hess_diag) {
    const int n = g.node_count();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    J.diagonal() = hess_diag;
    for (const auto& e : g.edges()) {
        double c = mp.alpha * e.w;
        if (mp.alpha_p != 0.0) {
            const double d = h[e.u] - h[e.v];
            double coef;
            if (mp.p == 2.0)
                coef = 1.0;
            else
                coef = d == 0.0 ? 0.0 : std::pow(std::abs(d), mp.p - 2.0);
            c += mp.alpha_p * e.w * (mp.p - 1.0) * coef;
        }
        J(e.u, e.u) += c;
        J(e.v, e.v) += c;
        J(e.u, e.v) -= c;
        J(e.v, e.u) -= c;
    }
    return J;
}

}  // namespace detail

// Solve F(h) = s for the unique equilibrium (mu > 0 makes F strongly
// monotone). Quadratic potentials with alpha_p = 0 reduce to one SPD solve;
// otherwise damped Newton with a backtracking line search on the residual.
inline Eigen::VectorXd solve_equilibrium(const ModelParams& mp, const Graph& g,
                                         const Eigen::VectorXd& s_inf,
                                         double tol = 1e-10, int max_iter = 100) {
    validate(mp);
    if (!(mp.potential.mu() > 0.0))
        throw std::invalid_argument("equilibrium requires mu > 0");
    const int n = g.node_count();
    if (s_inf.size() != n) throw std::invalid_argument("s_inf size mismatch");

    const auto& quad = mp.potential.quadratic();
    if (mp.alpha_p == 0.0 && quad.has_value()) {
        const Eigen::VectorXd rhs = s_inf + quad->gamma.cwiseProduct(quad->h_star);
        return solve_shifted_laplacian(g, mp.alpha, quad->gamma, rhs);
    }

    Eigen::VectorXd h = quad.has_value() ? quad->h_star : Eigen::VectorXd::Zero(n);
    const double target = tol * (1.0 + s_inf.norm());
    double rnorm = (drift(mp, g, h) - s_inf).norm();
    for (int it = 0; it < max_iter; ++it) {
        if (rnorm <= target) return h;
        const Eigen::VectorXd r = drift(mp, g, h) - s_inf;
        const Eigen::VectorXd hd = mp.potential.hessian_diagonal(h);
        Eigen::VectorXd delta;
        if (n < 200) {
            delta = detail::drift_jacobian_dense(mp, g, h, hd).ldlt().solve(r);
        } else {
            auto op = [&](const Eigen::VectorXd& v) {
                return detail::drift_jacobian_apply(mp, g, h, hd, v);
            };
            delta = cg_solve(op, r, Eigen::VectorXd::Zero(n)).x;
        }
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Eigen::VectorXd trial = h - step * delta;
            const double tnorm = (drift(mp, g, trial) - s_inf).norm();
            if (tnorm < rnorm) {
                h = trial;
                rnorm = tnorm;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            throw NumericalError("solve_equilibrium: line search stalled", rnorm);
    }
    if (rnorm <= target) return h;
    throw NumericalError("solve_equilibrium: no convergence in " +
                             std::to_string(max_iter) + " iterations",
                         rnorm);
}

struct SensitivityCheck {
    double lhs;  // ||h*(s1) - h*(s2)||
    double rhs;  // ||s1 - s2|| / mu
};

inline SensitivityCheck sensitivity_check(const ModelParams& mp, const Graph& g,
                                          const Eigen::VectorXd& s1,
                                          const Eigen::VectorXd& s2) {
    SensitivityCheck out;
    out.lhs = (solve_equilibrium(mp, g, s1) - solve_equilibrium(mp, g, s2)).norm();
    out.rhs = (s1 - s2).norm() / mp.potential.mu();
    return out;
}

}  // namespace graphflow
