#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graphflow/graph.hpp"
#include "graphflow/linsolve.hpp"
#include "graphflow/operators.hpp"
#include "graphflow/spectral.hpp"

namespace graphflow {

struct CalibrationTargets {
    double tau_star;       // desired relaxation time, rate rho* = 1/tau_star
    double h_target;       // desired equilibrium mass H*
    Eigen::VectorXd h_star;
    Eigen::VectorXd s_inf;
};

inline void validate(const CalibrationTargets& t) {
    if (!(t.tau_star > 0.0))
        throw std::invalid_argument("tau_star must be positive");
    if (t.h_star.size() != t.s_inf.size())
        throw std::invalid_argument("h_star and s_inf sizes differ");
    if (!(t.s_inf.sum() > 0.0))
        throw std::invalid_argument("total source must be positive");
    if (!(t.h_target > t.h_star.sum()))
        throw std::invalid_argument("mass target must exceed the h_star mass");
}

struct CalibrationResult {
    double alpha = 0.0;
    Eigen::VectorXd gamma;
    Eigen::VectorXd h_inf;
    double rho_star = 0.0;
    double gamma_bar = 0.0;
    double predicted_rate = 0.0;  // min(min_i gamma_i, alpha lambda2)
    bool feasible = false;
    std::string note;
};

// Closed-form rate and mass calibration for the quadratic model.
// alpha = rho*/lambda2 pins the consensus rate; the mean dissipation
// gamma_bar = s_bar / (H* - mass(h_star)) pins the equilibrium mass. The
// rate prescription additionally wants min_i gamma_i >= rho*, which a mean
// of gamma_bar can only deliver when gamma_bar >= rho*; otherwise the
// uniform profile is returned as the mass-correct fallback and the result
// is flagged infeasible.
inline CalibrationResult sgps(const Graph& g, const CalibrationTargets& t) {
    validate(t);
    const int n = g.node_count();
    if (t.s_inf.size() != n)
        throw std::invalid_argument("target vectors must match the graph size");
    const double rho = 1.0 / t.tau_star;
    const double lambda2 = spectral_summary(g).lambda2;
    const double s_bar = t.s_inf.sum();

    CalibrationResult out;
    out.rho_star = rho;
    out.alpha = rho / lambda2;
    out.gamma_bar = s_bar / (t.h_target - t.h_star.sum());
    out.gamma = Eigen::VectorXd::Constant(n, out.gamma_bar);
    if (out.gamma_bar >= rho) {
        out.feasible = true;
    } else {
        out.feasible = false;
        out.note = "mass target needs mean dissipation " +
                   std::to_string(out.gamma_bar) +
                   " below the per-node rate requirement " + std::to_string(rho) +
                   "; a profile cannot have its minimum above its mean, so the "
                   "uniform mass-correct profile is returned instead";
    }
    const Eigen::VectorXd rhs = t.s_inf + out.gamma.cwiseProduct(t.h_star);
    out.h_inf = solve_shifted_laplacian(g, out.alpha, out.gamma, rhs);
    out.predicted_rate = std::min(out.gamma.minCoeff(), out.alpha * lambda2);
    return out;
}

// Calibration for a family of potentials indexed by a dissipation scale
// (the quadratic coefficient, which is also the convexity modulus). The
// closed-form mass step is replaced by a bisection on the scale; the
// consensus rate is still pinned by alpha = rho*/lambda2. Equilibrium mass
// must be strictly decreasing in the scale, which holds for any family
// whose gradient grows with it.
inline CalibrationResult sgps_nonlinear(
    const Graph& g, const CalibrationTargets& t,
    const std::function<DissipationPotential(double)>& family,
    double alpha_p = 0.0, double p = 2.0, double mass_tol = 1e-8,
    int max_bisect = 200) {
    validate(t);
    const int n = g.node_count();
    if (t.s_inf.size() != n)
        throw std::invalid_argument("target vectors must match the graph size");
    const double rho = 1.0 / t.tau_star;
    const double lambda2 = spectral_summary(g).lambda2;
    const double alpha = rho / lambda2;

    auto mass_at = [&](double scale) {
        ModelParams mp{alpha, alpha_p, p, family(scale)};
        return solve_equilibrium(mp, g, t.s_inf).sum();
    };

    // Bracket the mass target: small scales weaken dissipation and raise
    // the mass, large scales shrink it toward mass(h_star).
    double lo = 1.0, hi = 1.0;
    double mass_lo = mass_at(lo);
    int guard = 0;
    while (mass_lo <= t.h_target && guard++ < 200) {
        lo *= 0.5;
        mass_lo = mass_at(lo);
    }
    double mass_hi = mass_at(hi);
    guard = 0;
    while (mass_hi >= t.h_target && guard++ < 200) {
        hi *= 2.0;
        mass_hi = mass_at(hi);
    }
    if (!(mass_lo > t.h_target && mass_hi < t.h_target))
        throw NumericalError("sgps_nonlinear: could not bracket the mass target");

    double scale = 0.5 * (lo + hi);
    for (int it = 0; it < max_bisect; ++it) {
        scale = 0.5 * (lo + hi);
        const double m = mass_at(scale);
        if (std::abs(m - t.h_target) <= mass_tol * std::max(1.0, std::abs(t.h_target)))
            break;
        (m > t.h_target ? lo : hi) = scale;
    }

    ModelParams mp{alpha, alpha_p, p, family(scale)};
    CalibrationResult out;
    out.rho_star = rho;
    out.alpha = alpha;
    out.gamma_bar = scale;
    out.gamma = Eigen::VectorXd::Constant(n, scale);
    out.h_inf = solve_equilibrium(mp, g, t.s_inf);
    const double mu = mp.potential.mu();
    out.predicted_rate = std::min(mu, alpha * lambda2);
    if (mu >= rho) {
        out.feasible = true;
    } else {
        out.feasible = false;
        out.note = "mass-matched dissipation scale " + std::to_string(scale) +
                   " has convexity modulus below the rate requirement " +
                   std::to_string(rho);
    }
    return out;
}

struct NonsynRow {
    std::string family;
    int n;
    double lambda2;
    double rate;  // alpha * lambda2
    bool violated;
};

struct NonsynReport {
    std::vector<NonsynRow> rows;
    int first_violation_n = -1;  // smallest path size violating the target
    std::string note;
};

// Fixed alpha cannot hold a rate target across growing paths: lambda2(P_n)
// decays like 1/n^2. Expander rows (random 4-regular) keep a bounded-away
// lambda2 for contrast.
inline NonsynReport nonsynonymy_report(double alpha, double rho_star, int n_max,
                                       const std::vector<int>& expander_sizes =
                                           {50, 100, 200},
                                       std::uint64_t seed = 7) {
    if (!(alpha > 0.0) || !(rho_star > 0.0))
        throw std::invalid_argument("alpha and rho_star must be positive");
    if (n_max < 3) throw std::invalid_argument("n_max must be at least 3");
    NonsynReport rep;
    for (int n = 3; n <= n_max; ++n) {
        const double l2 = spectral_summary(path_graph(n)).lambda2;
        const double rate = alpha * l2;
        const bool bad = rate < rho_star;
        if (bad && rep.first_violation_n < 0) rep.first_violation_n = n;
        rep.rows.push_back({"path", n, l2, rate, bad});
    }
    for (int n : expander_sizes) {
        const double l2 = spectral_summary(random_regular_graph(n, 4, seed)).lambda2;
        const double rate = alpha * l2;
        rep.rows.push_back({"regular4", n, l2, rate, rate < rho_star});
    }
    if (rep.first_violation_n < 0)
        rep.note = "no path violation up to n_max; lambda2(P_n) ~ pi^2/n^2 "
                   "guarantees one for larger n";
    return rep;
}

struct MeanFieldResult {
    Eigen::VectorXd h_inf;
    double lambda2;    // w N for the complete graph
    double slow_mode;  // min(min_i gamma_i, alpha w N)
};

// Complete-graph equilibrium without materializing N^2 edges: the Laplacian
// of K_N with uniform weight w acts as h -> w (N h - (sum h) 1).
inline MeanFieldResult kn_meanfield(int n, double w, double alpha,
                                    const Eigen::VectorXd& gamma,
                                    const Eigen::VectorXd& h_star,
                                    const Eigen::VectorXd& s_inf) {
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    if (!(w > 0.0)) throw std::invalid_argument("w must be positive");
    if (gamma.size() != n || h_star.size() != n || s_inf.size() != n)
        throw std::invalid_argument("vector sizes must match n");
    if (!(gamma.minCoeff() > 0.0))
        throw std::invalid_argument("gamma must be positive");
    auto op = [&](const Eigen::VectorXd& v) {
        return (alpha * w * (n * v.array() - v.sum()).matrix() +
                gamma.cwiseProduct(v))
            .eval();
    };
    const Eigen::VectorXd rhs = s_inf + gamma.cwiseProduct(h_star);
    MeanFieldResult out;
    out.h_inf = cg_solve(op, rhs, Eigen::VectorXd::Zero(n)).x;
    out.lambda2 = w * n;
    out.slow_mode = std::min(gamma.minCoeff(), alpha * w * n);
    return out;
}

}  // namespace graphflow
