#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "graphflow/graph.hpp"
#include "graphflow/parallel.hpp"
#include "graphflow/rng.hpp"
#include "graphflow/spectral.hpp"

namespace graphflow {

// Closed-form comparison value m^{1-p/2} (2 lambda2)^{p/2} N^{(p-2)/2},
// reported alongside the variational estimate.
inline double cp_lower_bound(const Graph& g, double p) {
    if (p < 2.0) throw std::invalid_argument("p must be >= 2");
    const double lambda2 = spectral_summary(g).lambda2;
    const double m = g.edge_count();
    const double n = g.node_count();
    return std::pow(m, 1.0 - p / 2.0) * std::pow(2.0 * lambda2, p / 2.0) *
           std::pow(n, (p - 2.0) / 2.0);
}

namespace detail {

inline double lp_norm_pow(const Eigen::VectorXd& x, double p) {
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]), p);
    return s;
}

inline Eigen::VectorXd project_mean_free(const Eigen::VectorXd& x) {
    return (x.array() - x.mean()).matrix();
}

}  // namespace detail

// R_p(x) = sum_E W |x_i - x_j|^p / sum_i |x_i|^p evaluated after projecting
// x onto the mean-free subspace.
inline double rayleigh_quotient_p(const Graph& g, const Eigen::VectorXd& x,
                                  double p) {
    if (p < 2.0) throw std::invalid_argument("p must be >= 2");
    const Eigen::VectorXd y = detail::project_mean_free(x);
    const double den = detail::lp_norm_pow(y, p);
    if (den < 1e-300)
        throw std::invalid_argument("rayleigh_quotient_p: x projects to zero");
    return dirichlet_energy_p(g, y, p) / den;
}

struct PGapOptions {
    int restarts = 20;
    int max_iter = 5000;
    double tol = 1e-10;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct PGapEstimate {
    double value;
    Eigen::VectorXd argmin;  // mean-free, unit p-norm
    std::vector<double> restart_values;
};

// Variational estimate of C_p(G) by projected gradient descent on the
// Rayleigh quotient over the mean-free sphere ||x||_p = 1, with Gaussian
// restarts. Minimizes, so the result is an upper bound on C_p up to local
// minima; restarts guard against those.
inline PGapEstimate estimate_cp(const Graph& g, double p,
                                const PGapOptions& opts = {}) {
    if (p < 2.0) throw std::invalid_argument("p must be >= 2");
    const int n = g.node_count();

    auto normalize_p = [&](Eigen::VectorXd x) {
        x = detail::project_mean_free(x);
        const double np = std::pow(detail::lp_norm_pow(x, p), 1.0 / p);
        if (np < 1e-300) return Eigen::VectorXd();
        return (x / np).eval();
    };

    struct RestartResult {
        double value = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x;
        bool ok = false;
    };
    std::vector<RestartResult> results(opts.restarts);

    parallel_for(opts.restarts, opts.jobs, [&](int r) {
        Rng rng(derive_seed(opts.seed, r));
        Eigen::VectorXd x;
        do {
            x = normalize_p(rng.normal_vector(n));
        } while (x.size() == 0);
        double val = dirichlet_energy_p(g, x, p);
        bool progressed = false;
        for (int it = 0; it < opts.max_iter; ++it) {
            // Gradient of the quotient at a point with unit denominator:
            // p Lap_p(x) - val * p sign(x)|x|^{p-1}, projected mean-free.
            Eigen::VectorXd grad = p * p_laplacian_apply(g, x, p);
            for (int i = 0; i < n; ++i) {
                const double a = std::abs(x[i]);
                grad[i] -= val * p * (x[i] >= 0.0 ? 1.0 : -1.0) *
                           std::pow(a, p - 1.0);
            }
            grad = detail::project_mean_free(grad);

            // Backtracking with sufficient decrease; a bare improvement is
            // kept as fallback so overshooting steps cannot stall the run.
            double step = 1.0;
            const double gn2 = grad.squaredNorm();
            double best_cv = val;
            Eigen::VectorXd best_cand;
            while (step >= 1e-14) {
                const Eigen::VectorXd cand = normalize_p(x - step * grad);
                if (cand.size() != 0) {
                    const double cv = dirichlet_energy_p(g, cand, p);
                    if (cv < val - 1e-4 * step * gn2) {
                        best_cv = cv;
                        best_cand = cand;
                        break;
                    }
                    if (cv < best_cv) {
                        best_cv = cv;
                        best_cand = cand;
                    }
                }
                step *= 0.5;
            }
            if (best_cand.size() == 0) break;  // stationary to line-search resolution
            const double drop = val - best_cv;
            x = best_cand;
            val = best_cv;
            progressed = true;
            if (drop <= opts.tol * std::max(1.0, val)) it = opts.max_iter;
        }
        results[r] = {val, x, progressed};
    });

    PGapEstimate est;
    est.value = std::numeric_limits<double>::infinity();
    est.restart_values.reserve(opts.restarts);
    for (const auto& rr : results) {
        est.restart_values.push_back(rr.value);
        if (rr.ok && rr.value < est.value) {
            est.value = rr.value;
            est.argmin = rr.x;
        }
    }
    if (!std::isfinite(est.value))
        throw NumericalError("estimate_cp: every restart stalled at its start point");
    return est;
}

}  // namespace graphflow
