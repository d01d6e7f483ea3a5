#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graphflow/linsolve.hpp"
#include "graphflow/operators.hpp"
#include "graphflow/parallel.hpp"
#include "graphflow/rng.hpp"

namespace graphflow {

// Sharp explicit-Euler stability bound 2 / lambda_max(alpha L + Gamma).
inline double euler_threshold(const Graph& g, double alpha,
                              const Eigen::VectorXd& gamma) {
    Eigen::MatrixXd M = alpha * laplacian_matrix(g);
    M.diagonal() += gamma;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("euler_threshold: eigensolver failed");
    return 2.0 / es.eigenvalues().maxCoeff();
}

struct SchemeReport {
    std::vector<double> err_history;  // ||h^k - h_inf|| per iterate
    double initial_err = 0.0;
    double final_err = 0.0;
    // Geometric mean of consecutive error ratios over the trailing half of
    // the informative segment (iterates before the error underflows).
    double measured_factor = 0.0;
    bool converged = false;
    bool diverged = false;
    long iterations = 0;
    Eigen::VectorXd final_state;
    Eigen::VectorXd h_inf;
};

namespace detail {

inline void finish_report(SchemeReport& rep) {
    rep.initial_err = rep.err_history.front();
    rep.final_err = rep.err_history.back();
    // Ratios stop carrying rate information once the error reaches the
    // rounding floor of the iteration, so entries near it are excluded.
    const double floor_cut =
        1e-12 * (rep.initial_err + rep.h_inf.norm());
    std::vector<double> ratios;
    for (std::size_t k = 0; k + 1 < rep.err_history.size(); ++k) {
        const double a = rep.err_history[k];
        const double b = rep.err_history[k + 1];
        if (a > floor_cut && b > floor_cut) ratios.push_back(b / a);
    }
    if (!ratios.empty()) {
        double acc = 0.0;
        const std::size_t lo = ratios.size() / 2;
        for (std::size_t k = lo; k < ratios.size(); ++k)
            acc += std::log(ratios[k]);
        rep.measured_factor = std::exp(acc / static_cast<double>(ratios.size() - lo));
    }
    rep.converged = !rep.diverged && rep.final_err < rep.initial_err;
}

}  // namespace detail

// Explicit Euler for the linear-quadratic model:
//   h^{k+1} = h^k + eta (-(alpha L + Gamma) h^k + s_inf + Gamma h_star).
inline SchemeReport run_euler(const Graph& g, double alpha,
                              const Eigen::VectorXd& gamma,
                              const Eigen::VectorXd& h_star,
                              const Eigen::VectorXd& s_inf, double eta,
                              const Eigen::VectorXd& h0, long k_max) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    const Eigen::VectorXd forcing = s_inf + gamma.cwiseProduct(h_star);
    SchemeReport rep;
    rep.h_inf = solve_shifted_laplacian(g, alpha, gamma, forcing);
    rep.err_history.reserve(k_max + 1);
    Eigen::VectorXd h = h0;
    rep.err_history.push_back((h - rep.h_inf).norm());
    for (long k = 0; k < k_max; ++k) {
        h += eta * (forcing - alpha * laplacian_apply(g, h) -
                    gamma.cwiseProduct(h));
        const double e = (h - rep.h_inf).norm();
        rep.err_history.push_back(e);
        rep.iterations = k + 1;
        if (e > 1e12 || !std::isfinite(e)) {
            rep.diverged = true;
            break;
        }
    }
    rep.final_state = h;
    detail::finish_report(rep);
    return rep;
}

enum class ResolventMode { GraphOnly, FullDrift };

namespace detail {

inline Eigen::VectorXd resolvent_op(const ModelParams& mp, const Graph& g,
                                    ResolventMode mode,
                                    const Eigen::VectorXd& x) {
    Eigen::VectorXd y = mp.alpha * laplacian_apply(g, x);
    if (mp.alpha_p != 0.0) y += mp.alpha_p * p_laplacian_apply(g, x, mp.p);
    if (mode == ResolventMode::FullDrift) y += mp.potential.grad(x);
    return y;
}

}  // namespace detail

// Resolvent J_{eta Op}(z): the unique solution of x + eta Op(x) = z, with
// Op either the graph part alpha L + alpha_p Lap_p or the full drift F.
// Monotonicity of Op makes x + eta Op(x) strongly monotone, so damped
// Newton converges from z.
inline Eigen::VectorXd resolvent(const ModelParams& mp, const Graph& g,
                                 double eta, const Eigen::VectorXd& z,
                                 ResolventMode mode = ResolventMode::FullDrift,
                                 double tol = 1e-12, int max_iter = 100) {
    validate(mp);
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    const int n = g.node_count();

    const auto& quad = mp.potential.quadratic();
    const bool quadratic_full = mode == ResolventMode::FullDrift &&
                                quad.has_value() && mp.alpha_p == 0.0;
    const bool linear_graph = mode == ResolventMode::GraphOnly && mp.alpha_p == 0.0;
    if (quadratic_full || linear_graph) {
        Eigen::VectorXd shift = Eigen::VectorXd::Ones(n);
        Eigen::VectorXd rhs = z;
        if (quadratic_full) {
            shift += eta * quad->gamma;
            rhs += eta * quad->gamma.cwiseProduct(quad->h_star);
        }
        return solve_shifted_laplacian(g, eta * mp.alpha, shift, rhs);
    }

    Eigen::VectorXd x = z;
    const double target = tol * (1.0 + z.norm());
    auto residual = [&](const Eigen::VectorXd& v) {
        return (v + eta * detail::resolvent_op(mp, g, mode, v) - z).eval();
    };
    double rnorm = residual(x).norm();
    for (int it = 0; it < max_iter; ++it) {
        if (rnorm <= target) return x;
        const Eigen::VectorXd r = residual(x);
        Eigen::VectorXd hd = mode == ResolventMode::FullDrift
                                 ? mp.potential.hessian_diagonal(x)
                                 : Eigen::VectorXd::Zero(n);
        Eigen::VectorXd delta;
        if (n < 200) {
            Eigen::MatrixXd J =
                eta * detail::drift_jacobian_dense(mp, g, x, hd);
            J.diagonal().array() += 1.0;
            delta = J.ldlt().solve(r);
        } else {
            auto op = [&](const Eigen::VectorXd& v) {
                return (v + eta * detail::drift_jacobian_apply(mp, g, x, hd, v))
                    .eval();
            };
            delta = cg_solve(op, r, Eigen::VectorXd::Zero(n)).x;
        }
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Eigen::VectorXd trial = x - step * delta;
            const double tn = residual(trial).norm();
            if (tn < rnorm) {
                x = trial;
                rnorm = tn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            throw NumericalError("resolvent: line search stalled", rnorm);
    }
    if (rnorm <= target) return x;
    throw NumericalError("resolvent: no convergence", rnorm);
}

inline double fb_contraction_factor(double eta, double mu, double lipschitz) {
    return std::sqrt(1.0 - 2.0 * eta * mu * (1.0 - eta * lipschitz / 2.0));
}

// Forward-backward splitting: forward step on B = grad psi, backward step on
// A = alpha L + alpha_p Lap_p. The per-iteration source may vary; s_inf is
// its limit and fixes the reference equilibrium.
inline SchemeReport run_forward_backward(
    const ModelParams& mp, const Graph& g,
    const std::function<Eigen::VectorXd(long)>& source,
    const Eigen::VectorXd& s_inf, double eta, const Eigen::VectorXd& h0,
    long k_max) {
    validate(mp);
    if (!mp.potential.lipschitz().has_value())
        throw std::invalid_argument(
            "forward-backward needs a gradient Lipschitz constant");
    const double lip = *mp.potential.lipschitz();
    if (!(eta > 0.0) || (lip > 0.0 && eta >= 2.0 / lip))
        throw std::invalid_argument(
            "forward-backward requires eta in (0, 2/L_psi)");

    SchemeReport rep;
    rep.h_inf = solve_equilibrium(mp, g, s_inf);
    rep.err_history.reserve(k_max + 1);
    Eigen::VectorXd h = h0;
    rep.err_history.push_back((h - rep.h_inf).norm());
    for (long k = 0; k < k_max; ++k) {
        const Eigen::VectorXd w =
            h - eta * mp.potential.grad(h) + eta * source(k);
        h = resolvent(mp, g, eta, w, ResolventMode::GraphOnly);
        const double e = (h - rep.h_inf).norm();
        rep.err_history.push_back(e);
        rep.iterations = k + 1;
        if (e > 1e12 || !std::isfinite(e)) {
            rep.diverged = true;
            break;
        }
    }
    rep.final_state = h;
    detail::finish_report(rep);
    return rep;
}

inline SchemeReport run_forward_backward(const ModelParams& mp, const Graph& g,
                                         const Eigen::VectorXd& s_inf,
                                         double eta, const Eigen::VectorXd& h0,
                                         long k_max) {
    return run_forward_backward(
        mp, g, [&](long) { return s_inf; }, s_inf, eta, h0, k_max);
}

// Steady-state mean squared error bound for the stochastic resolvent
// scheme: eta^2 sigma^2 / (2 eta mu + eta^2 mu^2).
inline double noise_floor_bound(double eta, double mu, double sigma2) {
    if (!(eta > 0.0) || !(mu > 0.0))
        throw std::invalid_argument("noise_floor_bound needs eta > 0, mu > 0");
    return eta * eta * sigma2 / (2.0 * eta * mu + eta * eta * mu * mu);
}

// Precomputed eigendecomposition of M = alpha L + Gamma for the quadratic
// model, giving (I + eta M)^{-1} at any eta as a pair of dense matvecs.
class QuadraticResolvent {
public:
    QuadraticResolvent(const Graph& g, double alpha,
                       const Eigen::VectorXd& gamma,
                       const Eigen::VectorXd& h_star) {
        Eigen::MatrixXd M = alpha * laplacian_matrix(g);
        M.diagonal() += gamma;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        if (es.info() != Eigen::Success)
            throw NumericalError("QuadraticResolvent: eigensolver failed");
        q_ = es.eigenvectors();
        lam_ = es.eigenvalues();
        forcing_ = gamma.cwiseProduct(h_star);
    }

    // Solves (I + eta M) x = z + eta Gamma h_star.
    Eigen::VectorXd apply(double eta, const Eigen::VectorXd& z) const {
        Eigen::VectorXd w = q_.transpose() * (z + eta * forcing_);
        w.array() /= (1.0 + eta * lam_.array());
        return q_ * w;
    }

private:
    Eigen::MatrixXd q_;
    Eigen::VectorXd lam_;
    Eigen::VectorXd forcing_;
};

struct StochasticReport {
    std::vector<double> err_sq_history;  // ||h^k - h_inf||^2, subsampled
    long record_every = 1;
    double floor_estimate = 0.0;  // mean of the trailing tail_fraction
    double final_err_sq = 0.0;
    bool plateau_ok = false;  // trailing quarter averages agree to 5 percent
    bool converged = false;   // vanishing-step runs: error well under the floor scale
    bool diverged = false;
    long iterations = 0;
    Eigen::VectorXd final_state;
    Eigen::VectorXd h_inf;
};

namespace detail {

inline void finish_stochastic(StochasticReport& rep,
                              const std::vector<double>& full,
                              double tail_fraction) {
    rep.final_err_sq = full.back();
    const std::size_t nfull = full.size();
    const auto tail_start =
        static_cast<std::size_t>(std::floor(nfull * (1.0 - tail_fraction)));
    double acc = 0.0;
    for (std::size_t k = tail_start; k < nfull; ++k) acc += full[k];
    rep.floor_estimate = acc / static_cast<double>(nfull - tail_start);
    // Plateau check: the last two quarter averages should agree to 5%.
    auto quarter_mean = [&](int q) {
        const std::size_t a = nfull * q / 4, b = nfull * (q + 1) / 4;
        double s = 0.0;
        for (std::size_t k = a; k < b; ++k) s += full[k];
        return s / static_cast<double>(b - a);
    };
    const double q3 = quarter_mean(2), q4 = quarter_mean(3);
    rep.plateau_ok = std::abs(q4 - q3) <= 0.05 * std::max(q3, q4);
}

}  // namespace detail

// Stochastic proximal point iteration h^{k+1} = J_{eta F}(h^k + eta s^k)
// with s^k = s_inf + noise, noise variance sigma2 split evenly over
// coordinates. The error is measured against the equilibrium of the
// noise-free problem.
inline StochasticReport run_stochastic_resolvent(
    const ModelParams& mp, const Graph& g, const Eigen::VectorXd& s_inf,
    double sigma2, double eta, const Eigen::VectorXd& h0, long k_max,
    std::uint64_t seed, double tail_fraction = 0.5, long record_every = 1) {
    validate(mp);
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw std::invalid_argument("tail_fraction must be in (0, 1)");
    const int n = g.node_count();
    const double coord_sd = std::sqrt(sigma2 / n);

    StochasticReport rep;
    rep.record_every = std::max<long>(1, record_every);
    rep.h_inf = solve_equilibrium(mp, g, s_inf);

    const auto& quad = mp.potential.quadratic();
    const bool fast = quad.has_value() && mp.alpha_p == 0.0;
    std::optional<QuadraticResolvent> qr;
    if (fast) qr.emplace(g, mp.alpha, quad->gamma, quad->h_star);

    Rng rng(seed);
    Eigen::VectorXd h = h0;
    std::vector<double> full;
    full.reserve(k_max + 1);
    full.push_back((h - rep.h_inf).squaredNorm());
    for (long k = 0; k < k_max; ++k) {
        const Eigen::VectorXd s = s_inf + rng.normal_vector(n, coord_sd);
        const Eigen::VectorXd z = h + eta * s;
        h = fast ? qr->apply(eta, z)
                 : resolvent(mp, g, eta, z, ResolventMode::FullDrift);
        const double e2 = (h - rep.h_inf).squaredNorm();
        full.push_back(e2);
        rep.iterations = k + 1;
        if (e2 > 1e24 || !std::isfinite(e2)) {
            rep.diverged = true;
            break;
        }
    }
    rep.final_state = h;
    for (std::size_t k = 0; k < full.size(); k += rep.record_every)
        rep.err_sq_history.push_back(full[k]);
    detail::finish_stochastic(rep, full, tail_fraction);
    return rep;
}

// Robbins-Monro variant with vanishing steps eta_k = eta0 / (k + 1).
inline StochasticReport run_robbins_monro(const ModelParams& mp, const Graph& g,
                                          const Eigen::VectorXd& s_inf,
                                          double sigma2, double eta0,
                                          const Eigen::VectorXd& h0, long k_max,
                                          std::uint64_t seed,
                                          long record_every = 1) {
    validate(mp);
    if (!(eta0 > 0.0)) throw std::invalid_argument("eta0 must be positive");
    const int n = g.node_count();
    const double coord_sd = std::sqrt(sigma2 / n);

    StochasticReport rep;
    rep.record_every = std::max<long>(1, record_every);
    rep.h_inf = solve_equilibrium(mp, g, s_inf);

    const auto& quad = mp.potential.quadratic();
    const bool fast = quad.has_value() && mp.alpha_p == 0.0;
    std::optional<QuadraticResolvent> qr;
    if (fast) qr.emplace(g, mp.alpha, quad->gamma, quad->h_star);

    Rng rng(seed);
    Eigen::VectorXd h = h0;
    std::vector<double> full;
    full.reserve(k_max + 1);
    full.push_back((h - rep.h_inf).squaredNorm());
    for (long k = 0; k < k_max; ++k) {
        const double eta = eta0 / static_cast<double>(k + 1);
        const Eigen::VectorXd s = s_inf + rng.normal_vector(n, coord_sd);
        const Eigen::VectorXd z = h + eta * s;
        h = fast ? qr->apply(eta, z)
                 : resolvent(mp, g, eta, z, ResolventMode::FullDrift);
        const double e2 = (h - rep.h_inf).squaredNorm();
        full.push_back(e2);
        rep.iterations = k + 1;
        if (e2 > 1e24 || !std::isfinite(e2)) {
            rep.diverged = true;
            break;
        }
    }
    rep.final_state = h;
    for (std::size_t k = 0; k < full.size(); k += rep.record_every)
        rep.err_sq_history.push_back(full[k]);
    detail::finish_stochastic(rep, full, 0.25);
    const double mu = mp.potential.mu();
    if (mu > 0.0)
        rep.converged = !rep.diverged &&
                        rep.final_err_sq < 1e-2 * sigma2 / (2.0 * mu);
    return rep;
}

struct EnsembleMoments {
    std::vector<long> ks;            // recorded iteration indices
    std::vector<double> mean_err_sq;  // ensemble average of ||e^k||^2
    double floor_estimate = 0.0;      // ensemble and tail average
    int chains = 0;
};

// Ensemble mean of ||e^k||^2 over independent chains of the stochastic
// resolvent scheme. Chains differ only in their derived noise seed.
inline EnsembleMoments stochastic_ensemble(
    const ModelParams& mp, const Graph& g, const Eigen::VectorXd& s_inf,
    double sigma2, double eta, const Eigen::VectorXd& h0, long k_max,
    int chains, std::uint64_t seed, double tail_fraction = 0.5,
    long record_every = 1, int jobs = 1) {
    record_every = std::max<long>(1, record_every);
    std::vector<std::vector<double>> per_chain(chains);
    std::vector<double> per_chain_floor(chains, 0.0);
    std::vector<char> chain_diverged(chains, 0);
    parallel_for(chains, jobs, [&](int c) {
        const StochasticReport rep = run_stochastic_resolvent(
            mp, g, s_inf, sigma2, eta, h0, k_max, derive_seed(seed, c),
            tail_fraction, record_every);
        chain_diverged[c] = rep.diverged ? 1 : 0;
        per_chain[c] = rep.err_sq_history;
        per_chain_floor[c] = rep.floor_estimate;
    });
    for (int c = 0; c < chains; ++c)
        if (chain_diverged[c])
            throw NumericalError("stochastic_ensemble: chain " +
                                 std::to_string(c) + " diverged");
    EnsembleMoments out;
    out.chains = chains;
    const std::size_t nrec = per_chain.front().size();
    out.mean_err_sq.assign(nrec, 0.0);
    for (const auto& hist : per_chain)
        for (std::size_t i = 0; i < nrec; ++i) out.mean_err_sq[i] += hist[i];
    for (auto& v : out.mean_err_sq) v /= chains;
    for (std::size_t i = 0; i < nrec; ++i)
        out.ks.push_back(static_cast<long>(i) * record_every);
    double acc = 0.0;
    for (double f : per_chain_floor) acc += f;
    out.floor_estimate = acc / chains;
    return out;
}

// Ensemble estimate of E ||e^{k+1}||^2 after one stochastic resolvent step
// from a fixed state, for checking the one-step conditional bound.
inline double one_step_second_moment(const ModelParams& mp, const Graph& g,
                                     const Eigen::VectorXd& s_inf, double sigma2,
                                     double eta, const Eigen::VectorXd& h_from,
                                     int chains, std::uint64_t seed) {
    const int n = g.node_count();
    const double coord_sd = std::sqrt(sigma2 / n);
    const Eigen::VectorXd h_inf = solve_equilibrium(mp, g, s_inf);
    const auto& quad = mp.potential.quadratic();
    const bool fast = quad.has_value() && mp.alpha_p == 0.0;
    std::optional<QuadraticResolvent> qr;
    if (fast) qr.emplace(g, mp.alpha, quad->gamma, quad->h_star);
    double acc = 0.0;
    for (int c = 0; c < chains; ++c) {
        Rng rng(derive_seed(seed, c));
        const Eigen::VectorXd s = s_inf + rng.normal_vector(n, coord_sd);
        const Eigen::VectorXd z = h_from + eta * s;
        const Eigen::VectorXd h =
            fast ? qr->apply(eta, z)
                 : resolvent(mp, g, eta, z, ResolventMode::FullDrift);
        acc += (h - h_inf).squaredNorm();
    }
    return acc / chains;
}

}  // namespace graphflow
