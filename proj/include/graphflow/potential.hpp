#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "graphflow/rng.hpp"

namespace graphflow {

struct PsiEval {
    double value;
    Eigen::VectorXd grad;
};

// Parameters of a quadratic dissipation term (gamma/2-weighted squared
// distance to h_star, per coordinate). Exposed so solvers can take closed
// form paths when the potential is exactly quadratic.
struct QuadraticInfo {
    Eigen::VectorXd gamma;
    Eigen::VectorXd h_star;
};

// Strongly convex dissipation potential psi. Carries its convexity modulus
// mu, an optional gradient Lipschitz constant, and a diagonal Hessian
// callback (the shipped potentials are separable across coordinates).
class DissipationPotential {
public:
    using Evaluator = std::function<PsiEval(const Eigen::VectorXd&)>;
    using HessianDiag = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

    DissipationPotential(Evaluator eval, double mu,
                         std::optional<double> lipschitz, HessianDiag hess,
                         std::optional<QuadraticInfo> quad = std::nullopt)
        : eval_(std::move(eval)),
          mu_(mu),
          lipschitz_(lipschitz),
          hess_(std::move(hess)),
          quad_(std::move(quad)) {}

    PsiEval operator()(const Eigen::VectorXd& h) const { return eval_(h); }
    double value(const Eigen::VectorXd& h) const { return eval_(h).value; }
    Eigen::VectorXd grad(const Eigen::VectorXd& h) const { return eval_(h).grad; }

    double mu() const { return mu_; }
    std::optional<double> lipschitz() const { return lipschitz_; }
    Eigen::VectorXd hessian_diagonal(const Eigen::VectorXd& h) const {
        return hess_(h);
    }
    const std::optional<QuadraticInfo>& quadratic() const { return quad_; }

private:
    Evaluator eval_;
    double mu_;
    std::optional<double> lipschitz_;
    HessianDiag hess_;
    std::optional<QuadraticInfo> quad_;
};

inline DissipationPotential quadratic_potential(Eigen::VectorXd gamma,
                                                Eigen::VectorXd h_star) {
    if (gamma.size() != h_star.size())
        throw std::invalid_argument("gamma and h_star sizes differ");
    if (gamma.minCoeff() < 0.0)
        throw std::invalid_argument("gamma entries must be nonnegative");
    const double mu = gamma.minCoeff();
    const double lip = gamma.maxCoeff();
    QuadraticInfo info{gamma, h_star};
    auto eval = [gamma, h_star](const Eigen::VectorXd& h) {
        const Eigen::VectorXd d = h - h_star;
        PsiEval out;
        out.value = 0.5 * d.dot(gamma.cwiseProduct(d));
        out.grad = gamma.cwiseProduct(d);
        return out;
    };
    auto hess = [gamma](const Eigen::VectorXd&) { return gamma; };
    return DissipationPotential(eval, mu, lip, hess, info);
}

inline DissipationPotential quadratic_potential(double gamma, double h_star,
                                                int n) {
    return quadratic_potential(Eigen::VectorXd::Constant(n, gamma),
                               Eigen::VectorXd::Constant(n, h_star));
}

namespace detail {

// log cosh(x) without overflow for large |x|.
inline double log_cosh(double x) {
    const double ax = std::abs(x);
    return ax + std::log1p(std::exp(-2.0 * ax)) - M_LN2;
}

inline double sech_sq(double x) {
    const double em = std::exp(-std::abs(x));
    const double s = 2.0 * em / (1.0 + em * em);
    return s * s;
}

}  // namespace detail

// psi(h) = mu/2 ||h - h_star||^2 + sum_i log cosh(h_i - h_star_i).
// Convexity modulus mu (log cosh contributes no lower curvature bound away
// from the origin), gradient Lipschitz constant mu + 1.
inline DissipationPotential logcosh_potential(double mu, Eigen::VectorXd h_star) {
    if (mu < 0.0) throw std::invalid_argument("mu must be nonnegative");
    auto eval = [mu, h_star](const Eigen::VectorXd& h) {
        const Eigen::VectorXd d = h - h_star;
        PsiEval out;
        double v = 0.5 * mu * d.squaredNorm();
        Eigen::VectorXd grad = mu * d;
        for (int i = 0; i < d.size(); ++i) {
            v += detail::log_cosh(d[i]);
            grad[i] += std::tanh(d[i]);
        }
        out.value = v;
        out.grad = std::move(grad);
        return out;
    };
    auto hess = [mu, h_star](const Eigen::VectorXd& h) {
        Eigen::VectorXd d = h - h_star;
        for (int i = 0; i < d.size(); ++i)
            d[i] = mu + detail::sech_sq(d[i]);
        return d;
    };
    return DissipationPotential(eval, mu, mu + 1.0, hess);
}

inline DissipationPotential logcosh_potential(double mu, double h_star, int n) {
    return logcosh_potential(mu, Eigen::VectorXd::Constant(n, h_star));
}

// Zero potential for dissipation-free stress runs.
inline DissipationPotential zero_potential(int n) {
    auto eval = [n](const Eigen::VectorXd&) {
        return PsiEval{0.0, Eigen::VectorXd::Zero(n)};
    };
    auto hess = [n](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(n); };
    return DissipationPotential(eval, 0.0, 0.0, hess);
}

// Empirical convexity modulus: the smallest value of
//   <grad psi(x) - grad psi(y), x - y> / ||x - y||^2
// over random pairs. For a certified potential it is >= pot.mu() up to
// rounding.
inline double strong_convexity_certificate(const DissipationPotential& pot,
                                           int n, int trials,
                                           std::uint64_t seed) {
    Rng rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        const Eigen::VectorXd x = rng.normal_vector(n, 3.0);
        const Eigen::VectorXd y = rng.normal_vector(n, 3.0);
        const double dd = (x - y).squaredNorm();
        if (dd < 1e-16) continue;
        const double lhs = (pot.grad(x) - pot.grad(y)).dot(x - y);
        worst = std::min(worst, lhs / dd);
    }
    return worst;
}

}  // namespace graphflow
