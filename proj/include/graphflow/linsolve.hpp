#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "graphflow/errors.hpp"
#include "graphflow/graph.hpp"

namespace graphflow {

struct CgResult {
    Eigen::VectorXd x;
    int iterations;
    double residual;
};

// Conjugate gradients for an SPD operator given as a callback. Relative
// residual tolerance; throws if max_iter is exhausted.
inline CgResult cg_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op,
                         const Eigen::VectorXd& b, const Eigen::VectorXd& x0,
                         double tol = 1e-12, int max_iter = 0) {
    const int n = static_cast<int>(b.size());
    if (max_iter <= 0) max_iter = 20 * n + 100;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd r = b - op(x);
    const double bnorm = b.norm();
    const double target = tol * (bnorm > 0.0 ? bnorm : 1.0);
    if (r.norm() <= target) return {x, 0, r.norm()};
    Eigen::VectorXd p = r;
    double rr = r.squaredNorm();
    for (int k = 1; k <= max_iter; ++k) {
        const Eigen::VectorXd Ap = op(p);
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0))
            throw NumericalError("cg_solve: operator not positive definite", std::sqrt(rr));
        const double alpha = rr / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        const double rr_new = r.squaredNorm();
        if (std::sqrt(rr_new) <= target) return {x, k, std::sqrt(rr_new)};
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    throw NumericalError("cg_solve: no convergence in " + std::to_string(max_iter) +
                             " iterations",
                         std::sqrt(rr));
}

// Solve (alpha L + diag(gamma)) x = rhs. Matrix-free CG normally; small
// systems go through a dense LDLT which is cheaper than iterating.
inline Eigen::VectorXd solve_shifted_laplacian(const Graph& g, double alpha,
                                               const Eigen::VectorXd& gamma,
                                               const Eigen::VectorXd& rhs,
                                               double tol = 1e-12) {
    const int n = g.node_count();
    if (n < 200) {
        Eigen::MatrixXd A = alpha * laplacian_matrix(g);
        A.diagonal() += gamma;
        return A.ldlt().solve(rhs);
    }
    auto op = [&](const Eigen::VectorXd& v) {
        return (alpha * laplacian_apply(g, v) + gamma.cwiseProduct(v)).eval();
    };
    return cg_solve(op, rhs, Eigen::VectorXd::Zero(n), tol).x;
}

}  // namespace graphflow
