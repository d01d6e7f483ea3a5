#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "graphflow/operators.hpp"
#include "graphflow/spectral.hpp"

using namespace graphflow;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("drift assembles the three terms") {
    const Graph g = path_graph(4);
    VectorXd gamma(4), h_star(4);
    gamma << 0.1, 0.2, 0.3, 0.4;
    h_star << 1.0, 0.0, -1.0, 0.5;
    const ModelParams mp{1.5, 0.0, 2.0, quadratic_potential(gamma, h_star)};
    Rng rng(2);
    const VectorXd h = rng.normal_vector(4, 2.0);
    const VectorXd expect = 1.5 * (laplacian_matrix(g) * h) +
                            gamma.cwiseProduct(h - h_star);
    CHECK((drift(mp, g, h) - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
}

TEST_CASE("energy gradient is the drift") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const Graph g = erdos_renyi_graph(6, 0.6, derive_seed(9, trial));
        const ModelParams mp{0.8, 0.6, 3.0, logcosh_potential(0.5, 0.1, 6)};
        const VectorXd h = rng.normal_vector(6, 1.5);
        const VectorXd f = drift(mp, g, h);
        for (int i = 0; i < 6; ++i) {
            VectorXd hp = h, hm = h;
            hp[i] += 1e-6;
            hm[i] -= 1e-6;
            const double fd = (energy(mp, g, hp) - energy(mp, g, hm)) / 2e-6;
            CHECK(f[i] == Catch::Approx(fd).margin(5e-5));
        }
    }
}

TEST_CASE("drift is strongly monotone with modulus mu") {
    Rng rng(33);
    const Graph g = cycle_graph(7);
    const ModelParams mp{1.0, 0.5, 2.5, quadratic_potential(0.3, 0.0, 7)};
    for (int trial = 0; trial < 200; ++trial) {
        const VectorXd x = rng.normal_vector(7, 2.0);
        const VectorXd y = rng.normal_vector(7, 2.0);
        const double lhs = (drift(mp, g, x) - drift(mp, g, y)).dot(x - y);
        const double rhs = 0.3 * (x - y).squaredNorm();
        CHECK(lhs >= rhs * (1.0 - 1e-10) - 1e-12);
    }
}

TEST_CASE("quadratic equilibrium matches a dense solve") {
    const Graph g = path_graph(3);
    const ModelParams mp{1.0, 0.0, 2.0, quadratic_potential(0.1, 0.0, 3)};
    const VectorXd s = VectorXd::Constant(3, 1.0 / 3.0);
    const VectorXd h = solve_equilibrium(mp, g, s);
    MatrixXd A = laplacian_matrix(g);
    A.diagonal().array() += 0.1;
    const VectorXd ref = A.ldlt().solve(s);
    CHECK((h - ref).norm() <= 1e-10 * ref.norm());
    CHECK(h.sum() == Catch::Approx(10.0).margin(1e-8));
}

TEST_CASE("newton equilibrium agrees with a damped picard oracle") {
    const Graph g = erdos_renyi_graph(8, 0.5, 12);
    const ModelParams mp{0.7, 0.4, 3.0, logcosh_potential(0.6, 0.0, 8)};
    Rng rng(41);
    const VectorXd s = rng.normal_vector(8);
    const VectorXd h = solve_equilibrium(mp, g, s, 1e-12);
    CHECK((drift(mp, g, h) - s).norm() <= 1e-12 * (1.0 + s.norm()));

    // fixed-point iteration h <- h - tau (F(h) - s) converges for small tau
    VectorXd y = VectorXd::Zero(8);
    for (int k = 0; k < 200000; ++k) y -= 0.02 * (drift(mp, g, y) - s);
    CHECK((h - y).norm() <= 1e-6 * (1.0 + h.norm()));
}

TEST_CASE("equilibrium with p-term conserves the mass balance") {
    // graph terms drop out of the mass equation: <1, grad psi(h_inf)> = <1, s>
    const Graph g = cycle_graph(6);
    const ModelParams mp{1.0, 1.0, 4.0, quadratic_potential(0.5, 0.25, 6)};
    Rng rng(43);
    const VectorXd s = rng.normal_vector(6).array() + 1.0;
    const VectorXd h = solve_equilibrium(mp, g, s, 1e-12);
    CHECK(mp.potential.grad(h).sum() == Catch::Approx(s.sum()).margin(1e-9));
}

TEST_CASE("equilibrium requires a strongly convex potential") {
    const Graph g = path_graph(3);
    const ModelParams mp{1.0, 0.0, 2.0, zero_potential(3)};
    CHECK_THROWS_AS(solve_equilibrium(mp, g, VectorXd::Ones(3)),
                    std::invalid_argument);
    const ModelParams bad{-1.0, 0.0, 2.0, quadratic_potential(1.0, 0.0, 3)};
    CHECK_THROWS_AS(solve_equilibrium(bad, g, VectorXd::Ones(3)),
                    std::invalid_argument);
}

TEST_CASE("equilibrium sensitivity obeys the lipschitz bound") {
    Rng rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + static_cast<int>(rng.below(5));
        const Graph g = erdos_renyi_graph(n, 0.6, derive_seed(5, trial));
        const double mu = 0.2 + rng.uniform();
        const bool nonlinear = trial % 2 == 0;
        const ModelParams mp{0.5 + rng.uniform(), nonlinear ? 0.3 : 0.0, 3.0,
                             quadratic_potential(mu, 0.0, n)};
        const VectorXd s1 = rng.normal_vector(n);
        const VectorXd s2 = s1 + rng.normal_vector(n, 0.5);
        const SensitivityCheck sc = sensitivity_check(mp, g, s1, s2);
        CHECK(sc.lhs <= sc.rhs * (1.0 + 1e-8) + 1e-10);
    }
}

TEST_CASE("total mass is the plain sum") {
    VectorXd h(4);
    h << 1.0, -2.0, 0.5, 3.0;
    CHECK(total_mass(h) == 2.5);
}
