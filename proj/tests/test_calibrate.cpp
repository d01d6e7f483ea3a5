#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "graphflow/calibrate.hpp"

using namespace graphflow;
using Eigen::VectorXd;

namespace {

CalibrationTargets p3_targets(double tau_star, double h_target) {
    CalibrationTargets t;
    t.tau_star = tau_star;
    t.h_target = h_target;
    t.h_star = VectorXd::Zero(3);
    t.s_inf = VectorXd::Constant(3, 1.0 / 3.0);
    return t;
}

}  // namespace

TEST_CASE("closed-form calibration on the flagship instance") {
    const Graph g = path_graph(3);
    const CalibrationResult r = sgps(g, p3_targets(1.0, 10.0));
    CHECK(r.rho_star == 1.0);
    CHECK(r.alpha == Catch::Approx(1.0).margin(1e-12));
    CHECK(r.gamma_bar == Catch::Approx(0.1).margin(1e-14));
    CHECK((r.gamma.array() == r.gamma_bar).all());
    CHECK(r.h_inf.sum() == Catch::Approx(10.0).margin(1e-8));
    CHECK(r.predicted_rate == Catch::Approx(0.1).margin(1e-12));
    // the mass target and the per-node rate floor conflict here
    CHECK_FALSE(r.feasible);
    CHECK_FALSE(r.note.empty());
    // mass identity: <1, h_inf> = <1, h_star> + s_bar / gamma_bar
    CHECK(r.h_inf.sum() ==
          Catch::Approx(0.0 + 1.0 / r.gamma_bar).margin(1e-8));
    // symmetric graph and source: ends agree, middle differs
    CHECK(r.h_inf[0] == Catch::Approx(r.h_inf[2]).margin(1e-10));
}

TEST_CASE("calibration target sweep matches the closed forms") {
    const Graph g = path_graph(3);
    const CalibrationResult a = sgps(g, p3_targets(2.0, 20.0));
    CHECK(a.alpha == Catch::Approx(0.5).margin(1e-12));
    CHECK(a.gamma_bar == Catch::Approx(0.05).margin(1e-14));
    const CalibrationResult b = sgps(g, p3_targets(0.5, 5.0));
    CHECK(b.alpha == Catch::Approx(2.0).margin(1e-12));
    CHECK(b.gamma_bar == Catch::Approx(0.2).margin(1e-14));
}

TEST_CASE("calibration is feasible when the mass target is modest") {
    const Graph g = path_graph(3);
    const CalibrationResult r = sgps(g, p3_targets(1.0, 0.8));
    CHECK(r.gamma_bar == Catch::Approx(1.25).margin(1e-12));
    CHECK(r.feasible);
    CHECK(r.predicted_rate == Catch::Approx(1.0).margin(1e-12));
    CHECK(r.h_inf.sum() == Catch::Approx(0.8).margin(1e-10));
}

TEST_CASE("calibration validates its targets") {
    const Graph g = path_graph(3);
    CHECK_THROWS_AS(sgps(g, p3_targets(-1.0, 10.0)), std::invalid_argument);
    CHECK_THROWS_AS(sgps(g, p3_targets(1.0, 0.0)), std::invalid_argument);
    CalibrationTargets bad = p3_targets(1.0, 10.0);
    bad.s_inf = VectorXd::Constant(3, -0.1);
    CHECK_THROWS_AS(sgps(g, bad), std::invalid_argument);
    CalibrationTargets wrong_size = p3_targets(1.0, 10.0);
    wrong_size.s_inf = VectorXd::Constant(4, 0.25);
    wrong_size.h_star = VectorXd::Zero(4);
    CHECK_THROWS_AS(sgps(g, wrong_size), std::invalid_argument);
}

TEST_CASE("bisection calibration reproduces the quadratic closed form") {
    const Graph g = path_graph(3);
    const CalibrationTargets t = p3_targets(1.0, 10.0);
    auto family = [&](double scale) {
        return quadratic_potential(VectorXd::Constant(3, scale),
                                   VectorXd::Zero(3));
    };
    const CalibrationResult r = sgps_nonlinear(g, t, family);
    CHECK(r.gamma_bar == Catch::Approx(0.1).epsilon(1e-6));
    CHECK(r.h_inf.sum() == Catch::Approx(10.0).margin(1e-6));
    CHECK(r.alpha == Catch::Approx(1.0).margin(1e-12));
    CHECK_FALSE(r.feasible);
}

TEST_CASE("bisection calibration hits the mass target for log cosh") {
    // uniform source on P4 gives a uniform equilibrium h = H*/4, so the
    // mass-matching scale solves gamma h + tanh(h) = s_bar/4 in closed form
    const Graph g = path_graph(4);
    CalibrationTargets t;
    t.tau_star = 1.0;
    t.h_target = 1.5;
    t.h_star = VectorXd::Zero(4);
    t.s_inf = VectorXd::Constant(4, 0.5);
    auto family = [&](double scale) {
        return logcosh_potential(scale, VectorXd::Zero(4));
    };
    const CalibrationResult r = sgps_nonlinear(g, t, family);
    CHECK(r.h_inf.sum() == Catch::Approx(1.5).margin(1e-6));
    const double h = 1.5 / 4.0;
    const double gamma_expect = (0.5 - std::tanh(h)) / h;
    CHECK(r.gamma_bar == Catch::Approx(gamma_expect).margin(1e-5));
    CHECK(r.h_inf[0] == Catch::Approx(h).margin(1e-6));
    // the scale sits below the pure-quadratic value because the log cosh
    // term dissipates on its own
    CHECK(r.gamma_bar < 2.0 / 1.5);
    CHECK(r.predicted_rate == Catch::Approx(r.gamma_bar).margin(1e-12));
    CHECK_FALSE(r.feasible);
    ModelParams mp{r.alpha, 0.0, 2.0, family(r.gamma_bar)};
    CHECK((drift(mp, g, r.h_inf) - t.s_inf).norm() <= 1e-6);
}

TEST_CASE("nonsynonymy report finds the first path violation") {
    const NonsynReport rep = nonsynonymy_report(1.0, 0.5, 8);
    CHECK(rep.first_violation_n == 5);
    // closed-form cross-check of the boundary rows
    for (const auto& row : rep.rows) {
        if (row.family != "path") continue;
        const double expect = 2.0 * (1.0 - std::cos(M_PI / row.n));
        CHECK(row.lambda2 == Catch::Approx(expect).margin(1e-9));
        CHECK(row.violated == (row.rate < 0.5));
        if (row.n == 4) CHECK_FALSE(row.violated);
        if (row.n == 5) CHECK(row.violated);
    }
    for (const auto& row : rep.rows)
        if (row.family == "regular4") CHECK(row.rate > 0.1);
}

TEST_CASE("nonsynonymy report notes when no violation is reached") {
    const NonsynReport rep = nonsynonymy_report(1.0, 1e-6, 6);
    CHECK(rep.first_violation_n == -1);
    CHECK_FALSE(rep.note.empty());
    CHECK_THROWS_AS(nonsynonymy_report(0.0, 0.5, 8), std::invalid_argument);
}

TEST_CASE("mean-field equilibrium matches the dense complete graph") {
    const int n = 50;
    const double w = 0.02, alpha = 1.3;
    Rng rng(51);
    const VectorXd gamma = rng.normal_vector(n).array().abs() + 0.5;
    const VectorXd h_star = rng.normal_vector(n);
    const VectorXd s_inf = rng.normal_vector(n).array() + 1.0;
    const MeanFieldResult mf = kn_meanfield(n, w, alpha, gamma, h_star, s_inf);

    const Graph g = complete_graph(n, w);
    const ModelParams mp{alpha, 0.0, 2.0, quadratic_potential(gamma, h_star)};
    const VectorXd ref = solve_equilibrium(mp, g, s_inf);
    CHECK((mf.h_inf - ref).norm() <= 1e-7 * (1.0 + ref.norm()));
    CHECK(mf.lambda2 == Catch::Approx(w * n).margin(1e-12));
    CHECK(mf.slow_mode ==
          Catch::Approx(std::min(gamma.minCoeff(), alpha * w * n)).margin(1e-12));
}

TEST_CASE("mean-field solver scales without dense assembly") {
    const int n = 20000;
    const VectorXd gamma = VectorXd::Constant(n, 0.5);
    const VectorXd h_star = VectorXd::Zero(n);
    const VectorXd s_inf = VectorXd::Constant(n, 1.0 / n);
    const MeanFieldResult mf =
        kn_meanfield(n, 1.0 / n, 1.0, gamma, h_star, s_inf);
    // residual check through the operator itself
    const VectorXd r =
        (1.0 / n) * (n * mf.h_inf.array() - mf.h_inf.sum()).matrix() +
        0.5 * mf.h_inf - s_inf;
    CHECK(r.norm() <= 1e-8);
    CHECK(mf.slow_mode == Catch::Approx(0.5).margin(1e-12));
}
