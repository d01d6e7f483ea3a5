#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "graphflow/spectral.hpp"

using namespace graphflow;

TEST_CASE("path and cycle spectra match the closed forms") {
    // path: 2(1 - cos(k pi / n)), cycle: 2(1 - cos(2 pi k / n))
    for (int n = 3; n <= 12; ++n) {
        const Eigen::VectorXd pv = laplacian_eigenvalues(path_graph(n));
        for (int k = 0; k < n; ++k)
            CHECK(pv[k] == Catch::Approx(2.0 * (1.0 - std::cos(k * M_PI / n)))
                               .margin(1e-10));
        const Eigen::VectorXd cv = laplacian_eigenvalues(cycle_graph(n));
        std::vector<double> expect;
        for (int k = 0; k < n; ++k)
            expect.push_back(2.0 * (1.0 - std::cos(2.0 * M_PI * k / n)));
        std::sort(expect.begin(), expect.end());
        for (int k = 0; k < n; ++k)
            CHECK(cv[k] == Catch::Approx(expect[k]).margin(1e-10));
    }
}

TEST_CASE("canonical gap values") {
    CHECK(spectral_summary(path_graph(3)).lambda2 == Catch::Approx(1.0).margin(1e-10));
    CHECK(spectral_summary(path_graph(3)).lambda_max ==
          Catch::Approx(3.0).margin(1e-10));
    CHECK(spectral_summary(cycle_graph(4)).lambda2 ==
          Catch::Approx(2.0).margin(1e-10));
    CHECK(spectral_summary(path_graph(5)).lambda2 ==
          Catch::Approx(0.381966011250105).margin(1e-9));
    CHECK(spectral_summary(path_graph(4)).lambda2 ==
          Catch::Approx(2.0 - std::sqrt(2.0)).margin(1e-10));
    // complete graph: lambda2 = n, star: lambda2 = 1
    CHECK(spectral_summary(complete_graph(7)).lambda2 ==
          Catch::Approx(7.0).margin(1e-9));
    CHECK(spectral_summary(star_graph(9)).lambda2 == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("fiedler vector is a normalized mean-free eigenvector") {
    for (const Graph& g : {path_graph(7), cycle_graph(8), karate_club_graph()}) {
        const SpectralSummary s = spectral_summary(g);
        CHECK(std::abs(s.fiedler.sum()) <= 1e-9);
        CHECK(s.fiedler.norm() == Catch::Approx(1.0).margin(1e-12));
        const Eigen::VectorXd r =
            laplacian_apply(g, s.fiedler) - s.lambda2 * s.fiedler;
        CHECK(r.norm() <= 1e-8);
    }
}

TEST_CASE("repeated summaries agree bit for bit") {
    const Graph g = erdos_renyi_graph(25, 0.3, 2);
    const SpectralSummary a = spectral_summary(g);
    const SpectralSummary b = spectral_summary(g);
    CHECK(a.lambda2 == b.lambda2);
    CHECK(a.lambda_max == b.lambda_max);
    CHECK((a.fiedler - b.fiedler).norm() == 0.0);
    CHECK(a.fiedler[0] >= 0.0);  // sign convention
}

TEST_CASE("weighted laplacian matrix assembly") {
    const Graph g = Graph::from_edges(3, {{0, 1, 2.0}, {1, 2, 0.5}});
    const Eigen::MatrixXd L = laplacian_matrix(g);
    CHECK(L(0, 0) == 2.0);
    CHECK(L(1, 1) == 2.5);
    CHECK(L(2, 2) == 0.5);
    CHECK(L(0, 1) == -2.0);
    CHECK(L(1, 2) == -0.5);
    CHECK(L(0, 2) == 0.0);
    CHECK((L - L.transpose()).norm() == 0.0);
}
