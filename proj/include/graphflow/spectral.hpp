#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "graphflow/graph.hpp"

namespace graphflow {

struct SpectralSummary {
    double lambda2;
    double lambda_max;
    Eigen::VectorXd fiedler;
};

// Dense symmetric eigensolve of L. Fine at desk scale; the Fiedler vector is
// normalized and sign-fixed (first component with |x_i| > 1e-12 is positive)
// so repeated calls agree bit for bit.
inline SpectralSummary spectral_summary(const Graph& g) {
    const Eigen::MatrixXd L = laplacian_matrix(g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    if (es.info() != Eigen::Success)
        throw NumericalError("spectral_summary: eigensolver failed");
    const auto& vals = es.eigenvalues();
    SpectralSummary s;
    s.lambda2 = vals[1];
    s.lambda_max = vals[vals.size() - 1];
    s.fiedler = es.eigenvectors().col(1);
    s.fiedler.normalize();
    for (int i = 0; i < s.fiedler.size(); ++i) {
        if (std::abs(s.fiedler[i]) > 1e-12) {
            if (s.fiedler[i] < 0.0) s.fiedler = -s.fiedler;
            break;
        }
    }
    return s;
}

inline Eigen::VectorXd laplacian_eigenvalues(const Graph& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian_matrix(g),
                                                      Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("laplacian_eigenvalues: eigensolver failed");
    return es.eigenvalues();
}

}  // namespace graphflow
