#pragma once

#include <Eigen/Dense>

#include "mvl/error.hpp"
#include "mvl/tensor.hpp"

namespace mvl {

/// Solves min_W |A W - Y|_F^2 + gamma |W|_F^2, i.e.
/// W = (A^T A + gamma I)^{-1} A^T Y, through a Cholesky factorization of the
/// normal equations. Falls back to a symmetric eigendecomposition when the
/// factorization fails; a singular system with gamma = 0 is an error.
inline Matrix ridge_solve(const Matrix& a, const Matrix& y, double gamma) {
    if (gamma < 0.0) throw InvalidArgument("ridge_solve: gamma must be >= 0");
    if (a.rows() != y.rows())
        throw InvalidArgument("ridge_solve: row counts of A and Y differ");
    Matrix gram = a.transpose() * a;
    gram.diagonal().array() += gamma;
    const Matrix rhs = a.transpose() * y;

    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    const Vector& ev = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev.minCoeff() <= cutoff) {
        if (gamma == 0.0)
            throw SingularMatrix("ridge_solve: singular system with gamma = 0");
        throw SingularMatrix("ridge_solve: normal equations numerically singular");
    }
    return eig.eigenvectors() *
           ev.cwiseInverse().asDiagonal() *
           (eig.eigenvectors().transpose() * rhs);
}

}  // namespace mvl
