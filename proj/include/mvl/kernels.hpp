#pragma once

#include <Eigen/Dense>

#include "mvl/error.hpp"
#include "mvl/tensor.hpp"

namespace mvl {

/// Similarity kernel over row-instance feature matrices. For the RBF kind a
/// bandwidth of 0 means "use the feature count of the input", which keeps the
/// squared distances scale-free across views of different width.
struct KernelSpec {
    enum class Kind { Linear, Rbf };
    Kind kind = Kind::Rbf;
    double bandwidth = 0.0;  // rbf only; 0 -> feature count at evaluation time

    static KernelSpec linear() { return {Kind::Linear, 0.0}; }
    static KernelSpec rbf(double bandwidth = 0.0) { return {Kind::Rbf, bandwidth}; }
};

/// K(i,j) between rows of Z. Linear: K = Z Z^T. RBF:
/// K(i,j) = exp(-|z_i - z_j|^2 / bandwidth).
inline Matrix kernel_matrix(const Matrix& z, const KernelSpec& spec) {
    if (z.cols() == 0 || z.rows() == 0)
        throw InvalidArgument("kernel_matrix: empty input");
    if (!z.allFinite())
        throw InvalidArgument("kernel_matrix: non-finite entry");
    if (spec.kind == KernelSpec::Kind::Linear) return z * z.transpose();

    const double bw = spec.bandwidth > 0.0 ? spec.bandwidth
                                           : static_cast<double>(z.cols());
    const Eigen::Index n = z.rows();
    const Vector sq = z.rowwise().squaredNorm();
    Matrix d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                2.0 * (z * z.transpose());
    d2 = d2.cwiseMax(0.0);
    Matrix k = (-d2 / bw).array().exp();
    // Exact symmetry and unit diagonal despite rounding in d2.
    k = 0.5 * (k + k.transpose().eval());
    k.diagonal().setOnes();
    return k;
}

/// L = D - Phi with D(i,i) = sum_j Phi(i,j). Phi may be signed; row sums of L
/// are zero by construction.
inline Matrix laplacian(const Matrix& phi, double sym_tol = 1e-10) {
    if (phi.rows() != phi.cols())
        throw InvalidArgument("laplacian: matrix must be square");
    if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > sym_tol)
        throw InvalidArgument("laplacian: matrix asymmetric beyond tolerance");
    Matrix l = -phi;
    l.diagonal() += phi.rowwise().sum();
    return l;
}

}  // namespace mvl
