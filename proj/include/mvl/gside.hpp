#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mvl/error.hpp"
#include "mvl/kernels.hpp"
#include "mvl/tensor.hpp"

namespace mvl::subgraph {

/// Splits instance pairs by kernel similarity against the mean kernel value.
/// Theta(i,j) = 1/|H| when K(i,j) >= mean, -1/|L| otherwise, so the entries
/// over H sum to 1 and over L to -1.
inline Matrix build_theta(const Matrix& k) {
    if (k.rows() != k.cols() || k.rows() == 0)
        throw InvalidArgument("build_theta: kernel must be square and nonempty");
    const Eigen::Index n = k.rows();
    const double mu = k.sum() / static_cast<double>(n * n);
    long high = 0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (k(i, j) >= mu) ++high;
    const long low = static_cast<long>(n) * n - high;
    if (high == 0 || low == 0)
        throw DegenerateInput("build_theta: kernel has no pairs on one side of its mean");
    Matrix theta(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            theta(i, j) = k(i, j) >= mu ? 1.0 / static_cast<double>(high)
                                        : -1.0 / static_cast<double>(low);
    return theta;
}

/// Pairwise label-constraint matrix over ordered pairs, diagonal included:
/// 1/|M| for same-label labeled pairs, -1/|C| for different-label pairs,
/// 0 when either side is unlabeled. Labels are -1/+1 with 0 = unlabeled.
inline Matrix build_omega(const std::vector<int>& labels) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    long same = 0, cross = 0, labeled = 0;
    for (int yi : labels) {
        if (yi == 0) continue;
        ++labeled;
        for (int yj : labels) {
            if (yj == 0) continue;
            (yi == yj ? same : cross) += 1;
        }
    }
    if (labeled == 0) throw InvalidArgument("build_omega: no labeled instances");
    if (cross == 0)
        throw DegenerateInput("build_omega: all labeled instances share one class");
    Matrix omega = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (labels[static_cast<std::size_t>(i)] == 0) continue;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (labels[static_cast<std::size_t>(j)] == 0) continue;
            omega(i, j) = labels[static_cast<std::size_t>(i)] ==
                                  labels[static_cast<std::size_t>(j)]
                              ? 1.0 / static_cast<double>(same)
                              : -1.0 / static_cast<double>(cross);
        }
    }
    return omega;
}

struct PhiSystem {
    Matrix phi;
    Matrix laplacian;       // L = D - Phi
    Matrix laplacian_neg;   // Lhat = min(0, L) entrywise
};

/// Phi = Omega + sum_p lambda_p Theta_p, its Laplacian, and the entrywise
/// negative part used by the pruning bound.
inline PhiSystem build_phi(const Matrix& omega, const std::vector<Matrix>& thetas,
                           const std::vector<double>& lambdas) {
    if (thetas.size() != lambdas.size())
        throw InvalidArgument("build_phi: theta/lambda count mismatch");
    Matrix phi = omega;
    for (std::size_t p = 0; p < thetas.size(); ++p) {
        if (lambdas[p] < 0.0) throw InvalidArgument("build_phi: lambda must be >= 0");
        if (thetas[p].rows() != phi.rows() || thetas[p].cols() != phi.cols())
            throw InvalidArgument("build_phi: theta shape mismatch");
        phi += lambdas[p] * thetas[p];
    }
    PhiSystem out;
    out.phi = std::move(phi);
    out.laplacian = mvl::laplacian(out.phi);
    out.laplacian_neg = out.laplacian.cwiseMin(0.0);
    return out;
}

/// q = f^T L f over a 0/1 indicator, evaluated on the supporting index set.
inline double gside_score(const std::vector<int>& support_ids, const Matrix& l) {
    double q = 0.0;
    for (int p : support_ids)
        for (int r : support_ids) q += l(p, r);
    return q;
}

inline double gside_score(const Vector& f, const Matrix& l) {
    return f.dot(l * f);
}

/// qhat = f^T Lhat f; a lower bound on q(g') for every supergraph g'.
inline double gside_bound(const std::vector<int>& support_ids, const Matrix& lhat) {
    return gside_score(support_ids, lhat);
}

inline double gside_bound(const Vector& f, const Matrix& lhat) {
    return f.dot(lhat * f);
}

}  // namespace mvl::subgraph
