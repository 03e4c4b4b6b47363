#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mvl/error.hpp"

namespace mvl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense third-order tensor in a fixed column-major layout: entry (i,j,k)
/// lives at data[i + I1*j + I1*I2*k]. With this layout the mode-1 unfolding
/// is a plain reshape of the buffer and the mode-k matricization below
/// realizes the index map j = 1 + sum_{p != k} (i_p - 1) J_p literally.
class Tensor3 {
public:
    Tensor3() : dims_{0, 0, 0} {}

    Tensor3(Eigen::Index i1, Eigen::Index i2, Eigen::Index i3)
        : dims_{i1, i2, i3}, data_(Eigen::VectorXd::Zero(i1 * i2 * i3)) {
        if (i1 <= 0 || i2 <= 0 || i3 <= 0)
            throw InvalidArgument("Tensor3: dimensions must be positive");
    }

    Eigen::Index dim(int mode) const { return dims_[static_cast<std::size_t>(mode - 1)]; }
    std::array<Eigen::Index, 3> dims() const { return dims_; }
    Eigen::Index size() const { return data_.size(); }

    double& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
        return data_[i + dims_[0] * (j + dims_[1] * k)];
    }
    double operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
        return data_[i + dims_[0] * (j + dims_[1] * k)];
    }

    const Eigen::VectorXd& data() const { return data_; }
    Eigen::VectorXd& data() { return data_; }

    /// Frontal slice X(:,:,k) as an I1 x I2 matrix view.
    Eigen::Map<const Matrix> slice(Eigen::Index k) const {
        return Eigen::Map<const Matrix>(data_.data() + dims_[0] * dims_[1] * k,
                                        dims_[0], dims_[1]);
    }

    void set_slice(Eigen::Index k, const Matrix& m) {
        Eigen::Map<Matrix>(data_.data() + dims_[0] * dims_[1] * k, dims_[0], dims_[1]) = m;
    }

    bool all_finite() const { return data_.allFinite(); }

    bool same_dims(const Tensor3& o) const { return dims_ == o.dims_; }

private:
    std::array<Eigen::Index, 3> dims_;
    Eigen::VectorXd data_;
};

inline Tensor3 outer_product(const Vector& u, const Vector& v, const Vector& w) {
    if (u.size() == 0 || v.size() == 0 || w.size() == 0)
        throw InvalidArgument("outer_product: vectors must be nonempty");
    Tensor3 t(u.size(), v.size(), w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k)
        t.set_slice(k, (u * v.transpose()) * w[k]);
    return t;
}

inline double inner_product(const Tensor3& a, const Tensor3& b) {
    if (!a.same_dims(b))
        throw InvalidArgument("inner_product: dimension mismatch");
    return a.data().dot(b.data());
}

inline double frobenius_norm(const Tensor3& a) { return a.data().norm(); }

/// Mode-k matricization, k in {1,2,3}. Row index is i_k; the column index of
/// entry (i1,i2,i3) is sum over the other modes p of i_p * J_p with
/// J_p = prod of preceding non-k dimensions.
inline Matrix mode_k_matricize(const Tensor3& a, int k) {
    const Eigen::Index i1 = a.dim(1), i2 = a.dim(2), i3 = a.dim(3);
    switch (k) {
        case 1:
            // Column-major layout makes this a reshape.
            return Eigen::Map<const Matrix>(a.data().data(), i1, i2 * i3);
        case 2: {
            Matrix m(i2, i1 * i3);
            for (Eigen::Index c = 0; c < i3; ++c)
                for (Eigen::Index b = 0; b < i2; ++b)
                    for (Eigen::Index r = 0; r < i1; ++r)
                        m(b, r + c * i1) = a(r, b, c);
            return m;
        }
        case 3: {
            Matrix m(i3, i1 * i2);
            for (Eigen::Index c = 0; c < i3; ++c)
                for (Eigen::Index b = 0; b < i2; ++b)
                    for (Eigen::Index r = 0; r < i1; ++r)
                        m(c, r + b * i1) = a(r, b, c);
            return m;
        }
        default:
            throw InvalidArgument("mode_k_matricize: mode must be 1, 2, or 3");
    }
}

/// Inverse of mode_k_matricize for the given target dimensions.
inline Tensor3 refold(const Matrix& m, int k, Eigen::Index i1, Eigen::Index i2,
                      Eigen::Index i3) {
    Tensor3 t(i1, i2, i3);
    switch (k) {
        case 1:
            if (m.rows() != i1 || m.cols() != i2 * i3)
                throw InvalidArgument("refold: shape mismatch for mode 1");
            t.data() = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
            return t;
        case 2:
            if (m.rows() != i2 || m.cols() != i1 * i3)
                throw InvalidArgument("refold: shape mismatch for mode 2");
            for (Eigen::Index c = 0; c < i3; ++c)
                for (Eigen::Index b = 0; b < i2; ++b)
                    for (Eigen::Index r = 0; r < i1; ++r)
                        t(r, b, c) = m(b, r + c * i1);
            return t;
        case 3:
            if (m.rows() != i3 || m.cols() != i1 * i2)
                throw InvalidArgument("refold: shape mismatch for mode 3");
            for (Eigen::Index c = 0; c < i3; ++c)
                for (Eigen::Index b = 0; b < i2; ++b)
                    for (Eigen::Index r = 0; r < i1; ++r)
                        t(r, b, c) = m(c, r + b * i1);
            return t;
        default:
            throw InvalidArgument("refold: mode must be 1, 2, or 3");
    }
}

/// Columnwise Kronecker product: column k of the result is A(:,k) kron B(:,k).
inline Matrix khatri_rao(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw InvalidArgument("khatri_rao: column counts differ");
    Matrix out(a.rows() * b.rows(), a.cols());
    for (Eigen::Index k = 0; k < a.cols(); ++k)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), k, b.rows(), 1) = a(i, k) * b.col(k);
    return out;
}

/// Contraction along mode k with a matrix whose column count equals dim(k).
inline Tensor3 mode_k_product(const Tensor3& a, int k, const Matrix& m) {
    if (k < 1 || k > 3)
        throw InvalidArgument("mode_k_product: mode must be 1, 2, or 3");
    if (m.cols() != a.dim(k))
        throw InvalidArgument("mode_k_product: matrix columns must match tensor mode");
    const Matrix unfolded = m * mode_k_matricize(a, k);
    std::array<Eigen::Index, 3> d = a.dims();
    d[static_cast<std::size_t>(k - 1)] = m.rows();
    return refold(unfolded, k, d[0], d[1], d[2]);
}

/// Order-3 tensor symmetric in its first two modes.
class PartiallySymmetricTensor3 {
public:
    explicit PartiallySymmetricTensor3(Tensor3 t) : t_(std::move(t)) {
        if (t_.dim(1) != t_.dim(2))
            throw InvalidArgument("PartiallySymmetricTensor3: first two dims must match");
        for (Eigen::Index k = 0; k < t_.dim(3); ++k) {
            const Matrix s = t_.slice(k);
            if (s != s.transpose().eval())
                throw InvalidArgument("PartiallySymmetricTensor3: slice not symmetric");
        }
    }

    const Tensor3& tensor() const { return t_; }
    Eigen::Index nodes() const { return t_.dim(1); }
    Eigen::Index subjects() const { return t_.dim(3); }

private:
    Tensor3 t_;
};

/// Stacks symmetric matrices as frontal slices. Inputs may carry rounding
/// noise up to `tol`; they are symmetrized by averaging before stacking.
inline PartiallySymmetricTensor3 stack_networks(const std::vector<Matrix>& mats,
                                                double tol = 1e-12) {
    if (mats.empty())
        throw InvalidArgument("stack_networks: no matrices given");
    const Eigen::Index m = mats.front().rows();
    for (const Matrix& a : mats) {
        if (a.rows() != m || a.cols() != m)
            throw InvalidArgument("stack_networks: matrices must be square and equal-sized");
        if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol)
            throw InvalidArgument("stack_networks: matrix asymmetric beyond tolerance");
        if (!a.allFinite())
            throw InvalidArgument("stack_networks: non-finite entry");
    }
    Tensor3 t(m, m, static_cast<Eigen::Index>(mats.size()));
    for (std::size_t k = 0; k < mats.size(); ++k)
        t.set_slice(static_cast<Eigen::Index>(k),
                    0.5 * (mats[k] + mats[k].transpose()));
    return PartiallySymmetricTensor3(std::move(t));
}

}  // namespace mvl
