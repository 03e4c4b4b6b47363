#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "mvl/error.hpp"
#include "mvl/tensor.hpp"

namespace mvl {

/// Soft-margin SVM dual solution. For a linear kernel the primal weights are
/// recovered as w = sum_i alpha_i y_i x_i; the equality constraint
/// sum_i alpha_i y_i = 0 and the box 0 <= alpha_i <= C hold at exit.
struct SvmSolution {
    Vector alphas;
    Vector w;        // empty for precomputed-kernel training
    double b = 0.0;
    double C = 0.0;
    double kkt_gap = 0.0;
    long iterations = 0;

    double decision_linear(const Vector& x) const { return w.dot(x) + b; }
};

struct SvmOptions {
    double tol = 1e-6;            // maximal-violating-pair gap at exit
    long max_iterations = 100000; // two-variable updates
};

/// Trains on a precomputed Gram matrix K (n x n) by sequential minimal
/// optimization with maximal-violating-pair selection. The dual is
/// min 1/2 a^T Q a - 1^T a, Q(i,j) = y_i y_j K(i,j), subject to y^T a = 0 and
/// the box constraints.
inline SvmSolution svm_train_kernel(const Matrix& k, const Vector& y, double C,
                                    const SvmOptions& opt = {}) {
    const Eigen::Index n = k.rows();
    if (n == 0 || k.cols() != n)
        throw InvalidArgument("svm_train_kernel: Gram matrix must be square and nonempty");
    if (y.size() != n) throw InvalidArgument("svm_train_kernel: label length mismatch");
    if (C <= 0.0) throw InvalidArgument("svm_train_kernel: C must be positive");
    bool has_pos = false, has_neg = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y[i] > 0) has_pos = true;
        else has_neg = true;
    }
    if (!has_pos || !has_neg)
        throw InvalidArgument("svm_train_kernel: both classes must be present");

    Vector alpha = Vector::Zero(n);
    Vector grad = Vector::Constant(n, -1.0);  // d/da of the dual at alpha = 0
    constexpr double kTau = 1e-12;

    auto in_up = [&](Eigen::Index t) {
        return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
    };
    auto in_low = [&](Eigen::Index t) {
        return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
    };

    double gap = std::numeric_limits<double>::infinity();
    long it = 0;
    for (; it < opt.max_iterations; ++it) {
        Eigen::Index i = -1, j = -1;
        double up = -std::numeric_limits<double>::infinity();
        double low = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > up) { up = v; i = t; }
            if (in_low(t) && v < low) { low = v; j = t; }
        }
        gap = up - low;
        if (gap <= opt.tol) break;

        const double qii = k(i, i), qjj = k(j, j), qij = y[i] * y[j] * k(i, j);
        const double old_ai = alpha[i], old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = qii + qjj + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0 && alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
            else if (diff <= 0 && alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
            if (diff > 0) { if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; } }
            else { if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; } }
        } else {
            double quad = qii + qjj - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) { if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; } }
            else { if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; } }
            if (sum > C) { if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; } }
            else { if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; } }
        }
        const double di = (alpha[i] - old_ai) * y[i];
        const double dj = (alpha[j] - old_aj) * y[j];
        grad.array() += y.array() * (k.col(i).array() * di + k.col(j).array() * dj);
    }
    if (gap > opt.tol)
        throw ConvergenceFailure("svm_train_kernel: KKT gap above tolerance after max iterations", gap);

    // Bias from the free support vectors, midpoint of the violating-pair
    // bounds when none are free.
    double bsum = 0.0;
    long bcnt = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < C) {
            bsum += -y[t] * grad[t];
            ++bcnt;
        }
    }
    double b;
    if (bcnt > 0) {
        b = bsum / static_cast<double>(bcnt);
    } else {
        double up = -std::numeric_limits<double>::infinity();
        double low = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t)) up = std::max(up, v);
            if (in_low(t)) low = std::min(low, v);
        }
        b = 0.5 * (up + low);
    }

    SvmSolution sol;
    sol.alphas = std::move(alpha);
    sol.b = b;
    sol.C = C;
    sol.kkt_gap = gap;
    sol.iterations = it;
    return sol;
}

/// Linear SVM on instance rows: X is n x d, y in {-1,+1}.
inline SvmSolution svm_train(const Matrix& x, const Vector& y, double C,
                             const SvmOptions& opt = {}) {
    if (x.rows() == 0 || x.cols() == 0)
        throw InvalidArgument("svm_train: empty data");
    SvmSolution sol = svm_train_kernel(x * x.transpose(), y, C, opt);
    sol.w = x.transpose() * (sol.alphas.array() * y.array()).matrix();
    return sol;
}

}  // namespace mvl
