#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "mvl/error.hpp"
#include "mvl/tensor.hpp"

namespace mvl {

/// Minimization of f(S) over matrices with orthonormal columns, S^T S = I.
struct StiefelProblem {
    std::function<double(const Matrix&)> objective;
    std::function<Matrix(const Matrix&)> gradient;
    Matrix s0;
};

struct StiefelOptions {
    int max_iters = 1000;
    double tol = 1e-8;          // projected-gradient norm at exit
    double tau0 = 1e-3;         // initial curvilinear step
    double armijo = 1e-4;
    double eta = 0.85;          // nonmonotone reference mixing
    double tau_min = 1e-12;
    double tau_max = 1e10;
    double feas_tol = 1e-8;
    int max_backtracks = 40;
};

struct StiefelResult {
    Matrix s;
    double objective = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

// QR orthonormalization with the R-diagonal sign fixed, so the result is a
// deterministic function of the input.
inline Matrix qr_orthonormalize(const Matrix& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
    const Matrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

inline double feasibility_gap(const Matrix& s) {
    return (s.transpose() * s - Matrix::Identity(s.cols(), s.cols())).norm();
}

}  // namespace detail

/// Curvilinear search along the Cayley retraction
/// Y(tau) = S - tau U (I + tau/2 V^T U)^{-1} V^T S with U = [G, S],
/// V = [S, -G], combined with alternating Barzilai-Borwein steps and a
/// nonmonotone Armijo condition. Every accepted iterate is kept feasible.
inline StiefelResult stiefel_minimize(const StiefelProblem& p,
                                      const StiefelOptions& opt = {}) {
    if (p.s0.size() == 0) throw InvalidArgument("stiefel_minimize: empty start");
    if (detail::feasibility_gap(p.s0) > opt.feas_tol)
        throw InvalidArgument("stiefel_minimize: infeasible starting point");

    const Eigen::Index n = p.s0.rows(), k = p.s0.cols();
    Matrix s = p.s0;
    double f = p.objective(s);
    Matrix g = p.gradient(s);

    auto proj_grad = [&](const Matrix& s_, const Matrix& g_) {
        return (g_ - s_ * (g_.transpose() * s_)).eval();
    };

    StiefelResult res;
    res.s = s;
    res.objective = f;
    res.grad_norm = proj_grad(s, g).norm();
    if (res.grad_norm <= opt.tol) {
        res.converged = true;
        return res;
    }

    double cref = f;   // nonmonotone reference value
    double q = 1.0;
    double tau = opt.tau0;
    Matrix s_prev, g_prev;

    for (int it = 1; it <= opt.max_iters; ++it) {
        const Matrix u = (Matrix(n, 2 * k) << g, s).finished();
        const Matrix v = (Matrix(n, 2 * k) << s, -g).finished();
        const Matrix vtu = v.transpose() * u;
        const Matrix vts = v.transpose() * s;
        const Matrix pg = proj_grad(s, g);
        const double descent = -0.5 * (g * s.transpose() - s * g.transpose()).squaredNorm();

        double f_new = f;
        Matrix s_new;
        double t = tau;
        bool accepted = false;
        for (int bt = 0; bt < opt.max_backtracks; ++bt) {
            Matrix lhs = Matrix::Identity(2 * k, 2 * k) + (0.5 * t) * vtu;
            s_new = s - t * (u * lhs.partialPivLu().solve(vts));
            if (detail::feasibility_gap(s_new) > 1e-12)
                s_new = detail::qr_orthonormalize(s_new);
            f_new = p.objective(s_new);
            if (f_new <= cref + opt.armijo * t * descent) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // step collapsed; current iterate is the answer

        s_prev = s;
        g_prev = g;
        s = s_new;
        f = f_new;
        g = p.gradient(s);

        const double qn = opt.eta * q + 1.0;
        cref = (opt.eta * q * cref + f) / qn;
        q = qn;

        const Matrix ds = s - s_prev;
        const Matrix dg = proj_grad(s, g) - proj_grad(s_prev, g_prev);
        const double sy = std::fabs((ds.array() * dg.array()).sum());
        if (sy > 0.0) {
            tau = (it % 2 == 0) ? ds.squaredNorm() / sy : sy / dg.squaredNorm();
            tau = std::clamp(tau, opt.tau_min, opt.tau_max);
        } else {
            tau = opt.tau0;
        }

        res.iterations = it;
        res.grad_norm = proj_grad(s, g).norm();
        if (res.grad_norm <= opt.tol) {
            res.converged = true;
            break;
        }
    }

    res.s = s;
    res.objective = f;
    // The retraction keeps iterates orthonormal; surface any drift loudly.
    if (detail::feasibility_gap(res.s) > opt.feas_tol)
        throw ConvergenceFailure("stiefel_minimize: feasibility lost",
                                 detail::feasibility_gap(res.s));
    return res;
}

}  // namespace mvl
