#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvl/error.hpp"
#include "mvl/kernels.hpp"
#include "mvl/svm.hpp"
#include "mvl/tensor.hpp"

namespace mvl::mvfs {

/// Instances described by m >= 2 feature groups. Each view stores features as
/// rows and instances as columns (I_v x n); labels are -1/+1.
struct MultiViewDataset {
    std::vector<Matrix> views;
    Vector labels;
    std::vector<std::string> view_names;

    Eigen::Index instance_count() const { return labels.size(); }
    std::size_t view_count() const { return views.size(); }

    void validate() const {
        if (views.size() < 2)
            throw InvalidArgument("MultiViewDataset: need at least two views");
        for (const Matrix& v : views) {
            if (v.cols() != labels.size())
                throw InvalidArgument("MultiViewDataset: instance count mismatch across views");
            if (v.rows() == 0)
                throw InvalidArgument("MultiViewDataset: empty view");
            if (!v.allFinite())
                throw InvalidArgument("MultiViewDataset: non-finite feature");
        }
        for (Eigen::Index i = 0; i < labels.size(); ++i)
            if (labels[i] != 1.0 && labels[i] != -1.0)
                throw InvalidArgument("MultiViewDataset: labels must be -1 or +1");
    }
};

/// Surviving feature indices, per-view weights on those indices, and the bias
/// of the last trained view.
struct SelectionState {
    std::vector<std::vector<Eigen::Index>> selected;  // s^(v), sorted ascending
    std::vector<Vector> weights;                      // w^(v), aligned with selected
    double bias = 0.0;
    std::vector<Eigen::Index> targets;                // J_v
};

struct CrossViewConstants {
    double p = 0.0;  // product of the other views' squared weight norms
    Vector q;        // per instance, product of the other views' <w, x>
};

/// Multiplies column i of a view by Q_i / sqrt(P).
inline Matrix scale_view(const Matrix& x_v, const Vector& q, double p) {
    if (p <= 0.0) throw InvalidArgument("scale_view: P must be positive");
    if (q.size() != x_v.cols())
        throw InvalidArgument("scale_view: Q length must match instance count");
    return x_v * (q / std::sqrt(p)).asDiagonal();
}

inline Matrix restrict_rows(const Matrix& x, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
    return out;
}

/// P = prod_{j != v} |w^(j)|^2 and Q_i = prod_{j != v} <w^(j), x_i^(j)>, with
/// every view restricted to its surviving features.
inline CrossViewConstants cross_view_constants(const SelectionState& state,
                                               const MultiViewDataset& data,
                                               std::size_t v) {
    const Eigen::Index n = data.instance_count();
    CrossViewConstants out;
    out.p = 1.0;
    out.q = Vector::Ones(n);
    for (std::size_t j = 0; j < data.view_count(); ++j) {
        if (j == v) continue;
        const Vector& w = state.weights[j];
        const double nrm2 = w.squaredNorm();
        if (nrm2 == 0.0)
            throw DegenerateInput("cross_view_constants: zero weight vector in view " +
                                  std::to_string(j));
        out.p *= nrm2;
        const Matrix xr = restrict_rows(data.views[j], state.selected[j]);
        out.q.array() *= (xr.transpose() * w).array();
    }
    return out;
}

/// w^(v) = (1/P) sum_i Q_i alpha_i y_i x_i^(v).
inline Vector view_weights(const Vector& alphas, const Vector& y, const Vector& q,
                           double p, const Matrix& x_v) {
    if (alphas.size() != y.size() || alphas.size() != q.size() ||
        alphas.size() != x_v.cols())
        throw InvalidArgument("view_weights: shape mismatch");
    return (x_v * (q.array() * alphas.array() * y.array()).matrix()) / p;
}

/// Squared-weight ranking; the elimination candidate is the argmin with ties
/// broken by smallest index.
inline Vector rank_linear(const Vector& w) { return w.array().square(); }

inline Eigen::Index argmin_with_index_ties(const Vector& r) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < r.size(); ++i)
        if (r[i] < r[best]) best = i;
    return best;
}

/// Kernel ranking criterion: r_i = a^T H a - a^T H(-i) a where H(p,q) =
/// y_p y_q k(x_p, x_q) on the scaled surviving features and H(-i) recomputes
/// the kernel with feature i removed from both arguments. Alphas stay fixed.
inline Vector rank_kernel(const Vector& alphas, const Vector& y,
                          const Matrix& x_scaled, const KernelSpec& spec) {
    const Eigen::Index d = x_scaled.rows();
    const Vector ay = (alphas.array() * y.array()).matrix();
    KernelSpec fixed = spec;
    if (fixed.kind == KernelSpec::Kind::Rbf && fixed.bandwidth == 0.0)
        fixed.bandwidth = static_cast<double>(d);  // held fixed across removals

    const Matrix k_full = kernel_matrix(x_scaled.transpose(), fixed);
    const double full = ay.dot(k_full * ay);
    Vector r(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        Matrix reduced(d - 1, x_scaled.cols());
        reduced.topRows(i) = x_scaled.topRows(i);
        reduced.bottomRows(d - 1 - i) = x_scaled.bottomRows(d - 1 - i);
        const Matrix k_red = kernel_matrix(reduced.transpose(), fixed);
        r[i] = full - ay.dot(k_red * ay);
    }
    return r;
}

struct SelectOptions {
    double C = 1.0;
    KernelSpec spec = KernelSpec::linear();
    int alternations = 3;   // full refinement rounds after elimination
    int chunk = 1;          // features eliminated per view visit
    SvmOptions svm;
};

namespace detail {

struct TrainOutcome {
    Vector ranking;
    Vector weights;
    double bias;
};

inline TrainOutcome train_view(const SelectionState& state, const MultiViewDataset& data,
                               std::size_t v, const SelectOptions& opt) {
    const CrossViewConstants cvc = cross_view_constants(state, data, v);
    const Matrix xr = restrict_rows(data.views[v], state.selected[v]);
    const Matrix xs = scale_view(xr, cvc.q, cvc.p);

    SvmSolution sol;
    if (opt.spec.kind == KernelSpec::Kind::Linear) {
        sol = svm_train(xs.transpose(), data.labels, opt.C, opt.svm);
    } else {
        KernelSpec spec = opt.spec;
        if (spec.bandwidth == 0.0) spec.bandwidth = static_cast<double>(xs.rows());
        sol = svm_train_kernel(kernel_matrix(xs.transpose(), spec), data.labels, opt.C,
                               opt.svm);
    }

    TrainOutcome out;
    out.weights = view_weights(sol.alphas, data.labels, cvc.q, cvc.p, xr);
    out.bias = sol.b;
    out.ranking = (opt.spec.kind == KernelSpec::Kind::Linear)
                      ? rank_linear(out.weights)
                      : rank_kernel(sol.alphas, data.labels, xs, opt.spec);
    return out;
}

inline std::vector<Eigen::Index> ranking_order(const Vector& r) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(r.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return r[a] < r[b]; });
    return idx;
}

}  // namespace detail

/// Recursive feature elimination over all views. Views are visited round-robin;
/// each visit retrains the view's SVM against the latest other-view weights and
/// removes the lowest-ranked surviving feature until the view reaches its
/// target. Afterwards each view is retrained for up to `alternations` rounds,
/// stopping early once no per-view ranking order changes.
inline SelectionState tmvfs_select(const MultiViewDataset& data,
                                   const std::vector<Eigen::Index>& targets,
                                   const SelectOptions& opt = {}) {
    data.validate();
    const std::size_t m = data.view_count();
    if (targets.size() != m)
        throw InvalidArgument("tmvfs_select: one target per view required");
    for (std::size_t v = 0; v < m; ++v) {
        if (targets[v] < 1 || targets[v] > data.views[v].rows())
            throw InvalidArgument("tmvfs_select: target out of range for view " +
                                  std::to_string(v));
    }

    SelectionState state;
    state.targets = targets;
    state.selected.resize(m);
    state.weights.resize(m);
    for (std::size_t v = 0; v < m; ++v) {
        const Eigen::Index iv = data.views[v].rows();
        state.selected[v].resize(static_cast<std::size_t>(iv));
        std::iota(state.selected[v].begin(), state.selected[v].end(), 0);
        state.weights[v] =
            Vector::Constant(iv, 1.0 / std::sqrt(static_cast<double>(iv)));
    }

    auto reset_weights = [&]() {
        for (std::size_t v = 0; v < m; ++v) {
            const auto sz = static_cast<Eigen::Index>(state.selected[v].size());
            state.weights[v] = Vector::Constant(sz, 1.0 / std::sqrt(static_cast<double>(sz)));
        }
    };
    auto train_view_checked = [&](std::size_t v) {
        try {
            return detail::train_view(state, data, v, opt);
        } catch (const DegenerateInput&) {
            reset_weights();
            return detail::train_view(state, data, v, opt);
        }
    };

    // Elimination phase.
    bool pending = true;
    while (pending) {
        pending = false;
        for (std::size_t v = 0; v < m; ++v) {
            auto& sel = state.selected[v];
            if (static_cast<Eigen::Index>(sel.size()) <= targets[v]) continue;
            detail::TrainOutcome t = train_view_checked(v);
            int removed = 0;
            while (removed < opt.chunk &&
                   static_cast<Eigen::Index>(sel.size()) > targets[v]) {
                const Eigen::Index worst = argmin_with_index_ties(t.ranking);
                sel.erase(sel.begin() + worst);
                Vector rr(t.ranking.size() - 1), ww(t.weights.size() - 1);
                for (Eigen::Index i = 0, o = 0; i < t.ranking.size(); ++i) {
                    if (i == worst) continue;
                    rr[o] = t.ranking[i];
                    ww[o] = t.weights[i];
                    ++o;
                }
                t.ranking = std::move(rr);
                t.weights = std::move(ww);
                ++removed;
            }
            state.weights[v] = t.weights;
            state.bias = t.bias;
            if (static_cast<Eigen::Index>(sel.size()) > targets[v]) pending = true;
        }
    }

    // Refinement rounds on the final feature sets.
    std::vector<std::vector<Eigen::Index>> prev_orders(m);
    for (int round = 0; round < std::max(1, opt.alternations); ++round) {
        bool changed = false;
        for (std::size_t v = 0; v < m; ++v) {
            detail::TrainOutcome t = train_view_checked(v);
            state.weights[v] = t.weights;
            state.bias = t.bias;
            auto order = detail::ranking_order(t.ranking);
            if (order != prev_orders[v]) changed = true;
            prev_orders[v] = std::move(order);
        }
        if (!changed) break;
    }
    return state;
}

/// Decision rule sign(prod_v <w^(v), x^(v)> + b), with sign(0) := +1. The
/// point must already be restricted to the selected features.
inline int mv_decision(const SelectionState& state,
                       const std::vector<Vector>& point) {
    if (point.size() != state.weights.size())
        throw InvalidArgument("mv_decision: view count mismatch");
    double prod = 1.0;
    for (std::size_t v = 0; v < point.size(); ++v) {
        if (point[v].size() != state.weights[v].size())
            throw InvalidArgument("mv_decision: feature count mismatch in view " +
                                  std::to_string(v));
        prod *= state.weights[v].dot(point[v]);
    }
    return (prod + state.bias) >= 0.0 ? 1 : -1;
}

/// Restricts a full multi-view point to the selected features of each view.
inline std::vector<Vector> restrict_point(const SelectionState& state,
                                          const std::vector<Vector>& full) {
    std::vector<Vector> out(full.size());
    for (std::size_t v = 0; v < full.size(); ++v) {
        out[v].resize(static_cast<Eigen::Index>(state.selected[v].size()));
        for (std::size_t r = 0; r < state.selected[v].size(); ++r)
            out[v][static_cast<Eigen::Index>(r)] = full[v][state.selected[v][r]];
    }
    return out;
}

}  // namespace mvl::mvfs
