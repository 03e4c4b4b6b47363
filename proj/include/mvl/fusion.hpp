#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvl/error.hpp"
#include "mvl/rng.hpp"
#include "mvl/tensor.hpp"

namespace mvl::mood {

enum class FusionKind { FC, FM, MVM };

inline std::string to_string(FusionKind k) {
    switch (k) {
        case FusionKind::FC: return "fc";
        case FusionKind::FM: return "fm";
        case FusionKind::MVM: return "mvm";
    }
    return "?";
}

inline FusionKind fusion_from_string(const std::string& s) {
    if (s == "fc") return FusionKind::FC;
    if (s == "fm") return FusionKind::FM;
    if (s == "mvm") return FusionKind::MVM;
    throw InvalidArgument("unknown fusion kind: " + s);
}

/// Late-fusion head over per-view encoder outputs.
///   FC:  y = W2 ReLU(W1 [h; 1]), hidden width c * dk for complexity parity.
///   FM:  y_a = sum(q_a * q_a) + w_a^T [h; 1], q_a = U_a h.
///   MVM: y_a = sum_f prod_p q_a^(p)(f), q_a^(p) = U_a^(p) [h^(p); 1].
struct FusionHead {
    FusionKind kind = FusionKind::FC;
    int classes = 2;
    int dk = 8;          // factor width (FM/MVM); FC uses classes * dk
    int view_width = 0;  // encoder output width per view
    int views = 0;

    Matrix w1, w2;                       // FC
    std::vector<Matrix> u;               // FM: per class, dk x dc
    std::vector<Vector> w;               // FM: per class, dc + 1
    std::vector<std::vector<Matrix>> uv; // MVM: per class, per view, dk x (view_width + 1)

    int concat_width() const { return view_width * views; }

    static FusionHead zeros(FusionKind kind, int classes, int dk, int views,
                            int view_width) {
        FusionHead h;
        h.kind = kind;
        h.classes = classes;
        h.dk = dk;
        h.views = views;
        h.view_width = view_width;
        const int dc = views * view_width;
        switch (kind) {
            case FusionKind::FC:
                h.w1 = Matrix::Zero(classes * dk, dc + 1);
                h.w2 = Matrix::Zero(classes, classes * dk);
                break;
            case FusionKind::FM:
                h.u.assign(static_cast<std::size_t>(classes), Matrix::Zero(dk, dc));
                h.w.assign(static_cast<std::size_t>(classes), Vector::Zero(dc + 1));
                break;
            case FusionKind::MVM:
                h.uv.assign(static_cast<std::size_t>(classes),
                            std::vector<Matrix>(static_cast<std::size_t>(views),
                                                Matrix::Zero(dk, view_width + 1)));
                break;
        }
        return h;
    }

    static FusionHead glorot(FusionKind kind, int classes, int dk, int views,
                             int view_width, Rng& rng) {
        FusionHead h = zeros(kind, classes, dk, views, view_width);
        auto fill = [&](auto& m) {
            const double s = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-s, s);
        };
        h.for_each(fill);
        return h;
    }

    template <typename F>
    void for_each(F&& f) {
        switch (kind) {
            case FusionKind::FC:
                f(w1); f(w2);
                break;
            case FusionKind::FM:
                for (auto& m : u) f(m);
                for (auto& v : w) f(v);
                break;
            case FusionKind::MVM:
                for (auto& per_class : uv)
                    for (auto& m : per_class) f(m);
                break;
        }
    }

    template <typename F>
    void for_each(F&& f) const {
        switch (kind) {
            case FusionKind::FC:
                f(w1); f(w2);
                break;
            case FusionKind::FM:
                for (const auto& m : u) f(m);
                for (const auto& v : w) f(v);
                break;
            case FusionKind::MVM:
                for (const auto& per_class : uv)
                    for (const auto& m : per_class) f(m);
                break;
        }
    }

    long parameter_count() const {
        long count = 0;
        for_each([&](const auto& m) { count += static_cast<long>(m.size()); });
        return count;
    }
};

using FusionGrads = FusionHead;

/// Exact parameter-count formulas per head kind; the FC count is stated for
/// the parity width dk' = c * dk.
inline long fusion_parameter_count(FusionKind kind, int c, int dk, int dc, int m) {
    switch (kind) {
        case FusionKind::MVM: return static_cast<long>(c) * dk * (dc + m);
        case FusionKind::FM: return static_cast<long>(c) * dk * dc + static_cast<long>(c) * (dc + 1);
        case FusionKind::FC: {
            const long dkp = static_cast<long>(c) * dk;
            return dkp * (dc + c + 1);
        }
    }
    return 0;
}

namespace fusion_detail {

inline Vector with_bias(const Vector& h) {
    Vector out(h.size() + 1);
    out.head(h.size()) = h;
    out[h.size()] = 1.0;
    return out;
}

inline Vector concat(const std::vector<Vector>& hs) {
    Eigen::Index total = 0;
    for (const Vector& h : hs) total += h.size();
    Vector out(total);
    Eigen::Index at = 0;
    for (const Vector& h : hs) {
        out.segment(at, h.size()) = h;
        at += h.size();
    }
    return out;
}

}  // namespace fusion_detail

/// Class scores for one instance's per-view encoder outputs.
inline Vector fusion_forward(const FusionHead& head, const std::vector<Vector>& h_views) {
    if (static_cast<int>(h_views.size()) != head.views)
        throw InvalidArgument("fusion_forward: view count mismatch");
    for (const Vector& h : h_views)
        if (h.size() != head.view_width)
            throw InvalidArgument("fusion_forward: view width mismatch");
    Vector scores = Vector::Zero(head.classes);
    switch (head.kind) {
        case FusionKind::FC: {
            const Vector hb = fusion_detail::with_bias(fusion_detail::concat(h_views));
            const Vector pre = head.w1 * hb;
            scores = head.w2 * pre.cwiseMax(0.0);
            break;
        }
        case FusionKind::FM: {
            const Vector h = fusion_detail::concat(h_views);
            const Vector hb = fusion_detail::with_bias(h);
            for (int a = 0; a < head.classes; ++a) {
                const Vector q = head.u[static_cast<std::size_t>(a)] * h;
                scores[a] = q.squaredNorm() + head.w[static_cast<std::size_t>(a)].dot(hb);
            }
            break;
        }
        case FusionKind::MVM: {
            for (int a = 0; a < head.classes; ++a) {
                Vector prod = Vector::Ones(head.dk);
                for (int p = 0; p < head.views; ++p) {
                    const Vector q =
                        head.uv[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] *
                        fusion_detail::with_bias(h_views[static_cast<std::size_t>(p)]);
                    prod = prod.cwiseProduct(q);
                }
                scores[a] = prod.sum();
            }
            break;
        }
    }
    return scores;
}

/// Accumulates head gradients for an upstream gradient on the scores and
/// returns the gradient with respect to each view's encoder output.
inline std::vector<Vector> fusion_backward(const FusionHead& head,
                                           const std::vector<Vector>& h_views,
                                           const Vector& dscores, FusionGrads& grads) {
    std::vector<Vector> dh(h_views.size());
    for (std::size_t p = 0; p < h_views.size(); ++p)
        dh[p] = Vector::Zero(head.view_width);
    switch (head.kind) {
        case FusionKind::FC: {
            const Vector hb = fusion_detail::with_bias(fusion_detail::concat(h_views));
            const Vector pre = head.w1 * hb;
            const Vector act = pre.cwiseMax(0.0);
            grads.w2 += dscores * act.transpose();
            Vector dact = head.w2.transpose() * dscores;
            for (Eigen::Index i = 0; i < dact.size(); ++i)
                if (pre[i] <= 0.0) dact[i] = 0.0;
            grads.w1 += dact * hb.transpose();
            const Vector dhb = head.w1.transpose() * dact;
            for (std::size_t p = 0; p < h_views.size(); ++p)
                dh[p] = dhb.segment(static_cast<Eigen::Index>(p) * head.view_width,
                                    head.view_width);
            break;
        }
        case FusionKind::FM: {
            const Vector h = fusion_detail::concat(h_views);
            const Vector hb = fusion_detail::with_bias(h);
            Vector dh_all = Vector::Zero(h.size());
            for (int a = 0; a < head.classes; ++a) {
                const Matrix& ua = head.u[static_cast<std::size_t>(a)];
                const Vector q = ua * h;
                grads.u[static_cast<std::size_t>(a)] += 2.0 * dscores[a] * q * h.transpose();
                grads.w[static_cast<std::size_t>(a)] += dscores[a] * hb;
                dh_all += dscores[a] * (2.0 * (ua.transpose() * q) +
                                        head.w[static_cast<std::size_t>(a)].head(h.size()));
            }
            for (std::size_t p = 0; p < h_views.size(); ++p)
                dh[p] = dh_all.segment(static_cast<Eigen::Index>(p) * head.view_width,
                                       head.view_width);
            break;
        }
        case FusionKind::MVM: {
            for (int a = 0; a < head.classes; ++a) {
                std::vector<Vector> q(static_cast<std::size_t>(head.views));
                for (int p = 0; p < head.views; ++p)
                    q[static_cast<std::size_t>(p)] =
                        head.uv[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] *
                        fusion_detail::with_bias(h_views[static_cast<std::size_t>(p)]);
                for (int p = 0; p < head.views; ++p) {
                    Vector others = Vector::Ones(head.dk);
                    for (int r = 0; r < head.views; ++r)
                        if (r != p) others = others.cwiseProduct(q[static_cast<std::size_t>(r)]);
                    const Vector dq = dscores[a] * others;
                    const Vector hb =
                        fusion_detail::with_bias(h_views[static_cast<std::size_t>(p)]);
                    grads.uv[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] +=
                        dq * hb.transpose();
                    const Vector dhb =
                        head.uv[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)]
                            .transpose() * dq;
                    dh[static_cast<std::size_t>(p)] += dhb.head(head.view_width);
                }
            }
            break;
        }
    }
    return dh;
}

}  // namespace mvl::mood
