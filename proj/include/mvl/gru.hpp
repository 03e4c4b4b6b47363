#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mvl/error.hpp"
#include "mvl/rng.hpp"
#include "mvl/tensor.hpp"

namespace mvl::mood {

/// One direction of a gated recurrent unit:
///   r_k = sigmoid(Wr x_k + Ur h_{k-1})
///   z_k = sigmoid(Wz x_k + Uz h_{k-1})
///   hc_k = tanh(Wh x_k + Uh (r_k * h_{k-1}))
///   h_k = z_k * h_{k-1} + (1 - z_k) * hc_k
struct GruParams {
    Matrix wr, ur, wz, uz, wh, uh;

    static GruParams zeros(Eigen::Index input_dim, Eigen::Index hidden_dim) {
        GruParams p;
        p.wr = Matrix::Zero(hidden_dim, input_dim);
        p.ur = Matrix::Zero(hidden_dim, hidden_dim);
        p.wz = Matrix::Zero(hidden_dim, input_dim);
        p.uz = Matrix::Zero(hidden_dim, hidden_dim);
        p.wh = Matrix::Zero(hidden_dim, input_dim);
        p.uh = Matrix::Zero(hidden_dim, hidden_dim);
        return p;
    }

    static GruParams glorot(Eigen::Index input_dim, Eigen::Index hidden_dim, Rng& rng) {
        GruParams p = zeros(input_dim, hidden_dim);
        auto fill = [&](Matrix& w) {
            const double s = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-s, s);
        };
        fill(p.wr); fill(p.ur); fill(p.wz); fill(p.uz); fill(p.wh); fill(p.uh);
        return p;
    }

    Eigen::Index hidden_dim() const { return wr.rows(); }
    Eigen::Index input_dim() const { return wr.cols(); }

    template <typename F>
    void for_each(F&& f) { f(wr); f(ur); f(wz); f(uz); f(wh); f(uh); }
    template <typename F>
    void for_each(F&& f) const { f(wr); f(ur); f(wz); f(uz); f(wh); f(uh); }
};

using GruGrads = GruParams;

/// Per-step values cached by the forward pass for backpropagation.
struct GruCache {
    std::vector<Vector> x, r, z, hc, h;  // h[k] is the state after step k; h0 = 0
};

inline Vector sigmoid(const Vector& v) {
    return (1.0 / (1.0 + (-v.array()).exp())).matrix();
}

/// Runs the recurrence over the sequence; returns the final hidden state and
/// optionally fills the cache.
inline Vector gru_forward(const GruParams& p, const std::vector<Vector>& seq,
                          GruCache* cache = nullptr) {
    if (seq.empty()) throw InvalidArgument("gru_forward: empty sequence");
    const Eigen::Index dh = p.hidden_dim();
    Vector h = Vector::Zero(dh);
    if (cache) {
        cache->x = seq;
        cache->r.clear(); cache->z.clear(); cache->hc.clear(); cache->h.clear();
    }
    for (const Vector& x : seq) {
        if (x.size() != p.input_dim())
            throw InvalidArgument("gru_forward: input dimension mismatch");
        const Vector r = sigmoid(p.wr * x + p.ur * h);
        const Vector z = sigmoid(p.wz * x + p.uz * h);
        const Vector hc = (p.wh * x + p.uh * (r.array() * h.array()).matrix()).array().tanh();
        const Vector hn = (z.array() * h.array() + (1.0 - z.array()) * hc.array()).matrix();
        if (cache) {
            cache->r.push_back(r);
            cache->z.push_back(z);
            cache->hc.push_back(hc);
            cache->h.push_back(hn);
        }
        h = hn;
    }
    return h;
}

/// Backpropagation through time for an upstream gradient on the final hidden
/// state. Returns gradients for all six parameter matrices.
inline GruGrads gru_backward(const GruParams& p, const GruCache& cache,
                             const Vector& d_final) {
    const auto steps = cache.x.size();
    if (steps == 0 || cache.h.size() != steps)
        throw InvalidArgument("gru_backward: cache missing or inconsistent");
    GruGrads g = GruParams::zeros(p.input_dim(), p.hidden_dim());
    Vector dh = d_final;
    for (std::size_t k = steps; k-- > 0;) {
        const Vector& x = cache.x[k];
        const Vector& r = cache.r[k];
        const Vector& z = cache.z[k];
        const Vector& hc = cache.hc[k];
        const Vector hprev = k == 0 ? Vector::Zero(p.hidden_dim()).eval() : cache.h[k - 1];

        const Vector dz = (dh.array() * (hprev - hc).array()).matrix();
        const Vector dhc = (dh.array() * (1.0 - z.array())).matrix();
        Vector dhprev = (dh.array() * z.array()).matrix();

        const Vector da_hc = (dhc.array() * (1.0 - hc.array().square())).matrix();
        g.wh += da_hc * x.transpose();
        g.uh += da_hc * (r.array() * hprev.array()).matrix().transpose();
        const Vector d_rh = p.uh.transpose() * da_hc;
        const Vector dr = (d_rh.array() * hprev.array()).matrix();
        dhprev += (d_rh.array() * r.array()).matrix();

        const Vector da_r = (dr.array() * r.array() * (1.0 - r.array())).matrix();
        g.wr += da_r * x.transpose();
        g.ur += da_r * hprev.transpose();
        dhprev += p.ur.transpose() * da_r;

        const Vector da_z = (dz.array() * z.array() * (1.0 - z.array())).matrix();
        g.wz += da_z * x.transpose();
        g.uz += da_z * hprev.transpose();
        dhprev += p.uz.transpose() * da_z;

        dh = dhprev;
    }
    return g;
}

}  // namespace mvl::mood
