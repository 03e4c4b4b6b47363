#pragma once

#include <cmath>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "mvl/bne.hpp"
#include "mvl/fusion.hpp"
#include "mvl/gmsv.hpp"
#include "mvl/gru.hpp"
#include "mvl/gside.hpp"
#include "mvl/gspan.hpp"
#include "mvl/kernels.hpp"
#include "mvl/mvfs.hpp"
#include "mvl/ridge.hpp"
#include "mvl/rng.hpp"
#include "mvl/stats.hpp"
#include "mvl/stiefel.hpp"
#include "mvl/svm.hpp"
#include "mvl/synth.hpp"
#include "mvl/tensor.hpp"

namespace mvl::selftest {

struct Check {
    std::string name;
    std::function<bool()> run;
};

namespace st_detail {

inline bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

inline bool rel_close(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Dense per-view ranking: build the full weight tensor as outer products and
// sum squared entries over each feature's slice.
inline std::vector<std::vector<double>> dense_ranking(const std::vector<Vector>& ws) {
    std::vector<std::vector<double>> r(ws.size());
    const std::size_t m = ws.size();
    std::vector<Eigen::Index> idx(m, 0);
    for (std::size_t v = 0; v < m; ++v)
        r[v].assign(static_cast<std::size_t>(ws[v].size()), 0.0);
    std::function<void(std::size_t, double)> walk = [&](std::size_t depth, double prod) {
        if (depth == m) {
            const double sq = prod * prod;
            for (std::size_t v = 0; v < m; ++v)
                r[v][static_cast<std::size_t>(idx[v])] += sq;
            return;
        }
        for (idx[depth] = 0; idx[depth] < ws[depth].size(); ++idx[depth])
            walk(depth + 1, prod * ws[depth][idx[depth]]);
    };
    walk(0, 1.0);
    return r;
}

inline std::vector<std::size_t> argsort(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return idx;
}

}  // namespace st_detail

inline std::vector<Check> all_checks() {
    using namespace st_detail;
    std::vector<Check> checks;

    checks.push_back({"tensor.rank_one_inner_product", [] {
        Rng rng(11);
        for (int s = 0; s < 20; ++s) {
            Vector x1 = rng.normal_matrix(3, 1), x2 = rng.normal_matrix(4, 1),
                   x3 = rng.normal_matrix(2, 1);
            Vector y1 = rng.normal_matrix(3, 1), y2 = rng.normal_matrix(4, 1),
                   y3 = rng.normal_matrix(2, 1);
            const double lhs = inner_product(outer_product(x1, x2, x3),
                                             outer_product(y1, y2, y3));
            const double rhs = x1.dot(y1) * x2.dot(y2) * x3.dot(y3);
            if (!rel_close(lhs, rhs, 1e-12)) return false;
        }
        return true;
    }});

    checks.push_back({"tensor.khatri_rao_gram", [] {
        Rng rng(12);
        for (int s = 0; s < 20; ++s) {
            const Matrix a = rng.normal_matrix(3, 2), b = rng.normal_matrix(4, 2);
            const Matrix kr = khatri_rao(a, b);
            const Matrix lhs = kr.transpose() * kr;
            const Matrix rhs = (a.transpose() * a).cwiseProduct(b.transpose() * b);
            if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-12) return false;
        }
        return true;
    }});

    checks.push_back({"tensor.matricize_roundtrip", [] {
        Rng rng(13);
        Tensor3 t(3, 4, 2);
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
        for (int k = 1; k <= 3; ++k) {
            const Tensor3 back = refold(mode_k_matricize(t, k), k, 3, 4, 2);
            if (back.data() != t.data()) return false;  // bit-exact
        }
        return true;
    }});

    checks.push_back({"tensor.cp_identity", [] {
        Rng rng(14);
        const Matrix b = rng.normal_matrix(3, 2), s = rng.normal_matrix(4, 2);
        Tensor3 c(2, 2, 2);
        c(0, 0, 0) = 1.0;
        c(1, 1, 1) = 1.0;
        Tensor3 viaprod = mode_k_product(mode_k_product(mode_k_product(c, 1, b), 2, b), 3, s);
        Tensor3 direct(3, 3, 4);
        for (int f = 0; f < 2; ++f) {
            const Tensor3 r1 = outer_product(b.col(f), b.col(f), s.col(f));
            direct.data() += r1.data();
        }
        return (viaprod.data() - direct.data()).cwiseAbs().maxCoeff() <= 1e-12;
    }});

    checks.push_back({"numkit.laplacian", [] {
        Matrix phi(2, 2);
        phi << 0, 1, 1, 0;
        const Matrix l = laplacian(phi);
        Matrix want(2, 2);
        want << 1, -1, -1, 1;
        if ((l - want).cwiseAbs().maxCoeff() > 0) return false;
        Matrix signed_phi(2, 2);
        signed_phi << 0.5, -0.5, -0.5, 0.5;
        const Matrix l2 = laplacian(signed_phi);
        return close(l2(0, 0), -0.5, 1e-15) && close(l2(0, 1), 0.5, 1e-15) &&
               l2.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-10;
    }});

    checks.push_back({"numkit.rbf_kernel", [] {
        Matrix z(2, 1);
        z << 0, 1;
        const Matrix k = kernel_matrix(z, KernelSpec::rbf());
        return close(k(0, 1), std::exp(-1.0), 1e-12) && close(k(0, 0), 1.0, 0.0);
    }});

    checks.push_back({"numkit.welch_t_test", [] {
        Vector a(3), b(3);
        a << 1, 2, 3;
        b << 1, 2, 3;
        if (!close(t_test_one_tailed(a, b), 0.5, 1e-12)) return false;
        a << 10, 11, 12;
        b << 0, 1, 2;
        const double p = t_test_one_tailed(a, b);
        if (!(p < 0.01)) return false;
        return close(t_test_one_tailed(b, a), 1.0 - p, 1e-9);
    }});

    checks.push_back({"numkit.svm_two_points", [] {
        Matrix x(2, 1);
        x << -1, 1;
        Vector y(2);
        y << -1, 1;
        const SvmSolution sol = svm_train(x, y, 100.0);
        return close(sol.w[0], 1.0, 1e-6) && close(sol.b, 0.0, 1e-6) &&
               close((sol.alphas.array() * y.array()).sum(), 0.0, 1e-8);
    }});

    checks.push_back({"numkit.ridge_hand_case", [] {
        const Matrix a = Matrix::Identity(2, 2);
        Matrix y(2, 1);
        y << 1, 0;
        const Matrix w = ridge_solve(a, y, 1.0);
        return close(w(0, 0), 0.5, 1e-12) && close(w(1, 0), 0.0, 1e-12);
    }});

    checks.push_back({"numkit.stiefel_smallest_eigvec", [] {
        Matrix m = Vector::LinSpaced(4, 1.0, 4.0).asDiagonal();
        StiefelProblem p;
        p.objective = [&](const Matrix& s) { return (s.transpose() * m * s).trace(); };
        p.gradient = [&](const Matrix& s) { return (2.0 * m * s).eval(); };
        p.s0 = detail::qr_orthonormalize(Rng(5).normal_matrix(4, 1));
        const StiefelResult r = stiefel_minimize(p);
        return r.converged && close(std::fabs(r.s(0, 0)), 1.0, 1e-6);
    }});

    checks.push_back({"mvfs.ranking_equivalence", [] {
        for (std::size_t m : {2UL, 3UL}) {
            Rng rng(20 + m);
            for (int s = 0; s < 5; ++s) {
                std::vector<Vector> ws;
                for (std::size_t v = 0; v < m; ++v)
                    ws.push_back(rng.normal_matrix(4, 1));
                const auto dense = dense_ranking(ws);
                for (std::size_t v = 0; v < m; ++v) {
                    const Vector fast = mvfs::rank_linear(ws[v]);
                    std::vector<double> fv(fast.data(), fast.data() + fast.size());
                    if (argsort(dense[v]) != argsort(fv)) return false;
                }
            }
        }
        return true;
    }});

    checks.push_back({"subgraph.theta_omega_hand_cases", [] {
        Matrix k(2, 2);
        k << 1, 0.5, 0.5, 1;
        const Matrix theta = subgraph::build_theta(k);
        if (!(close(theta(0, 0), 0.5, 1e-15) && close(theta(0, 1), -0.5, 1e-15)))
            return false;
        const Matrix omega = subgraph::build_omega({1, -1});
        return close(omega(0, 0), 0.5, 1e-15) && close(omega(0, 1), -0.5, 1e-15);
    }});

    checks.push_back({"subgraph.bound_soundness_and_pruning", [] {
        for (std::uint64_t seed = 40; seed < 43; ++seed) {
            const auto bundle = synth::graph_corpus(seed);
            subgraph::MineOptions opt{.k = 4, .min_sup = 2, .max_edges = 3, .prune = true};
            const auto pruned = subgraph::gmsv_mine(bundle.corpus, bundle.sides, opt);
            opt.prune = false;
            const auto full = subgraph::gmsv_mine(bundle.corpus, bundle.sides, opt);
            if (pruned.patterns.size() != full.patterns.size()) return false;
            for (std::size_t i = 0; i < full.patterns.size(); ++i) {
                if (!(pruned.patterns[i].code == full.patterns[i].code)) return false;
                if (pruned.patterns[i].q != full.patterns[i].q) return false;
                if (pruned.patterns[i].q_bound > pruned.patterns[i].q) return false;
            }
        }
        return true;
    }});

    checks.push_back({"subgraph.gspan_triangles", [] {
        subgraph::LabeledGraph tri;
        tri.node_labels = {0, 0, 0};
        tri.add_edge(0, 1, 0);
        tri.add_edge(1, 2, 0);
        tri.add_edge(0, 2, 0);
        subgraph::GraphCorpus corpus;
        corpus.graphs = {tri, tri};
        corpus.labels = {1, -1};
        long count = 0;
        subgraph::gspan_enumerate(corpus, 2, 3, [&](const subgraph::PatternView& p) {
            if (p.support != 2) return subgraph::VisitAction::PruneSubtree;
            ++count;
            return subgraph::VisitAction::Continue;
        });
        return count == 3;  // edge, path, triangle
    }});

    checks.push_back({"bne.scalar_update_hand_case", [] {
        Matrix x1(1, 1), s(1, 1), p(1, 1), u(1, 1);
        x1 << 6;
        s << 2;
        p << 3;
        u << 0;
        const Matrix b = bne::update_node_factor(x1, s, p, u, 2.0);
        return close(b(0, 0), 78.0 / 74.0, 1e-12);
    }});

    checks.push_back({"mood.gru_forward_zero_params", [] {
        mood::GruParams p = mood::GruParams::zeros(2, 3);
        std::vector<Vector> seq(4, Vector::Ones(2));
        return mood::gru_forward(p, seq).cwiseAbs().maxCoeff() == 0.0;
    }});

    checks.push_back({"mood.fm_mvm_expansions", [] {
        Rng rng(60);
        for (int s = 0; s < 3; ++s) {
            const int dk = 2, width = 2, views = 2;
            auto head = mood::FusionHead::glorot(mood::FusionKind::MVM, 2, dk, views,
                                                 width, rng);
            std::vector<Vector> h{rng.normal_matrix(width, 1), rng.normal_matrix(width, 1)};
            const Vector scores = mood::fusion_forward(head, h);
            for (int a = 0; a < 2; ++a) {
                double brute = 0.0;
                Vector hb1(width + 1), hb2(width + 1);
                hb1 << h[0], 1.0;
                hb2 << h[1], 1.0;
                for (int i = 0; i <= width; ++i)
                    for (int j = 0; j <= width; ++j) {
                        double factor = 0.0;
                        for (int f = 0; f < dk; ++f)
                            factor += head.uv[static_cast<std::size_t>(a)][0](f, i) *
                                      head.uv[static_cast<std::size_t>(a)][1](f, j);
                        brute += factor * hb1[i] * hb2[j];
                    }
                if (!close(scores[a], brute, 1e-10)) return false;
            }
        }
        return true;
    }});

    checks.push_back({"mood.parameter_count_parity", [] {
        for (int c : {1, 2, 3})
            for (int dk : {2, 4})
                for (int m : {2, 3})
                    for (int width : {2, 4}) {
                        const int dc = m * width;
                        for (auto kind : {mood::FusionKind::FC, mood::FusionKind::FM,
                                          mood::FusionKind::MVM}) {
                            const auto head =
                                mood::FusionHead::zeros(kind, c, dk, m, width);
                            if (head.parameter_count() !=
                                mood::fusion_parameter_count(kind, c, dk, dc, m))
                                return false;
                        }
                    }
        return true;
    }});

    checks.push_back({"synth.seed_determinism", [] {
        const auto a = synth::multiview(77, 20, {4, 4});
        const auto b = synth::multiview(77, 20, {4, 4});
        for (std::size_t v = 0; v < a.views.size(); ++v)
            if (a.views[v] != b.views[v]) return false;
        return a.labels == b.labels;
    }});

    return checks;
}

/// Runs every check, printing one PASS/FAIL line each; returns the number of
/// failures.
inline int run_all(std::ostream& out = std::cout) {
    int failures = 0;
    for (const Check& c : all_checks()) {
        bool ok = false;
        std::string note;
        try {
            ok = c.run();
        } catch (const std::exception& e) {
            note = std::string(" (") + e.what() + ")";
        }
        out << (ok ? "[PASS] " : "[FAIL] ") << c.name << note << "\n";
        if (!ok) ++failures;
    }
    return failures;
}

}  // namespace mvl::selftest
