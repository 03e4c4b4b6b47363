#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "mvl/error.hpp"
#include "mvl/graph.hpp"
#include "mvl/gside.hpp"
#include "mvl/gspan.hpp"

namespace mvl::subgraph {

/// A mined pattern with its indicator over the corpus and both scores at
/// discovery time.
struct ScoredPattern {
    DFSCode code;
    std::vector<std::uint8_t> indicator;  // f, one byte per graph
    int support = 0;
    double q = 0.0;
    double q_bound = 0.0;  // qhat at discovery
};

struct MineOptions {
    int k = 10;
    int min_sup = 1;
    int max_edges = 4;
    bool prune = true;  // disabled only by the equivalence oracle in tests
};

struct MineResult {
    std::vector<ScoredPattern> patterns;  // ascending q, ties by discovery order
    long nodes_visited = 0;
    PhiSystem system;
};

namespace gmsv_detail {

struct Entry {
    double q;
    long order;  // discovery index; enumeration order is canonical order
    std::size_t slot;
};

}  // namespace gmsv_detail

/// Builds the gSide system from labels and side views; corpora without any
/// labeled instance contribute no Omega term.
inline PhiSystem build_system(const GraphCorpus& corpus, const SideViewSet& sides) {
    corpus.validate();
    sides.validate(corpus.size());
    const auto n = static_cast<Eigen::Index>(corpus.size());
    Matrix omega = Matrix::Zero(n, n);
    if (corpus.labeled_count() > 0) omega = build_omega(corpus.labels);
    std::vector<Matrix> thetas;
    thetas.reserve(sides.views.size());
    for (const Matrix& z : sides.views)
        thetas.push_back(build_theta(kernel_matrix(z, sides.kernel)));
    return build_phi(omega, thetas, sides.lambdas);
}

/// Branch-and-bound top-k search: maintains the k best patterns by q, prunes a
/// subtree once the bound qhat of its root cannot beat the current worst kept
/// score. Admission is strict (q < theta) once the pool is full, so among
/// equal-q patterns the earliest in canonical order wins. The result is
/// sorted by ascending q with discovery order breaking ties.
inline MineResult gmsv_mine(const GraphCorpus& corpus, const SideViewSet& sides,
                            const MineOptions& opt = {}) {
    if (opt.k < 1) throw InvalidArgument("gmsv_mine: k must be >= 1");
    MineResult result;
    result.system = build_system(corpus, sides);
    const Matrix& l = result.system.laplacian;
    const Matrix& lhat = result.system.laplacian_neg;
    const auto n = corpus.size();

    std::vector<ScoredPattern> pool;
    std::vector<gmsv_detail::Entry> kept;  // one entry per pooled pattern
    long order = 0;

    auto theta = [&]() {
        if (static_cast<int>(kept.size()) < opt.k)
            return std::numeric_limits<double>::infinity();
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& e : kept) worst = std::max(worst, e.q);
        return worst;
    };

    GspanStats stats;
    gspan_enumerate(
        corpus, opt.min_sup, opt.max_edges,
        [&](const PatternView& p) {
            const double q = gside_score(p.supporting_graphs, l);
            const double qh = gside_bound(p.supporting_graphs, lhat);
            const double th = theta();
            if (static_cast<int>(kept.size()) < opt.k || q < th) {
                ScoredPattern sp;
                sp.code = p.code;
                sp.support = p.support;
                sp.q = q;
                sp.q_bound = qh;
                sp.indicator.assign(n, 0);
                for (int gid : p.supporting_graphs)
                    sp.indicator[static_cast<std::size_t>(gid)] = 1;
                pool.push_back(std::move(sp));
                kept.push_back({q, order, pool.size() - 1});
                if (static_cast<int>(kept.size()) > opt.k) {
                    // Evict the worst; among equal q the latest discovered.
                    std::size_t evict = 0;
                    for (std::size_t i = 1; i < kept.size(); ++i) {
                        if (kept[i].q > kept[evict].q ||
                            (kept[i].q == kept[evict].q &&
                             kept[i].order > kept[evict].order))
                            evict = i;
                    }
                    kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(evict));
                }
            }
            ++order;
            if (opt.prune && qh >= theta()) return VisitAction::PruneSubtree;
            return VisitAction::Continue;
        },
        &stats);

    result.nodes_visited = stats.visited;
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.q != b.q ? a.q < b.q : a.order < b.order;
    });
    result.patterns.reserve(kept.size());
    for (const auto& e : kept) result.patterns.push_back(std::move(pool[e.slot]));
    return result;
}

/// Recomputes the binary pattern-by-graph feature matrix with a fresh
/// subgraph-isomorphism test per cell, so it also applies to held-out graphs.
inline Matrix feature_matrix(const std::vector<ScoredPattern>& patterns,
                             const GraphCorpus& corpus) {
    Matrix x(static_cast<Eigen::Index>(patterns.size()),
             static_cast<Eigen::Index>(corpus.size()));
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        const LabeledGraph pat = dfs_code_to_graph(patterns[i].code);
        for (std::size_t j = 0; j < corpus.size(); ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                contains_subgraph(corpus.graphs[j], pat) ? 1.0 : 0.0;
    }
    return x;
}

}  // namespace mvl::subgraph
