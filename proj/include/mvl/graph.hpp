#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mvl/error.hpp"
#include "mvl/kernels.hpp"
#include "mvl/tensor.hpp"

namespace mvl::subgraph {

/// Undirected graph with integer node labels and optional integer edge labels
/// (0 when unlabeled). No self-loops, no parallel edges.
struct LabeledGraph {
    struct Edge {
        int u, v;
        int label = 0;
    };

    std::vector<int> node_labels;
    std::vector<Edge> edges;

    int node_count() const { return static_cast<int>(node_labels.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }

    void add_edge(int u, int v, int label = 0) {
        if (u == v) throw InvalidArgument("LabeledGraph: self-loop");
        if (u < 0 || v < 0 || u >= node_count() || v >= node_count())
            throw InvalidArgument("LabeledGraph: edge endpoint out of range");
        if (u > v) std::swap(u, v);
        for (const Edge& e : edges)
            if (e.u == u && e.v == v)
                throw InvalidArgument("LabeledGraph: duplicate edge");
        edges.push_back({u, v, label});
    }

    bool has_edge(int u, int v, int label) const {
        if (u > v) std::swap(u, v);
        for (const Edge& e : edges)
            if (e.u == u && e.v == v) return e.label == label;
        return false;
    }
};

/// Graph instances with labels in {-1, +1} or 0 for unlabeled.
struct GraphCorpus {
    std::vector<LabeledGraph> graphs;
    std::vector<int> labels;

    std::size_t size() const { return graphs.size(); }
    long labeled_count() const {
        long l = 0;
        for (int y : labels)
            if (y != 0) ++l;
        return l;
    }

    void validate() const {
        if (labels.size() != graphs.size())
            throw InvalidArgument("GraphCorpus: label count mismatch");
        for (int y : labels)
            if (y != -1 && y != 0 && y != 1)
                throw InvalidArgument("GraphCorpus: labels must be -1, 0, or +1");
    }
};

/// Auxiliary vector features per graph instance: v views, each n x d_p.
struct SideViewSet {
    std::vector<Matrix> views;        // rows = instances
    std::vector<double> lambdas;      // per-view weight, >= 0
    KernelSpec kernel = KernelSpec::rbf();

    void validate(std::size_t n) const {
        if (lambdas.size() != views.size())
            throw InvalidArgument("SideViewSet: lambda count mismatch");
        for (double l : lambdas)
            if (l < 0.0) throw InvalidArgument("SideViewSet: lambda must be >= 0");
        for (const Matrix& z : views) {
            if (static_cast<std::size_t>(z.rows()) != n)
                throw InvalidArgument("SideViewSet: row count must match corpus size");
            if (!z.allFinite())
                throw InvalidArgument("SideViewSet: non-finite feature");
        }
    }
};

/// Subgraph-isomorphism test (non-induced): does `pattern` embed into `g`
/// preserving node labels, edges, and edge labels? Backtracking over pattern
/// vertices; patterns here are connected and tiny.
inline bool contains_subgraph(const LabeledGraph& g, const LabeledGraph& pattern) {
    const int pn = pattern.node_count();
    if (pn == 0) return true;
    if (pn > g.node_count() || pattern.edge_count() > g.edge_count()) return false;

    // Adjacency with labels for constant-time edge checks.
    const int gn = g.node_count();
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(gn));
    for (const auto& e : g.edges) {
        adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.label);
        adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.label);
    }
    std::vector<std::vector<std::pair<int, int>>> padj(static_cast<std::size_t>(pn));
    for (const auto& e : pattern.edges) {
        padj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.label);
        padj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.label);
    }

    std::vector<int> map(static_cast<std::size_t>(pn), -1);
    std::vector<bool> used(static_cast<std::size_t>(gn), false);

    auto edge_ok = [&](int gu, int gv, int label) {
        for (const auto& [w, l] : adj[static_cast<std::size_t>(gu)])
            if (w == gv && l == label) return true;
        return false;
    };

    std::function<bool(int)> place = [&](int pv) -> bool {
        if (pv == pn) return true;
        for (int gv = 0; gv < gn; ++gv) {
            if (used[static_cast<std::size_t>(gv)]) continue;
            if (g.node_labels[static_cast<std::size_t>(gv)] !=
                pattern.node_labels[static_cast<std::size_t>(pv)])
                continue;
            bool ok = true;
            for (const auto& [pw, l] : padj[static_cast<std::size_t>(pv)]) {
                if (pw < pv && !edge_ok(gv, map[static_cast<std::size_t>(pw)], l)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            map[static_cast<std::size_t>(pv)] = gv;
            used[static_cast<std::size_t>(gv)] = true;
            if (place(pv + 1)) return true;
            used[static_cast<std::size_t>(gv)] = false;
            map[static_cast<std::size_t>(pv)] = -1;
        }
        return false;
    };
    return place(0);
}

}  // namespace mvl::subgraph
