#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "mvl/error.hpp"
#include "mvl/graph.hpp"

namespace mvl::subgraph {

/// One extended edge of a DFS code: discovery indices (from, to) plus the
/// labels (from_label, edge_label, to_label). Label slots already fixed by an
/// earlier edge are stored as -1.
struct DfsEdge {
    int from, to, from_label, edge_label, to_label;

    friend bool operator==(const DfsEdge&, const DfsEdge&) = default;
};

/// Canonical edge-growth encoding of a connected subgraph.
using DFSCode = std::vector<DfsEdge>;

/// Number of vertices named by a code.
inline int dfs_code_vertex_count(const DFSCode& code) {
    int n = 0;
    for (const DfsEdge& e : code) n = std::max({n, e.from + 1, e.to + 1});
    return n;
}

/// Reconstructs the pattern graph a DFS code describes.
inline LabeledGraph dfs_code_to_graph(const DFSCode& code) {
    LabeledGraph g;
    g.node_labels.assign(static_cast<std::size_t>(dfs_code_vertex_count(code)), -1);
    for (const DfsEdge& e : code) {
        if (e.from_label != -1) g.node_labels[static_cast<std::size_t>(e.from)] = e.from_label;
        if (e.to_label != -1) g.node_labels[static_cast<std::size_t>(e.to)] = e.to_label;
    }
    for (const DfsEdge& e : code) g.add_edge(e.from, e.to, e.edge_label);
    return g;
}

namespace gspan_detail {

struct MiningEdge {
    int from, to, elabel, id;
};

// Directed adjacency over an undirected graph: each input edge appears once
// per direction under a shared id.
struct MiningGraph {
    std::vector<int> labels;
    std::vector<std::vector<MiningEdge>> adjacent;
    int edge_count = 0;

    explicit MiningGraph(const LabeledGraph& g)
        : labels(g.node_labels),
          adjacent(g.node_labels.size()),
          edge_count(g.edge_count()) {
        int id = 0;
        for (const auto& e : g.edges) {
            adjacent[static_cast<std::size_t>(e.u)].push_back({e.u, e.v, e.label, id});
            adjacent[static_cast<std::size_t>(e.v)].push_back({e.v, e.u, e.label, id});
            ++id;
        }
    }
};

// One embedding step: which graph, which directed edge, and the embedding of
// the code prefix it extends.
struct PDFS {
    int gid;
    const MiningEdge* edge;
    const PDFS* prev;
};

using Projected = std::vector<PDFS>;

// Unrolled embedding of a whole code, with vertex/edge usage marks.
class History {
public:
    History(const MiningGraph& g, const PDFS& p)
        : edge_used_(static_cast<std::size_t>(g.edge_count), false),
          vertex_used_(g.labels.size(), false) {
        for (const PDFS* cur = &p; cur; cur = cur->prev) edges_.push_back(cur->edge);
        std::reverse(edges_.begin(), edges_.end());
        for (const MiningEdge* e : edges_) {
            edge_used_[static_cast<std::size_t>(e->id)] = true;
            vertex_used_[static_cast<std::size_t>(e->from)] = true;
            vertex_used_[static_cast<std::size_t>(e->to)] = true;
        }
    }

    const MiningEdge* operator[](std::size_t i) const { return edges_[i]; }
    bool has_edge(int id) const { return edge_used_[static_cast<std::size_t>(id)]; }
    bool has_vertex(int v) const { return vertex_used_[static_cast<std::size_t>(v)]; }

private:
    std::vector<const MiningEdge*> edges_;
    std::vector<bool> edge_used_;
    std::vector<bool> vertex_used_;
};

// Rightmost path as indices into the code, deepest edge first.
inline std::vector<int> build_rmpath(const DFSCode& code) {
    std::vector<int> rmpath;
    int old_from = -1;
    for (int i = static_cast<int>(code.size()) - 1; i >= 0; --i) {
        if (code[static_cast<std::size_t>(i)].from < code[static_cast<std::size_t>(i)].to &&
            (rmpath.empty() || old_from == code[static_cast<std::size_t>(i)].to)) {
            rmpath.push_back(i);
            old_from = code[static_cast<std::size_t>(i)].from;
        }
    }
    return rmpath;
}

// Backward extension from the rightmost vertex (last edge e2) to the source
// of rightmost-path edge e1, honoring the DFS-code edge order.
inline const MiningEdge* get_backward(const MiningGraph& g, const MiningEdge* e1,
                                      const MiningEdge* e2, const History& h) {
    if (e1 == e2) return nullptr;
    for (const MiningEdge& b : g.adjacent[static_cast<std::size_t>(e2->to)]) {
        if (h.has_edge(b.id)) continue;
        if (b.to != e1->from) continue;
        if (e1->elabel < b.elabel ||
            (e1->elabel == b.elabel &&
             g.labels[static_cast<std::size_t>(e1->to)] <=
                 g.labels[static_cast<std::size_t>(e2->to)]))
            return &b;
    }
    return nullptr;
}

// Forward extensions growing a new vertex off the rightmost vertex.
inline void get_forward_pure(const MiningGraph& g, const MiningEdge* last,
                             int min_label, const History& h,
                             std::vector<const MiningEdge*>& out) {
    out.clear();
    for (const MiningEdge& e : g.adjacent[static_cast<std::size_t>(last->to)]) {
        if (min_label > g.labels[static_cast<std::size_t>(e.to)]) continue;
        if (h.has_vertex(e.to)) continue;
        out.push_back(&e);
    }
}

// Forward extensions growing a new vertex off an interior rightmost-path
// vertex, keeping only those at or after `e` in DFS-code order.
inline void get_forward_rmpath(const MiningGraph& g, const MiningEdge* e,
                               int min_label, const History& h,
                               std::vector<const MiningEdge*>& out) {
    out.clear();
    const int to_label = g.labels[static_cast<std::size_t>(e->to)];
    for (const MiningEdge& e2 : g.adjacent[static_cast<std::size_t>(e->from)]) {
        const int to_label2 = g.labels[static_cast<std::size_t>(e2.to)];
        if (e->to == e2.to || min_label > to_label2 || h.has_vertex(e2.to)) continue;
        if (e->elabel < e2.elabel || (e->elabel == e2.elabel && to_label <= to_label2))
            out.push_back(&e2);
    }
}

}  // namespace gspan_detail

/// What a visitor tells the search to do with the subtree below a pattern.
enum class VisitAction { Continue, PruneSubtree };

struct PatternView {
    const DFSCode& code;
    const std::vector<int>& supporting_graphs;  // ascending graph ids, distinct
    int support;
};

using Visitor = std::function<VisitAction(const PatternView&)>;

struct GspanStats {
    long visited = 0;  // canonical frequent patterns reached
};

namespace gspan_detail {

class Engine {
public:
    Engine(const GraphCorpus& corpus, int min_sup, int max_edges, Visitor visit,
           GspanStats* stats)
        : min_sup_(min_sup), max_edges_(max_edges), visit_(std::move(visit)),
          stats_(stats) {
        graphs_.reserve(corpus.graphs.size());
        for (const LabeledGraph& g : corpus.graphs) graphs_.emplace_back(g);
    }

    void run() {
        // Roots: all 1-edge codes (0, 1, la, el, lb) with la <= lb.
        std::map<int, std::map<int, std::map<int, Projected>>> root;
        for (std::size_t gid = 0; gid < graphs_.size(); ++gid) {
            const MiningGraph& g = graphs_[gid];
            for (std::size_t u = 0; u < g.labels.size(); ++u) {
                for (const MiningEdge& e : g.adjacent[u]) {
                    const int la = g.labels[static_cast<std::size_t>(e.from)];
                    const int lb = g.labels[static_cast<std::size_t>(e.to)];
                    if (la <= lb)
                        root[la][e.elabel][lb].push_back({static_cast<int>(gid), &e, nullptr});
                }
            }
        }
        for (auto& [la, by_el] : root) {
            for (auto& [el, by_lb] : by_el) {
                for (auto& [lb, projected] : by_lb) {
                    code_.push_back({0, 1, la, el, lb});
                    grow(projected);
                    code_.pop_back();
                }
            }
        }
    }

private:
    int support_of(const Projected& projected, std::vector<int>& gids) const {
        gids.clear();
        int prev = -1;
        for (const PDFS& p : projected) {
            if (p.gid != prev) {
                gids.push_back(p.gid);
                prev = p.gid;
            }
        }
        return static_cast<int>(gids.size());
    }

    void grow(const Projected& projected) {
        std::vector<int> gids;
        const int support = support_of(projected, gids);
        if (support < min_sup_) return;
        if (!is_min()) return;

        if (stats_) ++stats_->visited;
        const VisitAction action = visit_({code_, gids, support});
        if (action == VisitAction::PruneSubtree) return;
        if (static_cast<int>(code_.size()) >= max_edges_) return;

        const std::vector<int> rmpath = build_rmpath(code_);
        const int min_label = code_.front().from_label;
        const int maxtoc = code_[static_cast<std::size_t>(rmpath.front())].to;

        std::map<int, std::map<int, Projected>> bck;             // [to][elabel]
        std::map<int, std::map<int, std::map<int, Projected>>> fwd;  // [from][elabel][tolabel]
        std::vector<const MiningEdge*> candidates;

        for (const PDFS& p : projected) {
            const MiningGraph& g = graphs_[static_cast<std::size_t>(p.gid)];
            History h(g, p);

            // Backward, destination ascending along the rightmost path.
            for (std::size_t i = rmpath.size(); i-- > 1;) {
                const MiningEdge* e = get_backward(g, h[static_cast<std::size_t>(rmpath[i])],
                                                   h[static_cast<std::size_t>(rmpath[0])], h);
                if (e)
                    bck[code_[static_cast<std::size_t>(rmpath[i])].from][e->elabel]
                        .push_back({p.gid, e, &p});
            }

            // Forward from the rightmost vertex.
            get_forward_pure(g, h[static_cast<std::size_t>(rmpath[0])], min_label, h,
                             candidates);
            for (const MiningEdge* e : candidates)
                fwd[maxtoc][e->elabel][g.labels[static_cast<std::size_t>(e->to)]]
                    .push_back({p.gid, e, &p});

            // Forward from interior rightmost-path vertices.
            for (int ri : rmpath) {
                get_forward_rmpath(g, h[static_cast<std::size_t>(ri)], min_label, h,
                                   candidates);
                for (const MiningEdge* e : candidates)
                    fwd[code_[static_cast<std::size_t>(ri)].from][e->elabel]
                       [g.labels[static_cast<std::size_t>(e->to)]]
                           .push_back({p.gid, e, &p});
            }
        }

        // Children in DFS-code order: backward (to asc, elabel asc) then
        // forward (from desc, elabel asc, tolabel asc).
        for (auto& [to, by_el] : bck) {
            for (auto& [el, child] : by_el) {
                code_.push_back({maxtoc, to, -1, el, -1});
                grow(child);
                code_.pop_back();
            }
        }
        for (auto it = fwd.rbegin(); it != fwd.rend(); ++it) {
            for (auto& [el, by_lb] : it->second) {
                for (auto& [lb, child] : by_lb) {
                    code_.push_back({it->first, maxtoc + 1, -1, el, lb});
                    grow(child);
                    code_.pop_back();
                }
            }
        }
    }

    // --- canonicality ---------------------------------------------------

    bool is_min() {
        if (code_.size() == 1) {
            const DfsEdge& e = code_.front();
            return e.from_label <= e.to_label;
        }
        min_graph_ = std::make_unique<MiningGraph>(dfs_code_to_graph(code_));
        min_code_.clear();

        std::map<int, std::map<int, std::map<int, Projected>>> root;
        const MiningGraph& g = *min_graph_;
        for (std::size_t u = 0; u < g.labels.size(); ++u) {
            for (const MiningEdge& e : g.adjacent[u]) {
                const int la = g.labels[static_cast<std::size_t>(e.from)];
                const int lb = g.labels[static_cast<std::size_t>(e.to)];
                if (la <= lb)
                    root[la][e.elabel][lb].push_back({0, &e, nullptr});
            }
        }
        auto& by_el = *root.begin();
        auto& by_lb = *by_el.second.begin();
        auto& projected = *by_lb.second.begin();
        min_code_.push_back({0, 1, by_el.first, by_lb.first, projected.first});
        if (!(min_code_.back() == code_.front())) return false;
        return project_is_min(projected.second);
    }

    bool project_is_min(const Projected& projected) {
        if (min_code_.size() == code_.size()) return true;
        const MiningGraph& g = *min_graph_;
        const std::vector<int> rmpath = build_rmpath(min_code_);
        const int min_label = min_code_.front().from_label;
        const int maxtoc = min_code_[static_cast<std::size_t>(rmpath.front())].to;

        {  // smallest backward extension, if any
            std::map<int, Projected> by_el;
            int newto = 0;
            bool found = false;
            for (std::size_t i = rmpath.size(); i-- > 1 && !found;) {
                for (const PDFS& p : projected) {
                    History h(g, p);
                    const MiningEdge* e =
                        get_backward(g, h[static_cast<std::size_t>(rmpath[i])],
                                     h[static_cast<std::size_t>(rmpath[0])], h);
                    if (e) {
                        by_el[e->elabel].push_back({0, e, &p});
                        newto = min_code_[static_cast<std::size_t>(rmpath[i])].from;
                        found = true;
                    }
                }
            }
            if (found) {
                auto& [el, child] = *by_el.begin();
                min_code_.push_back({maxtoc, newto, -1, el, -1});
                if (!(code_[min_code_.size() - 1] == min_code_.back())) return false;
                return project_is_min(child);
            }
        }
        {  // smallest forward extension, if any
            std::map<int, std::map<int, Projected>> by_el_lb;
            int newfrom = 0;
            bool found = false;
            std::vector<const MiningEdge*> candidates;
            for (const PDFS& p : projected) {
                History h(g, p);
                get_forward_pure(g, h[static_cast<std::size_t>(rmpath[0])], min_label, h,
                                 candidates);
                if (!candidates.empty()) {
                    found = true;
                    newfrom = maxtoc;
                    for (const MiningEdge* e : candidates)
                        by_el_lb[e->elabel][g.labels[static_cast<std::size_t>(e->to)]]
                            .push_back({0, e, &p});
                }
            }
            for (std::size_t i = 0; i < rmpath.size() && !found; ++i) {
                for (const PDFS& p : projected) {
                    History h(g, p);
                    get_forward_rmpath(g, h[static_cast<std::size_t>(rmpath[i])], min_label,
                                       h, candidates);
                    if (!candidates.empty()) {
                        found = true;
                        newfrom = min_code_[static_cast<std::size_t>(rmpath[i])].from;
                        for (const MiningEdge* e : candidates)
                            by_el_lb[e->elabel][g.labels[static_cast<std::size_t>(e->to)]]
                                .push_back({0, e, &p});
                    }
                }
            }
            if (found) {
                auto& [el, by_lb] = *by_el_lb.begin();
                auto& [lb, child] = *by_lb.begin();
                min_code_.push_back({newfrom, maxtoc + 1, -1, el, lb});
                if (!(code_[min_code_.size() - 1] == min_code_.back())) return false;
                return project_is_min(child);
            }
        }
        return true;
    }

    std::vector<MiningGraph> graphs_;
    int min_sup_;
    int max_edges_;
    Visitor visit_;
    GspanStats* stats_;
    DFSCode code_;
    DFSCode min_code_;
    std::unique_ptr<MiningGraph> min_graph_;
};

}  // namespace gspan_detail

/// Enumerates every connected frequent subgraph pattern exactly once, in
/// canonical (minimal DFS code) order, calling `visit` with the pattern and its
/// supporting graph ids. The visitor may cut the subtree below a pattern;
/// support-based pruning is always applied.
inline void gspan_enumerate(const GraphCorpus& corpus, int min_sup, int max_edges,
                            Visitor visit, GspanStats* stats = nullptr) {
    if (min_sup < 1) throw InvalidArgument("gspan_enumerate: min_sup must be >= 1");
    if (max_edges < 1) throw InvalidArgument("gspan_enumerate: max_edges must be >= 1");
    corpus.validate();
    gspan_detail::Engine engine(corpus, min_sup, max_edges, std::move(visit), stats);
    engine.run();
}

/// Re-encodes an arbitrary connected graph as its minimal DFS code by mining
/// it as a single-graph corpus with unlimited depth.
inline DFSCode minimal_dfs_code(const LabeledGraph& g) {
    GraphCorpus corpus;
    corpus.graphs.push_back(g);
    corpus.labels.push_back(0);
    DFSCode best;
    gspan_enumerate(corpus, 1, std::max(1, g.edge_count()),
                    [&](const PatternView& p) {
                        if (static_cast<int>(p.code.size()) == g.edge_count() &&
                            dfs_code_vertex_count(p.code) == g.node_count() && best.empty())
                            best = p.code;
                        return VisitAction::Continue;
                    });
    if (best.empty())
        throw InvalidArgument("minimal_dfs_code: graph must be connected and nonempty");
    return best;
}

}  // namespace mvl::subgraph
