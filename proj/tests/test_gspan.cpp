#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "mvl/gspan.hpp"
#include "mvl/rng.hpp"
#include "mvl/synth.hpp"

#include "oracles.hpp"

using namespace mvl;
using namespace mvl::subgraph;

namespace {

GraphCorpus triangles() {
    LabeledGraph tri;
    tri.node_labels = {0, 0, 0};
    tri.add_edge(0, 1, 0);
    tri.add_edge(1, 2, 0);
    tri.add_edge(0, 2, 0);
    GraphCorpus corpus;
    corpus.graphs = {tri, tri};
    corpus.labels = {1, -1};
    return corpus;
}

}  // namespace

TEST_CASE("two identical triangles yield edge, path, and triangle") {
    std::vector<DFSCode> visited;
    gspan_enumerate(triangles(), 2, 3, [&](const PatternView& p) {
        visited.push_back(p.code);
        CHECK(p.support == 2);
        CHECK(p.supporting_graphs == std::vector<int>{0, 1});
        return VisitAction::Continue;
    });
    REQUIRE(visited.size() == 3);
    CHECK(visited[0].size() == 1);
    CHECK(visited[1].size() == 2);
    CHECK(visited[2].size() == 3);
}

TEST_CASE("min_sup above the corpus size yields nothing") {
    long visits = 0;
    gspan_enumerate(triangles(), 3, 3, [&](const PatternView&) {
        ++visits;
        return VisitAction::Continue;
    });
    CHECK(visits == 0);
}

TEST_CASE("a single one-edge graph yields one pattern") {
    LabeledGraph g;
    g.node_labels = {1, 2};
    g.add_edge(0, 1, 7);
    GraphCorpus corpus;
    corpus.graphs = {g};
    corpus.labels = {0};
    long visits = 0;
    gspan_enumerate(corpus, 1, 4, [&](const PatternView& p) {
        ++visits;
        CHECK(p.support == 1);
        REQUIRE(p.code.size() == 1);
        CHECK(p.code[0].from_label == 1);
        CHECK(p.code[0].edge_label == 7);
        CHECK(p.code[0].to_label == 2);
        return VisitAction::Continue;
    });
    CHECK(visits == 1);
}

TEST_CASE("visitor pruning cuts the subtree") {
    long visits = 0;
    gspan_enumerate(triangles(), 2, 3, [&](const PatternView&) {
        ++visits;
        return VisitAction::PruneSubtree;
    });
    CHECK(visits == 1);  // only the root single-edge pattern
}

TEST_CASE("max_edges caps the pattern depth") {
    long max_size = 0;
    gspan_enumerate(triangles(), 2, 2, [&](const PatternView& p) {
        max_size = std::max(max_size, static_cast<long>(p.code.size()));
        return VisitAction::Continue;
    });
    CHECK(max_size == 2);
}

TEST_CASE("enumeration matches the exhaustive isomorphism oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto bundle = synth::graph_corpus(3000 + seed, 6, 6, 0);
        const int min_sup = 2, max_edges = 4;

        std::map<std::string, int> mined;
        gspan_enumerate(bundle.corpus, min_sup, max_edges, [&](const PatternView& p) {
            const auto key = oracles::canonical_key(dfs_code_to_graph(p.code));
            CHECK_FALSE(mined.contains(key));  // each pattern exactly once
            mined[key] = p.support;
            return VisitAction::Continue;
        });

        const auto expected =
            oracles::frequent_subgraphs(bundle.corpus, min_sup, max_edges);
        CHECK(mined == expected);
    }
}

TEST_CASE("re-encoding a visited pattern reproduces its code") {
    const auto bundle = synth::graph_corpus(77, 6, 6, 0);
    long checked = 0;
    gspan_enumerate(bundle.corpus, 2, 3, [&](const PatternView& p) {
        const DFSCode again = minimal_dfs_code(dfs_code_to_graph(p.code));
        CHECK(again == p.code);
        ++checked;
        return VisitAction::Continue;
    });
    CHECK(checked > 0);
}

TEST_CASE("support is anti-monotone along the search tree") {
    const auto bundle = synth::graph_corpus(78);
    std::map<std::size_t, int> support_at_depth;  // parent support per prefix length
    std::vector<int> stack;
    // preorder: the parent of a code is its prefix; track via explicit stack
    std::vector<std::pair<DFSCode, int>> seen;
    gspan_enumerate(bundle.corpus, 1, 4, [&](const PatternView& p) {
        for (const auto& [code, sup] : seen) {
            if (code.size() + 1 == p.code.size() &&
                std::equal(code.begin(), code.end(), p.code.begin()))
                CHECK(p.support <= sup);
        }
        seen.emplace_back(p.code, p.support);
        return VisitAction::Continue;
    });
}

TEST_CASE("invalid arguments are rejected") {
    CHECK_THROWS_AS(gspan_enumerate(triangles(), 0, 3,
                                    [](const PatternView&) { return VisitAction::Continue; }),
                    InvalidArgument);
    CHECK_THROWS_AS(gspan_enumerate(triangles(), 1, 0,
                                    [](const PatternView&) { return VisitAction::Continue; }),
                    InvalidArgument);
}

TEST_CASE("empty corpus yields no visits") {
    GraphCorpus corpus;
    long visits = 0;
    gspan_enumerate(corpus, 1, 3, [&](const PatternView&) {
        ++visits;
        return VisitAction::Continue;
    });
    CHECK(visits == 0);
}

TEST_CASE("subgraph isomorphism test") {
    LabeledGraph g;
    g.node_labels = {0, 1, 2};
    g.add_edge(0, 1, 0);
    g.add_edge(1, 2, 0);

    LabeledGraph edge;
    edge.node_labels = {0, 1};
    edge.add_edge(0, 1, 0);
    CHECK(contains_subgraph(g, edge));

    LabeledGraph wrong_label = edge;
    wrong_label.node_labels = {0, 0};
    CHECK_FALSE(contains_subgraph(g, wrong_label));

    LabeledGraph bigger;
    bigger.node_labels = {0, 1, 2, 0};
    bigger.add_edge(0, 1, 0);
    bigger.add_edge(1, 2, 0);
    bigger.add_edge(2, 3, 0);
    CHECK_FALSE(contains_subgraph(g, bigger));
}
