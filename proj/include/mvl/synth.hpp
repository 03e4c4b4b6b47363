#pragma once

#include <cstdint>
#include <vector>

#include "mvl/bne.hpp"
#include "mvl/graph.hpp"
#include "mvl/mood.hpp"
#include "mvl/mvfs.hpp"
#include "mvl/rng.hpp"
#include "mvl/stiefel.hpp"
#include "mvl/tensor.hpp"

namespace mvl::synth {

/// Uniform [0,1] features; the label is the sign of the product of the first
/// feature of the first two views minus 0.25. Regenerates until both classes
/// appear.
inline mvfs::MultiViewDataset multiview(std::uint64_t seed, Eigen::Index n,
                                        const std::vector<Eigen::Index>& dims) {
    if (dims.size() < 2) throw InvalidArgument("synth::multiview: need >= 2 views");
    Rng rng(seed);
    mvfs::MultiViewDataset data;
    for (int attempt = 0; attempt < 64; ++attempt) {
        data.views.clear();
        data.view_names.clear();
        for (std::size_t v = 0; v < dims.size(); ++v) {
            data.views.push_back(rng.uniform_matrix(dims[v], n));
            data.view_names.push_back("view" + std::to_string(v + 1));
        }
        data.labels.resize(n);
        bool pos = false, neg = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double prod = data.views[0](0, i) * data.views[1](0, i);
            data.labels[i] = prod - 0.25 >= 0.0 ? 1.0 : -1.0;
            (data.labels[i] > 0 ? pos : neg) = true;
        }
        if (pos && neg) return data;
    }
    throw DegenerateInput("synth::multiview: could not realize both classes");
}

struct GraphCorpusBundle {
    subgraph::GraphCorpus corpus;
    subgraph::SideViewSet sides;
};

/// Small labeled graphs over a 3-letter node alphabet with random background
/// edges. Positive graphs carry a planted labeled triangle; side views are
/// noisy one-dimensional echoes of the label so that kernels and labels agree.
inline GraphCorpusBundle graph_corpus(std::uint64_t seed, int graphs = 8,
                                      int max_nodes = 6, int side_views = 2,
                                      double side_noise = 0.15,
                                      double edge_prob = 0.35) {
    Rng rng(seed);
    GraphCorpusBundle out;
    for (int g = 0; g < graphs; ++g) {
        const int label = g % 2 == 0 ? 1 : -1;
        const int nodes = static_cast<int>(rng.uniform_int(4, max_nodes));
        subgraph::LabeledGraph lg;
        lg.node_labels.resize(static_cast<std::size_t>(nodes));
        for (int v = 0; v < nodes; ++v)
            lg.node_labels[static_cast<std::size_t>(v)] =
                static_cast<int>(rng.uniform_int(0, 2));
        if (label == 1) {
            // Planted pattern: triangle over labels (0, 1, 2).
            lg.node_labels[0] = 0;
            lg.node_labels[1] = 1;
            lg.node_labels[2] = 2;
            lg.add_edge(0, 1, 0);
            lg.add_edge(1, 2, 0);
            lg.add_edge(0, 2, 0);
        }
        for (int u = 0; u < nodes; ++u) {
            for (int v = u + 1; v < nodes; ++v) {
                if (lg.has_edge(u, v, 0)) continue;
                if (rng.uniform() < edge_prob) lg.add_edge(u, v, 0);
            }
        }
        if (lg.edges.empty()) lg.add_edge(0, 1, 0);  // keep graphs nonempty
        out.corpus.graphs.push_back(std::move(lg));
        out.corpus.labels.push_back(label);
    }
    for (int p = 0; p < side_views; ++p) {
        Matrix z(graphs, 2);
        for (int g = 0; g < graphs; ++g) {
            const double base = out.corpus.labels[static_cast<std::size_t>(g)] == 1 ? 1.0 : 0.0;
            z(g, 0) = base + side_noise * rng.normal();
            z(g, 1) = (1.0 - base) + side_noise * rng.normal();
        }
        out.sides.views.push_back(std::move(z));
        out.sides.lambdas.push_back(1.0);
    }
    return out;
}

struct PlantedTensor {
    PartiallySymmetricTensor3 tensor;
    Matrix node_factors;     // B*, m x k
    Matrix subject_factors;  // S*, n x k orthonormal
};

/// X = sum_f B(:,f) o B(:,f) o S(:,f) with standard-normal B and orthonormal
/// S, plus optional symmetric Gaussian noise.
inline PlantedTensor planted_tensor(std::uint64_t seed, Eigen::Index m, Eigen::Index n,
                                    int k, double noise = 0.0) {
    Rng rng(seed);
    const Matrix b = rng.normal_matrix(m, k);
    const Matrix s = detail::qr_orthonormalize(rng.normal_matrix(n, k));
    std::vector<Matrix> slices(static_cast<std::size_t>(n), Matrix::Zero(m, m));
    for (int f = 0; f < k; ++f) {
        const Matrix outer = b.col(f) * b.col(f).transpose();
        for (Eigen::Index i = 0; i < n; ++i)
            slices[static_cast<std::size_t>(i)] += s(i, f) * outer;
    }
    if (noise > 0.0) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Matrix e = rng.normal_matrix(m, m);
            slices[static_cast<std::size_t>(i)] += noise * 0.5 * (e + e.transpose());
        }
    }
    return {stack_networks(slices), b, s};
}

/// Variable-length two-or-more-view sessions whose label is determined by the
/// mean of the first view's features: class 1 sessions draw view-1 features
/// from [0.5, 1], class 0 from [0, 0.5], so mean(view 1) > 0.5 iff class 1.
/// Other views are uninformative uniforms.
inline std::vector<mood::SessionInstance> sessions(std::uint64_t seed, int count,
                                                   int views = 2, Eigen::Index dim = 2,
                                                   int min_len = 4, int max_len = 8) {
    Rng rng(seed);
    std::vector<mood::SessionInstance> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const int cls = i % 2;
        mood::SessionInstance inst;
        inst.label = cls;
        for (int p = 0; p < views; ++p) {
            const auto len = static_cast<int>(rng.uniform_int(min_len, max_len));
            std::vector<Vector> seq;
            seq.reserve(static_cast<std::size_t>(len));
            for (int t = 0; t < len; ++t) {
                Vector x(dim);
                for (Eigen::Index dft = 0; dft < dim; ++dft) {
                    x[dft] = p == 0 ? (cls == 1 ? rng.uniform(0.5, 1.0)
                                                : rng.uniform(0.0, 0.5))
                                    : rng.uniform();
                }
                seq.push_back(std::move(x));
            }
            inst.views.push_back(std::move(seq));
        }
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace mvl::synth
