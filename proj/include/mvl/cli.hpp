#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvl/dataio.hpp"
#include "mvl/error.hpp"
#include "mvl/gmsv.hpp"
#include "mvl/mood.hpp"
#include "mvl/mvfs.hpp"
#include "mvl/bne.hpp"
#include "mvl/selftest.hpp"
#include "mvl/stats.hpp"
#include "mvl/synth.hpp"

namespace mvl::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConvergence = 2;

namespace cli_detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                                const std::string& what) {
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key))
            throw InvalidArgument(what + ": unknown config key '" + key + "'");
}

inline std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

/// Reports are deterministic given config + seed; the timestamp is the single
/// exempt field and is excluded when comparing runs.
inline void write_report(const fs::path& out_dir, const std::string& command,
                         const json& config_echo, json results) {
    json report;
    report["schema"] = 1;
    report["command"] = command;
    report["timestamp"] = timestamp_utc();
    report["config"] = config_echo;
    report["results"] = std::move(results);
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "report.json");
    if (!out) throw ParseError("cannot write report to " + out_dir.string());
    out << report.dump(2) << "\n";
}

/// Stratified fold ids: instances are grouped by label, ordered inside each
/// group by a seeded hash of their index, and dealt round-robin.
inline std::vector<int> stratified_folds(const Vector& labels, int folds,
                                         std::uint64_t seed) {
    std::vector<int> fold(static_cast<std::size_t>(labels.size()), 0);
    std::vector<std::pair<std::uint64_t, Eigen::Index>> pos, neg;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const std::uint64_t h = Rng::splitmix(seed ^ (0x9e3779b97f4a7c15ULL +
                                                      static_cast<std::uint64_t>(i)));
        (labels[i] > 0 ? pos : neg).emplace_back(h, i);
    }
    for (auto* group : {&pos, &neg}) {
        std::sort(group->begin(), group->end());
        int at = 0;
        for (const auto& [h, i] : *group) {
            fold[static_cast<std::size_t>(i)] = at;
            at = (at + 1) % folds;
        }
    }
    return fold;
}

/// Seeded majority-class subsampling to the minority size.
inline std::vector<Eigen::Index> balanced_indices(const Vector& labels,
                                                  std::uint64_t seed) {
    std::vector<Eigen::Index> pos, neg;
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        (labels[i] > 0 ? pos : neg).push_back(i);
    auto& major = pos.size() > neg.size() ? pos : neg;
    const std::size_t keep = std::min(pos.size(), neg.size());
    Rng rng = Rng(seed).fork(0x62616c61);
    rng.shuffle(major);
    major.resize(keep);
    std::vector<Eigen::Index> out;
    out.insert(out.end(), pos.begin(), pos.end());
    out.insert(out.end(), neg.begin(), neg.end());
    std::sort(out.begin(), out.end());
    return out;
}

inline json metrics_to_json(const ClassificationMetrics& m) {
    json j;
    j["accuracy"] = m.accuracy;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    if (!m.precision_defined || !m.recall_defined || !m.f1_defined)
        j["degenerate"] = true;
    return j;
}

}  // namespace cli_detail

// ---------------------------------------------------------------------------
// mvfs
// ---------------------------------------------------------------------------

struct MvfsConfig {
    std::string input;  // multi-view CSV bundle directory; empty -> synthetic
    long synth_instances = 50;
    std::vector<long> synth_dims = {10, 10};
    std::vector<long> targets;  // empty -> half of each view
    double C = 1.0;
    std::string kernel = "linear";
    int alternations = 3;
    int chunk = 1;
    int folds = 3;
    bool balance = false;
    std::uint64_t seed = 0;

    static MvfsConfig from_json(const json& j) {
        cli_detail::reject_unknown_keys(
            j,
            {"input", "synth_instances", "synth_dims", "targets", "C", "kernel",
             "alternations", "chunk", "folds", "balance", "seed"},
            "mvfs");
        MvfsConfig c;
        c.input = j.value("input", c.input);
        c.synth_instances = j.value("synth_instances", c.synth_instances);
        c.synth_dims = j.value("synth_dims", c.synth_dims);
        c.targets = j.value("targets", c.targets);
        c.C = j.value("C", c.C);
        c.kernel = j.value("kernel", c.kernel);
        c.alternations = j.value("alternations", c.alternations);
        c.chunk = j.value("chunk", c.chunk);
        c.folds = j.value("folds", c.folds);
        c.balance = j.value("balance", c.balance);
        c.seed = j.value("seed", c.seed);
        return c;
    }

    json to_json() const {
        json j;
        j["input"] = input;
        j["synth_instances"] = synth_instances;
        j["synth_dims"] = synth_dims;
        j["targets"] = targets;
        j["C"] = C;
        j["kernel"] = kernel;
        j["alternations"] = alternations;
        j["chunk"] = chunk;
        j["folds"] = folds;
        j["balance"] = balance;
        j["seed"] = seed;
        return j;
    }
};

inline int cmd_mvfs(const MvfsConfig& cfg, const fs::path& out_dir) {
    mvfs::MultiViewDataset data;
    if (cfg.input.empty()) {
        std::vector<Eigen::Index> dims(cfg.synth_dims.begin(), cfg.synth_dims.end());
        data = synth::multiview(cfg.seed, cfg.synth_instances, dims);
    } else {
        data = dataio::load_multiview(cfg.input);
    }
    if (cfg.balance) {
        const auto keep = cli_detail::balanced_indices(data.labels, cfg.seed);
        mvfs::MultiViewDataset sub;
        sub.view_names = data.view_names;
        for (const Matrix& v : data.views) {
            Matrix r(v.rows(), static_cast<Eigen::Index>(keep.size()));
            for (std::size_t i = 0; i < keep.size(); ++i)
                r.col(static_cast<Eigen::Index>(i)) = v.col(keep[i]);
            sub.views.push_back(std::move(r));
        }
        sub.labels.resize(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i)
            sub.labels[static_cast<Eigen::Index>(i)] = data.labels[keep[i]];
        data = std::move(sub);
    }

    std::vector<Eigen::Index> targets;
    if (cfg.targets.empty()) {
        for (const Matrix& v : data.views)
            targets.push_back(std::max<Eigen::Index>(1, v.rows() / 2));
    } else {
        targets.assign(cfg.targets.begin(), cfg.targets.end());
    }

    mvfs::SelectOptions opt;
    opt.C = cfg.C;
    opt.spec = cfg.kernel == "rbf" ? KernelSpec::rbf() : KernelSpec::linear();
    opt.alternations = cfg.alternations;
    opt.chunk = cfg.chunk;

    const auto state = mvfs::tmvfs_select(data, targets, opt);

    // Cross-validated metrics: refit on each training split, evaluate the
    // multiplicative decision rule on the held-out fold.
    const auto folds = cli_detail::stratified_folds(data.labels, cfg.folds, cfg.seed);
    json fold_metrics = json::array();
    double acc_sum = 0.0;
    for (int f = 0; f < cfg.folds; ++f) {
        std::vector<Eigen::Index> train, test;
        for (Eigen::Index i = 0; i < data.labels.size(); ++i)
            (folds[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
        if (test.empty() || train.empty()) continue;
        mvfs::MultiViewDataset dtrain;
        dtrain.view_names = data.view_names;
        for (const Matrix& v : data.views) {
            Matrix r(v.rows(), static_cast<Eigen::Index>(train.size()));
            for (std::size_t i = 0; i < train.size(); ++i)
                r.col(static_cast<Eigen::Index>(i)) = v.col(train[i]);
            dtrain.views.push_back(std::move(r));
        }
        dtrain.labels.resize(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i)
            dtrain.labels[static_cast<Eigen::Index>(i)] = data.labels[train[i]];

        const auto fstate = mvfs::tmvfs_select(dtrain, targets, opt);
        Vector pred(static_cast<Eigen::Index>(test.size())),
            actual(static_cast<Eigen::Index>(test.size()));
        for (std::size_t i = 0; i < test.size(); ++i) {
            std::vector<Vector> point;
            for (const Matrix& v : data.views) point.push_back(v.col(test[i]));
            pred[static_cast<Eigen::Index>(i)] =
                mvfs::mv_decision(fstate, mvfs::restrict_point(fstate, point));
            actual[static_cast<Eigen::Index>(i)] = data.labels[test[i]];
        }
        const auto m = classification_metrics(pred, actual);
        acc_sum += m.accuracy;
        json jm = cli_detail::metrics_to_json(m);
        jm["fold"] = f;
        fold_metrics.push_back(std::move(jm));
    }

    json results;
    json selection = json::array();
    for (std::size_t v = 0; v < state.selected.size(); ++v) {
        json jv;
        jv["view"] = data.view_names.empty() ? "view" + std::to_string(v + 1)
                                             : data.view_names[v];
        jv["selected"] = state.selected[v];
        std::vector<double> w(state.weights[v].data(),
                              state.weights[v].data() + state.weights[v].size());
        jv["weights"] = w;
        selection.push_back(std::move(jv));
    }
    results["selection"] = std::move(selection);
    results["bias"] = state.bias;
    results["cv_mean_accuracy"] = cfg.folds > 0 ? acc_sum / cfg.folds : 0.0;
    results["cv_folds"] = std::move(fold_metrics);
    cli_detail::write_report(out_dir, "mvfs", cfg.to_json(), std::move(results));
    return kExitOk;
}

// ---------------------------------------------------------------------------
// mine
// ---------------------------------------------------------------------------

struct MineConfig {
    std::string input;  // graph corpus file; empty -> synthetic
    int synth_graphs = 8;
    int k = 5;
    int min_sup = 2;
    int max_edges = 4;
    double lambda = 1.0;
    std::optional<double> edge_threshold;
    bool export_features = false;
    bool classify = false;
    int folds = 3;
    std::uint64_t seed = 0;

    static MineConfig from_json(const json& j) {
        cli_detail::reject_unknown_keys(
            j,
            {"input", "synth_graphs", "k", "min_sup", "max_edges", "lambda",
             "edge_threshold", "export_features", "classify", "folds", "seed"},
            "mine");
        MineConfig c;
        c.input = j.value("input", c.input);
        c.synth_graphs = j.value("synth_graphs", c.synth_graphs);
        c.k = j.value("k", c.k);
        c.min_sup = j.value("min_sup", c.min_sup);
        c.max_edges = j.value("max_edges", c.max_edges);
        c.lambda = j.value("lambda", c.lambda);
        if (j.contains("edge_threshold"))
            c.edge_threshold = j["edge_threshold"].get<double>();
        c.export_features = j.value("export_features", c.export_features);
        c.classify = j.value("classify", c.classify);
        c.folds = j.value("folds", c.folds);
        c.seed = j.value("seed", c.seed);
        return c;
    }

    json to_json() const {
        json j;
        j["input"] = input;
        j["synth_graphs"] = synth_graphs;
        j["k"] = k;
        j["min_sup"] = min_sup;
        j["max_edges"] = max_edges;
        j["lambda"] = lambda;
        if (edge_threshold) j["edge_threshold"] = *edge_threshold;
        j["export_features"] = export_features;
        j["classify"] = classify;
        j["folds"] = folds;
        j["seed"] = seed;
        return j;
    }
};

inline json pattern_to_json(const subgraph::ScoredPattern& p) {
    const subgraph::LabeledGraph g = subgraph::dfs_code_to_graph(p.code);
    json j;
    j["vertex_labels"] = g.node_labels;
    json edges = json::array();
    for (const auto& e : g.edges) edges.push_back({e.u, e.v, e.label});
    j["edges"] = std::move(edges);
    j["support"] = p.support;
    j["q"] = p.q;
    j["q_bound"] = p.q_bound;
    std::string bits(p.indicator.size(), '0');
    for (std::size_t i = 0; i < p.indicator.size(); ++i)
        if (p.indicator[i]) bits[i] = '1';
    j["indicator"] = bits;
    return j;
}

inline int cmd_mine(const MineConfig& cfg, const fs::path& out_dir) {
    subgraph::GraphCorpus corpus;
    subgraph::SideViewSet sides;
    if (cfg.input.empty()) {
        auto bundle = synth::graph_corpus(cfg.seed, cfg.synth_graphs);
        corpus = std::move(bundle.corpus);
        sides = std::move(bundle.sides);
    } else {
        auto bundle = dataio::load_graph_corpus(cfg.input, cfg.edge_threshold);
        corpus = std::move(bundle.corpus);
        sides = std::move(bundle.sides);
    }
    for (double& l : sides.lambdas) l = cfg.lambda;

    subgraph::MineOptions opt;
    opt.k = cfg.k;
    opt.min_sup = cfg.min_sup;
    opt.max_edges = cfg.max_edges;
    const auto mined = subgraph::gmsv_mine(corpus, sides, opt);

    json results;
    json patterns = json::array();
    for (const auto& p : mined.patterns) patterns.push_back(pattern_to_json(p));
    results["patterns"] = std::move(patterns);
    results["nodes_visited"] = mined.nodes_visited;

    if (cfg.export_features || cfg.classify) {
        const Matrix x = subgraph::feature_matrix(mined.patterns, corpus);
        if (cfg.export_features) {
            fs::create_directories(out_dir);
            std::vector<std::string> header;
            for (Eigen::Index c = 0; c < x.cols(); ++c)
                header.push_back("g" + std::to_string(c + 1));
            dataio::io_detail::write_csv_matrix(out_dir / "features.csv", x, header);
            results["features_file"] = "features.csv";
        }
        if (cfg.classify) {
            Vector labels(static_cast<Eigen::Index>(corpus.size()));
            for (std::size_t i = 0; i < corpus.size(); ++i)
                labels[static_cast<Eigen::Index>(i)] =
                    corpus.labels[i] == 0 ? -1.0 : corpus.labels[i];
            const auto folds =
                cli_detail::stratified_folds(labels, cfg.folds, cfg.seed);
            json fold_metrics = json::array();
            for (int f = 0; f < cfg.folds; ++f) {
                std::vector<Eigen::Index> train, test;
                for (Eigen::Index i = 0; i < labels.size(); ++i)
                    (folds[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
                if (train.empty() || test.empty()) continue;
                Matrix xt(static_cast<Eigen::Index>(train.size()), x.rows());
                Vector yt(static_cast<Eigen::Index>(train.size()));
                for (std::size_t i = 0; i < train.size(); ++i) {
                    xt.row(static_cast<Eigen::Index>(i)) = x.col(train[i]).transpose();
                    yt[static_cast<Eigen::Index>(i)] = labels[train[i]];
                }
                bool both = false, seen_pos = false, seen_neg = false;
                for (Eigen::Index i = 0; i < yt.size(); ++i)
                    (yt[i] > 0 ? seen_pos : seen_neg) = true;
                both = seen_pos && seen_neg;
                if (!both) continue;
                const auto sol = svm_train(xt, yt, 10.0);
                Vector pred(static_cast<Eigen::Index>(test.size())),
                    actual(static_cast<Eigen::Index>(test.size()));
                for (std::size_t i = 0; i < test.size(); ++i) {
                    const double score = sol.decision_linear(x.col(test[i]));
                    pred[static_cast<Eigen::Index>(i)] = score >= 0.0 ? 1.0 : -1.0;
                    actual[static_cast<Eigen::Index>(i)] = labels[test[i]];
                }
                json jm = cli_detail::metrics_to_json(classification_metrics(pred, actual));
                jm["fold"] = f;
                fold_metrics.push_back(std::move(jm));
            }
            results["cv_folds"] = std::move(fold_metrics);
        }
    }
    cli_detail::write_report(out_dir, "mine", cfg.to_json(), std::move(results));
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bne
// ---------------------------------------------------------------------------

struct BneConfig {
    std::string input;  // network stack JSON; empty -> synthetic planted tensor
    int synth_nodes = 8;
    int synth_subjects = 12;
    double synth_noise = 0.0;
    int rank = 3;
    double alpha = 0.1;
    double beta = 0.1;
    double gamma = 0.25;
    double tol = 1e-4;
    int max_iters = 500;
    int restarts = 4;
    std::uint64_t seed = 0;

    static BneConfig from_json(const json& j) {
        cli_detail::reject_unknown_keys(
            j,
            {"input", "synth_nodes", "synth_subjects", "synth_noise", "rank", "alpha",
             "beta", "gamma", "tol", "max_iters", "restarts", "seed"},
            "bne");
        BneConfig c;
        c.input = j.value("input", c.input);
        c.synth_nodes = j.value("synth_nodes", c.synth_nodes);
        c.synth_subjects = j.value("synth_subjects", c.synth_subjects);
        c.synth_noise = j.value("synth_noise", c.synth_noise);
        c.rank = j.value("rank", c.rank);
        c.alpha = j.value("alpha", c.alpha);
        c.beta = j.value("beta", c.beta);
        c.gamma = j.value("gamma", c.gamma);
        c.tol = j.value("tol", c.tol);
        c.max_iters = j.value("max_iters", c.max_iters);
        c.restarts = j.value("restarts", c.restarts);
        c.seed = j.value("seed", c.seed);
        return c;
    }

    json to_json() const {
        json j;
        j["input"] = input;
        j["synth_nodes"] = synth_nodes;
        j["synth_subjects"] = synth_subjects;
        j["synth_noise"] = synth_noise;
        j["rank"] = rank;
        j["alpha"] = alpha;
        j["beta"] = beta;
        j["gamma"] = gamma;
        j["tol"] = tol;
        j["max_iters"] = max_iters;
        j["restarts"] = restarts;
        j["seed"] = seed;
        return j;
    }
};

inline int cmd_bne(const BneConfig& cfg, const fs::path& out_dir) {
    std::optional<PartiallySymmetricTensor3> tensor;
    Matrix side;
    Matrix y(0, 2);
    std::vector<int> label_ids;
    if (cfg.input.empty()) {
        auto planted =
            synth::planted_tensor(cfg.seed, cfg.synth_nodes, cfg.synth_subjects,
                                  cfg.rank, cfg.synth_noise);
        // Side features echo the first planted subject factor; labels follow
        // the sign of the second.
        side = planted.subject_factors.col(0);
        const Eigen::Index labeled = cfg.synth_subjects / 2;
        y = Matrix::Zero(labeled, 2);
        for (Eigen::Index i = 0; i < labeled; ++i) {
            label_ids.push_back(planted.subject_factors(i, cfg.rank > 1 ? 1 : 0) >= 0 ? 1 : 0);
            y(i, label_ids.back()) = 1.0;
        }
        tensor = std::move(planted.tensor);
    } else {
        auto stack = dataio::load_network_stack(cfg.input);
        side = std::move(stack.side_features);
        y = std::move(stack.labels_onehot);
        label_ids = std::move(stack.label_ids);
        tensor = std::move(stack.tensor);
    }

    const auto guidance = bne::GuidanceKernel::from_features(side);
    bne::Config bcfg;
    bcfg.rank = cfg.rank;
    bcfg.alpha = cfg.alpha;
    bcfg.beta = cfg.beta;
    bcfg.gamma = cfg.gamma;
    bcfg.tol = cfg.tol;
    bcfg.max_iters = cfg.max_iters;
    bcfg.restarts = cfg.restarts;
    bcfg.seed = cfg.seed;
    const auto model = bne::fit(*tensor, guidance, y, bcfg);

    fs::create_directories(out_dir);
    json header;
    header["kind"] = "bne";
    header["schema"] = 1;
    header["rank"] = cfg.rank;
    const Matrix node = model.node_factors();
    dataio::write_model_file(out_dir / "model.bin", header,
                             {{"B", &node},
                              {"S", &model.s},
                              {"W", &model.w}});
    std::vector<std::string> emb_header;
    for (int f = 0; f < cfg.rank; ++f) emb_header.push_back("s" + std::to_string(f + 1));
    dataio::io_detail::write_csv_matrix(out_dir / "embedding.csv", model.s, emb_header);

    json results;
    results["fit"] = model.fit;
    results["converged"] = model.converged;
    results["iterations"] = model.iterations;
    results["consensus_gap"] = model.consensus_gap;
    results["model_file"] = "model.bin";
    results["embedding_file"] = "embedding.csv";
    if (!label_ids.empty()) {
        std::vector<Eigen::Index> rows(label_ids.size());
        std::iota(rows.begin(), rows.end(), 0);
        const auto pred = bne::predict(model, rows);
        long correct = 0;
        for (std::size_t i = 0; i < label_ids.size(); ++i)
            if (pred[i] == label_ids[i]) ++correct;
        results["train_accuracy"] =
            static_cast<double>(correct) / static_cast<double>(label_ids.size());
    }
    cli_detail::write_report(out_dir, "bne", cfg.to_json(), std::move(results));
    return model.converged ? kExitOk : kExitConvergence;
}

// ---------------------------------------------------------------------------
// mood
// ---------------------------------------------------------------------------

struct MoodConfig {
    std::string input;  // session LDJSON; empty -> synthetic
    int synth_sessions = 32;
    std::string task = "classify";  // classify | regress
    bool dichotomize_hdrs = false;
    std::string fusion = "mvm";
    int hidden_dim = 8;
    int factor_dim = 8;
    int epochs = 100;
    int batch_size = 256;
    double learning_rate = 0.001;
    double dropout = 0.1;
    int min_length = 10;
    int max_length = 100;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;

    static MoodConfig from_json(const json& j) {
        cli_detail::reject_unknown_keys(
            j,
            {"input", "synth_sessions", "task", "dichotomize_hdrs", "fusion",
             "hidden_dim", "factor_dim", "epochs", "batch_size", "learning_rate",
             "dropout", "min_length", "max_length", "train_fraction", "seed"},
            "mood");
        MoodConfig c;
        c.input = j.value("input", c.input);
        c.synth_sessions = j.value("synth_sessions", c.synth_sessions);
        c.task = j.value("task", c.task);
        c.dichotomize_hdrs = j.value("dichotomize_hdrs", c.dichotomize_hdrs);
        c.fusion = j.value("fusion", c.fusion);
        c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
        c.factor_dim = j.value("factor_dim", c.factor_dim);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.dropout = j.value("dropout", c.dropout);
        c.min_length = j.value("min_length", c.min_length);
        c.max_length = j.value("max_length", c.max_length);
        c.train_fraction = j.value("train_fraction", c.train_fraction);
        c.seed = j.value("seed", c.seed);
        return c;
    }

    json to_json() const {
        json j;
        j["input"] = input;
        j["synth_sessions"] = synth_sessions;
        j["task"] = task;
        j["dichotomize_hdrs"] = dichotomize_hdrs;
        j["fusion"] = fusion;
        j["hidden_dim"] = hidden_dim;
        j["factor_dim"] = factor_dim;
        j["epochs"] = epochs;
        j["batch_size"] = batch_size;
        j["learning_rate"] = learning_rate;
        j["dropout"] = dropout;
        j["min_length"] = min_length;
        j["max_length"] = max_length;
        j["train_fraction"] = train_fraction;
        j["seed"] = seed;
        return j;
    }
};

inline int cmd_mood(const MoodConfig& cfg, const fs::path& out_dir) {
    std::vector<mood::SessionInstance> sessions;
    if (cfg.input.empty()) {
        sessions = synth::sessions(cfg.seed, cfg.synth_sessions, 2, 2,
                                   std::min(cfg.min_length, 4),
                                   std::min(cfg.max_length, 8));
    } else {
        dataio::SessionLoadOptions lopt;
        lopt.min_length = cfg.min_length;
        lopt.max_length = cfg.max_length;
        lopt.dichotomize_hdrs = cfg.dichotomize_hdrs;
        sessions = dataio::load_sessions(cfg.input, lopt);
    }
    if (sessions.empty()) throw InvalidArgument("mood: no sessions after filtering");

    // Chronological split: the first train_fraction of sessions train, the
    // rest validate.
    const auto cut = static_cast<std::size_t>(
        static_cast<double>(sessions.size()) * cfg.train_fraction);
    std::vector<mood::SessionInstance> train_set(sessions.begin(),
                                                 sessions.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<mood::SessionInstance> val_set(sessions.begin() + static_cast<std::ptrdiff_t>(cut),
                                               sessions.end());
    if (train_set.empty()) throw InvalidArgument("mood: empty training split");

    mood::TrainConfig tc;
    tc.hidden_dim = cfg.hidden_dim;
    tc.factor_dim = cfg.factor_dim;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.learning_rate = cfg.learning_rate;
    tc.dropout = cfg.dropout;
    tc.min_length = cfg.min_length;
    tc.max_length = cfg.max_length;
    tc.seed = cfg.seed;
    tc.fusion = mood::fusion_from_string(cfg.fusion);
    tc.classes = cfg.task == "regress" ? 1 : 2;

    const auto result = mood::train(train_set, val_set, tc);

    fs::create_directories(out_dir);
    {
        std::ofstream csv(out_dir / "metrics.csv");
        csv.precision(17);
        csv << "epoch,train_loss,train_metric,val_metric\n";
        for (const auto& r : result.history)
            csv << r.epoch << "," << r.train_loss << "," << r.train_metric << ","
                << r.val_metric << "\n";
    }
    {
        json header;
        header["kind"] = "mood";
        header["schema"] = 1;
        header["fusion"] = cfg.fusion;
        header["classes"] = tc.classes;
        header["hidden_dim"] = tc.hidden_dim;
        header["factor_dim"] = tc.factor_dim;
        auto& params = const_cast<mood::ParamSet&>(result.model.params);
        std::size_t blocks = 0;
        params.for_each([&](auto&) { ++blocks; });
        std::vector<Matrix> storage;  // Vector params as one-column matrices
        storage.reserve(blocks);
        std::vector<std::pair<std::string, const Matrix*>> fields;
        int idx = 0;
        params.for_each([&](auto& m) {
            storage.emplace_back(m);
            fields.emplace_back("p" + std::to_string(idx++), &storage.back());
        });
        dataio::write_model_file(out_dir / "model.bin", header, fields);
    }

    json results;
    const auto& last = result.history.back();
    results["epochs_run"] = last.epoch;
    results["final_train_loss"] = last.train_loss;
    results["final_train_metric"] = last.train_metric;
    results["final_val_metric"] = last.val_metric;
    double best_val = 0.0;
    int best_epoch = 0;
    const bool regress = tc.classes == 1;
    for (const auto& r : result.history) {
        const bool better = regress ? (best_epoch == 0 || r.val_metric < best_val)
                                    : (r.val_metric > best_val);
        if (better) {
            best_val = r.val_metric;
            best_epoch = r.epoch;
        }
    }
    results["best_val_metric"] = best_val;
    results["best_val_epoch"] = best_epoch;
    results["metrics_file"] = "metrics.csv";
    results["model_file"] = "model.bin";
    cli_detail::write_report(out_dir, "mood", cfg.to_json(), std::move(results));
    return kExitOk;
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

inline int cmd_selftest() {
    const int failures = selftest::run_all(std::cout);
    std::cout << (failures == 0 ? "selftest: all checks passed\n"
                                : "selftest: " + std::to_string(failures) +
                                      " check(s) failed\n");
    return failures == 0 ? kExitOk : kExitValidation;
}

}  // namespace mvl::cli
