#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mvl/cli.hpp"

namespace {

using mvl::cli::json;

json read_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw mvl::ParseError("cannot open config file " + path);
    try {
        return json::parse(in);
    } catch (const std::exception& e) {
        throw mvl::ParseError(std::string("bad config file: ") + e.what());
    }
}

// Precedence: flags > config file > defaults. Flags that were actually given
// are layered onto the file-provided JSON before decoding.
template <typename T>
void overlay(json& j, const CLI::Option* opt, const std::string& key, const T& value) {
    if (opt->count() > 0) j[key] = value;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-view learning toolkit: tensor-based feature selection, "
                 "side-view guided subgraph mining, constrained network-tensor "
                 "factorization, and multi-view sequence classification."};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", input;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--out", out_dir, "output directory for reports");
        cmd->add_option("--seed", seed, "random seed");
        cmd->add_option("--input", input, "input path (omit to run on synthetic data)");
    };

    auto* mvfs_cmd = app.add_subcommand("mvfs", "tensor-based multi-view feature selection");
    add_common(mvfs_cmd);
    std::vector<long> targets;
    double svm_c = 1.0;
    std::string kernel = "linear";
    int folds = 3;
    bool balance = false;
    mvfs_cmd->add_option("--targets", targets, "features to keep per view");
    auto* opt_c = mvfs_cmd->add_option("--c", svm_c, "SVM margin trade-off");
    auto* opt_kernel = mvfs_cmd->add_option("--kernel", kernel, "linear or rbf");
    auto* opt_folds = mvfs_cmd->add_option("--folds", folds, "cross-validation folds");
    auto* opt_balance = mvfs_cmd->add_flag("--balance", balance,
                                           "subsample the majority class (seeded)");

    auto* mine_cmd = app.add_subcommand("mine", "side-view guided subgraph mining");
    add_common(mine_cmd);
    int top_k = 5, min_sup = 2, max_edges = 4;
    double lambda = 1.0, edge_threshold = 0.0;
    bool export_features = false, classify = false;
    auto* opt_k = mine_cmd->add_option("--k", top_k, "patterns to keep");
    auto* opt_minsup = mine_cmd->add_option("--min-sup", min_sup, "minimum support");
    auto* opt_maxedges = mine_cmd->add_option("--max-edges", max_edges, "pattern size cap");
    auto* opt_lambda = mine_cmd->add_option("--lambda", lambda, "side-view weight");
    auto* opt_thresh = mine_cmd->add_option("--edge-threshold", edge_threshold,
                                            "treat edge tokens as weights; keep >= threshold");
    auto* opt_export = mine_cmd->add_flag("--export-features", export_features,
                                          "write the pattern feature matrix CSV");
    auto* opt_classify = mine_cmd->add_flag("--classify", classify,
                                            "cross-validate an SVM on mined features");

    auto* bne_cmd = app.add_subcommand("bne", "constrained network-tensor factorization");
    add_common(bne_cmd);
    int rank = 3, max_iters = 500, restarts = 4;
    double alpha = 0.1, beta = 0.1, gamma = 0.25;
    auto* opt_rank = bne_cmd->add_option("--rank", rank, "factorization rank");
    auto* opt_alpha = bne_cmd->add_option("--alpha", alpha, "guidance weight");
    auto* opt_beta = bne_cmd->add_option("--beta", beta, "classification-loss weight");
    auto* opt_gamma = bne_cmd->add_option("--gamma", gamma, "classifier regularization");
    auto* opt_iters = bne_cmd->add_option("--max-iters", max_iters, "iteration cap");
    auto* opt_restarts = bne_cmd->add_option("--restarts", restarts, "seeded restarts");

    auto* mood_cmd = app.add_subcommand("mood", "multi-view sequence classification");
    add_common(mood_cmd);
    std::string fusion = "mvm", task = "classify";
    int hidden_dim = 8, factor_dim = 8, epochs = 100, batch_size = 256;
    bool dichotomize = false;
    auto* opt_fusion = mood_cmd->add_option("--fusion", fusion, "fc, fm, or mvm");
    auto* opt_task = mood_cmd->add_option("--task", task, "classify or regress");
    auto* opt_hidden = mood_cmd->add_option("--hidden", hidden_dim, "recurrent units");
    auto* opt_factor = mood_cmd->add_option("--factors", factor_dim, "fusion factors");
    auto* opt_epochs = mood_cmd->add_option("--epochs", epochs, "training epochs");
    auto* opt_batch = mood_cmd->add_option("--batch", batch_size, "mini-batch size");
    auto* opt_dich = mood_cmd->add_flag("--dichotomize-hdrs", dichotomize,
                                        "map labels <= 7 to class 0, >= 8 to class 1");

    auto* selftest_cmd = app.add_subcommand("selftest", "run the built-in oracle suite");

    CLI11_PARSE(app, argc, argv);

    try {
        json j = read_config(config_path);
        auto overlay_common = [&](CLI::App* cmd) {
            overlay(j, cmd->get_option("--seed"), "seed", seed);
            overlay(j, cmd->get_option("--input"), "input", input);
        };
        if (app.got_subcommand(mvfs_cmd)) {
            overlay_common(mvfs_cmd);
            if (!targets.empty()) j["targets"] = targets;
            overlay(j, opt_c, "C", svm_c);
            overlay(j, opt_kernel, "kernel", kernel);
            overlay(j, opt_folds, "folds", folds);
            overlay(j, opt_balance, "balance", balance);
            return mvl::cli::cmd_mvfs(mvl::cli::MvfsConfig::from_json(j), out_dir);
        }
        if (app.got_subcommand(mine_cmd)) {
            overlay_common(mine_cmd);
            overlay(j, opt_k, "k", top_k);
            overlay(j, opt_minsup, "min_sup", min_sup);
            overlay(j, opt_maxedges, "max_edges", max_edges);
            overlay(j, opt_lambda, "lambda", lambda);
            overlay(j, opt_thresh, "edge_threshold", edge_threshold);
            overlay(j, opt_export, "export_features", export_features);
            overlay(j, opt_classify, "classify", classify);
            return mvl::cli::cmd_mine(mvl::cli::MineConfig::from_json(j), out_dir);
        }
        if (app.got_subcommand(bne_cmd)) {
            overlay_common(bne_cmd);
            overlay(j, opt_rank, "rank", rank);
            overlay(j, opt_alpha, "alpha", alpha);
            overlay(j, opt_beta, "beta", beta);
            overlay(j, opt_gamma, "gamma", gamma);
            overlay(j, opt_iters, "max_iters", max_iters);
            overlay(j, opt_restarts, "restarts", restarts);
            return mvl::cli::cmd_bne(mvl::cli::BneConfig::from_json(j), out_dir);
        }
        if (app.got_subcommand(mood_cmd)) {
            overlay_common(mood_cmd);
            overlay(j, opt_fusion, "fusion", fusion);
            overlay(j, opt_task, "task", task);
            overlay(j, opt_hidden, "hidden_dim", hidden_dim);
            overlay(j, opt_factor, "factor_dim", factor_dim);
            overlay(j, opt_epochs, "epochs", epochs);
            overlay(j, opt_batch, "batch_size", batch_size);
            overlay(j, opt_dich, "dichotomize_hdrs", dichotomize);
            return mvl::cli::cmd_mood(mvl::cli::MoodConfig::from_json(j), out_dir);
        }
        if (app.got_subcommand(selftest_cmd)) return mvl::cli::cmd_selftest();
    } catch (const mvl::ConvergenceFailure& e) {
        std::cerr << "error: " << e.what() << " (residual " << e.residual << ")\n";
        return mvl::cli::kExitConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mvl::cli::kExitValidation;
    }
    return mvl::cli::kExitValidation;
}
