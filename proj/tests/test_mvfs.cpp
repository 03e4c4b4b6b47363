#include <catch2/catch_amalgamated.hpp>

#include "mvl/mvfs.hpp"
#include "mvl/rng.hpp"
#include "mvl/svm.hpp"
#include "mvl/synth.hpp"

#include "oracles.hpp"

using namespace mvl;

TEST_CASE("scale_view") {
    Matrix x(2, 2);
    x << 1, 2, 3, 4;
    SECTION("unit scaling is the identity") {
        CHECK(mvfs::scale_view(x, Vector::Ones(2), 1.0) == x);
    }
    SECTION("Q and sqrt(P) cancel") {
        const Vector q = Vector::Constant(2, 2.0);
        CHECK((mvfs::scale_view(x, q, 4.0) - x).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("zero Q zeroes the matrix") {
        CHECK(mvfs::scale_view(x, Vector::Zero(2), 1.0).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("nonpositive P is rejected") {
        CHECK_THROWS_AS(mvfs::scale_view(x, Vector::Ones(2), 0.0), InvalidArgument);
    }
}

namespace {

mvfs::MultiViewDataset two_view_fixture() {
    mvfs::MultiViewDataset data;
    Matrix v1(1, 3), v2(1, 3);
    v1 << 0.1, 0.5, 0.9;
    v2 << 1.0, 1.0, 1.0;
    data.views = {v1, v2};
    data.labels = (Vector(3) << -1, 1, 1).finished();
    data.view_names = {"a", "b"};
    return data;
}

}  // namespace

TEST_CASE("cross-view constants multiply the other views") {
    auto data = two_view_fixture();
    mvfs::SelectionState state;
    state.selected = {{0}, {0}};
    state.weights = {Vector::Ones(1), Vector::Constant(1, 2.0)};
    const auto cvc = mvfs::cross_view_constants(state, data, 0);
    CHECK(cvc.p == 4.0);
    CHECK((cvc.q.array() == 2.0).all());

    state.weights[1][0] = 0.0;
    CHECK_THROWS_AS(mvfs::cross_view_constants(state, data, 0), DegenerateInput);
}

TEST_CASE("cross-view constants with three views multiply pairwise") {
    mvfs::MultiViewDataset data;
    data.views = {Matrix::Ones(1, 2), Matrix::Ones(1, 2), Matrix::Zero(1, 2)};
    data.labels = (Vector(2) << 1, -1).finished();
    mvfs::SelectionState state;
    state.selected = {{0}, {0}, {0}};
    state.weights = {Vector::Ones(1), Vector::Ones(1), Vector::Ones(1)};
    const auto cvc = mvfs::cross_view_constants(state, data, 0);
    // view 3 features are zero, so every Q_i carries a zero factor
    CHECK(cvc.q.cwiseAbs().maxCoeff() == 0.0);
    CHECK(cvc.p == 1.0);
}

TEST_CASE("view weights") {
    SECTION("zero alphas give zero weights") {
        const Matrix x = Matrix::Ones(2, 3);
        const Vector w = mvfs::view_weights(Vector::Zero(3), Vector::Ones(3),
                                            Vector::Ones(3), 2.0, x);
        CHECK(w.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("single support vector arithmetic") {
        Matrix x(2, 1);
        x << 1, 0;
        const Vector w = mvfs::view_weights(Vector::Ones(1), Vector::Ones(1),
                                            Vector::Constant(1, 2.0), 4.0, x);
        CHECK(w[0] == 0.5);
        CHECK(w[1] == 0.0);
    }
    SECTION("sqrt(P) w equals the scaled problem's primal weights") {
        Rng rng(51);
        const int n = 20, d = 3;
        Matrix x(d, n);
        Vector y(n), q(n);
        for (int i = 0; i < n; ++i) {
            y[i] = i % 2 == 0 ? 1.0 : -1.0;
            q[i] = rng.uniform(0.5, 1.5);
            for (int j = 0; j < d; ++j) x(j, i) = rng.normal() + 0.5 * y[i];
        }
        const double p = 2.25;
        const Matrix xs = mvfs::scale_view(x, q, p);
        const SvmSolution sol = svm_train(xs.transpose(), y, 5.0);
        const Vector w = mvfs::view_weights(sol.alphas, y, q, p, x);
        CHECK((std::sqrt(p) * w - sol.w).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("linear ranking squares the weights and breaks ties by index") {
    Vector w(2);
    w << 3, -2;
    const Vector r = mvfs::rank_linear(w);
    CHECK(r[0] == 9.0);
    CHECK(r[1] == 4.0);
    CHECK(mvfs::argmin_with_index_ties(r) == 1);
    CHECK(mvfs::argmin_with_index_ties(Vector::Zero(2)) == 0);
}

TEST_CASE("dense-tensor ranking order matches the factored criterion") {
    for (std::size_t m : {2UL, 3UL}) {
        for (int s = 0; s < 50; ++s) {
            Rng rng(100 * m + static_cast<std::uint64_t>(s));
            std::vector<Vector> ws;
            for (std::size_t v = 0; v < m; ++v)
                ws.push_back(rng.normal_matrix(1 + static_cast<Eigen::Index>(rng.uniform_int(2, 6)), 1));
            const auto dense = oracles::dense_view_ranking(ws);
            for (std::size_t v = 0; v < m; ++v) {
                CHECK(oracles::argsort(dense[v]) ==
                      oracles::argsort(mvfs::rank_linear(ws[v])));
            }
        }
    }
}

TEST_CASE("kernel ranking") {
    Rng rng(61);
    const int n = 14, d = 4;
    Matrix x(d, n);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        y[i] = i % 2 == 0 ? 1.0 : -1.0;
        for (int j = 0; j < d; ++j) x(j, i) = rng.normal() + 0.3 * y[i];
    }
    SECTION("linear spec reproduces the squared-weight order") {
        const SvmSolution sol = svm_train(x.transpose(), y, 2.0);
        const Vector rk = mvfs::rank_kernel(sol.alphas, y, x, KernelSpec::linear());
        const Vector rl = mvfs::rank_linear(sol.w);
        CHECK(oracles::argsort(rk) == oracles::argsort(rl));
    }
    SECTION("a constant-zero feature scores zero under rbf") {
        Matrix xz = x;
        xz.row(2).setZero();
        const SvmSolution sol = svm_train_kernel(
            kernel_matrix(xz.transpose(), KernelSpec::rbf(static_cast<double>(d))), y, 2.0);
        const Vector r = mvfs::rank_kernel(sol.alphas, y, xz, KernelSpec::rbf());
        CHECK_THAT(r[2], Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    SECTION("duplicated feature rows score equally") {
        Matrix xd = x;
        xd.row(3) = xd.row(1);
        const SvmSolution sol = svm_train_kernel(
            kernel_matrix(xd.transpose(), KernelSpec::rbf(static_cast<double>(d))), y, 2.0);
        const Vector r = mvfs::rank_kernel(sol.alphas, y, xd, KernelSpec::rbf());
        CHECK_THAT(r[1], Catch::Matchers::WithinAbs(r[3], 1e-12));
    }
}

TEST_CASE("selection keeps the informative feature") {
    int hits = 0;
    const int runs = 20;
    for (int s = 0; s < runs; ++s) {
        const auto data = synth::multiview(9000 + s, 50, {10, 10});
        const auto state = mvfs::tmvfs_select(data, {1, 1}, {.C = 10.0});
        if (state.selected[0] == std::vector<Eigen::Index>{0} &&
            state.selected[1] == std::vector<Eigen::Index>{0})
            ++hits;
    }
    CHECK(hits >= runs - 1);
}

TEST_CASE("selection at full targets returns every feature") {
    const auto data = synth::multiview(17, 20, {4, 3});
    const auto state = mvfs::tmvfs_select(data, {4, 3}, {.C = 5.0});
    CHECK(state.selected[0] == std::vector<Eigen::Index>{0, 1, 2, 3});
    CHECK(state.selected[1] == std::vector<Eigen::Index>{0, 1, 2});
    CHECK(state.weights[0].size() == 4);
    CHECK(state.weights[1].size() == 3);
}

TEST_CASE("monotone shrinkage and chunked elimination reach the target") {
    const auto data = synth::multiview(18, 30, {8, 8});
    const auto one = mvfs::tmvfs_select(data, {3, 3}, {.C = 5.0, .chunk = 1});
    CHECK(one.selected[0].size() == 3);
    CHECK(one.selected[1].size() == 3);
    const auto chunked = mvfs::tmvfs_select(data, {3, 3}, {.C = 5.0, .chunk = 2});
    CHECK(chunked.selected[0].size() == 3);
    CHECK(chunked.selected[1].size() == 3);
}

TEST_CASE("permuting features permutes the selection") {
    const auto data = synth::multiview(19, 40, {6, 6});
    const auto base = mvfs::tmvfs_select(data, {2, 2}, {.C = 10.0});

    // reverse the features of view 1
    mvfs::MultiViewDataset permuted = data;
    permuted.views[0] = data.views[0].colwise().reverse().eval();
    const auto perm = mvfs::tmvfs_select(permuted, {2, 2}, {.C = 10.0});

    std::vector<Eigen::Index> mapped;
    for (const auto i : perm.selected[0]) mapped.push_back(5 - i);
    std::sort(mapped.begin(), mapped.end());
    CHECK(mapped == base.selected[0]);
    CHECK(perm.selected[1] == base.selected[1]);
}

TEST_CASE("scaling one view with rescaled C leaves eliminations unchanged") {
    const auto data = synth::multiview(23, 40, {6, 6});
    const auto base = mvfs::tmvfs_select(data, {2, 2}, {.C = 10.0});
    mvfs::MultiViewDataset scaled = data;
    const double gamma = 2.0;
    scaled.views[0] *= gamma;
    // the scaled view doubles every <w, x>; C / gamma^2 restores the problem
    const auto tweaked = mvfs::tmvfs_select(scaled, {2, 2}, {.C = 10.0 / (gamma * gamma)});
    CHECK(tweaked.selected[0] == base.selected[0]);
    CHECK(tweaked.selected[1] == base.selected[1]);
}

TEST_CASE("single-class labels are rejected") {
    mvfs::MultiViewDataset data;
    data.views = {Matrix::Ones(2, 3), Matrix::Ones(2, 3)};
    data.labels = Vector::Ones(3);
    CHECK_THROWS_AS(mvfs::tmvfs_select(data, {1, 1}, {.C = 1.0}), InvalidArgument);
}

TEST_CASE("multiplicative decision rule") {
    mvfs::SelectionState state;
    state.selected = {{0}, {0}};
    state.weights = {Vector::Ones(1), Vector::Constant(1, 2.0)};
    state.bias = -5.0;
    SECTION("hand case") {
        CHECK(mvfs::mv_decision(state, {Vector::Constant(1, 3.0), Vector::Ones(1)}) == 1);
    }
    SECTION("zero weight view reduces to the bias sign") {
        state.weights[0].setZero();
        CHECK(mvfs::mv_decision(state, {Vector::Ones(1), Vector::Ones(1)}) == -1);
        state.bias = 0.0;  // sign(0) := +1
        CHECK(mvfs::mv_decision(state, {Vector::Ones(1), Vector::Ones(1)}) == 1);
    }
    SECTION("negating a view's weights and features cancels") {
        state.bias = -5.0;
        const int base =
            mvfs::mv_decision(state, {Vector::Constant(1, 3.0), Vector::Ones(1)});
        state.weights[0] = -state.weights[0];
        CHECK(mvfs::mv_decision(state, {Vector::Constant(1, -3.0), Vector::Ones(1)}) ==
              base);
    }
    SECTION("shape mismatch is rejected") {
        CHECK_THROWS_AS(mvfs::mv_decision(state, {Vector::Ones(2), Vector::Ones(1)}),
                        InvalidArgument);
    }
}
