#include <catch2/catch_amalgamated.hpp>

#include "mvl/bne.hpp"
#include "mvl/rng.hpp"
#include "mvl/synth.hpp"

#include "oracles.hpp"

using namespace mvl;

namespace {

struct SmallProblem {
    PartiallySymmetricTensor3 x;
    Matrix x1, x3;
    Matrix lz;
    Matrix y;
    bne::Config cfg;
    Matrix b, p, s, w, u;

    static SmallProblem make(std::uint64_t seed, Eigen::Index m = 4, Eigen::Index n = 5,
                             int k = 2, int l = 3) {
        Rng rng(seed);
        auto planted = synth::planted_tensor(seed, m, n, k, 0.1);
        SmallProblem sp{std::move(planted.tensor), {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
        sp.x1 = mode_k_matricize(sp.x.tensor(), 1);
        sp.x3 = mode_k_matricize(sp.x.tensor(), 3);
        Matrix feats = rng.normal_matrix(n, 2);
        sp.lz = bne::GuidanceKernel::from_features(feats).laplacian;
        sp.y = Matrix::Zero(l, 2);
        for (int i = 0; i < l; ++i) sp.y(i, i % 2) = 1.0;
        sp.cfg.rank = k;
        sp.cfg.alpha = 0.3;
        sp.cfg.beta = 0.7;
        sp.cfg.gamma = 0.25;
        sp.b = rng.normal_matrix(m, k);
        sp.p = rng.normal_matrix(m, k);
        sp.s = detail::qr_orthonormalize(rng.normal_matrix(n, k));
        sp.w = rng.normal_matrix(k, 2);
        sp.u = rng.normal_matrix(m, k);
        return sp;
    }
};

}  // namespace

TEST_CASE("objective matches a term-by-term dense evaluation") {
    auto sp = SmallProblem::make(1);
    bne::Model model;
    model.b = sp.b;
    model.p = sp.b;
    model.s = sp.s;
    model.w = sp.w;
    model.labeled = static_cast<int>(sp.y.rows());

    SECTION("exact factorization with zero weights is zero") {
        auto planted = synth::planted_tensor(5, 4, 5, 2, 0.0);
        bne::Model exact;
        exact.b = planted.node_factors;
        exact.p = planted.node_factors;
        exact.s = planted.subject_factors;
        exact.w = Matrix::Zero(2, 2);
        exact.labeled = 0;
        bne::Config cfg;
        cfg.rank = 2;
        cfg.alpha = cfg.beta = cfg.gamma = 0.0;
        CHECK(bne::objective(exact, planted.tensor, Matrix::Zero(5, 5), Matrix(0, 2), cfg) <
              1e-10);
    }
    SECTION("zero factors leave the tensor norm") {
        bne::Model zero;
        zero.b = Matrix::Zero(4, 2);
        zero.p = zero.b;
        zero.s = Matrix::Zero(5, 2);
        zero.w = Matrix::Zero(2, 2);
        zero.labeled = static_cast<int>(sp.y.rows());
        bne::Config cfg;
        cfg.alpha = cfg.beta = cfg.gamma = 0.0;
        cfg.rank = 2;
        const double want = sp.x1.squaredNorm() + 0.7 * 0.0;
        CHECK_THAT(bne::objective(zero, sp.x, sp.lz, sp.y, cfg),
                   Catch::Matchers::WithinRel(want, 1e-12));
    }
    SECTION("random instance, literal evaluation") {
        // dense reconstruction through outer products
        Tensor3 recon(4, 4, 5);
        for (int f = 0; f < 2; ++f)
            recon.data() += outer_product(sp.b.col(f), sp.b.col(f), sp.s.col(f)).data();
        const double t1 = (sp.x.tensor().data() - recon.data()).squaredNorm();
        const double t2 = (sp.s.transpose() * sp.lz * sp.s).trace();
        const double t3 = (sp.s.topRows(3) * sp.w - sp.y).squaredNorm();
        const double t4 = sp.w.squaredNorm();
        const double want = t1 + sp.cfg.alpha * t2 + sp.cfg.beta * t3 + sp.cfg.gamma * t4;
        CHECK_THAT(bne::objective(model, sp.x, sp.lz, sp.y, sp.cfg),
                   Catch::Matchers::WithinRel(want, 1e-12));
    }
}

TEST_CASE("node factor update zeroes its block gradient") {
    auto sp = SmallProblem::make(2);
    const double mu = 1.7;
    const Matrix b = bne::update_node_factor(sp.x1, sp.s, sp.p, sp.u, mu);
    auto block = [&](const Matrix& bb) {
        const Matrix e = khatri_rao(sp.s, sp.p);
        return (bb * e.transpose() - sp.x1).squaredNorm() +
               0.5 * mu * (bb - sp.p - sp.u / mu).squaredNorm();
    };
    const Matrix fd = oracles::finite_difference_gradient(block, b);
    CHECK(fd.cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, block(b)));
}

TEST_CASE("node factor update scalar hand case") {
    Matrix x1(1, 1), s(1, 1), p(1, 1), u(1, 1);
    x1 << 6;
    s << 2;
    p << 3;
    u << 0;
    const Matrix b = bne::update_node_factor(x1, s, p, u, 2.0);
    CHECK_THAT(b(0, 0), Catch::Matchers::WithinAbs(78.0 / 74.0, 1e-12));
}

TEST_CASE("large penalty drags the node factor towards its copy") {
    auto sp = SmallProblem::make(3);
    double prev = std::numeric_limits<double>::infinity();
    for (double mu : {1.0, 1e2, 1e4, 1e6}) {
        const Matrix b = bne::update_node_factor(sp.x1, sp.s, sp.p, Matrix::Zero(4, 2), mu);
        const double gap = (b - sp.p).norm();
        CHECK(gap <= prev + 1e-12);
        prev = gap;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("aux factor update mirrors the node update on symmetric tensors") {
    auto sp = SmallProblem::make(4);
    // X_(2) = X_(1) for partially symmetric tensors
    const Matrix x2 = mode_k_matricize(sp.x.tensor(), 2);
    CHECK((x2 - sp.x1).cwiseAbs().maxCoeff() == 0.0);
    const Matrix p1 = bne::update_aux_factor(sp.x1, sp.s, sp.b, sp.u, 2.5);
    const Matrix p2 = bne::update_node_factor(sp.x1, sp.s, sp.b, -sp.u, 2.5);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() == 0.0);

    auto block = [&](const Matrix& pp) {
        const Matrix f = khatri_rao(sp.s, sp.b);
        return (pp * f.transpose() - sp.x1).squaredNorm() +
               0.5 * 2.5 * (pp - sp.b + sp.u / 2.5).squaredNorm();
    };
    const Matrix fd = oracles::finite_difference_gradient(block, p1);
    CHECK(fd.cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, block(p1)));
}

TEST_CASE("multiplier update is additive") {
    auto sp = SmallProblem::make(5);
    CHECK(bne::update_multiplier(sp.u, sp.b, sp.b, 2.0) == sp.u);
    const Matrix once = bne::update_multiplier(Matrix::Zero(4, 2), sp.p, sp.b, 2.0);
    CHECK((once - 2.0 * (sp.p - sp.b)).cwiseAbs().maxCoeff() == 0.0);
    const Matrix twice = bne::update_multiplier(once, sp.p, sp.b, 2.0);
    CHECK((twice - 2.0 * once).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("subject gradient matches finite differences") {
    for (std::uint64_t seed = 10; seed < 13; ++seed) {
        auto sp = SmallProblem::make(seed);
        const Matrix g = khatri_rao(sp.p, sp.b);
        const int l = static_cast<int>(sp.y.rows());
        auto obj = [&](const Matrix& s) {
            return bne::subject_objective(s, sp.x3, g, sp.lz, sp.w, sp.y, sp.cfg.alpha,
                                          sp.cfg.beta, l);
        };
        const Matrix analytic = bne::subject_gradient(sp.s, sp.x3, g, sp.lz, sp.w, sp.y,
                                                      sp.cfg.alpha, sp.cfg.beta, l);
        const Matrix fd = oracles::finite_difference_gradient(obj, sp.s);
        const double denom = std::max(1.0, analytic.norm());
        CHECK((analytic - fd).norm() / denom < 1e-6);
    }
}

TEST_CASE("subject gradient vanishes where it should") {
    const Matrix zero = bne::subject_gradient(
        Matrix::Zero(5, 2), Matrix::Zero(5, 16), Matrix::Zero(16, 2), Matrix::Zero(5, 5),
        Matrix::Zero(2, 2), Matrix::Zero(3, 2), 0.0, 0.0, 3);
    CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

    auto sp = SmallProblem::make(6);
    const Matrix g = khatri_rao(sp.p, sp.b);
    const Matrix with_w0 = bne::subject_gradient(sp.s, sp.x3, g, sp.lz,
                                                 Matrix::Zero(2, 2), sp.y, sp.cfg.alpha,
                                                 sp.cfg.beta, 3);
    const Matrix without_beta = bne::subject_gradient(sp.s, sp.x3, g, sp.lz,
                                                      Matrix::Zero(2, 2), sp.y,
                                                      sp.cfg.alpha, 0.0, 3);
    CHECK((with_w0 - without_beta).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("classifier update solves the ridge problem") {
    SECTION("identity subject factors, hand case") {
        Matrix y(2, 1);
        y << 1, 0;
        const Matrix w = bne::update_classifier(Matrix::Identity(2, 2), 2, y, 1.0);
        CHECK_THAT(w(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-14));
        CHECK_THAT(w(1, 0), Catch::Matchers::WithinAbs(0.0, 1e-14));
    }
    SECTION("zero targets give zero weights") {
        auto sp = SmallProblem::make(7);
        const Matrix w = bne::update_classifier(sp.s, 3, Matrix::Zero(3, 2), 0.5);
        CHECK(w.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("stationarity of the ridge objective") {
        auto sp = SmallProblem::make(8);
        const Matrix w = bne::update_classifier(sp.s, 3, sp.y, sp.cfg.gamma);
        auto obj = [&](const Matrix& ww) {
            return (sp.s.topRows(3) * ww - sp.y).squaredNorm() +
                   sp.cfg.gamma * ww.squaredNorm();
        };
        const Matrix fd = oracles::finite_difference_gradient(obj, w);
        CHECK(fd.cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("planted factorization is recovered") {
    auto planted = synth::planted_tensor(42, 8, 12, 3);
    bne::Config cfg;
    cfg.rank = 3;
    cfg.alpha = cfg.beta = 0.0;
    cfg.seed = 4;
    cfg.tol = 1e-9;
    cfg.restarts = 6;
    bne::GuidanceKernel gk;
    gk.similarity = Matrix::Zero(12, 12);
    gk.laplacian = Matrix::Zero(12, 12);
    const auto model = bne::fit(planted.tensor, gk, Matrix(0, 2), cfg);
    const Matrix x1 = mode_k_matricize(planted.tensor.tensor(), 1);
    const Matrix node = model.node_factors();
    CHECK((x1 - bne::reconstruct_mode1(node, node, model.s)).norm() / x1.norm() < 1e-3);
    CHECK((model.s.transpose() * model.s - Matrix::Identity(3, 3)).norm() < 1e-6);
    CHECK(model.consensus_gap < 1e-3);
}

TEST_CASE("rank-one planted tensor is recovered to near machine precision") {
    auto planted = synth::planted_tensor(43, 6, 9, 1);
    bne::Config cfg;
    cfg.rank = 1;
    cfg.alpha = cfg.beta = 0.0;
    cfg.seed = 1;
    cfg.tol = 1e-12;
    cfg.restarts = 4;
    bne::GuidanceKernel gk;
    gk.similarity = Matrix::Zero(9, 9);
    gk.laplacian = Matrix::Zero(9, 9);
    const auto model = bne::fit(planted.tensor, gk, Matrix(0, 2), cfg);
    const Matrix x1 = mode_k_matricize(planted.tensor.tensor(), 1);
    const Matrix node = model.node_factors();
    CHECK((x1 - bne::reconstruct_mode1(node, node, model.s)).norm() / x1.norm() < 1e-6);
}

TEST_CASE("identical seeds give bitwise-identical models") {
    auto planted = synth::planted_tensor(44, 5, 8, 2);
    bne::Config cfg;
    cfg.rank = 2;
    cfg.seed = 77;
    cfg.max_iters = 40;
    cfg.restarts = 2;
    Matrix feats = Rng(3).normal_matrix(8, 2);
    const auto gk = bne::GuidanceKernel::from_features(feats);
    Matrix y = Matrix::Zero(4, 2);
    for (int i = 0; i < 4; ++i) y(i, i % 2) = 1.0;
    const auto m1 = bne::fit(planted.tensor, gk, y, cfg);
    const auto m2 = bne::fit(planted.tensor, gk, y, cfg);
    CHECK(m1.b == m2.b);
    CHECK(m1.p == m2.p);
    CHECK(m1.s == m2.s);
    CHECK(m1.w == m2.w);
    CHECK(m1.u == m2.u);
}

TEST_CASE("embedding predictions") {
    bne::Model model;
    model.s = Matrix::Identity(3, 3);
    model.w = Matrix::Zero(3, 2);
    model.labeled = 3;
    model.fitted = true;
    SECTION("zero classifier ties to the first class") {
        const auto pred = bne::predict(model, {0, 1, 2});
        CHECK(pred == std::vector<int>{0, 0, 0});
    }
    SECTION("identity-like classifier copies rows") {
        model.w = Matrix::Identity(3, 2);
        const Matrix scores = bne::embed_scores(model, {1});
        CHECK(scores(0, 1) == 1.0);
        CHECK(scores(0, 0) == 0.0);
        CHECK(bne::predict(model, {1}) == std::vector<int>{1});
    }
    SECTION("unfitted model is a state error") {
        model.fitted = false;
        CHECK_THROWS_AS(bne::predict(model, {0}), StateError);
    }
    SECTION("single-column classifier uses the sign") {
        model.w = Matrix::Constant(3, 1, -2.0);
        model.fitted = true;
        CHECK(bne::predict(model, {0}) == std::vector<int>{-1});
    }
}

TEST_CASE("labels guide the embedding towards separability") {
    // labels from the sign of the second planted subject factor
    auto planted = synth::planted_tensor(45, 8, 12, 3);
    const int l = 8;
    Matrix y = Matrix::Zero(l, 2);
    std::vector<int> truth(l);
    for (int i = 0; i < l; ++i) {
        truth[i] = planted.subject_factors(i, 1) >= 0 ? 1 : 0;
        y(i, truth[i]) = 1.0;
    }
    bne::Config cfg;
    cfg.rank = 3;
    cfg.alpha = 0.0;
    cfg.beta = 0.1;
    cfg.gamma = 0.25;
    cfg.seed = 5;
    cfg.restarts = 6;
    cfg.tol = 1e-9;
    bne::GuidanceKernel gk;
    gk.similarity = Matrix::Zero(12, 12);
    gk.laplacian = Matrix::Zero(12, 12);
    const auto model = bne::fit(planted.tensor, gk, y, cfg);
    std::vector<Eigen::Index> rows(l);
    std::iota(rows.begin(), rows.end(), 0);
    const auto pred = bne::predict(model, rows);
    long correct = 0;
    for (int i = 0; i < l; ++i)
        if (pred[static_cast<std::size_t>(i)] == truth[static_cast<std::size_t>(i)]) ++correct;
    CHECK(correct >= l - 1);
}
