#include <catch2/catch_amalgamated.hpp>

#include "mvl/gside.hpp"
#include "mvl/rng.hpp"

using namespace mvl;
using namespace mvl::subgraph;

TEST_CASE("theta splits pairs at the mean kernel value") {
    Matrix k(2, 2);
    k << 1, 0.5, 0.5, 1;
    const Matrix theta = build_theta(k);
    CHECK(theta(0, 0) == 0.5);
    CHECK(theta(1, 1) == 0.5);
    CHECK(theta(0, 1) == -0.5);
    CHECK(theta(1, 0) == -0.5);

    // entries over H sum to 1, over L to -1
    double high = 0.0, low = 0.0;
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j)
            (theta(i, j) > 0 ? high : low) += theta(i, j);
    CHECK(high == 1.0);
    CHECK(low == -1.0);
}

TEST_CASE("constant kernels make theta degenerate") {
    CHECK_THROWS_AS(build_theta(Matrix::Ones(3, 3)), DegenerateInput);
}

TEST_CASE("permuting instances permutes theta conjugately") {
    Rng rng(3);
    Matrix z = rng.normal_matrix(5, 2);
    const Matrix k = kernel_matrix(z, KernelSpec::rbf());
    const Matrix theta = build_theta(k);

    std::vector<Eigen::Index> perm{3, 0, 4, 1, 2};
    Matrix kp(5, 5);
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 5; ++j) kp(i, j) = k(perm[i], perm[j]);
    const Matrix thetap = build_theta(kp);
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 5; ++j)
            CHECK(thetap(i, j) == theta(perm[i], perm[j]));
}

TEST_CASE("omega counts ordered pairs including the diagonal") {
    SECTION("one positive one negative") {
        const Matrix omega = build_omega({1, -1});
        CHECK(omega(0, 0) == 0.5);
        CHECK(omega(1, 1) == 0.5);
        CHECK(omega(0, 1) == -0.5);
        CHECK(omega(1, 0) == -0.5);
    }
    SECTION("all same label is degenerate") {
        CHECK_THROWS_AS(build_omega({1, 1}), DegenerateInput);
    }
    SECTION("unlabeled instances zero their rows and columns") {
        const Matrix omega = build_omega({1, 0, -1});
        CHECK(omega.row(1).cwiseAbs().maxCoeff() == 0.0);
        CHECK(omega.col(1).cwiseAbs().maxCoeff() == 0.0);
        CHECK(omega(0, 0) == 0.5);   // |M| = 2 over the labeled pair set
        CHECK(omega(0, 2) == -0.5);  // |C| = 2
    }
    SECTION("no labeled instances is invalid") {
        CHECK_THROWS_AS(build_omega({0, 0}), InvalidArgument);
    }
}

TEST_CASE("phi composes omega and weighted thetas") {
    Matrix omega(2, 2), theta(2, 2);
    omega << 0.5, -0.5, -0.5, 0.5;
    theta << 0.25, -0.25, -0.25, 0.25;
    SECTION("lambda zero leaves omega") {
        const auto sys = build_phi(omega, {theta}, {0.0});
        CHECK(sys.phi == omega);
    }
    SECTION("omega zero with unit lambda leaves theta") {
        const auto sys = build_phi(Matrix::Zero(2, 2), {theta}, {1.0});
        CHECK(sys.phi == theta);
    }
    SECTION("negative part is the entrywise min with zero") {
        Rng rng(5);
        Matrix a = rng.normal_matrix(3, 3);
        a = (0.5 * (a + a.transpose())).eval();
        const auto sys = build_phi(a, {}, {});
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 3; ++j) {
                CHECK(sys.laplacian_neg(i, j) == std::min(0.0, sys.laplacian(i, j)));
                CHECK(sys.laplacian_neg(i, j) <= sys.laplacian(i, j));
                CHECK(sys.laplacian_neg(i, j) <= 0.0);
            }
    }
}

TEST_CASE("gside score sums laplacian entries over the support") {
    SECTION("empty support scores zero") {
        CHECK(gside_score(std::vector<int>{}, Matrix::Ones(3, 3)) == 0.0);
    }
    SECTION("same-label pair with the class term relaxed") {
        // Omega with M only: all entries 1/4; L has 1/4 on the diagonal
        Matrix l(2, 2);
        l << 0.25, -0.25, -0.25, 0.25;
        CHECK(gside_score(std::vector<int>{0}, l) == 0.25);
    }
    SECTION("scores can be negative for signed laplacians") {
        const Matrix l = laplacian((Matrix(2, 2) << 0.5, -0.5, -0.5, 0.5).finished());
        CHECK(gside_score(std::vector<int>{0}, l) == -0.5);
    }
    SECTION("indicator-vector form agrees with the support-set form") {
        Rng rng(7);
        Matrix a = rng.normal_matrix(4, 4);
        a = (0.5 * (a + a.transpose())).eval();
        const Matrix l = laplacian(a);
        Vector f(4);
        f << 1, 0, 1, 1;
        CHECK_THAT(gside_score(f, l),
                   Catch::Matchers::WithinAbs(
                       gside_score(std::vector<int>{0, 2, 3}, l), 1e-12));
    }
}

TEST_CASE("gside bound examples") {
    SECTION("diagonal negative laplacian") {
        const Matrix lhat = (-0.5 * Matrix::Identity(2, 2)).eval();
        CHECK(gside_bound(std::vector<int>{0, 1}, lhat) == -1.0);
        // the supergraph indicator [1,0] scores at least the bound
        const Matrix l = laplacian((Matrix(2, 2) << 0.5, -0.5, -0.5, 0.5).finished());
        CHECK(gside_score(std::vector<int>{0}, l) >= -1.0);
    }
    SECTION("nonnegative laplacians bound at zero") {
        Matrix l(2, 2);
        l << 1, 0.5, 0.5, 1;  // all entries >= 0
        const Matrix lhat = l.cwiseMin(0.0);
        CHECK(gside_bound(std::vector<int>{0, 1}, lhat) == 0.0);
    }
    SECTION("empty support bounds at zero") {
        CHECK(gside_bound(std::vector<int>{}, Matrix::Constant(2, 2, -1.0)) == 0.0);
    }
}
