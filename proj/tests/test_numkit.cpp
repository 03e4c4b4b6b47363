#include <catch2/catch_amalgamated.hpp>

#include "mvl/kernels.hpp"
#include "mvl/ridge.hpp"
#include "mvl/rng.hpp"
#include "mvl/stats.hpp"

using namespace mvl;

TEST_CASE("rbf kernel") {
    SECTION("identical rows give similarity one") {
        Matrix z(3, 2);
        z << 1, 2, 1, 2, 1, 2;
        const Matrix k = kernel_matrix(z, KernelSpec::rbf());
        CHECK((k.array() == 1.0).all());
    }
    SECTION("unit distance at bandwidth one") {
        Matrix z(2, 1);
        z << 0, 1;
        const Matrix k = kernel_matrix(z, KernelSpec::rbf());
        CHECK_THAT(k(0, 1), Catch::Matchers::WithinAbs(0.36787944117144233, 1e-12));
        CHECK(k(0, 0) == 1.0);
        CHECK(k(1, 1) == 1.0);
    }
    SECTION("bandwidth defaults to the feature count") {
        Matrix z(2, 4);
        z.setZero();
        z(1, 0) = 2.0;  // squared distance 4, bandwidth 4
        const Matrix k = kernel_matrix(z, KernelSpec::rbf());
        CHECK_THAT(k(0, 1), Catch::Matchers::WithinAbs(std::exp(-1.0), 1e-12));
    }
}

TEST_CASE("linear kernel of the identity is the identity") {
    const Matrix k = kernel_matrix(Matrix::Identity(3, 3), KernelSpec::linear());
    CHECK((k - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("laplacian") {
    SECTION("unweighted pair") {
        Matrix phi(2, 2);
        phi << 0, 1, 1, 0;
        const Matrix l = laplacian(phi);
        Matrix want(2, 2);
        want << 1, -1, -1, 1;
        CHECK((l - want).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("zeros map to zeros") {
        CHECK(laplacian(Matrix::Zero(3, 3)).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("signed affinities are allowed") {
        Matrix phi(2, 2);
        phi << 0.5, -0.5, -0.5, 0.5;
        const Matrix l = laplacian(phi);
        CHECK(l(0, 0) == -0.5);
        CHECK(l(0, 1) == 0.5);
        CHECK(l(1, 0) == 0.5);
        CHECK(l(1, 1) == -0.5);
    }
    SECTION("row sums vanish on random symmetric input") {
        Rng rng(3);
        Matrix a = rng.normal_matrix(6, 6);
        a = (0.5 * (a + a.transpose())).eval();
        CHECK(laplacian(a).rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("asymmetric input is rejected") {
        Matrix bad(2, 2);
        bad << 0, 1, 0, 0;
        CHECK_THROWS_AS(laplacian(bad), InvalidArgument);
    }
}

TEST_CASE("ridge solve") {
    SECTION("hand case") {
        Matrix y(2, 1);
        y << 1, 0;
        const Matrix w = ridge_solve(Matrix::Identity(2, 2), y, 1.0);
        CHECK_THAT(w(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-14));
        CHECK_THAT(w(1, 0), Catch::Matchers::WithinAbs(0.0, 1e-14));
    }
    SECTION("gamma zero with invertible A interpolates") {
        Rng rng(5);
        const Matrix a = rng.normal_matrix(3, 3) + 3.0 * Matrix::Identity(3, 3);
        const Matrix y = rng.normal_matrix(3, 2);
        const Matrix w = ridge_solve(a, y, 0.0);
        CHECK((a * w - y).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("zero targets give zero weights") {
        CHECK(ridge_solve(Matrix::Identity(3, 3), Matrix::Zero(3, 2), 0.5)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
    SECTION("singular system with gamma zero is an error") {
        Matrix a(2, 2);
        a << 1, 1, 1, 1;
        CHECK_THROWS_AS(ridge_solve(a, Matrix::Ones(2, 1), 0.0), SingularMatrix);
    }
}

TEST_CASE("welch one-tailed t-test") {
    SECTION("identical samples sit at the null midpoint") {
        Vector a(3);
        a << 1, 2, 3;
        CHECK_THAT(t_test_one_tailed(a, a), Catch::Matchers::WithinAbs(0.5, 1e-12));
    }
    SECTION("clearly separated samples") {
        Vector a(3), b(3);
        a << 10, 11, 12;
        b << 0, 1, 2;
        const double p = t_test_one_tailed(a, b);
        CHECK(p < 0.01);
        // frozen reference value (Student-t CDF at t = 12.247449, df = 4)
        CHECK_THAT(p, Catch::Matchers::WithinRel(0.00012760837472096343, 1e-9));
    }
    SECTION("swapping the samples reflects the p-value") {
        Vector a(4), b(4);
        a << 5, 6, 7, 8;
        b << 4, 6, 7, 9;
        const double p = t_test_one_tailed(a, b);
        CHECK_THAT(t_test_one_tailed(b, a), Catch::Matchers::WithinAbs(1.0 - p, 1e-12));
    }
    SECTION("monotone in the mean gap at fixed variance") {
        Vector base(5);
        base << -2, -1, 0, 1, 2;
        double prev = 1.0;
        for (double shift : {0.0, 0.5, 1.0, 2.0, 4.0}) {
            const Vector shifted = base.array() + shift;
            const double p = t_test_one_tailed(shifted, base);
            CHECK(p <= prev);
            prev = p;
        }
    }
    SECTION("degenerate input") {
        Vector a(2), b(2);
        a << 1, 1;
        b << 1, 1;
        CHECK_THROWS_AS(t_test_one_tailed(a, b), DegenerateInput);
        CHECK_THROWS_AS(t_test_one_tailed(Vector::Ones(1), a), InvalidArgument);
    }
}

TEST_CASE("classification metrics") {
    SECTION("perfect prediction") {
        Vector y(4);
        y << 1, -1, 1, -1;
        const auto m = classification_metrics(y, y);
        CHECK(m.accuracy == 1.0);
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.f1 == 1.0);
    }
    SECTION("all-negative predictions on a balanced set") {
        Vector pred = Vector::Constant(4, -1.0);
        Vector act(4);
        act << 1, 1, -1, -1;
        const auto m = classification_metrics(pred, act);
        CHECK(m.accuracy == 0.5);
        CHECK(m.recall == 0.0);
        CHECK_FALSE(m.precision_defined);
        CHECK_FALSE(m.f1_defined);
    }
    SECTION("confusion-matrix hand count") {
        Vector pred(4), act(4);
        pred << 1, 1, -1, -1;
        act << 1, -1, 1, -1;
        const auto m = classification_metrics(pred, act);
        CHECK(m.accuracy == 0.5);
        CHECK(m.precision == 0.5);
        CHECK(m.recall == 0.5);
        CHECK(m.f1 == 0.5);
    }
    SECTION("empty input is rejected") {
        CHECK_THROWS_AS(classification_metrics(Vector(), Vector()), InvalidArgument);
    }
}

TEST_CASE("rmse") {
    Vector a(2), b(2);
    a << 0, 0;
    b << 3, 4;
    CHECK(rmse(a, a) == 0.0);
    CHECK_THAT(rmse(a, b), Catch::Matchers::WithinAbs(3.5355339059327378, 1e-14));
    const Vector c = a.array() + 0.7;
    CHECK_THAT(rmse(c, a), Catch::Matchers::WithinAbs(0.7, 1e-14));
    CHECK_THROWS_AS(rmse(a, Vector::Ones(3)), InvalidArgument);
}
