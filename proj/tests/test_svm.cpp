#include <catch2/catch_amalgamated.hpp>

#include "mvl/rng.hpp"
#include "mvl/svm.hpp"

using namespace mvl;

TEST_CASE("two-point max margin") {
    Matrix x(2, 1);
    x << -1, 1;
    Vector y(2);
    y << -1, 1;
    const SvmSolution sol = svm_train(x, y, 100.0);
    CHECK_THAT(sol.w[0], Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK_THAT(sol.b, Catch::Matchers::WithinAbs(0.0, 1e-6));
    CHECK(sol.kkt_gap <= 1e-6);
}

TEST_CASE("duplicating points leaves the solution unchanged") {
    Matrix x(4, 1);
    x << -1, 1, -1, 1;
    Vector y(4);
    y << -1, 1, -1, 1;
    const SvmSolution sol = svm_train(x, y, 100.0);
    CHECK_THAT(sol.w[0], Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK_THAT(sol.b, Catch::Matchers::WithinAbs(0.0, 1e-6));
}

TEST_CASE("doubling the data scale halves the weights") {
    Rng rng(31);
    Matrix x(20, 2);
    Vector y(20);
    for (int i = 0; i < 20; ++i) {
        y[i] = i % 2 == 0 ? 1.0 : -1.0;
        x(i, 0) = y[i] * rng.uniform(1.0, 2.0);
        x(i, 1) = rng.normal();
    }
    const SvmSolution base = svm_train(x, y, 50.0);
    const SvmSolution scaled = svm_train(2.0 * x, y, 50.0);
    CHECK_THAT(scaled.w[0], Catch::Matchers::WithinRel(base.w[0] / 2.0, 1e-4));
    // decision boundary unchanged: same predictions on the training set
    for (int i = 0; i < 20; ++i)
        CHECK((base.decision_linear(x.row(i)) >= 0) ==
              (scaled.decision_linear(2.0 * x.row(i)) >= 0));
}

TEST_CASE("dual constraints hold at exit") {
    Rng rng(32);
    Matrix x(30, 3);
    Vector y(30);
    for (int i = 0; i < 30; ++i) {
        y[i] = i < 15 ? 1.0 : -1.0;
        for (int j = 0; j < 3; ++j) x(i, j) = rng.normal() + 0.4 * y[i];
    }
    const double c = 5.0;
    const SvmSolution sol = svm_train(x, y, c);
    CHECK(sol.alphas.minCoeff() >= 0.0);
    CHECK(sol.alphas.maxCoeff() <= c);
    CHECK(std::fabs((sol.alphas.array() * y.array()).sum()) <= 1e-8);
    const Vector w_from_alphas = x.transpose() * (sol.alphas.array() * y.array()).matrix();
    CHECK((sol.w - w_from_alphas).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("separable data trains to zero error at large C") {
    int perfect = 0;
    for (int s = 0; s < 200; ++s) {
        Rng rng(1000 + s);
        const int n = 24;
        Matrix x(n, 2);
        Vector y(n);
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const Vector dir = (Vector(2) << std::cos(angle), std::sin(angle)).finished();
        for (int i = 0; i < n; ++i) {
            y[i] = i % 2 == 0 ? 1.0 : -1.0;
            const Vector noise = rng.normal_matrix(2, 1);
            x.row(i) = (y[i] * (0.8 + rng.uniform()) * dir + 0.2 * noise).transpose();
            if (x.row(i).dot(dir) * y[i] <= 0.05) x.row(i) = (y[i] * dir).transpose();
        }
        const SvmSolution sol = svm_train(x, y, 1e3);
        bool all = true;
        for (int i = 0; i < n; ++i)
            if ((sol.decision_linear(x.row(i)) >= 0 ? 1.0 : -1.0) != y[i]) all = false;
        if (all) ++perfect;
        CHECK(sol.alphas.minCoeff() >= 0.0);
        CHECK(sol.alphas.maxCoeff() <= 1e3);
    }
    CHECK(perfect == 200);
}

TEST_CASE("single-class input is rejected") {
    Matrix x(2, 1);
    x << 1, 2;
    Vector y = Vector::Ones(2);
    CHECK_THROWS_AS(svm_train(x, y, 1.0), InvalidArgument);
}

TEST_CASE("iteration budget exhaustion reports the residual") {
    Rng rng(33);
    Matrix x(40, 2);
    Vector y(40);
    for (int i = 0; i < 40; ++i) {
        y[i] = i % 2 == 0 ? 1.0 : -1.0;
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
    }
    SvmOptions opt;
    opt.max_iterations = 2;
    try {
        svm_train(x, y, 10.0, opt);
        FAIL("expected ConvergenceFailure");
    } catch (const ConvergenceFailure& e) {
        CHECK(e.residual > 0.0);
    }
}
