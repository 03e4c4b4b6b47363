#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mvl/error.hpp"
#include "mvl/tensor.hpp"

namespace mvl {

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double beta_cont_frac(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                               a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cont_frac(a, b, x) / a;
    return 1.0 - bt * beta_cont_frac(b, a, 1.0 - x) / b;
}

// Upper-tail probability P(T > t) for Student's t with nu degrees of freedom.
inline double student_t_sf(double t, double nu) {
    const double p = 0.5 * incomplete_beta(0.5 * nu, 0.5, nu / (nu + t * t));
    return t >= 0.0 ? p : 1.0 - p;
}

}  // namespace detail

/// Welch two-sample one-tailed t-test; upper-tail p-value for the alternative
/// mean(a) > mean(b). Identical samples give p = 0.5.
inline double t_test_one_tailed(const Vector& a, const Vector& b) {
    if (a.size() < 2 || b.size() < 2)
        throw InvalidArgument("t_test_one_tailed: each sample needs >= 2 points");
    if (!a.allFinite() || !b.allFinite())
        throw InvalidArgument("t_test_one_tailed: non-finite sample");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = a.mean(), mb = b.mean();
    const double va = (a.array() - ma).square().sum() / (na - 1.0);
    const double vb = (b.array() - mb).square().sum() / (nb - 1.0);
    const double sa = va / na, sb = vb / nb;
    const double denom = sa + sb;
    if (denom == 0.0) {
        if (ma == mb)
            throw DegenerateInput("t_test_one_tailed: zero variance and equal means");
        return ma > mb ? 1e-300 : 1.0 - 1e-16;
    }
    const double t = (ma - mb) / std::sqrt(denom);
    const double df = denom * denom /
                      (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    const double p = detail::student_t_sf(t, df);
    return std::clamp(p, 1e-300, 1.0 - 1e-16);
}

/// Binary classification metrics with +1 as the positive class. A metric with
/// zero denominator is reported as 0 and flagged undefined.
struct ClassificationMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = true;
    bool recall_defined = true;
    bool f1_defined = true;
};

inline ClassificationMetrics classification_metrics(const Vector& predicted,
                                                    const Vector& actual) {
    if (predicted.size() == 0)
        throw InvalidArgument("classification_metrics: empty input");
    if (predicted.size() != actual.size())
        throw InvalidArgument("classification_metrics: length mismatch");
    long tp = 0, fp = 0, tn = 0, fn = 0;
    for (Eigen::Index i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] > 0, a = actual[i] > 0;
        if (p && a) ++tp;
        else if (p && !a) ++fp;
        else if (!p && !a) ++tn;
        else ++fn;
    }
    ClassificationMetrics m;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(predicted.size());
    if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    else m.precision_defined = false;
    if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    else m.recall_defined = false;
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else m.f1_defined = false;
    return m;
}

inline double rmse(const Vector& predicted, const Vector& actual) {
    if (predicted.size() == 0 || predicted.size() != actual.size())
        throw InvalidArgument("rmse: length mismatch or empty input");
    return std::sqrt((predicted - actual).squaredNorm() /
                     static_cast<double>(predicted.size()));
}

}  // namespace mvl
