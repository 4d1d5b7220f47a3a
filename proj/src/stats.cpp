#include "mtc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mtc/errors.hpp"

namespace mtc::stats {

namespace {

// Lentz continued fraction for the incomplete beta (Numerical Recipes betacf).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 300;
    constexpr double kEpsilon = 1e-15;
    constexpr double kTiny = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        int m2 = 2 * m;
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
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEpsilon) break;
    }
    return h;
}

}  // namespace

double mean(const std::vector<double>& x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
    double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw DegenerateSampleError("incomplete beta: a, b must be > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw DegenerateSampleError("t-test: degrees of freedom must be > 0");
    if (!std::isfinite(t)) return 0.0;
    double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

TestResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) {
        throw DegenerateSampleError("welch_t: need at least 2 observations per sample");
    }
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    double va = sample_variance(a);
    double vb = sample_variance(b);
    if (va == 0.0 && vb == 0.0) {
        throw DegenerateSampleError("welch_t: both samples have zero variance");
    }
    double se2 = va / na + vb / nb;
    double t = (mean(a) - mean(b)) / std::sqrt(se2);
    double df = se2 * se2 /
                ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));

    double pooled = std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
    TestResult result;
    result.statistic = t;
    result.degrees_of_freedom = df;
    result.p_value = student_t_two_sided_p(t, df);
    result.effect_size = (mean(a) - mean(b)) / pooled;
    return result;
}

TestResult one_sample_t(const std::vector<double>& deltas, double mu0) {
    if (deltas.size() < 2) {
        throw DegenerateSampleError("one_sample_t: need at least 2 observations");
    }
    double n = static_cast<double>(deltas.size());
    double s2 = sample_variance(deltas);
    if (s2 == 0.0) throw DegenerateSampleError("one_sample_t: sample has zero variance");
    double s = std::sqrt(s2);
    double t = (mean(deltas) - mu0) / (s / std::sqrt(n));

    TestResult result;
    result.statistic = t;
    result.degrees_of_freedom = n - 1.0;
    result.p_value = student_t_two_sided_p(t, result.degrees_of_freedom);
    result.effect_size = (mean(deltas) - mu0) / s;
    return result;
}

Correlation point_biserial(const std::vector<bool>& correct, const std::vector<double>& conf) {
    if (correct.size() != conf.size()) {
        throw DegenerateSampleError("point_biserial: length mismatch");
    }
    std::size_t n = conf.size();
    if (n < 3) throw DegenerateSampleError("point_biserial: need at least 3 observations");
    std::size_t positives = static_cast<std::size_t>(std::count(correct.begin(), correct.end(), true));
    if (positives == 0 || positives == n) {
        throw DegenerateSampleError("point_biserial: only one class present");
    }

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += conf[i];
        my += correct[i] ? 1.0 : 0.0;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = conf[i] - mx;
        double dy = (correct[i] ? 1.0 : 0.0) - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DegenerateSampleError("point_biserial: confidence is constant");

    double r = sxy / std::sqrt(sxx * syy);
    double df = static_cast<double>(n) - 2.0;
    double denom = 1.0 - r * r;
    double t = denom <= 0.0 ? std::numeric_limits<double>::infinity()
                            : r * std::sqrt(df / denom);
    return {r, student_t_two_sided_p(t, df)};
}

double roc_auc(const std::vector<bool>& correct, const std::vector<double>& conf) {
    if (correct.size() != conf.size()) throw DegenerateSampleError("roc_auc: length mismatch");
    std::size_t n = conf.size();
    std::size_t positives = static_cast<std::size_t>(std::count(correct.begin(), correct.end(), true));
    if (positives == 0 || positives == n) {
        throw DegenerateSampleError("roc_auc: only one class present");
    }

    // Midrank formulation of the pairwise estimator (Mann-Whitney U).
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return conf[i] < conf[j]; });

    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && conf[order[j]] == conf[order[i]]) ++j;
        double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (correct[order[k]]) positive_rank_sum += midrank;
        }
        i = j;
    }
    double np = static_cast<double>(positives);
    double nn = static_cast<double>(n - positives);
    double u = positive_rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * nn);
}

}  // namespace mtc::stats
