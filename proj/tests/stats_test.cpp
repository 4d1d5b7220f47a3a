#include "mtc/stats.hpp"

#include <doctest.h>

#include <cmath>

#include "mtc/errors.hpp"
#include "mtc/rng.hpp"

using namespace mtc;

// Reference values were computed once with an independent high-precision
// implementation (60+ digit incomplete-beta evaluation cross-checked against
// a second library) and frozen here. Tolerances: 1e-9 on statistics, 1e-6 on
// p-values.
namespace {

struct WelchCase {
    std::vector<double> a, b;
    double t, df, p, d;
};

const WelchCase kWelchCases[] = {
    {{1, 2, 3, 4, 5}, {2, 3, 4, 5, 6}, -1.0, 8.0, 0.34659350708733425, -0.6324555320336759},
    {{10, 10, 10}, {1, 2, 3}, 13.85640646055102, 2.0, 0.0051679932523860853, 11.31370849898476},
    {{0.5, 0.7, 0.9, 1.1, 1.3, 1.5, 1.7},
     {0.4, 0.8, 1.2, 1.6, 2.0},
     -0.30618621784789685,
     6.6206896551724155,
     0.76886548638922254,
     -0.19174124721184233},
    {{1.816, 1.366, 1.816, 0.0, 1.816, 1.614, 1.816, 1.816},
     {1.816, 1.816, 1.366, 1.366, 1.614, 0.45, 1.816, 1.816, 0.0, 1.816},
     0.3962122468752667,
     15.319541834270705,
     0.6974123607640237,
     0.18733614076722643},
};

struct OneSampleCase {
    std::vector<double> x;
    double mu0;
    double t, df, p, d;
};

const OneSampleCase kOneSampleCases[] = {
    {{0.1, 0.05, 0.08, 0.03, 0.09, 0.06, 0.02, 0.07, 0.04},
     0.0,
     6.572670690061994,
     8.0,
     0.00017428876163630847,
     2.1908902300206647},
    {{0.12, -0.03, 0.20, 0.07, 0.01, 0.15, -0.08, 0.09, 0.11, 0.05, 0.18, 0.02},
     0.05,
     0.9897815307205645,
     11.0,
     0.34355352480429908,
     0.2857253166002189},
};

}  // namespace

TEST_CASE("welch_t matches the frozen reference oracle") {
    for (const WelchCase& c : kWelchCases) {
        stats::TestResult r = stats::welch_t(c.a, c.b);
        CHECK(std::fabs(r.statistic - c.t) <= 1e-9);
        CHECK(std::fabs(r.degrees_of_freedom - c.df) <= 1e-9);
        CHECK(std::fabs(r.p_value - c.p) <= 1e-6);
        REQUIRE(r.effect_size.has_value());
        CHECK(std::fabs(*r.effect_size - c.d) <= 1e-9);
    }
}

TEST_CASE("welch_t: identical samples give t=0, p=1") {
    std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    stats::TestResult r = stats::welch_t(x, x);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK(*r.effect_size == 0.0);
}

TEST_CASE("welch_t: antisymmetry") {
    std::vector<double> a = {0.1, 0.9, 0.5, 0.7, 0.3};
    std::vector<double> b = {0.2, 0.4, 0.8, 0.6};
    stats::TestResult ab = stats::welch_t(a, b);
    stats::TestResult ba = stats::welch_t(b, a);
    CHECK(ab.statistic == doctest::Approx(-ba.statistic).epsilon(1e-15));
    CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-15));
}

TEST_CASE("welch_t: degenerate inputs") {
    CHECK_THROWS_AS(stats::welch_t({1.0}, {1.0, 2.0}), DegenerateSampleError);
    CHECK_THROWS_AS(stats::welch_t({3.0, 3.0, 3.0}, {5.0, 5.0}), DegenerateSampleError);
    // One zero-variance side is fine.
    stats::TestResult r = stats::welch_t({10, 10, 10}, {1, 2, 3});
    CHECK(std::isfinite(r.statistic));
}

TEST_CASE("cohens d is scale invariant") {
    std::vector<double> a = {1.1, 2.3, 3.1, 4.9, 5.2};
    std::vector<double> b = {2.0, 3.5, 4.1, 5.0};
    double d1 = *stats::welch_t(a, b).effect_size;
    for (double& v : a) v *= 37.5;
    for (double& v : b) v *= 37.5;
    double d2 = *stats::welch_t(a, b).effect_size;
    CHECK(std::fabs(d1 - d2) <= 1e-12);
}

TEST_CASE("one_sample_t matches the frozen reference oracle") {
    for (const OneSampleCase& c : kOneSampleCases) {
        stats::TestResult r = stats::one_sample_t(c.x, c.mu0);
        CHECK(std::fabs(r.statistic - c.t) <= 1e-9);
        CHECK(r.degrees_of_freedom == c.df);
        CHECK(std::fabs(r.p_value - c.p) <= 1e-6);
        CHECK(std::fabs(*r.effect_size - c.d) <= 1e-9);
    }
}

TEST_CASE("one_sample_t: near-zero t for centered noise, error on constants") {
    std::vector<double> x = {0.5 - 1e-9, 0.5 + 1e-9, 0.5 - 1e-9, 0.5 + 1e-9};
    stats::TestResult r = stats::one_sample_t(x, 0.5);
    CHECK(std::fabs(r.statistic) <= 1e-6);
    CHECK_THROWS_AS(stats::one_sample_t({0.3, 0.3, 0.3}, 0.0), DegenerateSampleError);
    CHECK_THROWS_AS(stats::one_sample_t({0.3}, 0.0), DegenerateSampleError);
}

TEST_CASE("point_biserial matches the frozen reference oracle") {
    stats::Correlation r1 =
        stats::point_biserial({true, true, false, false}, {0.9, 0.8, 0.2, 0.1});
    CHECK(std::fabs(r1.r - 0.9899494936611665) <= 1e-9);
    CHECK(std::fabs(r1.p_value - 0.01005050633883353) <= 1e-6);

    stats::Correlation r2 = stats::point_biserial(
        {true, false, true, true, false, true, false, true, true, false, true, true},
        {0.95, 0.91, 0.93, 0.97, 0.92, 0.96, 0.90, 0.94, 0.88, 0.93, 0.99, 0.89});
    CHECK(std::fabs(r2.r - 0.35269954296617034) <= 1e-9);
    CHECK(std::fabs(r2.p_value - 0.2608063548614161) <= 1e-6);
}

TEST_CASE("point_biserial: no association and error paths") {
    // Identical confidence distribution in both classes.
    stats::Correlation r =
        stats::point_biserial({true, false, true, false}, {0.4, 0.4, 0.6, 0.6});
    CHECK(std::fabs(r.r) <= 1e-15);

    CHECK_THROWS_AS(stats::point_biserial({true, true, true}, {0.1, 0.2, 0.3}),
                    DegenerateSampleError);
    CHECK_THROWS_AS(stats::point_biserial({true, false, true}, {0.5, 0.5, 0.5}),
                    DegenerateSampleError);
    CHECK_THROWS_AS(stats::point_biserial({true, false}, {0.5, 0.6}), DegenerateSampleError);
}

namespace {

// Brute-force pairwise oracle for the AUC estimator.
double auc_pair_count(const std::vector<bool>& y, const std::vector<double>& c) {
    double score = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!y[i]) continue;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j]) continue;
            ++pairs;
            if (c[i] > c[j]) score += 1.0;
            else if (c[i] == c[j]) score += 0.5;
        }
    }
    return score / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("roc_auc: pinned cases") {
    CHECK(stats::roc_auc({true, false, true, false}, {0.9, 0.8, 0.7, 0.6}) == 0.75);
    CHECK(stats::roc_auc({true, true, false, true, false, false, true, false},
                         {0.9, 0.7, 0.7, 0.5, 0.5, 0.3, 0.8, 0.9}) == 0.65625);
    // Perfect separation and all-ties.
    CHECK(stats::roc_auc({true, true, false, false}, {0.9, 0.8, 0.2, 0.1}) == 1.0);
    CHECK(stats::roc_auc({true, false, true, false}, {0.5, 0.5, 0.5, 0.5}) == 0.5);
    CHECK_THROWS_AS(stats::roc_auc({true, true}, {0.1, 0.2}), DegenerateSampleError);
}

TEST_CASE("roc_auc agrees with the pair-count oracle on random data") {
    rng::SplitMix64 gen(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 3 + gen.next() % 40;
        std::vector<bool> y(n);
        std::vector<double> c(n);
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = gen.next_double() < 0.5;
            // Coarse grid so ties actually occur.
            c[i] = static_cast<double>(gen.next() % 8) / 8.0;
            has_pos = has_pos || y[i];
            has_neg = has_neg || !y[i];
        }
        if (!has_pos || !has_neg) continue;
        CHECK(stats::roc_auc(y, c) == doctest::Approx(auc_pair_count(y, c)).epsilon(1e-12));
    }
}

TEST_CASE("roc_auc is invariant under strictly increasing transforms") {
    std::vector<bool> y = {true, false, true, false, true, false, false, true};
    std::vector<double> c = {0.9, 0.7, 0.7, 0.5, 0.6, 0.3, 0.8, 0.9};
    double base = stats::roc_auc(y, c);
    std::vector<double> transformed = c;
    for (double& v : transformed) v = std::exp(3.0 * v + 1.0);
    CHECK(stats::roc_auc(y, transformed) == base);
}

TEST_CASE("regularized incomplete beta sanity") {
    CHECK(stats::regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(stats::regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(1,1) = x.
    CHECK(stats::regularized_incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-14));
    // Symmetry: I_x(a,b) = 1 - I_{1-x}(b,a).
    double lhs = stats::regularized_incomplete_beta(4.5, 2.5, 0.3);
    double rhs = 1.0 - stats::regularized_incomplete_beta(2.5, 4.5, 0.7);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}
