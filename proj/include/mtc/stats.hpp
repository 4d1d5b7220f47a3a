#pragma once

#include <optional>
#include <vector>

namespace mtc::stats {

struct TestResult {
    double statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
    std::optional<double> effect_size;  // Cohen's d where defined
};

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;
};

double mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);  // ddof = 1

// Regularized incomplete beta I_x(a, b), evaluated with the modified Lentz
// continued fraction (switching to the symmetric form when x is past the
// mean). Relative accuracy ~1e-14 for the df ranges used here.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p for a Student-t statistic: I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_sided_p(double t, double df);

// Welch's unequal-variance t-test plus Cohen's d from the pooled standard
// deviation. Requires >= 2 samples per side and nonzero variance in at least
// one sample; otherwise DegenerateSampleError.
TestResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

// One-sample t against mu0, two-sided. Requires >= 2 samples and nonzero
// variance.
TestResult one_sample_t(const std::vector<double>& deltas, double mu0);

// Pearson correlation of conf against {0,1} correctness with a t-distribution
// p-value. Requires length >= 3, both classes present, non-constant conf.
Correlation point_biserial(const std::vector<bool>& correct, const std::vector<double>& conf);

// Probability-of-correct-ranking estimator: over all (positive, negative)
// pairs, 1 for conf_pos > conf_neg, 0.5 for ties. Computed from ranks in
// O(n log n); tests check it against the brute-force pair count.
double roc_auc(const std::vector<bool>& correct, const std::vector<double>& conf);

}  // namespace mtc::stats
