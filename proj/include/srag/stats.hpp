#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace srag {

/// Two-sample mean comparison with unequal variances.
struct WelchResult {
    double t_stat = 0.0;
    double dof = 0.0;
    double p_two_sided = 1.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    /// Set when both samples have zero variance but different means; in that
    /// case t is +-infinity and p is reported as 0.
    bool degenerate = false;
};

/// Regularized incomplete beta I_x(a, b), evaluated with a modified Lentz
/// continued fraction (200-term cap, 1e-12 convergence).
double regularized_incomplete_beta(double x, double a, double b);

/// Two-sided survival probability of Student's t at |t| with `dof` degrees
/// of freedom.
double student_t_two_sided_p(double t, double dof);

/// Welch's t-test with Welch-Satterthwaite degrees of freedom and a two-sided
/// p-value. Requires at least two observations per sample. Identical means
/// with zero variance in both samples yield t=0, p=1; differing means with
/// zero variance in both samples are flagged degenerate (p=0).
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Percentile by linear interpolation between closest ranks on the sorted
/// sample (inclusive convention): h = (n-1) * q/100. q must lie in [0, 100],
/// xs must be non-empty.
double percentile(std::span<const double> xs, double q);

double mean(std::span<const double> xs);

/// Unbiased sample variance (n-1 denominator); requires n >= 2.
double sample_variance(std::span<const double> xs);

} // namespace srag
