#include "srag/stats.hpp"

#include "srag/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

namespace srag {
namespace {

constexpr int kBetaMaxIterations = 200;
constexpr double kBetaTolerance = 1e-12;

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the incomplete beta function, modified Lentz
// evaluation. Converges quickly for x < (a+1)/(a+b+2).
double beta_continued_fraction(double x, double a, double b) {
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;

    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny)
        d = tiny;
    d = 1.0 / d;
    double h = d;

    for (int m = 1; m <= kBetaMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        h *= d * c;

        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kBetaTolerance)
            break;
    }
    return h;
}

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> xs) {
    return {xs.data(), static_cast<Eigen::Index>(xs.size())};
}

} // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw InvalidArgument("regularized_incomplete_beta: a and b must be positive");
    if (std::isnan(x))
        throw InvalidArgument("regularized_incomplete_beta: x is NaN");
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;

    const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(log_front) * beta_continued_fraction(x, a, b) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                     beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0))
        throw InvalidArgument("student_t_two_sided_p: dof must be positive");
    if (t == 0.0)
        return 1.0;
    if (std::isinf(t))
        return 0.0;
    const double x = dof / (dof + t * t);
    return regularized_incomplete_beta(x, dof / 2.0, 0.5);
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw InvalidArgument("welch_t_test: each sample needs at least 2 observations");

    WelchResult r;
    r.n_a = a.size();
    r.n_b = b.size();
    r.mean_a = mean(a);
    r.mean_b = mean(b);

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = sample_variance(a) / na;
    const double vb = sample_variance(b) / nb;
    const double se2 = va + vb;

    if (se2 == 0.0) {
        if (r.mean_a == r.mean_b) {
            r.t_stat = 0.0;
            r.dof = na + nb - 2.0;
            r.p_two_sided = 1.0;
            return r;
        }
        r.t_stat = r.mean_a > r.mean_b ? std::numeric_limits<double>::infinity()
                                       : -std::numeric_limits<double>::infinity();
        r.dof = na + nb - 2.0;
        r.p_two_sided = 0.0;
        r.degenerate = true;
        return r;
    }

    r.t_stat = (r.mean_a - r.mean_b) / std::sqrt(se2);
    r.dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p_two_sided = student_t_two_sided_p(r.t_stat, r.dof);
    return r;
}

double percentile(std::span<const double> xs, double q) {
    if (xs.empty())
        throw InvalidArgument("percentile: empty sample");
    if (!(q >= 0.0 && q <= 100.0))
        throw InvalidArgument("percentile: q must lie in [0, 100]");

    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q / 100.0;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size())
        return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double mean(std::span<const double> xs) {
    if (xs.empty())
        throw InvalidArgument("mean: empty sample");
    return as_vector(xs).mean();
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2)
        throw InvalidArgument("sample_variance: need at least 2 observations");
    const auto v = as_vector(xs);
    const double m = v.mean();
    return (v.array() - m).square().sum() / (static_cast<double>(xs.size()) - 1.0);
}

} // namespace srag
