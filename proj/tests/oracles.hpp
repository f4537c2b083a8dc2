// Test-only oracles, kept independent of the library paths they check.
#pragma once

#include "srag/corpus.hpp"
#include "srag/embedding.hpp"
#include "srag/index.hpp"
#include "srag/util.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Student-t statistics via direct numerical integration of the density.
// ---------------------------------------------------------------------------

inline double t_density(double x, double nu) {
    const double log_norm =
        std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * M_PI);
    return std::exp(log_norm - (nu + 1.0) / 2.0 * std::log1p(x * x / nu));
}

namespace detail {

template <typename F>
double adaptive_simpson(F f, double a, double b, double fa, double fm, double fb, double whole,
                        double eps, int depth) {
    const double m = (a + b) / 2.0;
    const double lm = (a + m) / 2.0;
    const double rm = (m + b) / 2.0;
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

template <typename F>
double integrate(F f, double a, double b, double eps) {
    const double m = (a + b) / 2.0;
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 48);
}

} // namespace detail

// Two-sided tail probability P(|T_nu| >= |t|), integrating the tail with the
// substitution x = |t| + u/(1-u).
inline double t_two_sided_p(double t, double nu) {
    const double abs_t = std::fabs(t);
    if (abs_t == 0.0)
        return 1.0;
    const auto integrand = [&](double u) {
        if (u >= 1.0)
            return 0.0;
        const double one_minus = 1.0 - u;
        const double x = abs_t + u / one_minus;
        return t_density(x, nu) / (one_minus * one_minus);
    };
    const double tail = detail::integrate(integrand, 0.0, 1.0 - 1e-12, 1e-13);
    return std::min(1.0, 2.0 * tail);
}

// Welch statistic and degrees of freedom in long double, two-pass.
struct WelchTD {
    double t;
    double dof;
};

inline WelchTD welch_t_dof(const std::vector<double>& a, const std::vector<double>& b) {
    const auto stats = [](const std::vector<double>& xs) {
        long double sum = 0.0L;
        for (double x : xs)
            sum += x;
        const long double m = sum / static_cast<long double>(xs.size());
        long double ss = 0.0L;
        for (double x : xs)
            ss += (x - m) * (x - m);
        const long double var = ss / static_cast<long double>(xs.size() - 1);
        return std::pair<long double, long double>{m, var};
    };
    const auto [ma, va] = stats(a);
    const auto [mb, vb] = stats(b);
    const long double na = static_cast<long double>(a.size());
    const long double nb = static_cast<long double>(b.size());
    const long double sa = va / na;
    const long double sb = vb / nb;
    WelchTD out{};
    out.t = static_cast<double>((ma - mb) / std::sqrt(sa + sb));
    out.dof = static_cast<double>((sa + sb) * (sa + sb) /
                                  (sa * sa / (na - 1.0L) + sb * sb / (nb - 1.0L)));
    return out;
}

// ---------------------------------------------------------------------------
// Seeded sampling helpers (deterministic across platforms).
// ---------------------------------------------------------------------------

inline double box_muller(srag::SplitMix64& rng) {
    double u1 = rng.uniform01();
    while (u1 <= 0.0)
        u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// ---------------------------------------------------------------------------
// Retrieval: full-scan search oracle (score desc, id asc).
// ---------------------------------------------------------------------------

struct ScoredId {
    std::string id;
    double score;
};

inline std::vector<ScoredId> brute_force_top_k(const std::vector<std::string>& ids,
                                               const std::vector<srag::EmbeddingVector>& vectors,
                                               const srag::EmbeddingVector& query,
                                               std::size_t k) {
    std::vector<ScoredId> all;
    all.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
        all.push_back({ids[i], srag::cosine_similarity(vectors[i], query)});
    std::sort(all.begin(), all.end(), [](const ScoredId& a, const ScoredId& b) {
        if (a.score != b.score)
            return a.score > b.score;
        return a.id < b.id;
    });
    if (all.size() > k)
        all.resize(k);
    return all;
}

// ---------------------------------------------------------------------------
// Chunking: plain sliding-window oracle, no whitespace snapping (valid for
// inputs without whitespace in the snap range).
// ---------------------------------------------------------------------------

inline std::vector<std::string> sliding_window_chunks(const std::string& ascii_text,
                                                      std::size_t max_chars,
                                                      std::size_t overlap) {
    std::vector<std::string> chunks;
    const std::size_t stride = max_chars - overlap;
    for (std::size_t start = 0; start < ascii_text.size(); start += stride)
        chunks.push_back(ascii_text.substr(start, max_chars));
    return chunks;
}

} // namespace oracle
