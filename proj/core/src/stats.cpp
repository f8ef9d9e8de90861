#include "pilu/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace pilu {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_var(std::span<const double> v) {
    if (v.size() < 2) return kNaN;
    const double m = mean(v);
    double ss = 0.0;
    for (const double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double mean(std::span<const double> v) {
    if (v.empty()) return kNaN;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) { return std::sqrt(sample_var(v)); }

TestResult welch_t_test(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 2 || y.size() < 2) throw std::invalid_argument("welch_t_test: need at least two values per sample");
    const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    const double vx = sample_var(x) / nx, vy = sample_var(y) / ny;
    const double diff = mean(x) - mean(y);
    TestResult r;
    const double se2 = vx + vy;
    if (se2 == 0.0) {
        // Both samples constant: the test degenerates.
        r.statistic = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        r.df = kNaN;
        r.p_two_sided = diff == 0.0 ? 1.0 : 0.0;
        r.p_greater = diff > 0.0 ? 0.0 : (diff == 0.0 ? 0.5 : 1.0);
        return r;
    }
    r.statistic = diff / std::sqrt(se2);
    r.df = se2 * se2 / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
    const boost::math::students_t dist(r.df);
    r.p_greater = boost::math::cdf(boost::math::complement(dist, r.statistic));
    r.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic)));
    return r;
}

std::vector<double> mann_whitney_counts(std::size_t m, std::size_t n) {
    // counts[a][u]: arrangements of `a` x-values among `b` y-values with U = u,
    // built up one y-value at a time.
    std::vector<std::vector<double>> prev(m + 1), cur(m + 1);
    for (std::size_t a = 0; a <= m; ++a) prev[a] = {1.0};  // b = 0: U is always 0
    for (std::size_t b = 1; b <= n; ++b) {
        cur[0] = {1.0};
        for (std::size_t a = 1; a <= m; ++a) {
            // The largest value is either a y (U unchanged) or an x (adds b).
            std::vector<double> c(a * b + 1, 0.0);
            for (std::size_t u = 0; u < prev[a].size(); ++u) c[u] += prev[a][u];
            for (std::size_t u = 0; u < cur[a - 1].size(); ++u) c[u + b] += cur[a - 1][u];
            cur[a] = std::move(c);
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
    const std::size_t n1 = x.size(), n2 = y.size(), n = n1 + n2;

    std::vector<std::pair<double, int>> all;
    all.reserve(n);
    for (const double v : x) all.emplace_back(v, 0);
    for (const double v : y) all.emplace_back(v, 1);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    double rank_sum_x = 0.0, tie_term = 0.0;
    bool ties = false;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && all[j].first == all[i].first) ++j;
        const double t = static_cast<double>(j - i);
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].second == 0) rank_sum_x += avg_rank;
        }
        if (t > 1) {
            ties = true;
            tie_term += t * t * t - t;
        }
        i = j;
    }

    const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2), dn = static_cast<double>(n);
    const double u1 = rank_sum_x - dn1 * (dn1 + 1.0) / 2.0;
    const double u2 = dn1 * dn2 - u1;
    TestResult r;
    r.statistic = u1;
    r.exact = std::min(n1, n2) <= 8 && !ties;

    if (r.exact) {
        const auto counts = mann_whitney_counts(n1, n2);
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        auto sf = [&](double u) {  // P(U >= u)
            double s = 0.0;
            for (std::size_t k = static_cast<std::size_t>(std::ceil(u)); k < counts.size(); ++k) s += counts[k];
            return s / total;
        };
        r.p_greater = sf(u1);
        r.p_two_sided = std::min(1.0, 2.0 * sf(std::max(u1, u2)));
        return r;
    }

    const double mu = dn1 * dn2 / 2.0;
    const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    const double s = std::sqrt(var);
    const boost::math::normal norm;
    auto upper = [&](double u) {
        if (s == 0.0) return 1.0;
        return boost::math::cdf(boost::math::complement(norm, (u - mu - 0.5) / s));
    };
    r.p_greater = upper(u1);
    r.p_two_sided = std::min(1.0, 2.0 * upper(std::max(u1, u2)));
    return r;
}

}  // namespace pilu
