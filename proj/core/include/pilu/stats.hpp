#pragma once

// Two-sample location tests used to compare seed distributions.

#include <cstdint>
#include <span>
#include <vector>

namespace pilu {

struct TestResult {
    double statistic = 0.0;
    /// Welch degrees of freedom; 0 for rank tests.
    double df = 0.0;
    double p_two_sided = 1.0;
    /// One-sided p-value for "x tends to be larger than y".
    double p_greater = 1.0;
    bool exact = false;
};

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator); NaN for fewer than two values.
double sample_std(std::span<const double> v);

/// Welch's unequal-variance t-test; statistic = (mean x - mean y) / se.
TestResult welch_t_test(std::span<const double> x, std::span<const double> y);

/// Mann-Whitney U test; statistic is U for x. The exact null distribution is
/// used when the smaller sample has at most 8 values and there are no ties,
/// otherwise the normal approximation with tie and continuity corrections.
TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y);

/// Number of (m, n) arrangements giving each U = 0..m*n.
std::vector<double> mann_whitney_counts(std::size_t m, std::size_t n);

}  // namespace pilu
