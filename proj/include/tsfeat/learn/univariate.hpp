#pragma once

#include <span>
#include <vector>

namespace tsfeat::learn {

struct TTestResult {
    double statistic;  // (mean(a) - mean(b)) / sqrt(va/na + vb/nb)
    double df;         // Welch-Satterthwaite
    double p_value;    // two-sided
};

/// Welch two-sample t-test. Throws InsufficientData if either sample has
/// fewer than two values, DegenerateScale if both have zero variance.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct RankSumResult {
    double statistic;  // W: rank sum of `a` minus na(na+1)/2
    double p_value;    // two-sided
    bool exact;
};

/// Wilcoxon rank-sum test on average ranks. Exact permutation distribution
/// of the rank sum when both samples have at most 8 values; otherwise the
/// normal approximation with tie and continuity corrections.
/// Throws InsufficientData for an empty sample, DegenerateScale when every
/// value is tied.
RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

/// Silverman's rule of thumb, 0.9 * min(sd, IQR/1.34) * n^(-1/5), falling
/// back to sd, |x[0]|, then 1 when the spread is zero.
double silverman_bandwidth(std::span<const double> x);

/// Gaussian kernel density of `x` with bandwidth `bw` at each grid point.
std::vector<double> gaussian_kde(std::span<const double> x, double bw, std::span<const double> grid);

/// `points` evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t points);

}  // namespace tsfeat::learn
