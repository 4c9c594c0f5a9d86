#pragma once

#include <span>
#include <vector>

// Small descriptive-statistics toolkit shared by every module. All functions
// are pure and operate on the values exactly as given (no NaN filtering).
namespace tsfeat::stats {

double mean(std::span<const double> x);

/// Sample variance with the n-1 denominator; NaN for n < 2.
double variance(std::span<const double> x);
double stddev(std::span<const double> x);

/// Type-7 (linear interpolation) quantile of an ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::span<const double> x, double p);
double median(std::span<const double> x);
double iqr(std::span<const double> x);

/// Ranks 1..n with ties receiving the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson correlation; NaN when either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

/// Standard normal distribution function and its upper tail.
double normal_cdf(double z);
double normal_upper_tail(double z);

/// Finite entries of x, in order.
std::vector<double> finite_values(std::span<const double> x);

}  // namespace tsfeat::stats
