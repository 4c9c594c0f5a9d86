#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tsfeat/learn/metrics.hpp"

namespace tsfeat::learn {

enum class NullMethod { ModelFreeShuffles, NullModelFits };
enum class PValueMethod { Gaussian, Empirical };

std::string_view to_string(NullMethod m) noexcept;
std::string_view to_string(PValueMethod m) noexcept;
NullMethod parse_null_method(std::string_view name);
PValueMethod parse_p_value_method(std::string_view name);

struct NullConfig {
    NullMethod method = NullMethod::ModelFreeShuffles;
    std::size_t num_permutations = 10000;
    PValueMethod p_value_method = PValueMethod::Gaussian;
    std::uint64_t seed = 0;
};

struct NullDistribution {
    std::vector<double> values;  // one statistic per permutation, in [0, 1]
    NullMethod method = NullMethod::ModelFreeShuffles;
    std::size_t num_permutations = 0;
    std::uint64_t seed = 0;
};

/// metric(labels, shuffled labels) for independently seeded shuffles.
NullDistribution model_free_shuffles(std::span<const int> labels, std::size_t num_permutations, Metric metric,
                                     std::uint64_t seed);

/// Gaussian: upper tail of observed under Normal(mean, sample sd) of the
/// null (DegenerateNull if sd is zero). Empirical: fraction of null values
/// >= observed.
double p_value(double observed, std::span<const double> null, PValueMethod method);
inline double p_value(double observed, const NullDistribution& null, PValueMethod method) {
    return p_value(observed, null.values, method);
}

/// Step-down adjusted p-values in input order. Throws OutOfRange for
/// entries outside [0, 1] or NaN.
std::vector<double> holm_bonferroni(std::span<const double> p);

}  // namespace tsfeat::learn
