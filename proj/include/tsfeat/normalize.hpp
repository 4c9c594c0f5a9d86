#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsfeat/features.hpp"

namespace tsfeat {

enum class NormalizationMethod { ZScore, MinMax, Sigmoid, RobustSigmoid };

/// External spellings: "z-score", "MinMax", "Sigmoid", "RobustSigmoid".
std::string_view to_string(NormalizationMethod m) noexcept;
NormalizationMethod parse_normalization(std::string_view name);

/// The method's own map without the final unit rescale: (x-mu)/sd, min-max,
/// logistic of the z-score, or logistic of (x-median)/(IQR/1.35).
/// Statistics are computed over finite entries; non-finite entries map to
/// NaN. Throws DegenerateScale when fewer than two finite entries exist or
/// the method's scale is zero.
std::vector<double> transform_unscaled(std::span<const double> x, NormalizationMethod m);

/// transform_unscaled followed by a linear rescale to [0, 1].
std::vector<double> normalize_vector(std::span<const double> x, NormalizationMethod m);

struct NormalizedTable {
    FeatureTable table;
    std::vector<FeatureKey> dropped;  // columns that raised DegenerateScale
};

/// Normalizes each feature column independently. Degenerate columns are
/// dropped and listed rather than failing the whole table.
NormalizedTable normalize_table(const FeatureTable& ft, NormalizationMethod m);

}  // namespace tsfeat
