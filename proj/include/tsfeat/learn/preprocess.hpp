#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsfeat/features.hpp"
#include "tsfeat/learn/metrics.hpp"
#include "tsfeat/matrix.hpp"

namespace tsfeat::learn {

enum class DropReason { Nonfinite, Constant, NearZeroVariance };

/// "nonfinite", "constant", "near_zero_variance".
std::string_view to_string(DropReason r) noexcept;

struct DroppedFeature {
    FeatureKey feature;
    DropReason reason;
};

/// Reason to drop a column, checked in priority order nonfinite, constant,
/// near-zero variance. Near-zero variance: most/second-most frequent count
/// >= 19 with at most 10% distinct values, or sample variance < 1e-12.
std::optional<DropReason> column_filter(std::span<const double> col);

/// Column filter plus centering and scaling fitted on one sample and
/// applicable to another.
struct Scaler {
    std::vector<std::size_t> keep;  // surviving column indices, ascending
    std::vector<double> center;
    std::vector<double> scale;      // sample sd, > 0

    Matrix apply(const Matrix& x) const;
};

Scaler fit_scaler(const Matrix& x);

/// Labeled, filtered, centered and scaled series x feature matrix.
struct FeatureMatrix {
    std::vector<std::string> ids;
    std::vector<FeatureKey> features;  // surviving columns
    Matrix x;
    LabelEncoding labels;
    std::vector<DroppedFeature> dropped;
};

/// Throws UnlabeledSeries for an unlabeled table, NoSurvivingFeatures when
/// every column is filtered.
FeatureMatrix preprocess_features(const FeatureTable& ft);

}  // namespace tsfeat::learn
