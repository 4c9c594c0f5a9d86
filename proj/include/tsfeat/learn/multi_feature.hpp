#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsfeat/features.hpp"
#include "tsfeat/learn/classifier.hpp"
#include "tsfeat/learn/folds.hpp"
#include "tsfeat/learn/inference.hpp"
#include "tsfeat/learn/preprocess.hpp"

namespace tsfeat::learn {

struct CVResult {
    std::vector<double> fold_statistics;
    double mean = 0.0;
    double sd = 0.0;  // sample sd over folds; 0 for a single evaluation
};

/// k-fold cross-validation of `spec` on raw features `x`. Filters and
/// scaling are fitted on each training fold and applied to its test fold; a
/// training fold left with no usable feature predicts its majority class.
/// Without k-fold the model is trained and scored on the full sample.
CVResult cross_validate(const Matrix& x, std::span<const int> y, std::size_t num_classes, const ClassifierSpec& spec,
                        const CVConfig& cv);

/// CV statistics under shuffled labels. Each permutation reshuffles the
/// labels and redraws the folds from its own seeded stream.
NullDistribution null_model_fits(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                                 const ClassifierSpec& spec, const CVConfig& cv, std::size_t num_permutations,
                                 std::uint64_t seed);

struct SetReport {
    std::string name;  // a set tag or "All features"
    std::size_t feature_count = 0;
    CVResult cv;
    std::optional<double> p_value;
    std::optional<double> p_adjusted;  // Holm over the reported rows
};

struct ClassificationReport {
    ClassifierSpec spec;
    CVConfig cv;
    std::optional<NullConfig> null_cfg;
    std::vector<std::string> classes;
    std::vector<SetReport> rows;
    std::vector<DroppedFeature> dropped;  // filtered on the full table
    std::optional<NullDistribution> shared_null;  // model-free null, shared by every row
};

inline constexpr const char* kAllFeatures = "All features";

/// Throws UnlabeledSeries, TooFewClasses, ClassTooSmall, NoSurvivingFeatures.
ClassificationReport fit_multi_feature_classifier(const FeatureTable& ft, bool by_set, const ClassifierSpec& spec,
                                                  const CVConfig& cv, const std::optional<NullConfig>& null_cfg);

}  // namespace tsfeat::learn
