#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsfeat/cluster.hpp"
#include "tsfeat/features.hpp"
#include "tsfeat/learn/multi_feature.hpp"

namespace tsfeat::learn {

enum class TopTest { OneDClassifier, TTest, Wilcoxon, BinomialLogistic };

/// "classifier", "t-test", "wilcox", "BinomialLogistic".
std::string_view to_string(TopTest t) noexcept;
TopTest parse_top_test(std::string_view name);

struct TopFeatureConfig {
    std::size_t num_features = 40;
    TopTest test = TopTest::OneDClassifier;
    ClassifierSpec spec;  // OneDClassifier; BinomialLogistic overrides the method
    CVConfig cv;
    NullConfig null_cfg;  // classifier-based tests only
    CorrelationKind correlation = CorrelationKind::Spearman;
    std::size_t violin_points = 128;
};

struct TopFeatureRow {
    FeatureKey feature;
    double statistic = 0.0;  // t, W, or CV accuracy
    double strength = 0.0;   // |t|, |W - na*nb/2|, or CV accuracy; ranking tie-break
    double p_value = 0.0;
    double adjusted_p = 0.0;  // Holm over every tested feature
};

struct ViolinData {
    FeatureKey feature;
    std::vector<double> grid;                  // feature min..max
    std::vector<std::vector<double>> density;  // per class, on grid
    std::vector<double> bandwidth;             // per class
    std::vector<double> values;                // raw value per series
    std::vector<int> classes;                  // class index per series
};

struct TopFeatureResult {
    TopTest test = TopTest::OneDClassifier;
    std::vector<std::string> classes;
    std::vector<std::string> ids;
    std::vector<TopFeatureRow> rows;  // ranked
    std::size_t features_tested = 0;
    std::vector<DroppedFeature> dropped;      // filtered before testing
    std::vector<FeatureKey> untestable;       // the test itself was degenerate
    Matrix correlation;                       // |rho| among rows, in row order
    Dendrogram dendrogram;                    // clustering of the correlation rows
    std::vector<ViolinData> violins;          // in row order
};

/// Ranks every usable feature by p-value (ascending), then strength
/// (descending), then name and set. Throws UnlabeledSeries, TooFewClasses,
/// MulticlassWithTwoSampleTest, NoSurvivingFeatures.
TopFeatureResult compute_top_features(const FeatureTable& ft, const TopFeatureConfig& cfg);

}  // namespace tsfeat::learn
