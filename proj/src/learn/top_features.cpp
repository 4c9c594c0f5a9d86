#include "tsfeat/learn/top_features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsfeat/error.hpp"
#include "tsfeat/learn/univariate.hpp"
#include "tsfeat/parallel.hpp"
#include "tsfeat/rng.hpp"

namespace tsfeat::learn {

std::string_view to_string(TopTest t) noexcept {
    switch (t) {
        case TopTest::OneDClassifier: return "classifier";
        case TopTest::TTest: return "t-test";
        case TopTest::Wilcoxon: return "wilcox";
        case TopTest::BinomialLogistic: return "BinomialLogistic";
    }
    return "unknown";
}

TopTest parse_top_test(std::string_view name) {
    if (name == "classifier" || name == "OneDClassifier") return TopTest::OneDClassifier;
    if (name == "t-test" || name == "TTest") return TopTest::TTest;
    if (name == "wilcox" || name == "Wilcoxon") return TopTest::Wilcoxon;
    if (name == "BinomialLogistic") return TopTest::BinomialLogistic;
    throw Error(ErrorKind::InvalidParameter, "unknown top-feature test '" + std::string(name) + "'");
}

namespace {

struct Tested {
    double statistic = 0.0, strength = 0.0, p = 0.0;
    bool ok = false;
};

ViolinData violin(const FeatureKey& key, const std::vector<double>& values, std::span<const int> y,
                  std::size_t num_classes, std::size_t points) {
    ViolinData v;
    v.feature = key;
    v.values = values;
    v.classes.assign(y.begin(), y.end());
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    v.grid = linspace(*lo, *hi, points);
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::vector<double> xc;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (y[i] == static_cast<int>(c)) xc.push_back(values[i]);
        const double bw = xc.size() >= 2 ? silverman_bandwidth(xc) : 1.0;
        v.bandwidth.push_back(bw);
        v.density.push_back(gaussian_kde(xc, bw, v.grid));
    }
    return v;
}

}  // namespace

TopFeatureResult compute_top_features(const FeatureTable& ft, const TopFeatureConfig& cfg) {
    if (ft.empty()) throw Error(ErrorKind::EmptyTable, "feature table is empty");
    if (!ft.labeled()) throw Error(ErrorKind::UnlabeledSeries, "top features need a group label for every series");
    if (cfg.num_features == 0) throw Error(ErrorKind::InvalidParameter, "num_features must be at least 1");
    const WideTable wide = pivot(ft);
    const LabelEncoding enc = encode_labels(wide.groups);
    const std::size_t k = enc.num_classes();
    if (k < 2) throw Error(ErrorKind::TooFewClasses, "top features need at least two classes, found " + std::to_string(k));
    const bool two_sample = cfg.test != TopTest::OneDClassifier;
    if (two_sample && k != 2) {
        throw Error(ErrorKind::MulticlassWithTwoSampleTest,
                    std::string(to_string(cfg.test)) + " compares exactly two classes, found " + std::to_string(k));
    }

    TopFeatureResult result;
    result.test = cfg.test;
    result.classes = enc.classes;
    result.ids = wide.ids;

    std::vector<std::size_t> usable;
    for (std::size_t j = 0; j < wide.features.size(); ++j) {
        if (const auto reason = column_filter(wide.values.column(j))) result.dropped.push_back({wide.features[j], *reason});
        else usable.push_back(j);
    }
    if (usable.empty()) {
        throw Error(ErrorKind::NoSurvivingFeatures,
                    "all " + std::to_string(wide.features.size()) + " features were removed by filtering");
    }

    const bool classifier_test = cfg.test == TopTest::OneDClassifier || cfg.test == TopTest::BinomialLogistic;
    ClassifierSpec spec = cfg.spec;
    if (cfg.test == TopTest::BinomialLogistic) spec.method = ClassifierMethod::BinomialLogistic;
    const Metric metric = cfg.cv.balanced_accuracy ? Metric::BalancedAccuracy : Metric::Accuracy;
    std::optional<NullDistribution> shared_null;
    if (classifier_test) {
        if (cfg.cv.use_k_fold && cfg.cv.stratified) check_fold_feasibility(enc.y, cfg.cv.num_folds);
        if (cfg.null_cfg.method == NullMethod::ModelFreeShuffles)
            shared_null = model_free_shuffles(enc.y, cfg.null_cfg.num_permutations, metric, cfg.null_cfg.seed);
    }

    std::vector<Tested> tested(usable.size());
    parallel_for(usable.size(), [&](std::size_t u) {
        const auto col = wide.values.column(usable[u]);
        Tested& t = tested[u];
        try {
            if (classifier_test) {
                Matrix x(col.size(), 1);
                for (std::size_t i = 0; i < col.size(); ++i) x(i, 0) = col[i];
                const double acc = cross_validate(x, enc.y, k, spec, cfg.cv).mean;
                double p;
                if (shared_null) {
                    p = p_value(acc, *shared_null, cfg.null_cfg.p_value_method);
                } else {
                    const auto null = null_model_fits(x, enc.y, k, spec, cfg.cv, cfg.null_cfg.num_permutations,
                                                      stream_seed(cfg.null_cfg.seed, usable[u]));
                    p = p_value(acc, null, cfg.null_cfg.p_value_method);
                }
                t = {acc, acc, p, true};
            } else {
                std::vector<double> a, b;
                for (std::size_t i = 0; i < col.size(); ++i) (enc.y[i] == 0 ? a : b).push_back(col[i]);
                if (cfg.test == TopTest::TTest) {
                    const auto r = welch_t_test(a, b);
                    t = {r.statistic, std::fabs(r.statistic), r.p_value, true};
                } else {
                    const auto r = wilcoxon_rank_sum(a, b);
                    const double center = static_cast<double>(a.size()) * static_cast<double>(b.size()) / 2.0;
                    t = {r.statistic, std::fabs(r.statistic - center), r.p_value, true};
                }
            }
        } catch (const Error& e) {
            if (e.category() == ErrorCategory::Schema) throw;
            t.ok = false;
        }
    });

    std::vector<TopFeatureRow> all;
    for (std::size_t u = 0; u < usable.size(); ++u) {
        if (!tested[u].ok) {
            result.untestable.push_back(wide.features[usable[u]]);
            continue;
        }
        all.push_back({wide.features[usable[u]], tested[u].statistic, tested[u].strength, tested[u].p, 0.0});
    }
    if (all.empty()) throw Error(ErrorKind::NoSurvivingFeatures, "no feature could be tested");
    result.features_tested = all.size();
    {
        std::vector<double> p;
        for (const auto& r : all) p.push_back(r.p_value);
        const auto adj = holm_bonferroni(p);
        for (std::size_t i = 0; i < all.size(); ++i) all[i].adjusted_p = adj[i];
    }
    std::sort(all.begin(), all.end(), [](const TopFeatureRow& a, const TopFeatureRow& b) {
        if (a.p_value != b.p_value) return a.p_value < b.p_value;
        if (a.strength != b.strength) return a.strength > b.strength;
        return a.feature < b.feature;
    });
    all.resize(std::min(all.size(), cfg.num_features));
    result.rows = std::move(all);

    std::vector<std::size_t> top_cols;
    for (const auto& r : result.rows)
        top_cols.push_back(static_cast<std::size_t>(
            std::find(wide.features.begin(), wide.features.end(), r.feature) - wide.features.begin()));
    const Matrix top = wide.values.select_cols(top_cols);
    if (top_cols.size() >= 2) {
        result.correlation = correlation_matrix(top, cfg.correlation, true);
        result.dendrogram = upgma(euclidean_distance_matrix(result.correlation));
    } else {
        result.correlation = Matrix(1, 1, 1.0);
        result.dendrogram.leaf_order = {0};
    }

    result.violins.resize(top_cols.size());
    parallel_for(top_cols.size(), [&](std::size_t r) {
        result.violins[r] = violin(result.rows[r].feature, top.column(r), enc.y, k, cfg.violin_points);
    });
    return result;
}

}  // namespace tsfeat::learn
