#include "tsfeat/learn/multi_feature.hpp"

#include <algorithm>
#include <map>

#include "tsfeat/error.hpp"
#include "tsfeat/parallel.hpp"
#include "tsfeat/rng.hpp"
#include "tsfeat/stats.hpp"

namespace tsfeat::learn {

namespace {

int majority_class(std::span<const int> y, std::size_t num_classes) {
    std::vector<std::size_t> counts(num_classes, 0);
    for (int c : y) ++counts[static_cast<std::size_t>(c)];
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

Metric metric_of(const CVConfig& cv) { return cv.balanced_accuracy ? Metric::BalancedAccuracy : Metric::Accuracy; }

// Trains on `train` rows and scores on `test` rows.
double evaluate_split(const Matrix& x, std::span<const int> y, std::size_t num_classes, const ClassifierSpec& spec,
                      const CVConfig& cv, std::span<const std::size_t> train, std::span<const std::size_t> test) {
    const Matrix xtr = x.select_rows(train), xte = x.select_rows(test);
    std::vector<int> ytr, yte;
    for (std::size_t i : train) ytr.push_back(y[i]);
    for (std::size_t i : test) yte.push_back(y[i]);

    const Scaler scaler = fit_scaler(xtr);
    std::vector<int> pred;
    if (scaler.keep.empty()) {
        pred.assign(yte.size(), majority_class(ytr, num_classes));
    } else {
        const auto model = train_classifier(scaler.apply(xtr), ytr, num_classes, spec);
        pred = model.predict(scaler.apply(xte));
    }
    return score(metric_of(cv), yte, pred);
}

CVResult summarize(std::vector<double> folds) {
    CVResult r;
    r.mean = stats::mean(folds);
    r.sd = folds.size() > 1 ? stats::stddev(folds) : 0.0;
    r.fold_statistics = std::move(folds);
    return r;
}

}  // namespace

CVResult cross_validate(const Matrix& x, std::span<const int> y, std::size_t num_classes, const ClassifierSpec& spec,
                        const CVConfig& cv) {
    if (x.rows() != y.size()) throw Error(ErrorKind::LengthMismatch, "feature rows and labels differ in length");
    if (!cv.use_k_fold) {
        std::vector<std::size_t> all(y.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return summarize({evaluate_split(x, y, num_classes, spec, cv, all, all)});
    }
    if (cv.stratified) check_fold_feasibility(y, cv.num_folds);
    else if (y.size() < cv.num_folds)
        throw Error(ErrorKind::ClassTooSmall, "fewer samples than folds");
    const auto fold = assign_folds(y, cv.num_folds, cv.stratified, cv.seed);

    std::vector<double> stats_per_fold(cv.num_folds);
    parallel_for(cv.num_folds, [&](std::size_t f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < y.size(); ++i) (fold[i] == f ? test : train).push_back(i);
        ClassifierSpec fold_spec = spec;
        fold_spec.seed = stream_seed(spec.seed, f);
        stats_per_fold[f] = evaluate_split(x, y, num_classes, fold_spec, cv, train, test);
    });
    return summarize(std::move(stats_per_fold));
}

NullDistribution null_model_fits(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                                 const ClassifierSpec& spec, const CVConfig& cv, std::size_t num_permutations,
                                 std::uint64_t seed) {
    if (num_permutations == 0) throw Error(ErrorKind::InvalidParameter, "num_permutations must be at least 1");
    if (cv.use_k_fold && cv.stratified) check_fold_feasibility(y, cv.num_folds);
    NullDistribution null{std::vector<double>(num_permutations), NullMethod::NullModelFits, num_permutations, seed};
    parallel_for(num_permutations, [&](std::size_t k) {
        Rng rng(seed, k);
        std::vector<int> shuffled(y.begin(), y.end());
        rng.shuffle(std::span(shuffled));
        CVConfig perm_cv = cv;
        perm_cv.seed = rng.next_u64();
        null.values[k] = cross_validate(x, shuffled, num_classes, spec, perm_cv).mean;
    });
    return null;
}

ClassificationReport fit_multi_feature_classifier(const FeatureTable& ft, bool by_set, const ClassifierSpec& spec,
                                                  const CVConfig& cv, const std::optional<NullConfig>& null_cfg) {
    if (ft.empty()) throw Error(ErrorKind::EmptyTable, "feature table is empty");
    if (!ft.labeled()) throw Error(ErrorKind::UnlabeledSeries, "classification needs a group label for every series");
    const WideTable wide = pivot(ft);
    const LabelEncoding enc = encode_labels(wide.groups);
    if (enc.num_classes() < 2) {
        throw Error(ErrorKind::TooFewClasses,
                    "classification needs at least two classes, found " + std::to_string(enc.num_classes()));
    }
    if (cv.use_k_fold && cv.stratified) check_fold_feasibility(enc.y, cv.num_folds);

    ClassificationReport report;
    report.spec = spec;
    report.cv = cv;
    report.null_cfg = null_cfg;
    report.classes = enc.classes;

    // Columns unusable in any fold are removed up front; fold-dependent
    // filters run again inside every training fold.
    std::vector<std::size_t> usable;
    for (std::size_t j = 0; j < wide.features.size(); ++j) {
        if (const auto reason = column_filter(wide.values.column(j))) report.dropped.push_back({wide.features[j], *reason});
        else usable.push_back(j);
    }
    if (usable.empty()) {
        throw Error(ErrorKind::NoSurvivingFeatures,
                    "all " + std::to_string(wide.features.size()) + " features were removed by filtering");
    }

    std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
    if (by_set) {
        std::map<std::string, std::vector<std::size_t>> per_set;
        for (const auto& s : ft.sets()) per_set[s];
        for (std::size_t j : usable) per_set[wide.features[j].set].push_back(j);
        for (auto& [name, cols] : per_set) {
            if (cols.empty()) {
                throw Error(ErrorKind::NoSurvivingFeatures, "feature set '" + name + "' has no features left after filtering");
            }
            groups.emplace_back(name, std::move(cols));
        }
    }
    groups.emplace_back(kAllFeatures, usable);

    const Metric metric = metric_of(cv);
    if (null_cfg && null_cfg->method == NullMethod::ModelFreeShuffles)
        report.shared_null = model_free_shuffles(enc.y, null_cfg->num_permutations, metric, null_cfg->seed);

    for (const auto& [name, cols] : groups) {
        SetReport row;
        row.name = name;
        row.feature_count = cols.size();
        const Matrix x = wide.values.select_cols(cols);
        row.cv = cross_validate(x, enc.y, enc.num_classes(), spec, cv);
        if (null_cfg) {
            if (report.shared_null) {
                row.p_value = p_value(row.cv.mean, *report.shared_null, null_cfg->p_value_method);
            } else {
                const auto null = null_model_fits(x, enc.y, enc.num_classes(), spec, cv, null_cfg->num_permutations,
                                                  null_cfg->seed);
                row.p_value = p_value(row.cv.mean, null, null_cfg->p_value_method);
            }
        }
        report.rows.push_back(std::move(row));
    }

    if (null_cfg) {
        std::vector<double> p;
        for (const auto& r : report.rows) p.push_back(*r.p_value);
        const auto adj = holm_bonferroni(p);
        for (std::size_t i = 0; i < adj.size(); ++i) report.rows[i].p_adjusted = adj[i];
    }
    return report;
}

}  // namespace tsfeat::learn
