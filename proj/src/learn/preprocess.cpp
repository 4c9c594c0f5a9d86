#include "tsfeat/learn/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "tsfeat/error.hpp"
#include "tsfeat/stats.hpp"

namespace tsfeat::learn {

std::string_view to_string(DropReason r) noexcept {
    switch (r) {
        case DropReason::Nonfinite: return "nonfinite";
        case DropReason::Constant: return "constant";
        case DropReason::NearZeroVariance: return "near_zero_variance";
    }
    return "unknown";
}

std::optional<DropReason> column_filter(std::span<const double> col) {
    for (double v : col)
        if (!std::isfinite(v)) return DropReason::Nonfinite;
    std::vector<double> sorted(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.empty() || sorted.front() == sorted.back()) return DropReason::Constant;

    std::size_t first = 0, second = 0, distinct = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const std::size_t run = j - i;
        if (run > first) {
            second = first;
            first = run;
        } else if (run > second) {
            second = run;
        }
        ++distinct;
        i = j;
    }
    const double ratio = static_cast<double>(first) / static_cast<double>(second);
    const double distinct_fraction = static_cast<double>(distinct) / static_cast<double>(sorted.size());
    if (ratio >= 19.0 && distinct_fraction <= 0.10) return DropReason::NearZeroVariance;
    if (stats::variance(col) < 1e-12) return DropReason::NearZeroVariance;
    return std::nullopt;
}

Scaler fit_scaler(const Matrix& x) {
    Scaler s;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const auto col = x.column(j);
        if (column_filter(col)) continue;
        s.keep.push_back(j);
        s.center.push_back(stats::mean(col));
        s.scale.push_back(stats::stddev(col));
    }
    return s;
}

Matrix Scaler::apply(const Matrix& x) const {
    Matrix out(x.rows(), keep.size());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t k = 0; k < keep.size(); ++k) out(i, k) = (x(i, keep[k]) - center[k]) / scale[k];
    return out;
}

FeatureMatrix preprocess_features(const FeatureTable& ft) {
    if (ft.empty()) throw Error(ErrorKind::EmptyTable, "feature table is empty");
    if (!ft.labeled()) throw Error(ErrorKind::UnlabeledSeries, "classification needs a group label for every series");
    const WideTable wide = pivot(ft);

    FeatureMatrix fm;
    fm.ids = wide.ids;
    fm.labels = encode_labels(wide.groups);
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < wide.features.size(); ++j) {
        if (const auto reason = column_filter(wide.values.column(j))) {
            fm.dropped.push_back({wide.features[j], *reason});
        } else {
            keep.push_back(j);
            fm.features.push_back(wide.features[j]);
        }
    }
    if (keep.empty()) {
        throw Error(ErrorKind::NoSurvivingFeatures,
                    "all " + std::to_string(wide.features.size()) + " features were removed by filtering");
    }
    fm.x = fit_scaler(wide.values.select_cols(keep)).apply(wide.values.select_cols(keep));
    return fm;
}

}  // namespace tsfeat::learn
