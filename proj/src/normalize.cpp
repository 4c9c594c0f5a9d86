#include "tsfeat/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsfeat/error.hpp"
#include "tsfeat/stats.hpp"

namespace tsfeat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kIqrToSd = 1.35;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::string_view to_string(NormalizationMethod m) noexcept {
    switch (m) {
        case NormalizationMethod::ZScore: return "z-score";
        case NormalizationMethod::MinMax: return "MinMax";
        case NormalizationMethod::Sigmoid: return "Sigmoid";
        case NormalizationMethod::RobustSigmoid: return "RobustSigmoid";
    }
    return "z-score";
}

NormalizationMethod parse_normalization(std::string_view name) {
    if (name == "z-score" || name == "zscore" || name == "ZScore") return NormalizationMethod::ZScore;
    if (name == "MinMax" || name == "minmax") return NormalizationMethod::MinMax;
    if (name == "Sigmoid" || name == "sigmoid") return NormalizationMethod::Sigmoid;
    if (name == "RobustSigmoid" || name == "robustsigmoid") return NormalizationMethod::RobustSigmoid;
    throw Error(ErrorKind::InvalidParameter, "unknown normalization method '" + std::string(name) +
                                                 "' (expected z-score, MinMax, Sigmoid or RobustSigmoid)");
}

std::vector<double> transform_unscaled(std::span<const double> x, NormalizationMethod m) {
    const std::vector<double> finite = stats::finite_values(x);
    if (finite.size() < 2) {
        throw Error(ErrorKind::DegenerateScale, "fewer than two finite values to normalize");
    }

    std::vector<double> out(x.size(), kNaN);
    auto apply = [&](auto&& f) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (std::isfinite(x[i])) out[i] = f(x[i]);
    };

    switch (m) {
        case NormalizationMethod::ZScore:
        case NormalizationMethod::Sigmoid: {
            const double mu = stats::mean(finite);
            const double sd = stats::stddev(finite);
            if (!(sd > 0.0)) throw Error(ErrorKind::DegenerateScale, "standard deviation is zero");
            if (m == NormalizationMethod::ZScore)
                apply([&](double v) { return (v - mu) / sd; });
            else
                apply([&](double v) { return logistic((v - mu) / sd); });
            break;
        }
        case NormalizationMethod::MinMax: {
            const auto [lo, hi] = std::minmax_element(finite.begin(), finite.end());
            const double range = *hi - *lo;
            if (!(range > 0.0)) throw Error(ErrorKind::DegenerateScale, "maximum equals minimum");
            const double base = *lo;
            apply([&](double v) { return (v - base) / range; });
            break;
        }
        case NormalizationMethod::RobustSigmoid: {
            const double med = stats::median(finite);
            const double scale = stats::iqr(finite) / kIqrToSd;
            if (!(scale > 0.0)) throw Error(ErrorKind::DegenerateScale, "interquartile range is zero");
            apply([&](double v) { return logistic((v - med) / scale); });
            break;
        }
    }
    return out;
}

std::vector<double> normalize_vector(std::span<const double> x, NormalizationMethod m) {
    std::vector<double> y = transform_unscaled(x, m);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : y) {
        if (std::isnan(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    if (!(range > 0.0)) throw Error(ErrorKind::DegenerateScale, "transformed values have zero range");
    for (double& v : y)
        if (!std::isnan(v)) v = std::clamp((v - lo) / range, 0.0, 1.0);
    return y;
}

NormalizedTable normalize_table(const FeatureTable& ft, NormalizationMethod m) {
    if (ft.empty()) throw Error(ErrorKind::EmptyTable, "feature table is empty");
    const WideTable w = pivot(ft);
    NormalizedTable result;
    std::vector<FeatureRecord> records;
    records.reserve(ft.records().size());
    for (std::size_t f = 0; f < w.features.size(); ++f) {
        std::vector<double> z;
        try {
            z = normalize_vector(w.values.column(f), m);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateScale) throw;
            result.dropped.push_back(w.features[f]);
            continue;
        }
        for (std::size_t r = 0; r < w.ids.size(); ++r) {
            std::optional<std::string> g;
            if (!w.groups.empty()) g = w.groups[r];
            records.push_back({w.ids[r], w.features[f].name, w.features[f].set, z[r], std::move(g)});
        }
    }
    result.table = FeatureTable(std::move(records));
    return result;
}

}  // namespace tsfeat
