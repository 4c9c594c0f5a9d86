#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsfeat/dataset.hpp"
#include "tsfeat/matrix.hpp"

namespace tsfeat {

/// Per-series evaluation context. Kernels share intermediate results
/// (moments, sorted copy, autocorrelations, periodogram, window statistics)
/// through it; everything is computed lazily and at most once.
class SeriesContext {
public:
    explicit SeriesContext(std::span<const double> values);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    /// True when all values are identical.
    bool constant() const noexcept { return constant_; }

    double mean() const noexcept { return mean_; }
    double variance();
    /// Biased central moment of order k (denominator N).
    double central_moment(int k);
    const std::vector<double>& sorted();
    double median();

    /// Biased autocorrelation at lag k (denominator N, demeaned); NaN for a
    /// constant series or k >= N.
    double acf(std::size_t k);

    /// Periodogram |X_i|^2 over the positive DFT bins i = 1..floor(N/2).
    const std::vector<double>& periodogram();

    /// Width of the non-overlapping windows: max(2, floor(N/10)).
    std::size_t window_width() const noexcept;
    const std::vector<double>& window_means();
    const std::vector<double>& window_variances();

private:
    void compute_windows();

    std::span<const double> values_;
    bool constant_ = false;
    double mean_ = 0.0;
    std::optional<double> variance_;
    std::vector<double> moments_;  // index k -> m_k; NaN = not yet computed
    std::optional<std::vector<double>> sorted_;
    std::vector<double> acf_;      // memoized by lag; NaN = not yet computed
    std::vector<bool> acf_done_;
    std::optional<std::vector<double>> periodogram_;
    std::optional<std::vector<double>> window_means_;
    std::optional<std::vector<double>> window_vars_;
};

using FeatureKernel = std::function<double(SeriesContext&)>;

struct FeatureDescriptor {
    std::string name;
    std::string set;
    std::string description;
    bool needs_variance = false;
    FeatureKernel kernel;
};

/// Identity of a feature column: the same name may appear under two sets.
struct FeatureKey {
    std::string name;
    std::string set;

    auto operator<=>(const FeatureKey&) const = default;
    bool operator==(const FeatureKey&) const = default;
    std::string label() const { return set + "/" + name; }
};

/// The 24-feature native catalog: distribution features tagged
/// "native_dist", autocorrelation/spectral/dynamics features "native_dyn".
const std::vector<FeatureDescriptor>& native_catalog();

/// Copy of `registry` with one extra entry that reuses the kernel of
/// feature `name` under the set tag `new_set`.
std::vector<FeatureDescriptor> with_duplicate(std::vector<FeatureDescriptor> registry, const std::string& name,
                                              const std::string& new_set);

struct FeatureRecord {
    std::string id;
    std::string name;
    std::string set;
    double value = 0.0;
    std::optional<std::string> group;

    bool operator==(const FeatureRecord& o) const;
};

/// Long-format feature values, one record per (series, feature), kept in
/// canonical (id, name, set) order.
class FeatureTable {
public:
    FeatureTable() = default;
    /// Validates completeness, uniqueness and label consistency, then sorts.
    explicit FeatureTable(std::vector<FeatureRecord> records);

    const std::vector<FeatureRecord>& records() const noexcept { return records_; }
    bool empty() const noexcept { return records_.empty(); }
    bool labeled() const noexcept { return !records_.empty() && records_.front().group.has_value(); }

    std::vector<std::string> series_ids() const;
    std::vector<FeatureKey> features() const;
    std::vector<std::string> sets() const;

    /// Records of the features whose set tag is `set`.
    FeatureTable subset_set(const std::string& set) const;
    FeatureTable subset_features(const std::vector<FeatureKey>& keep) const;

    bool operator==(const FeatureTable&) const = default;

private:
    std::vector<FeatureRecord> records_;
};

/// Dense series x feature view of a FeatureTable.
struct WideTable {
    std::vector<std::string> ids;
    std::vector<std::string> groups;  // empty when unlabeled
    std::vector<FeatureKey> features;
    Matrix values;                    // ids.size() x features.size()
};

WideTable pivot(const FeatureTable& ft);

/// Evaluates every registry kernel on every series. A kernel that fails
/// yields NaN for that series; the run itself never aborts.
FeatureTable extract_features(const Dataset& d, const std::vector<FeatureDescriptor>& registry);

struct QualityRow {
    FeatureKey feature;
    double numeric = 0.0;
    double nan = 0.0;
    double pos_inf = 0.0;
    double neg_inf = 0.0;
};

struct QualityReport {
    std::vector<QualityRow> rows;
};

QualityReport quality_report(const FeatureTable& ft);

/// CSV schema: id,names,values,method[,group].
void write_feature_csv(const FeatureTable& ft, std::ostream& out);
void write_feature_csv(const FeatureTable& ft, const std::filesystem::path& path);
FeatureTable read_feature_csv(std::istream& in);
FeatureTable read_feature_csv(const std::filesystem::path& path);

}  // namespace tsfeat
