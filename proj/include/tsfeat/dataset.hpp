#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tsfeat {

/// Column names of the long-format input table.
struct ColumnSpec {
    std::string id = "id";
    std::string time = "timepoint";
    std::string value = "values";
    std::optional<std::string> group;
};

/// A validated, immutable collection of (optionally labeled) univariate
/// series. Series are keyed by id in sorted order, so iteration order never
/// depends on the order of rows in the input.
class Dataset {
public:
    using SeriesMap = std::map<std::string, std::vector<double>>;
    using LabelMap = std::map<std::string, std::string>;

    Dataset() = default;

    /// Validates: at least one series, every series has >= 2 finite values,
    /// and when labels are given every series has exactly one.
    Dataset(SeriesMap series, std::optional<LabelMap> labels);

    const SeriesMap& series() const noexcept { return series_; }
    const std::optional<LabelMap>& labels() const noexcept { return labels_; }
    bool labeled() const noexcept { return labels_.has_value(); }
    std::size_t size() const noexcept { return series_.size(); }

    std::optional<std::string> label_of(const std::string& id) const;
    std::vector<std::string> distinct_labels() const;

    bool operator==(const Dataset&) const = default;

private:
    SeriesMap series_;
    std::optional<LabelMap> labels_;
};

/// Reads a long-format CSV (one row per observation). Time indices are
/// sorted and reindexed to 0..n-1 per series; gaps are allowed.
Dataset ingest_long_csv(const std::filesystem::path& path, const ColumnSpec& columns = {});
Dataset ingest_long_csv(std::istream& in, const ColumnSpec& columns = {});

/// Writes the dataset back in the same long format. Labels are written to
/// the group column when present.
void export_long_csv(const Dataset& d, const std::filesystem::path& path, const ColumnSpec& columns = {});
void export_long_csv(const Dataset& d, std::ostream& out, const ColumnSpec& columns = {});

/// Transforms every series to zero mean and unit sample (n-1) standard
/// deviation. Throws ConstantSeries naming every offending id.
Dataset zscore_series(const Dataset& d);

}  // namespace tsfeat
