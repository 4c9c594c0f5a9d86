#include "tsfeat/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "tsfeat/csv.hpp"
#include "tsfeat/error.hpp"
#include "tsfeat/stats.hpp"

namespace tsfeat {

Dataset::Dataset(SeriesMap series, std::optional<LabelMap> labels)
    : series_(std::move(series)), labels_(std::move(labels)) {
    if (series_.empty()) throw Error(ErrorKind::EmptySeries, "dataset contains no series");
    for (const auto& [id, values] : series_) {
        if (values.size() < 2) {
            throw Error(ErrorKind::EmptySeries,
                        "series '" + id + "' has " + std::to_string(values.size()) +
                            " value(s); at least 2 are required");
        }
        for (double v : values) {
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::NonNumericValue, "series '" + id + "' contains a non-finite value");
            }
        }
    }
    if (labels_) {
        for (const auto& [id, values] : series_) {
            auto it = labels_->find(id);
            if (it == labels_->end() || it->second.empty()) {
                throw Error(ErrorKind::UnlabeledSeries, "series '" + id + "' has no group label");
            }
        }
        for (const auto& [id, label] : *labels_) {
            if (!series_.contains(id)) {
                throw Error(ErrorKind::InconsistentLabel, "label given for unknown series '" + id + "'");
            }
        }
    }
}

std::optional<std::string> Dataset::label_of(const std::string& id) const {
    if (!labels_) return std::nullopt;
    auto it = labels_->find(id);
    if (it == labels_->end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> Dataset::distinct_labels() const {
    std::set<std::string> out;
    if (labels_)
        for (const auto& [id, label] : *labels_) out.insert(label);
    return {out.begin(), out.end()};
}

namespace {

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::MissingColumn, "column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
}

std::string at_line(std::size_t line) { return " (line " + std::to_string(line) + ")"; }

}  // namespace

Dataset ingest_long_csv(std::istream& in, const ColumnSpec& columns) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw Error(ErrorKind::EmptySeries, "input has no header row");

    const std::size_t id_col = column_index(*header, columns.id);
    const std::size_t time_col = column_index(*header, columns.time);
    const std::size_t value_col = column_index(*header, columns.value);
    std::optional<std::size_t> group_col;
    if (columns.group) group_col = column_index(*header, *columns.group);

    std::size_t needed = std::max({id_col, time_col, value_col});
    if (group_col) needed = std::max(needed, *group_col);

    std::map<std::string, std::map<long long, double>> points;
    Dataset::LabelMap labels;

    while (auto row = reader.next()) {
        const std::size_t line = reader.line();
        if (row->size() <= needed) {
            throw Error(ErrorKind::MissingColumn, "row has " + std::to_string(row->size()) +
                                                      " field(s), expected " + std::to_string(header->size()) +
                                                      at_line(line));
        }
        const std::string& id = (*row)[id_col];
        auto t = csv::parse_integer((*row)[time_col]);
        if (!t) {
            throw Error(ErrorKind::NonNumericValue,
                        "time index '" + (*row)[time_col] + "' is not an integer" + at_line(line));
        }
        auto v = csv::parse_double((*row)[value_col]);
        if (!v || !std::isfinite(*v)) {
            throw Error(ErrorKind::NonNumericValue,
                        "value '" + (*row)[value_col] + "' is not a finite number" + at_line(line));
        }
        auto& series = points[id];
        if (!series.emplace(*t, *v).second) {
            throw Error(ErrorKind::DuplicateTimepoint,
                        "series '" + id + "' has more than one value at time " + std::to_string(*t) + at_line(line));
        }
        if (group_col) {
            const std::string& g = (*row)[*group_col];
            if (g.empty()) {
                throw Error(ErrorKind::UnlabeledSeries, "series '" + id + "' has an empty group label" + at_line(line));
            }
            auto [it, inserted] = labels.emplace(id, g);
            if (!inserted && it->second != g) {
                throw Error(ErrorKind::InconsistentLabel,
                            "series '" + id + "' has labels '" + it->second + "' and '" + g + "'" + at_line(line));
            }
        }
    }

    if (points.empty()) throw Error(ErrorKind::EmptySeries, "input has no data rows");

    Dataset::SeriesMap series;
    for (auto& [id, by_time] : points) {
        std::vector<double> values;
        values.reserve(by_time.size());
        for (const auto& [t, v] : by_time) values.push_back(v);
        series.emplace(id, std::move(values));
    }
    std::optional<Dataset::LabelMap> label_map;
    if (group_col) label_map = std::move(labels);
    return Dataset(std::move(series), std::move(label_map));
}

Dataset ingest_long_csv(const std::filesystem::path& path, const ColumnSpec& columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
    return ingest_long_csv(in, columns);
}

void export_long_csv(const Dataset& d, std::ostream& out, const ColumnSpec& columns) {
    const bool with_group = d.labeled();
    const std::string group_name = columns.group.value_or("group");
    std::vector<std::string> header{columns.id, columns.time, columns.value};
    if (with_group) header.push_back(group_name);
    csv::write_row(out, header);
    for (const auto& [id, values] : d.series()) {
        const auto label = d.label_of(id);
        for (std::size_t t = 0; t < values.size(); ++t) {
            std::vector<std::string> row{id, std::to_string(t), csv::format_double(values[t])};
            if (with_group) row.push_back(*label);
            csv::write_row(out, row);
        }
    }
}

void export_long_csv(const Dataset& d, const std::filesystem::path& path, const ColumnSpec& columns) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
    export_long_csv(d, out, columns);
}

Dataset zscore_series(const Dataset& d) {
    Dataset::SeriesMap out;
    std::vector<std::string> constant;
    for (const auto& [id, values] : d.series()) {
        const double m = stats::mean(values);
        const double sd = stats::stddev(values);
        if (!(sd > 0.0)) {
            constant.push_back(id);
            continue;
        }
        std::vector<double> z(values.size());
        std::transform(values.begin(), values.end(), z.begin(), [&](double v) { return (v - m) / sd; });
        out.emplace(id, std::move(z));
    }
    if (!constant.empty()) {
        std::string names;
        for (const auto& id : constant) names += (names.empty() ? "" : ", ") + id;
        throw Error(ErrorKind::ConstantSeries, "constant series cannot be z-scored: " + names);
    }
    return Dataset(std::move(out), d.labels());
}

}  // namespace tsfeat
