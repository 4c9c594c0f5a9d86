#include "tsfeat/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "tsfeat/csv.hpp"
#include "tsfeat/error.hpp"
#include "tsfeat/parallel.hpp"
#include "tsfeat/stats.hpp"

namespace tsfeat {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// SeriesContext

SeriesContext::SeriesContext(std::span<const double> values) : values_(values) {
    if (!values_.empty()) {
        const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
        constant_ = *lo == *hi;
        mean_ = stats::mean(values_);
    }
}

double SeriesContext::variance() {
    if (!variance_) variance_ = stats::variance(values_);
    return *variance_;
}

double SeriesContext::central_moment(int k) {
    if (moments_.size() <= static_cast<std::size_t>(k)) moments_.resize(k + 1, kNaN);
    if (std::isnan(moments_[k])) {
        double s = 0.0;
        for (double v : values_) {
            const double d = v - mean_;
            double term = 1.0;
            for (int j = 0; j < k; ++j) term *= d;
            s += term;
        }
        moments_[k] = s / static_cast<double>(values_.size());
    }
    return moments_[k];
}

const std::vector<double>& SeriesContext::sorted() {
    if (!sorted_) {
        sorted_.emplace(values_.begin(), values_.end());
        std::sort(sorted_->begin(), sorted_->end());
    }
    return *sorted_;
}

double SeriesContext::median() { return stats::quantile_sorted(sorted(), 0.5); }

double SeriesContext::acf(std::size_t k) {
    const std::size_t n = values_.size();
    if (constant_ || k >= n) return kNaN;
    if (acf_.size() <= k) {
        acf_.resize(k + 1, kNaN);
        acf_done_.resize(k + 1, false);
    }
    if (!acf_done_[k]) {
        // c0 is shared by every lag; cache it at index 0.
        if (!acf_done_[0]) {
            double c0 = 0.0;
            for (double v : values_) c0 += (v - mean_) * (v - mean_);
            acf_[0] = c0;
            acf_done_[0] = true;
        }
        if (k > 0) {
            double ck = 0.0;
            for (std::size_t t = 0; t + k < n; ++t) ck += (values_[t] - mean_) * (values_[t + k] - mean_);
            acf_[k] = ck / acf_[0];
            acf_done_[k] = true;
        }
    }
    return k == 0 ? 1.0 : acf_[k];
}

const std::vector<double>& SeriesContext::periodogram() {
    if (!periodogram_) {
        // Goertzel recurrence per bin: one multiply-add per sample, no trig
        // in the inner loop. The DC bin is excluded so the mean is irrelevant,
        // but demeaning keeps the recurrence well scaled.
        const std::size_t n = values_.size();
        const std::size_t bins = n / 2;
        std::vector<double> power(bins);
        for (std::size_t i = 1; i <= bins; ++i) {
            const double omega = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
            const double coeff = 2.0 * std::cos(omega);
            double s1 = 0.0, s2 = 0.0;
            for (double v : values_) {
                const double s0 = (v - mean_) + coeff * s1 - s2;
                s2 = s1;
                s1 = s0;
            }
            const double p = s1 * s1 + s2 * s2 - coeff * s1 * s2;
            power[i - 1] = std::max(p, 0.0);
        }
        periodogram_ = std::move(power);
    }
    return *periodogram_;
}

std::size_t SeriesContext::window_width() const noexcept {
    return std::max<std::size_t>(2, values_.size() / 10);
}

void SeriesContext::compute_windows() {
    const std::size_t w = window_width();
    const std::size_t m = values_.size() / w;
    std::vector<double> means(m), vars(m);
    for (std::size_t j = 0; j < m; ++j) {
        auto win = values_.subspan(j * w, w);
        means[j] = stats::mean(win);
        vars[j] = stats::variance(win);
    }
    window_means_ = std::move(means);
    window_vars_ = std::move(vars);
}

const std::vector<double>& SeriesContext::window_means() {
    if (!window_means_) compute_windows();
    return *window_means_;
}

const std::vector<double>& SeriesContext::window_variances() {
    if (!window_vars_) compute_windows();
    return *window_vars_;
}

// ---------------------------------------------------------------------------
// Native kernels

namespace {

double k_mean(SeriesContext& c) { return c.mean(); }
double k_stddev(SeriesContext& c) { return std::sqrt(c.variance()); }

double k_skewness(SeriesContext& c) {
    if (c.constant()) return kNaN;
    return c.central_moment(3) / std::pow(c.central_moment(2), 1.5);
}

double k_kurtosis_excess(SeriesContext& c) {
    if (c.constant()) return kNaN;
    const double m2 = c.central_moment(2);
    return c.central_moment(4) / (m2 * m2) - 3.0;
}

double k_median(SeriesContext& c) { return c.median(); }

double k_iqr(SeriesContext& c) {
    const auto& s = c.sorted();
    return stats::quantile_sorted(s, 0.75) - stats::quantile_sorted(s, 0.25);
}

double k_min(SeriesContext& c) { return c.sorted().front(); }
double k_max(SeriesContext& c) { return c.sorted().back(); }

double k_mad(SeriesContext& c) {
    const double med = c.median();
    std::vector<double> dev(c.size());
    auto x = c.values();
    for (std::size_t i = 0; i < x.size(); ++i) dev[i] = std::fabs(x[i] - med);
    return stats::median(dev);
}

// Lag k needs N >= 2k + 1, i.e. more than twice the lag in samples.
FeatureKernel acf_lag(std::size_t k) {
    return [k](SeriesContext& c) {
        if (c.size() < 2 * k + 1) return kNaN;
        return c.acf(k);
    };
}

double k_acf_first_zero(SeriesContext& c) {
    if (c.constant()) return kNaN;
    const std::size_t max_lag = c.size() / 2;
    for (std::size_t k = 1; k <= max_lag; ++k)
        if (c.acf(k) <= 0.0) return static_cast<double>(k);
    return static_cast<double>(max_lag);
}

double k_acf_sumsq_10(SeriesContext& c) {
    if (c.constant() || c.size() < 21) return kNaN;
    double s = 0.0;
    for (std::size_t k = 1; k <= 10; ++k) s += c.acf(k) * c.acf(k);
    return s;
}

double k_spectral_entropy(SeriesContext& c) {
    if (c.constant() || c.size() < 4) return kNaN;
    const auto& p = c.periodogram();
    double total = 0.0;
    for (double v : p) total += v;
    if (!(total > 0.0)) return kNaN;
    double h = 0.0;
    for (double v : p) {
        const double q = v / total;
        if (q > 0.0) h -= q * std::log(q);
    }
    return h / std::log(static_cast<double>(p.size()));
}

double k_spectral_centroid(SeriesContext& c) {
    if (c.constant() || c.size() < 2) return kNaN;
    const auto& p = c.periodogram();
    const double n = static_cast<double>(c.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        num += (static_cast<double>(i + 1) / n) * p[i];
        den += p[i];
    }
    if (!(den > 0.0)) return kNaN;
    return num / den;
}

double k_crossing_points(SeriesContext& c) {
    auto x = c.values();
    const double mu = c.mean();
    std::size_t count = 0;
    for (std::size_t t = 0; t + 1 < x.size(); ++t) {
        const bool a = x[t] - mu >= 0.0;
        const bool b = x[t + 1] - mu >= 0.0;
        if (a != b) ++count;
    }
    return static_cast<double>(count);
}

double k_longest_stretch_above_mean(SeriesContext& c) {
    auto x = c.values();
    const double mu = c.mean();
    std::size_t best = 0, run = 0;
    for (double v : x) {
        run = v > mu ? run + 1 : 0;
        best = std::max(best, run);
    }
    return static_cast<double>(best);
}

struct TrendFit {
    double slope;
    double r2;
};

TrendFit trend_fit(SeriesContext& c) {
    auto x = c.values();
    const std::size_t n = x.size();
    const double denom = static_cast<double>(n - 1);
    // s_t = t/(n-1) has mean 1/2.
    double sss = 0.0, ssx = 0.0, sxx = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double ds = static_cast<double>(t) / denom - 0.5;
        const double dx = x[t] - c.mean();
        sss += ds * ds;
        ssx += ds * dx;
        sxx += dx * dx;
    }
    const double slope = ssx / sss;
    const double r2 = c.constant() ? kNaN : std::clamp(ssx * ssx / (sss * sxx), 0.0, 1.0);
    return {slope, r2};
}

double k_trend_slope(SeriesContext& c) { return trend_fit(c).slope; }
double k_trend_r2(SeriesContext& c) { return trend_fit(c).r2; }

double k_stability(SeriesContext& c) {
    const auto& m = c.window_means();
    if (m.size() < 2) return kNaN;
    return stats::variance(m);
}

double k_lumpiness(SeriesContext& c) {
    const auto& v = c.window_variances();
    if (v.size() < 2) return kNaN;
    return stats::variance(v);
}

std::vector<FeatureDescriptor> build_native_catalog() {
    const std::string dist = "native_dist";
    const std::string dyn = "native_dyn";
    std::vector<FeatureDescriptor> r{
        {"mean", dist, "arithmetic mean", false, k_mean},
        {"stddev", dist, "sample standard deviation (n-1)", false, k_stddev},
        {"skewness", dist, "biased-moment skewness m3/m2^1.5", true, k_skewness},
        {"kurtosis_excess", dist, "biased-moment excess kurtosis m4/m2^2 - 3", true, k_kurtosis_excess},
        {"median", dist, "median", false, k_median},
        {"iqr", dist, "interquartile range (type-7 quantiles)", false, k_iqr},
        {"min", dist, "minimum", false, k_min},
        {"max", dist, "maximum", false, k_max},
        {"mad", dist, "median absolute deviation from the median (unscaled)", false, k_mad},
    };
    for (std::size_t k : {1, 2, 3, 5, 10}) {
        r.push_back({"acf_lag_" + std::to_string(k), dyn,
                     "autocorrelation at lag " + std::to_string(k) + " (biased, demeaned)", true, acf_lag(k)});
    }
    r.push_back({"acf_first_zero", dyn, "first lag with non-positive autocorrelation, capped at N/2", true,
                 k_acf_first_zero});
    r.push_back({"acf_sumsq_10", dyn, "sum of squared autocorrelations at lags 1..10", true, k_acf_sumsq_10});
    r.push_back({"spectral_entropy", dyn, "normalized Shannon entropy of the periodogram", true,
                 k_spectral_entropy});
    r.push_back({"spectral_centroid", dyn, "power-weighted mean frequency (cycles/sample)", true,
                 k_spectral_centroid});
    r.push_back({"crossing_points", dyn, "number of crossings of the mean", false, k_crossing_points});
    r.push_back({"longest_stretch_above_mean", dyn, "longest run strictly above the mean", false,
                 k_longest_stretch_above_mean});
    r.push_back({"trend_slope", dyn, "OLS slope against rescaled time t/(n-1)", false, k_trend_slope});
    r.push_back({"trend_r2", dyn, "coefficient of determination of the linear trend", true, k_trend_r2});
    r.push_back({"stability", dyn, "variance of non-overlapping window means", false, k_stability});
    r.push_back({"lumpiness", dyn, "variance of non-overlapping window variances", false, k_lumpiness});
    return r;
}

}  // namespace

const std::vector<FeatureDescriptor>& native_catalog() {
    static const std::vector<FeatureDescriptor> catalog = build_native_catalog();
    return catalog;
}

std::vector<FeatureDescriptor> with_duplicate(std::vector<FeatureDescriptor> registry, const std::string& name,
                                              const std::string& new_set) {
    auto it = std::find_if(registry.begin(), registry.end(), [&](const auto& d) { return d.name == name; });
    if (it == registry.end()) throw Error(ErrorKind::InvalidParameter, "no feature named '" + name + "'");
    FeatureDescriptor copy = *it;
    copy.set = new_set;
    registry.push_back(std::move(copy));
    return registry;
}

// ---------------------------------------------------------------------------
// FeatureTable

bool FeatureRecord::operator==(const FeatureRecord& o) const {
    const bool same_value = (value == o.value) || (std::isnan(value) && std::isnan(o.value));
    return id == o.id && name == o.name && set == o.set && group == o.group && same_value;
}

FeatureTable::FeatureTable(std::vector<FeatureRecord> records) : records_(std::move(records)) {
    std::sort(records_.begin(), records_.end(), [](const FeatureRecord& a, const FeatureRecord& b) {
        return std::tie(a.id, a.name, a.set) < std::tie(b.id, b.name, b.set);
    });
    if (records_.empty()) return;

    const bool has_group = records_.front().group.has_value();
    std::map<std::string, std::optional<std::string>> group_of;
    std::set<FeatureKey> keys;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (i > 0) {
            const auto& p = records_[i - 1];
            if (p.id == r.id && p.name == r.name && p.set == r.set) {
                throw Error(ErrorKind::IncompleteTable,
                            "duplicate record for series '" + r.id + "', feature '" + r.set + "/" + r.name + "'");
            }
        }
        if (r.group.has_value() != has_group) {
            throw Error(ErrorKind::UnlabeledSeries, "series '" + r.id + "' lacks a group label");
        }
        auto [it, inserted] = group_of.emplace(r.id, r.group);
        if (!inserted && it->second != r.group) {
            throw Error(ErrorKind::InconsistentLabel, "series '" + r.id + "' has more than one group label");
        }
        keys.insert({r.name, r.set});
    }
    if (records_.size() != group_of.size() * keys.size()) {
        throw Error(ErrorKind::IncompleteTable, "feature table is missing (series, feature) records: expected " +
                                                    std::to_string(group_of.size() * keys.size()) + ", found " +
                                                    std::to_string(records_.size()));
    }
}

std::vector<std::string> FeatureTable::series_ids() const {
    std::vector<std::string> ids;
    for (const auto& r : records_)
        if (ids.empty() || ids.back() != r.id) ids.push_back(r.id);
    return ids;
}

std::vector<FeatureKey> FeatureTable::features() const {
    std::set<FeatureKey> keys;
    for (const auto& r : records_) keys.insert({r.name, r.set});
    return {keys.begin(), keys.end()};
}

std::vector<std::string> FeatureTable::sets() const {
    std::set<std::string> s;
    for (const auto& r : records_) s.insert(r.set);
    return {s.begin(), s.end()};
}

FeatureTable FeatureTable::subset_set(const std::string& set) const {
    std::vector<FeatureRecord> out;
    for (const auto& r : records_)
        if (r.set == set) out.push_back(r);
    return FeatureTable(std::move(out));
}

FeatureTable FeatureTable::subset_features(const std::vector<FeatureKey>& keep) const {
    const std::set<FeatureKey> k(keep.begin(), keep.end());
    std::vector<FeatureRecord> out;
    for (const auto& r : records_)
        if (k.contains(FeatureKey{r.name, r.set})) out.push_back(r);
    return FeatureTable(std::move(out));
}

WideTable pivot(const FeatureTable& ft) {
    WideTable w;
    w.ids = ft.series_ids();
    w.features = ft.features();
    w.values = Matrix(w.ids.size(), w.features.size());
    // Canonical order is (id, name, set) and features() is sorted by
    // (name, set), so records fill the matrix row by row.
    const auto& recs = ft.records();
    for (std::size_t i = 0; i < recs.size(); ++i) w.values.data()[i] = recs[i].value;
    if (ft.labeled()) {
        for (std::size_t r = 0; r < w.ids.size(); ++r) w.groups.push_back(*recs[r * w.features.size()].group);
    }
    return w;
}

// ---------------------------------------------------------------------------
// Extraction and quality

FeatureTable extract_features(const Dataset& d, const std::vector<FeatureDescriptor>& registry) {
    if (registry.empty()) throw Error(ErrorKind::EmptyRegistry, "feature registry is empty");
    {
        std::set<FeatureKey> seen;
        for (const auto& f : registry) {
            if (!seen.insert({f.name, f.set}).second) {
                throw Error(ErrorKind::InvalidParameter, "feature '" + f.set + "/" + f.name + "' registered twice");
            }
        }
    }

    std::vector<const std::pair<const std::string, std::vector<double>>*> entries;
    for (const auto& e : d.series()) entries.push_back(&e);

    std::vector<std::vector<double>> values(entries.size());
    parallel_for(entries.size(), [&](std::size_t i) {
        SeriesContext ctx(entries[i]->second);
        auto& row = values[i];
        row.resize(registry.size());
        for (std::size_t f = 0; f < registry.size(); ++f) {
            try {
                row[f] = registry[f].kernel(ctx);
            } catch (const std::exception& e) {
                std::clog << "feature '" << registry[f].name << "' failed on series '" << entries[i]->first
                          << "': " << e.what() << '\n';
                row[f] = kNaN;
            }
        }
    });

    std::vector<FeatureRecord> records;
    records.reserve(entries.size() * registry.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& id = entries[i]->first;
        const auto label = d.label_of(id);
        for (std::size_t f = 0; f < registry.size(); ++f) {
            records.push_back({id, registry[f].name, registry[f].set, values[i][f], label});
        }
    }
    return FeatureTable(std::move(records));
}

QualityReport quality_report(const FeatureTable& ft) {
    if (ft.empty()) throw Error(ErrorKind::EmptyTable, "feature table is empty");
    const WideTable w = pivot(ft);
    QualityReport report;
    const double n = static_cast<double>(w.ids.size());
    for (std::size_t f = 0; f < w.features.size(); ++f) {
        std::size_t nan = 0, pinf = 0, ninf = 0;
        for (std::size_t r = 0; r < w.ids.size(); ++r) {
            const double v = w.values(r, f);
            if (std::isnan(v)) ++nan;
            else if (std::isinf(v)) (v > 0 ? pinf : ninf) += 1;
        }
        const std::size_t numeric = w.ids.size() - nan - pinf - ninf;
        report.rows.push_back({w.features[f], static_cast<double>(numeric) / n, static_cast<double>(nan) / n,
                               static_cast<double>(pinf) / n, static_cast<double>(ninf) / n});
    }
    return report;
}

// ---------------------------------------------------------------------------
// CSV

void write_feature_csv(const FeatureTable& ft, std::ostream& out) {
    const bool labeled = ft.labeled();
    std::vector<std::string> header{"id", "names", "values", "method"};
    if (labeled) header.push_back("group");
    csv::write_row(out, header);
    for (const auto& r : ft.records()) {
        std::vector<std::string> row{r.id, r.name, csv::format_double(r.value), r.set};
        if (labeled) row.push_back(*r.group);
        csv::write_row(out, row);
    }
}

void write_feature_csv(const FeatureTable& ft, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
    write_feature_csv(ft, out);
}

FeatureTable read_feature_csv(std::istream& in) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw Error(ErrorKind::EmptyTable, "feature file has no header");
    auto col = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(header->begin(), header->end(), name);
        if (it == header->end()) return std::nullopt;
        return static_cast<std::size_t>(it - header->begin());
    };
    auto require = [&](const std::string& name) {
        auto c = col(name);
        if (!c) throw Error(ErrorKind::MissingColumn, "column '" + name + "' not found in feature file header");
        return *c;
    };
    const std::size_t id_c = require("id");
    const std::size_t name_c = require("names");
    const std::size_t value_c = require("values");
    const std::size_t set_c = require("method");
    const auto group_c = col("group");

    std::vector<FeatureRecord> records;
    while (auto row = reader.next()) {
        if (row->size() < header->size()) {
            throw Error(ErrorKind::MissingColumn, "short row at line " + std::to_string(reader.line()));
        }
        auto v = csv::parse_double((*row)[value_c]);
        if (!v) {
            throw Error(ErrorKind::NonNumericValue, "value '" + (*row)[value_c] + "' at line " +
                                                        std::to_string(reader.line()) + " is not a number");
        }
        FeatureRecord r{(*row)[id_c], (*row)[name_c], (*row)[set_c], *v, std::nullopt};
        if (group_c) r.group = (*row)[*group_c];
        records.push_back(std::move(r));
    }
    if (records.empty()) throw Error(ErrorKind::EmptyTable, "feature file has no records");
    return FeatureTable(std::move(records));
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
    return read_feature_csv(in);
}

}  // namespace tsfeat
