#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Each one follows the textbook definition directly (double loops,
// exhaustive enumeration, explicit DFT sums) and shares no code with the
// engine beyond the Matrix container.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsfeat/matrix.hpp"

namespace oracle {

using tsfeat::Matrix;
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double mean(const std::vector<double>& x) {
    long double s = 0;
    for (double v : x) s += v;
    return static_cast<double>(s / x.size());
}

inline double var(const std::vector<double>& x) {
    if (x.size() < 2) return kNaN;
    const double m = mean(x);
    long double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return static_cast<double>(s / (x.size() - 1));
}

inline double moment(const std::vector<double>& x, int k) {
    const double m = mean(x);
    long double s = 0;
    for (double v : x) s += std::pow(v - m, k);
    return static_cast<double>(s / x.size());
}

// Type-7 quantile computed from the (1-based) order statistics.
inline double quantile7(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    const double h = (x.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - lo) * (x[hi] - x[lo]);
}

inline double median(const std::vector<double>& x) {
    std::vector<double> s = x;
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

inline bool constant(const std::vector<double>& x) {
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
}

inline double acf(const std::vector<double>& x, std::size_t k) {
    const double m = mean(x);
    double num = 0, den = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        den += (x[t] - m) * (x[t] - m);
        if (t + k < x.size()) num += (x[t] - m) * (x[t + k] - m);
    }
    return num / den;
}

// |X_i|^2 by the explicit DFT sum, bins 1..floor(N/2).
inline std::vector<double> periodogram(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> p;
    for (std::size_t i = 1; i <= n / 2; ++i) {
        double re = 0, im = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double a = 2 * std::numbers::pi * static_cast<double>(i * t % n) / n;
            re += x[t] * std::cos(a);
            im -= x[t] * std::sin(a);
        }
        p.push_back(re * re + im * im);
    }
    return p;
}

inline std::vector<double> window_stat(const std::vector<double>& x, bool variance) {
    const std::size_t w = std::max<std::size_t>(2, x.size() / 10);
    std::vector<double> out;
    for (std::size_t start = 0; start + w <= x.size(); start += w) {
        std::vector<double> win(x.begin() + start, x.begin() + start + w);
        out.push_back(variance ? var(win) : mean(win));
    }
    return out;
}

/// Definitional value of a native catalog feature.
inline double feature(const std::string& name, const std::vector<double>& x) {
    const std::size_t n = x.size();
    const bool flat = constant(x);
    if (name == "mean") return mean(x);
    if (name == "stddev") return std::sqrt(var(x));
    if (name == "skewness") return flat ? kNaN : moment(x, 3) / std::pow(moment(x, 2), 1.5);
    if (name == "kurtosis_excess") return flat ? kNaN : moment(x, 4) / std::pow(moment(x, 2), 2) - 3;
    if (name == "median") return median(x);
    if (name == "iqr") return quantile7(x, 0.75) - quantile7(x, 0.25);
    if (name == "min") return *std::min_element(x.begin(), x.end());
    if (name == "max") return *std::max_element(x.begin(), x.end());
    if (name == "mad") {
        const double m = median(x);
        std::vector<double> d;
        for (double v : x) d.push_back(std::fabs(v - m));
        return median(d);
    }
    if (name.rfind("acf_lag_", 0) == 0) {
        const std::size_t k = std::stoul(name.substr(8));
        return (flat || n < 2 * k + 1) ? kNaN : acf(x, k);
    }
    if (name == "acf_first_zero") {
        if (flat) return kNaN;
        for (std::size_t k = 1; k <= n / 2; ++k)
            if (acf(x, k) <= 0) return static_cast<double>(k);
        return static_cast<double>(n / 2);
    }
    if (name == "acf_sumsq_10") {
        if (flat || n < 21) return kNaN;
        double s = 0;
        for (std::size_t k = 1; k <= 10; ++k) s += acf(x, k) * acf(x, k);
        return s;
    }
    if (name == "spectral_entropy" || name == "spectral_centroid") {
        if (flat || (name == "spectral_entropy" && n < 4)) return kNaN;
        const auto p = periodogram(x);
        double total = 0;
        for (double v : p) total += v;
        if (!(total > 0)) return kNaN;
        if (name == "spectral_centroid") {
            double num = 0;
            for (std::size_t i = 0; i < p.size(); ++i) num += (i + 1.0) / n * p[i];
            return num / total;
        }
        double h = 0;
        for (double v : p)
            if (v > 0) h -= v / total * std::log(v / total);
        return h / std::log(static_cast<double>(p.size()));
    }
    if (name == "crossing_points") {
        const double m = mean(x);
        int c = 0;
        for (std::size_t t = 0; t + 1 < n; ++t) c += ((x[t] >= m) != (x[t + 1] >= m));
        return c;
    }
    if (name == "longest_stretch_above_mean") {
        const double m = mean(x);
        int best = 0;
        for (std::size_t s = 0; s < n; ++s) {
            std::size_t e = s;
            while (e < n && x[e] > m) ++e;
            best = std::max(best, static_cast<int>(e - s));
        }
        return best;
    }
    if (name == "trend_slope" || name == "trend_r2") {
        // Normal equations for x = a + b s, s = t/(n-1).
        double s1 = 0, s2 = 0, sx = 0, ssx = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double s = static_cast<double>(t) / (n - 1);
            s1 += s;
            s2 += s * s;
            sx += x[t];
            ssx += s * x[t];
        }
        const double b = (n * ssx - s1 * sx) / (n * s2 - s1 * s1);
        if (name == "trend_slope") return b;
        if (flat) return kNaN;
        const double a = (sx - b * s1) / n, m = sx / n;
        double sse = 0, sst = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double fit = a + b * static_cast<double>(t) / (n - 1);
            sse += (x[t] - fit) * (x[t] - fit);
            sst += (x[t] - m) * (x[t] - m);
        }
        return 1 - sse / sst;
    }
    if (name == "stability" || name == "lumpiness") {
        const auto w = window_stat(x, name == "lumpiness");
        return w.size() < 2 ? kNaN : var(w);
    }
    return kNaN;
}

inline Matrix euclidean(const Matrix& rows) {
    Matrix d(rows.rows(), rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i)
        for (std::size_t j = 0; j < rows.rows(); ++j) {
            double s = 0;
            for (std::size_t k = 0; k < rows.cols(); ++k) s += (rows(i, k) - rows(j, k)) * (rows(i, k) - rows(j, k));
            d(i, j) = std::sqrt(s);
        }
    return d;
}

struct OracleMerge {
    std::set<std::size_t> a, b;
    double height;
};

/// UPGMA by exhaustive recomputation: every step re-averages all cross
/// pairs of every cluster pair. Ties go to the pair whose (min leaf, min
/// leaf) is lexicographically lowest.
inline std::vector<OracleMerge> upgma(const Matrix& d) {
    std::vector<std::set<std::size_t>> clusters;
    for (std::size_t i = 0; i < d.rows(); ++i) clusters.push_back({i});
    std::vector<OracleMerge> merges;
    while (clusters.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        std::pair<std::size_t, std::size_t> best_key{SIZE_MAX, SIZE_MAX};
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                double s = 0;
                for (auto p : clusters[i])
                    for (auto q : clusters[j]) s += d(p, q);
                s /= static_cast<double>(clusters[i].size() * clusters[j].size());
                std::pair<std::size_t, std::size_t> key{std::min(*clusters[i].begin(), *clusters[j].begin()),
                                                        std::max(*clusters[i].begin(), *clusters[j].begin())};
                if (s < best || (s == best && key < best_key)) {
                    best = s;
                    best_key = key;
                    bi = i;
                    bj = j;
                }
            }
        merges.push_back({clusters[bi], clusters[bj], best});
        clusters[bi].insert(clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    return merges;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// Rank = 1 + #smaller + (#equal - 1)/2, by counting.
inline std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double less = 0, equal = 0;
        for (double v : x) {
            less += v < x[i];
            equal += v == x[i];
        }
        r[i] = 1 + less + (equal - 1) / 2;
    }
    return r;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(ranks(x), ranks(y));
}

struct Welch {
    double t, df;
};

inline Welch welch(const std::vector<double>& a, const std::vector<double>& b) {
    const double va = var(a), vb = var(b), na = a.size(), nb = b.size();
    const double t = (mean(a) - mean(b)) / std::sqrt(va / na + vb / nb);
    const double df = std::pow(va / na + vb / nb, 2) / (std::pow(va / na, 2) / (na - 1) + std::pow(vb / nb, 2) / (nb - 1));
    return {t, df};
}

/// Two-sided exact rank-sum p-value by enumerating every way to choose
/// which |a| of the pooled values belong to the first sample.
inline double wilcoxon_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto r = ranks(pooled);
    const std::size_t n = pooled.size(), na = a.size();
    double observed = 0;
    for (std::size_t i = 0; i < na; ++i) observed += r[i];
    double lower = 0, upper = 0, total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != na) continue;
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1u) s += r[i];
        total += 1;
        if (s <= observed + 1e-9) lower += 1;
        if (s >= observed - 1e-9) upper += 1;
    }
    return std::min(1.0, 2 * std::min(lower, upper) / total);
}

inline double rank_sum_w(const std::vector<double>& a, const std::vector<double>& b) {
    // Mann-Whitney U of `a`: pairs where a wins, ties count half.
    double u = 0;
    for (double x : a)
        for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    return u;
}

/// Holm adjustment: adj_(i) = max over j <= i of min(1, (m - j + 1) p_(j)).
inline std::vector<double> holm(const std::vector<double>& p) {
    const std::size_t m = p.size();
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return p[a] < p[b]; });
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        double best = 0;
        for (std::size_t j = 0; j <= i; ++j) best = std::max(best, std::min(1.0, (m - j) * p[idx[j]]));
        out[idx[i]] = best;
    }
    return out;
}

struct Acc {
    double accuracy, balanced;
};

inline Acc accuracy(const std::vector<int>& t, const std::vector<int>& p) {
    std::map<int, std::pair<int, int>> c;  // class -> (hits, total)
    int hits = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        c[t[i]].second++;
        if (t[i] == p[i]) {
            c[t[i]].first++;
            hits++;
        }
    }
    double rec = 0;
    for (auto& [k, v] : c) rec += static_cast<double>(v.first) / v.second;
    return {static_cast<double>(hits) / t.size(), rec / c.size()};
}

/// Mean silhouette width of points `x` (n x d) under labels `y`.
inline double silhouette(const Matrix& x, const std::vector<int>& y) {
    const Matrix d = euclidean(x);
    std::set<int> labels(y.begin(), y.end());
    double total = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        std::map<int, std::pair<double, int>> sums;
        for (std::size_t j = 0; j < x.rows(); ++j) {
            if (i == j) continue;
            sums[y[j]].first += d(i, j);
            sums[y[j]].second += 1;
        }
        const double a = sums[y[i]].second ? sums[y[i]].first / sums[y[i]].second : 0;
        double b = std::numeric_limits<double>::infinity();
        for (int l : labels)
            if (l != y[i] && sums[l].second) b = std::min(b, sums[l].first / sums[l].second);
        total += (b - a) / std::max(a, b);
    }
    return total / x.rows();
}

}  // namespace oracle
