#include "tsfeat/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsfeat/error.hpp"
#include "tsfeat/parallel.hpp"
#include "tsfeat/stats.hpp"

namespace tsfeat {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string_view to_string(Linkage l) noexcept {
    switch (l) {
        case Linkage::Average: return "average";
        case Linkage::Complete: return "complete";
        case Linkage::Single: return "single";
    }
    return "average";
}

Linkage parse_linkage(std::string_view name) {
    if (name == "average") return Linkage::Average;
    if (name == "complete") return Linkage::Complete;
    if (name == "single") return Linkage::Single;
    throw Error(ErrorKind::InvalidParameter,
                "unknown linkage '" + std::string(name) + "' (expected average, complete or single)");
}

std::string_view to_string(CorrelationKind k) noexcept {
    return k == CorrelationKind::Pearson ? "pearson" : "spearman";
}

CorrelationKind parse_correlation(std::string_view name) {
    if (name == "pearson") return CorrelationKind::Pearson;
    if (name == "spearman") return CorrelationKind::Spearman;
    throw Error(ErrorKind::InvalidParameter,
                "unknown correlation method '" + std::string(name) + "' (expected pearson or spearman)");
}

Matrix euclidean_distance_matrix(const Matrix& rows) {
    for (double v : rows.data())
        if (!std::isfinite(v)) throw Error(ErrorKind::NaNInput, "distance input contains NaN or Inf");

    const std::size_t n = rows.rows();
    Matrix d(n, n);
    parallel_for(n, [&](std::size_t i) {
        auto a = rows.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            auto b = rows.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) {
                const double diff = a[k] - b[k];
                s += diff * diff;
            }
            d(i, j) = std::sqrt(s);
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) d(i, j) = d(j, i);
    return d;
}

Dendrogram hierarchical_cluster(const Matrix& dist, Linkage linkage) {
    const std::size_t n = dist.rows();
    if (n < 2) throw Error(ErrorKind::TooFewItems, "clustering needs at least two items");
    if (dist.cols() != n) throw Error(ErrorKind::InvalidParameter, "distance matrix must be square");
    for (double v : dist.data())
        if (!std::isfinite(v)) throw Error(ErrorKind::NaNInput, "distance matrix contains NaN or Inf");

    Matrix d = dist;
    std::vector<bool> active(n, true);
    std::vector<std::size_t> size(n, 1);
    std::vector<std::size_t> node(n);
    for (std::size_t i = 0; i < n; ++i) node[i] = i;

    // nn[i]: nearest active slot j > i (lowest j among ties).
    std::vector<std::size_t> nn(n, n);
    std::vector<double> nn_d(n, kInf);
    auto refresh = [&](std::size_t i) {
        nn[i] = n;
        nn_d[i] = kInf;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (active[j] && d(i, j) < nn_d[i]) {
                nn_d[i] = d(i, j);
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    Dendrogram out;
    out.merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t a = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i] && nn[i] < n && (a == n || nn_d[i] < nn_d[a])) a = i;
        }
        const std::size_t b = nn[a];
        const double height = nn_d[a];

        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a || k == b) continue;
            double v = 0.0;
            switch (linkage) {
                case Linkage::Average:
                    v = (static_cast<double>(size[a]) * d(a, k) + static_cast<double>(size[b]) * d(b, k)) /
                        static_cast<double>(size[a] + size[b]);
                    break;
                case Linkage::Complete: v = std::max(d(a, k), d(b, k)); break;
                case Linkage::Single: v = std::min(d(a, k), d(b, k)); break;
            }
            d(a, k) = v;
            d(k, a) = v;
        }
        active[b] = false;
        size[a] += size[b];
        out.merges.push_back({node[a], node[b], height, size[a]});
        node[a] = n + step;

        refresh(a);
        for (std::size_t k = 0; k < a; ++k) {
            if (!active[k]) continue;
            if (nn[k] == a || nn[k] == b) {
                refresh(k);
            } else if (d(k, a) < nn_d[k] || (d(k, a) == nn_d[k] && a < nn[k])) {
                nn[k] = a;
                nn_d[k] = d(k, a);
            }
        }
        for (std::size_t k = a + 1; k < b; ++k)
            if (active[k] && nn[k] == b) refresh(k);
    }

    // Leaf order: depth-first, left subtree before right.
    std::vector<std::size_t> stack{2 * n - 2};
    while (!stack.empty()) {
        const std::size_t id = stack.back();
        stack.pop_back();
        if (id < n) {
            out.leaf_order.push_back(id);
        } else {
            const Merge& m = out.merges[id - n];
            stack.push_back(m.right);
            stack.push_back(m.left);
        }
    }
    return out;
}

Matrix correlation_matrix(const Matrix& cols, CorrelationKind kind, bool absolute) {
    const std::size_t n = cols.rows();
    const std::size_t p = cols.cols();
    if (n < 3) throw Error(ErrorKind::InsufficientData, "correlation needs at least three observations");

    // Each column is centered and scaled to unit norm; correlations are then
    // plain dot products.
    Matrix unit(p, n);
    for (std::size_t c = 0; c < p; ++c) {
        std::vector<double> v = cols.column(c);
        for (double x : v)
            if (!std::isfinite(x)) throw Error(ErrorKind::NaNInput, "correlation input contains NaN or Inf");
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        if (*lo == *hi) {
            throw Error(ErrorKind::ZeroVarianceColumn, "column " + std::to_string(c) + " has zero variance");
        }
        if (kind == CorrelationKind::Spearman) v = stats::average_ranks(v);
        const double m = stats::mean(v);
        double ss = 0.0;
        for (double& x : v) {
            x -= m;
            ss += x * x;
        }
        const double norm = std::sqrt(ss);
        auto dst = unit.row(c);
        for (std::size_t r = 0; r < n; ++r) dst[r] = v[r] / norm;
    }

    Matrix out(p, p);
    parallel_for(p, [&](std::size_t i) {
        out(i, i) = 1.0;
        auto a = unit.row(i);
        for (std::size_t j = i + 1; j < p; ++j) {
            auto b = unit.row(j);
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += a[r] * b[r];
            s = std::clamp(s, -1.0, 1.0);
            out(i, j) = absolute ? std::fabs(s) : s;
        }
    });
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < i; ++j) out(i, j) = out(j, i);
    return out;
}

ClusteredMatrix cluster_matrix(const FeatureTable& ft, NormalizationMethod method, Linkage linkage) {
    if (ft.empty()) throw Error(ErrorKind::InsufficientData, "feature table is empty");
    const WideTable w = pivot(ft);

    ClusteredMatrix cm;
    cm.row_ids = w.ids;
    cm.row_groups = w.groups;

    std::vector<std::vector<double>> kept;
    for (std::size_t f = 0; f < w.features.size(); ++f) {
        std::vector<double> col = w.values.column(f);
        const bool finite = std::all_of(col.begin(), col.end(), [](double v) { return std::isfinite(v); });
        if (!finite) {
            cm.dropped_nonfinite.push_back(w.features[f]);
            continue;
        }
        try {
            kept.push_back(normalize_vector(col, method));
            cm.features.push_back(w.features[f]);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateScale) throw;
            cm.dropped_degenerate.push_back(w.features[f]);
        }
    }
    if (w.ids.size() < 2 || kept.size() < 2) {
        throw Error(ErrorKind::InsufficientData,
                    "matrix needs at least 2 series and 2 usable features; have " + std::to_string(w.ids.size()) +
                        " series and " + std::to_string(kept.size()) + " features after filtering");
    }

    cm.values = Matrix(w.ids.size(), kept.size());
    for (std::size_t c = 0; c < kept.size(); ++c)
        for (std::size_t r = 0; r < w.ids.size(); ++r) cm.values(r, c) = kept[c][r];

    cm.row_dendrogram = hierarchical_cluster(euclidean_distance_matrix(cm.values), linkage);
    cm.col_dendrogram = hierarchical_cluster(euclidean_distance_matrix(cm.values.transposed()), linkage);
    cm.row_order = cm.row_dendrogram.leaf_order;
    cm.col_order = cm.col_dendrogram.leaf_order;
    return cm;
}

}  // namespace tsfeat
