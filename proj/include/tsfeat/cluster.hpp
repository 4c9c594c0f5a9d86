#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tsfeat/features.hpp"
#include "tsfeat/matrix.hpp"
#include "tsfeat/normalize.hpp"

namespace tsfeat {

enum class Linkage { Average, Complete, Single };

std::string_view to_string(Linkage l) noexcept;
Linkage parse_linkage(std::string_view name);

/// One agglomeration step. Node ids follow the usual convention: leaves are
/// 0..n-1 and the cluster created by merge k has id n+k. `left` is the
/// cluster containing the lower-indexed founding leaf.
struct Merge {
    std::size_t left;
    std::size_t right;
    double height;
    std::size_t size;
};

struct Dendrogram {
    std::vector<Merge> merges;
    std::vector<std::size_t> leaf_order;
};

/// Pairwise Euclidean distances between the rows of `rows`.
/// Throws NaNInput if any entry is not finite.
Matrix euclidean_distance_matrix(const Matrix& rows);

/// Agglomerative clustering of a symmetric distance matrix. Among equal
/// minimal distances the lexicographically lowest (i, j) pair of cluster
/// slots merges first, where a cluster's slot is its lowest leaf index.
Dendrogram hierarchical_cluster(const Matrix& dist, Linkage linkage = Linkage::Average);

/// Average-linkage (UPGMA) clustering.
inline Dendrogram upgma(const Matrix& dist) { return hierarchical_cluster(dist, Linkage::Average); }

enum class CorrelationKind { Pearson, Spearman };

std::string_view to_string(CorrelationKind k) noexcept;
CorrelationKind parse_correlation(std::string_view name);

/// Correlation between the columns of `cols` (rows are observations).
/// Throws ZeroVarianceColumn for a constant column, InsufficientData for
/// fewer than three rows.
Matrix correlation_matrix(const Matrix& cols, CorrelationKind kind, bool absolute);

struct ClusteredMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> row_groups;  // empty when unlabeled
    std::vector<FeatureKey> features;
    Matrix values;  // normalized, in the original row/column order
    std::vector<std::size_t> row_order;
    std::vector<std::size_t> col_order;
    Dendrogram row_dendrogram;
    Dendrogram col_dendrogram;
    std::vector<FeatureKey> dropped_nonfinite;
    std::vector<FeatureKey> dropped_degenerate;
};

/// Filters features with any NaN/Inf, normalizes the remaining columns and
/// orders rows and columns by hierarchical clustering on Euclidean
/// distances. Throws InsufficientData if fewer than 2 rows or 2 columns
/// survive.
ClusteredMatrix cluster_matrix(const FeatureTable& ft, NormalizationMethod method,
                               Linkage linkage = Linkage::Average);

}  // namespace tsfeat
