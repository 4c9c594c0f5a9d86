#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsfeat/matrix.hpp"
#include "tsfeat/normalize.hpp"

namespace tsfeat {

enum class ProjectionMethod { PCA, TSNE };

std::string_view to_string(ProjectionMethod m) noexcept;
ProjectionMethod parse_projection(std::string_view name);

struct TsneOptions {
    double perplexity = 15.0;
    std::size_t iterations = 1000;
    std::size_t exaggeration_iterations = 250;
    double exaggeration = 12.0;
    double learning_rate = 200.0;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    std::uint64_t seed = 0;
};

struct ProjectionConfig {
    ProjectionMethod method = ProjectionMethod::PCA;
    NormalizationMethod normalization = NormalizationMethod::ZScore;
    TsneOptions tsne;
};

struct Embedding {
    ProjectionMethod method = ProjectionMethod::PCA;
    Matrix coords;  // n x 2
    std::optional<std::pair<double, double>> variance_explained;
    // t-SNE only: KL(P||Q) at the initial layout and at the end.
    std::optional<double> kl_initial;
    std::optional<double> kl_final;
};

/// PCA onto the top two eigenvectors of the covariance matrix. Columns are
/// standardized first when `standardize` is set. Each axis is oriented so
/// its largest-magnitude loading is positive.
Embedding pca_2d(const Matrix& x, bool standardize = false);

/// Row-wise conditional affinities P(j|i) from squared distances, with each
/// row's Gaussian bandwidth found by bisection so that its entropy in bits
/// matches log2(perplexity).
struct Affinities {
    Matrix conditional;               // row-stochastic, zero diagonal
    std::vector<double> entropy_bits; // achieved entropy per row
};

Affinities calibrate_affinities(const Matrix& squared_distances, double perplexity);

/// Symmetrized joint probabilities (P + P^T) / 2n.
Matrix joint_probabilities(const Matrix& conditional);

/// KL(P||Q) for an embedding under the Student-t kernel.
double tsne_kl(const Matrix& joint, const Matrix& coords);

/// Exact t-SNE. Throws PerplexityInfeasible unless perplexity < (n-1)/3.
Embedding tsne_2d(const Matrix& x, const TsneOptions& options);

/// Mean and 2x2 sample covariance of one group's embedded points, from
/// which a confidence ellipse can be drawn.
struct GroupEllipse {
    std::string group;
    std::size_t count = 0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    double cov_xx = 0.0;
    double cov_xy = 0.0;
    double cov_yy = 0.0;
};

/// Groups with fewer than three points are skipped.
std::vector<GroupEllipse> group_ellipses(const Matrix& coords, const std::vector<std::string>& groups);

struct ProjectedTable {
    std::vector<std::string> ids;
    std::vector<std::string> groups;  // empty when unlabeled
    std::vector<FeatureKey> features;  // columns used
    std::vector<FeatureKey> dropped;   // degenerate or non-finite after normalization
    Embedding embedding;
    std::vector<GroupEllipse> ellipses;
};

/// Normalizes the table, drops columns that are degenerate or contain
/// non-finite values, and embeds the rows. PCA standardizes the columns
/// only under z-score normalization.
ProjectedTable project_table(const FeatureTable& ft, const ProjectionConfig& config);

}  // namespace tsfeat
