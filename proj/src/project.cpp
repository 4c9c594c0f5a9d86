#include "tsfeat/project.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "tsfeat/error.hpp"
#include "tsfeat/parallel.hpp"
#include "tsfeat/rng.hpp"
#include "tsfeat/stats.hpp"

namespace tsfeat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite_input(const Matrix& x) {
    if (x.rows() < 3 || x.cols() < 2) {
        throw Error(ErrorKind::InsufficientData, "projection needs at least 3 rows and 2 columns, got " +
                                                     std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    }
    for (double v : x.data())
        if (!std::isfinite(v)) throw Error(ErrorKind::InsufficientData, "projection input contains NaN or Inf");
}

Matrix squared_distances(const Matrix& x) {
    const std::size_t n = x.rows();
    Matrix d(n, n);
    parallel_for(n, [&](std::size_t i) {
        auto a = x.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            auto b = x.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
            d(i, j) = s;
        }
    });
    return d;
}

}  // namespace

std::string_view to_string(ProjectionMethod m) noexcept { return m == ProjectionMethod::PCA ? "pca" : "tsne"; }

ProjectionMethod parse_projection(std::string_view name) {
    if (name == "pca" || name == "PCA") return ProjectionMethod::PCA;
    if (name == "tsne" || name == "t-SNE" || name == "TSNE") return ProjectionMethod::TSNE;
    throw Error(ErrorKind::InvalidParameter, "unknown projection method '" + std::string(name) +
                                                 "' (expected pca or tsne)");
}

Embedding pca_2d(const Matrix& x, bool standardize) {
    require_finite_input(x);
    const auto n = static_cast<Eigen::Index>(x.rows());
    const auto p = static_cast<Eigen::Index>(x.cols());

    Eigen::MatrixXd centered(n, p);
    for (Eigen::Index c = 0; c < p; ++c) {
        const std::vector<double> col = x.column(static_cast<std::size_t>(c));
        const double m = stats::mean(col);
        double scale = 1.0;
        if (standardize) {
            const double sd = stats::stddev(col);
            scale = sd > 0.0 ? 1.0 / sd : 0.0;
        }
        for (Eigen::Index r = 0; r < n; ++r) centered(r, c) = (col[static_cast<std::size_t>(r)] - m) * scale;
    }

    const double denom = static_cast<double>(n - 1);
    Eigen::MatrixXd loadings(p, 2);
    Eigen::Vector2d top;
    double trace = 0.0;

    if (p <= n) {
        const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        if (eig.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "eigendecomposition failed");
        trace = cov.trace();
        for (int k = 0; k < 2; ++k) {
            top(k) = eig.eigenvalues()(p - 1 - k);
            loadings.col(k) = eig.eigenvectors().col(p - 1 - k);
        }
    } else {
        // Wide data: eigendecompose the n x n Gram matrix and map back.
        const Eigen::MatrixXd gram = (centered * centered.transpose()) / denom;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "eigendecomposition failed");
        trace = gram.trace();
        for (int k = 0; k < 2; ++k) {
            top(k) = eig.eigenvalues()(n - 1 - k);
            Eigen::VectorXd v = centered.transpose() * eig.eigenvectors().col(n - 1 - k);
            const double norm = v.norm();
            loadings.col(k) = norm > 0.0 ? Eigen::VectorXd(v / norm) : Eigen::VectorXd::Zero(p);
        }
    }

    for (int k = 0; k < 2; ++k) {
        Eigen::Index arg = 0;
        loadings.col(k).cwiseAbs().maxCoeff(&arg);
        if (loadings(arg, k) < 0.0) loadings.col(k) *= -1.0;
    }

    const Eigen::MatrixXd scores = centered * loadings;
    Embedding e;
    e.method = ProjectionMethod::PCA;
    e.coords = Matrix(x.rows(), 2);
    for (Eigen::Index r = 0; r < n; ++r) {
        e.coords(static_cast<std::size_t>(r), 0) = scores(r, 0);
        e.coords(static_cast<std::size_t>(r), 1) = scores(r, 1);
    }
    const double l1 = std::max(top(0), 0.0);
    const double l2 = std::max(top(1), 0.0);
    if (trace > 0.0) {
        e.variance_explained = std::pair{std::clamp(l1 / trace, 0.0, 1.0), std::clamp(l2 / trace, 0.0, 1.0)};
    } else {
        e.variance_explained = std::pair{0.0, 0.0};
    }
    return e;
}

Affinities calibrate_affinities(const Matrix& d2, double perplexity) {
    const std::size_t n = d2.rows();
    if (n < 2) throw Error(ErrorKind::InsufficientData, "affinities need at least two points");
    if (!(perplexity > 0.0)) throw Error(ErrorKind::InvalidParameter, "perplexity must be positive");

    constexpr int kMaxIter = 50;
    constexpr double kTol = 1e-5;  // nats
    const double target = std::log(perplexity);

    Affinities a{Matrix(n, n), std::vector<double>(n)};
    parallel_for(n, [&](std::size_t i) {
        double dmin = kInf, dsum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dmin = std::min(dmin, d2(i, j));
            dsum += d2(i, j);
        }
        const double dmean = dsum / static_cast<double>(n - 1) - dmin;
        double beta = dmean > 0.0 ? 1.0 / dmean : 1.0;
        double lo = 0.0, hi = kInf;
        std::vector<double> p(n, 0.0);
        double h = 0.0;

        auto evaluate = [&](double b) {
            double sum = 0.0, weighted = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double shifted = d2(i, j) - dmin;
                p[j] = std::exp(-b * shifted);
                sum += p[j];
                weighted += shifted * p[j];
            }
            for (double& v : p) v /= sum;
            return std::log(sum) + b * weighted / sum;
        };

        for (int it = 0; it < kMaxIter; ++it) {
            h = evaluate(beta);
            const double diff = h - target;
            if (std::fabs(diff) < kTol) break;
            if (diff > 0.0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
        }
        // Report the entropy of the probabilities actually stored.
        double hb = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (p[j] > 0.0) hb -= p[j] * std::log2(p[j]);
        a.entropy_bits[i] = hb;
        auto row = a.conditional.row(i);
        std::copy(p.begin(), p.end(), row.begin());
    });
    return a;
}

Matrix joint_probabilities(const Matrix& conditional) {
    const std::size_t n = conditional.rows();
    Matrix p(n, n);
    const double denom = 2.0 * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = (conditional(i, j) + conditional(j, i)) / denom;
            p(i, j) = v;
            p(j, i) = v;
        }
    return p;
}

double tsne_kl(const Matrix& joint, const Matrix& y) {
    const std::size_t n = y.rows();
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double dx = y(i, 0) - y(j, 0);
            const double dy = y(i, 1) - y(j, 1);
            z += 1.0 / (1.0 + dx * dx + dy * dy);
        }
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || joint(i, j) <= 0.0) continue;
            const double dx = y(i, 0) - y(j, 0);
            const double dy = y(i, 1) - y(j, 1);
            const double q = 1.0 / (1.0 + dx * dx + dy * dy) / z;
            kl += joint(i, j) * std::log(joint(i, j) / q);
        }
    return std::max(kl, 0.0);
}

Embedding tsne_2d(const Matrix& x, const TsneOptions& o) {
    require_finite_input(x);
    const std::size_t n = x.rows();
    if (!(o.perplexity > 0.0) || !(o.perplexity < static_cast<double>(n - 1) / 3.0)) {
        throw Error(ErrorKind::PerplexityInfeasible,
                    "perplexity " + std::to_string(o.perplexity) + " must be positive and below (n-1)/3 = " +
                        std::to_string(static_cast<double>(n - 1) / 3.0));
    }
    if (o.iterations == 0) throw Error(ErrorKind::InvalidParameter, "iterations must be positive");

    const Matrix p = joint_probabilities(calibrate_affinities(squared_distances(x), o.perplexity).conditional);

    // Initial layout: PCA scores rescaled to standard deviation 1e-4.
    Matrix y = pca_2d(x, false).coords;
    Rng rng(o.seed);
    for (std::size_t c = 0; c < 2; ++c) {
        const std::vector<double> col = y.column(c);
        const double m = stats::mean(col);
        const double sd = stats::stddev(col);
        for (std::size_t i = 0; i < n; ++i) {
            y(i, c) = sd > 0.0 ? (col[i] - m) / sd * 1e-4 : rng.normal() * 1e-4;
        }
    }

    Embedding e;
    e.method = ProjectionMethod::TSNE;
    e.kl_initial = tsne_kl(p, y);

    Matrix update(n, 2), gains(n, 2, 1.0), grad(n, 2);
    std::vector<double> num(n * n);
    for (std::size_t it = 0; it < o.iterations; ++it) {
        const bool early = it < o.exaggeration_iterations;
        const double exaggeration = early ? o.exaggeration : 1.0;
        const double momentum = early ? o.initial_momentum : o.final_momentum;

        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num[i * n + i] = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = y(i, 0) - y(j, 0);
                const double dy = y(i, 1) - y(j, 1);
                const double v = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i * n + j] = v;
                num[j * n + i] = v;
                z += 2.0 * v;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            double gx = 0.0, gy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double v = num[i * n + j];
                const double mult = (exaggeration * p(i, j) - v / z) * v;
                gx += mult * (y(i, 0) - y(j, 0));
                gy += mult * (y(i, 1) - y(j, 1));
            }
            grad(i, 0) = 4.0 * gx;
            grad(i, 1) = 4.0 * gy;
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < 2; ++c) {
                const bool same_sign = (grad(i, c) > 0.0) == (update(i, c) > 0.0);
                gains(i, c) = same_sign ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
                update(i, c) = momentum * update(i, c) - o.learning_rate * gains(i, c) * grad(i, c);
                y(i, c) += update(i, c);
            }
        }
        for (std::size_t c = 0; c < 2; ++c) {
            const double m = stats::mean(y.column(c));
            for (std::size_t i = 0; i < n; ++i) y(i, c) -= m;
        }
    }

    for (double v : y.data())
        if (!std::isfinite(v)) throw Error(ErrorKind::NumericalFailure, "t-SNE diverged");
    e.kl_final = tsne_kl(p, y);
    e.coords = std::move(y);
    return e;
}

std::vector<GroupEllipse> group_ellipses(const Matrix& coords, const std::vector<std::string>& groups) {
    if (groups.size() != coords.rows()) {
        throw Error(ErrorKind::LengthMismatch, "group labels do not match embedding rows");
    }
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < groups.size(); ++i) members[groups[i]].push_back(i);

    std::vector<GroupEllipse> out;
    for (const auto& [g, idx] : members) {
        if (idx.size() < 3) continue;
        GroupEllipse e;
        e.group = g;
        e.count = idx.size();
        for (std::size_t i : idx) {
            e.mean_x += coords(i, 0);
            e.mean_y += coords(i, 1);
        }
        const double k = static_cast<double>(idx.size());
        e.mean_x /= k;
        e.mean_y /= k;
        for (std::size_t i : idx) {
            const double dx = coords(i, 0) - e.mean_x;
            const double dy = coords(i, 1) - e.mean_y;
            e.cov_xx += dx * dx;
            e.cov_xy += dx * dy;
            e.cov_yy += dy * dy;
        }
        e.cov_xx /= k - 1.0;
        e.cov_xy /= k - 1.0;
        e.cov_yy /= k - 1.0;
        out.push_back(e);
    }
    return out;
}

ProjectedTable project_table(const FeatureTable& ft, const ProjectionConfig& config) {
    if (ft.empty()) throw Error(ErrorKind::EmptyTable, "feature table is empty");
    auto normalized = normalize_table(ft, config.normalization);
    ProjectedTable out;
    out.dropped = std::move(normalized.dropped);
    if (normalized.table.empty()) throw Error(ErrorKind::InsufficientData, "no feature survives normalization");
    const WideTable wide = pivot(normalized.table);
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < wide.features.size(); ++j) {
        const auto col = wide.values.column(j);
        if (std::all_of(col.begin(), col.end(), [](double v) { return std::isfinite(v); })) {
            keep.push_back(j);
            out.features.push_back(wide.features[j]);
        } else {
            out.dropped.push_back(wide.features[j]);
        }
    }
    std::sort(out.dropped.begin(), out.dropped.end());
    const Matrix x = wide.values.select_cols(keep);
    out.ids = wide.ids;
    out.groups = wide.groups;
    out.embedding = config.method == ProjectionMethod::PCA
                        ? pca_2d(x, config.normalization == NormalizationMethod::ZScore)
                        : tsne_2d(x, config.tsne);
    if (!out.groups.empty()) out.ellipses = group_ellipses(out.embedding.coords, out.groups);
    return out;
}

}  // namespace tsfeat

