#include <doctest.h>

#include <cmath>

#include "expect.hpp"
#include "oracles.hpp"
#include "synth.hpp"
#include "tsfeat/features.hpp"
#include "tsfeat/project.hpp"

using namespace tsfeat;

namespace {

Matrix squared(const Matrix& x) {
    Matrix d = oracle::euclidean(x);
    for (auto& v : d.data()) v *= v;
    return d;
}

Matrix two_blobs(std::uint64_t seed, std::vector<int>& y) {
    return synth::blobs(seed, 2, 10, 5, 5, 20.0, y);
}

}  // namespace

TEST_CASE("PCA on rank-1 data") {
    Matrix x(20, 2);
    for (std::size_t i = 0; i < 20; ++i) x(i, 0) = x(i, 1) = 0.37 * i - 2;
    const Embedding e = pca_2d(x);
    REQUIRE(e.variance_explained);
    CHECK(std::fabs(e.variance_explained->first - 1.0) <= 1e-10);
    CHECK(std::fabs(e.variance_explained->second) <= 1e-10);
    CHECK(pca_2d(x, true).variance_explained->first == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("PCA on isotropic Gaussian samples splits variance evenly") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        Matrix x(2000, 2);
        for (auto& v : x.data()) v = rng.normal();
        const auto ve = *pca_2d(x).variance_explained;
        CHECK(std::fabs(ve.first - 0.5) < 0.05);
        CHECK(std::fabs(ve.second - 0.5) < 0.05);
    }
}

TEST_CASE("PCA preserves centered inner products for rank-2 data") {
    Rng rng(6);
    Matrix x(15, 4);
    for (std::size_t i = 0; i < 15; ++i) {
        const double a = rng.normal(), b = rng.normal();
        x(i, 0) = a;
        x(i, 1) = b;
        x(i, 2) = a - 2 * b;
        x(i, 3) = 0.5 * a + b + 3;
    }
    const Embedding e = pca_2d(x);
    std::vector<double> mu(4, 0);
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t k = 0; k < 4; ++k) mu[k] += x(i, k) / 15;
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = 0; j < 15; ++j) {
            double want = 0;
            for (std::size_t k = 0; k < 4; ++k) want += (x(i, k) - mu[k]) * (x(j, k) - mu[k]);
            const double got = e.coords(i, 0) * e.coords(j, 0) + e.coords(i, 1) * e.coords(j, 1);
            CHECK(std::fabs(got - want) <= 1e-8 * std::max(1.0, std::fabs(want)));
        }
}

TEST_CASE("affinity calibration hits the target entropy") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 20 + rng.below(40);
        Matrix x(n, 3);
        for (auto& v : x.data()) v = rng.normal() * (1 + trial % 3);
        const double perplexity = 2 + rng.uniform() * (n - 1) / 3.5;
        const Affinities a = calibrate_affinities(squared(x), perplexity);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::fabs(a.entropy_bits[i] - std::log2(perplexity)) <= 1e-4);
            double rowsum = 0, h = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p = a.conditional(i, j);
                rowsum += p;
                if (p > 0) h -= p * std::log2(p);
            }
            CHECK(a.conditional(i, i) == 0.0);
            CHECK(rowsum == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::fabs(h - std::log2(perplexity)) <= 1e-4);
        }
    }
}

TEST_CASE("equidistant points give uniform conditionals") {
    const std::size_t n = 6;
    Matrix d(n, n, 4.0);
    for (std::size_t i = 0; i < n; ++i) d(i, i) = 0;
    for (double perplexity : {1.5, 3.0, 5.0}) {
        const Affinities a = calibrate_affinities(d, perplexity);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(a.entropy_bits[i] == doctest::Approx(std::log2(n - 1.0)).epsilon(1e-9));
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) CHECK(a.conditional(i, j) == doctest::Approx(1.0 / (n - 1)).epsilon(1e-9));
        }
    }
}

TEST_CASE("joint probabilities are symmetric and sum to one") {
    Rng rng(2);
    Matrix x(12, 2);
    for (auto& v : x.data()) v = rng.normal();
    const Matrix p = joint_probabilities(calibrate_affinities(squared(x), 3).conditional);
    double total = 0;
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 12; ++j) {
            CHECK(p(i, j) == p(j, i));
            total += p(i, j);
        }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("t-SNE separates two blobs and lowers KL") {
    std::vector<int> y;
    const Matrix x = two_blobs(21, y);
    TsneOptions o;
    o.perplexity = 5;
    o.seed = 7;
    const Embedding e = tsne_2d(x, o);
    REQUIRE(e.kl_initial);
    REQUIRE(e.kl_final);
    CHECK(*e.kl_final < *e.kl_initial);
    CHECK(oracle::silhouette(e.coords, y) > 0.8);
    CHECK(e.coords.rows() == 20);
    CHECK(tsne_2d(x, o).coords == e.coords);
}

TEST_CASE("t-SNE parameter checks") {
    std::vector<int> y;
    const Matrix x = two_blobs(1, y);
    TsneOptions o;
    o.perplexity = 19.0 / 3.0;
    CHECK_RAISES(tsne_2d(x, o), PerplexityInfeasible);
    o.perplexity = 5;
    o.iterations = 0;
    CHECK_RAISES(tsne_2d(x, o), InvalidParameter);
    CHECK(parse_projection("tsne") == ProjectionMethod::TSNE);
    CHECK_RAISES(parse_projection("umap"), InvalidParameter);
}

TEST_CASE("group ellipses hold per-group mean and covariance") {
    Matrix c(5, 2);
    const double xs[] = {0, 2, 1, 9, 9}, ys[] = {0, 0, 3, 9, 9};
    for (int i = 0; i < 5; ++i) {
        c(i, 0) = xs[i];
        c(i, 1) = ys[i];
    }
    const auto el = group_ellipses(c, {"a", "a", "a", "b", "b"});
    REQUIRE(el.size() == 1);
    CHECK(el[0].group == "a");
    CHECK(el[0].count == 3);
    CHECK(el[0].mean_x == 1.0);
    CHECK(el[0].mean_y == 1.0);
    CHECK(el[0].cov_xx == 1.0);
    CHECK(el[0].cov_yy == 3.0);
    CHECK(el[0].cov_xy == 0.0);
    CHECK_RAISES(group_ellipses(c, {"a"}), LengthMismatch);
}

TEST_CASE("project_table drops unusable columns and labels groups") {
    const FeatureTable ft = extract_features(synth::three_class(3, 8, 40), native_catalog());
    ProjectionConfig cfg;
    const ProjectedTable p = project_table(ft, cfg);
    CHECK(p.ids.size() == 24);
    CHECK(p.groups.size() == 24);
    CHECK(p.embedding.coords.rows() == 24);
    CHECK(p.features.size() + p.dropped.size() == 24);
    CHECK(p.ellipses.size() == 3);
    cfg.method = ProjectionMethod::TSNE;
    cfg.tsne.perplexity = 5;
    cfg.tsne.iterations = 300;
    const ProjectedTable t = project_table(ft, cfg);
    CHECK(t.embedding.kl_final);
    CHECK(project_table(ft, cfg).embedding.coords == t.embedding.coords);
}
