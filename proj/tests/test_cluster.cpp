#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "expect.hpp"
#include "oracles.hpp"
#include "tsfeat/cluster.hpp"
#include "tsfeat/rng.hpp"
#include "tsfeat/stats.hpp"

using namespace tsfeat;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (auto& v : m.data()) v = rng.normal();
    return m;
}

// Leaf set of every node id, following the n+k node convention.
std::vector<std::set<std::size_t>> node_members(const Dendrogram& d, std::size_t n) {
    std::vector<std::set<std::size_t>> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = {i};
    for (const auto& m : d.merges) {
        auto s = nodes[m.left];
        s.insert(nodes[m.right].begin(), nodes[m.right].end());
        nodes.push_back(s);
    }
    return nodes;
}

}  // namespace

TEST_CASE("euclidean hand values") {
    Matrix rows(2, 2);
    rows(1, 0) = 3;
    rows(1, 1) = 4;
    CHECK(euclidean_distance_matrix(rows)(0, 1) == 5.0);
    Matrix same(2, 3, 1.5);
    CHECK(euclidean_distance_matrix(same)(0, 1) == 0.0);
    rows(0, 0) = NAN;
    CHECK_RAISES(euclidean_distance_matrix(rows), NaNInput);
}

TEST_CASE("euclidean matches the double-loop oracle") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix x = random_matrix(rng, 2 + rng.below(8), 1 + rng.below(6));
        const Matrix got = euclidean_distance_matrix(x), want = oracle::euclidean(x);
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t j = 0; j < x.rows(); ++j) CHECK(std::fabs(got(i, j) - want(i, j)) <= 1e-12);
    }
}

TEST_CASE("UPGMA hand instance {0, 1, 10}") {
    Matrix pts(3, 1);
    pts(1, 0) = 1;
    pts(2, 0) = 10;
    const Dendrogram d = upgma(euclidean_distance_matrix(pts));
    REQUIRE(d.merges.size() == 2);
    CHECK(d.merges[0].left == 0);
    CHECK(d.merges[0].right == 1);
    CHECK(d.merges[0].height == 1.0);
    CHECK(d.merges[1].left == 3);
    CHECK(d.merges[1].right == 2);
    CHECK(d.merges[1].height == 9.5);
    CHECK(d.merges[1].size == 3);
    CHECK(d.leaf_order == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("UPGMA on two items and error cases") {
    Matrix d(2, 2);
    d(0, 1) = d(1, 0) = 2.5;
    const auto dd = upgma(d);
    REQUIRE(dd.merges.size() == 1);
    CHECK(dd.merges[0].height == 2.5);
    CHECK_RAISES(upgma(Matrix(1, 1)), TooFewItems);
    CHECK_RAISES(upgma(Matrix(2, 3)), InvalidParameter);
}

TEST_CASE("UPGMA matches exhaustive recomputation") {
    Rng rng(8);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 2 + rng.below(7);
        Matrix x = random_matrix(rng, n, 2);
        if (trial % 3 == 0)  // integer grid: many tied distances
            for (auto& v : x.data()) v = static_cast<double>(rng.below(3));
        const Matrix dist = oracle::euclidean(x);
        const Dendrogram got = upgma(dist);
        const auto want = oracle::upgma(dist);
        REQUIRE(got.merges.size() == want.size());
        const auto members = node_members(got, n);
        for (std::size_t k = 0; k < want.size(); ++k) {
            CHECK(std::fabs(got.merges[k].height - want[k].height) <= 1e-10);
            CHECK(members[got.merges[k].left] == want[k].a);
            CHECK(members[got.merges[k].right] == want[k].b);
        }
        // Heights of average linkage are monotone.
        for (std::size_t k = 1; k < got.merges.size(); ++k)
            CHECK(got.merges[k].height >= got.merges[k - 1].height - 1e-12);
    }
}

TEST_CASE("complete and single linkage on a hand instance") {
    Matrix pts(3, 1);
    pts(1, 0) = 1;
    pts(2, 0) = 10;
    const Matrix d = euclidean_distance_matrix(pts);
    CHECK(hierarchical_cluster(d, Linkage::Complete).merges[1].height == 10.0);
    CHECK(hierarchical_cluster(d, Linkage::Single).merges[1].height == 9.0);
    CHECK(parse_linkage("complete") == Linkage::Complete);
    CHECK_RAISES(parse_linkage("ward"), InvalidParameter);
}

TEST_CASE("correlation hand values and oracle identity") {
    Matrix m(3, 2);
    const double x[] = {1, 2, 3}, y[] = {10, 20, 15};
    for (int i = 0; i < 3; ++i) {
        m(i, 0) = x[i];
        m(i, 1) = y[i];
    }
    const Matrix s = correlation_matrix(m, CorrelationKind::Spearman, false);
    CHECK(s(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s(0, 0) == 1.0);

    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng.below(30);
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = trial % 2 ? static_cast<double>(rng.below(5)) : rng.normal();
            b[i] = a[i] * rng.normal() + rng.normal();
        }
        Matrix cols(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            cols(i, 0) = a[i];
            cols(i, 1) = b[i];
        }
        if (oracle::constant(a) || oracle::constant(b)) continue;
        CHECK(std::fabs(correlation_matrix(cols, CorrelationKind::Spearman, false)(0, 1) - oracle::spearman(a, b)) <=
              1e-12);
        CHECK(std::fabs(correlation_matrix(cols, CorrelationKind::Pearson, false)(0, 1) - oracle::pearson(a, b)) <=
              1e-12);
        CHECK(std::fabs(stats::spearman(a, b) - oracle::pearson(oracle::ranks(a), oracle::ranks(b))) <= 1e-12);
        CHECK(correlation_matrix(cols, CorrelationKind::Pearson, true)(0, 1) >= 0.0);
    }
}

TEST_CASE("correlation errors") {
    Matrix flat(4, 2, 1.0);
    flat(0, 0) = 2;
    CHECK_RAISES(correlation_matrix(flat, CorrelationKind::Pearson, false), ZeroVarianceColumn);
    CHECK_RAISES(correlation_matrix(Matrix(2, 2), CorrelationKind::Pearson, false), InsufficientData);
}

TEST_CASE("cluster_matrix filters NaN columns and places identical rows adjacently") {
    Rng rng(4);
    std::vector<FeatureRecord> recs;
    const std::size_t n = 12, m = 20, with_nan = 7;
    std::vector<std::vector<double>> rows(n, std::vector<double>(m));
    for (auto& r : rows)
        for (auto& v : r) v = rng.normal();
    rows[9] = rows[2];  // identical series
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double v = rows[i][j];
            if (j < with_nan && i == j) v = NAN;
            recs.push_back({"s" + std::to_string(100 + i), "f" + std::to_string(100 + j), "t", v, std::nullopt});
        }
    const ClusteredMatrix cm = cluster_matrix(FeatureTable(recs), NormalizationMethod::ZScore);
    CHECK(cm.features.size() == m - with_nan);
    CHECK(cm.dropped_nonfinite.size() == with_nan);
    CHECK(cm.values.cols() == m - with_nan);
    const auto pos2 = std::find(cm.row_order.begin(), cm.row_order.end(), 2) - cm.row_order.begin();
    const auto pos9 = std::find(cm.row_order.begin(), cm.row_order.end(), 9) - cm.row_order.begin();
    CHECK(std::abs(pos2 - pos9) == 1);
    auto sorted_rows = cm.row_order;
    std::sort(sorted_rows.begin(), sorted_rows.end());
    for (std::size_t i = 0; i < n; ++i) CHECK(sorted_rows[i] == i);
}

TEST_CASE("cluster_matrix on three series follows the hand dendrogram") {
    // One feature column per distinct value pattern; rows at 0, 1 and 10.
    std::vector<FeatureRecord> recs;
    const double v[] = {0, 1, 10};
    for (int i = 0; i < 3; ++i) {
        recs.push_back({"c" + std::to_string(i), "f", "t", v[i], std::nullopt});
        recs.push_back({"c" + std::to_string(i), "g", "t", 2 * v[i], std::nullopt});
    }
    const ClusteredMatrix cm = cluster_matrix(FeatureTable(recs), NormalizationMethod::MinMax);
    CHECK(cm.row_order == std::vector<std::size_t>{0, 1, 2});
    CHECK(cm.row_dendrogram.merges[0].left == 0);
    CHECK(cm.row_dendrogram.merges[0].right == 1);
    CHECK(cm.col_order == std::vector<std::size_t>{0, 1});
}

TEST_CASE("cluster_matrix with too little data") {
    std::vector<FeatureRecord> recs{{"a", "f", "t", 1, std::nullopt}, {"b", "f", "t", 2, std::nullopt}};
    CHECK_RAISES(cluster_matrix(FeatureTable(recs), NormalizationMethod::ZScore), InsufficientData);
}
