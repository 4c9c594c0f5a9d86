#include "tsfeat/learn/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "tsfeat/error.hpp"
#include "tsfeat/stats.hpp"

namespace tsfeat::learn {

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw Error(ErrorKind::InsufficientData, "t-test needs at least two values per class");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double sa = stats::variance(a) / na, sb = stats::variance(b) / nb;
    const double se2 = sa + sb;
    if (!(se2 > 0.0)) throw Error(ErrorKind::DegenerateScale, "both classes have zero variance");
    const double t = (stats::mean(a) - stats::mean(b)) / std::sqrt(se2);
    const double df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    const boost::math::students_t dist(df);
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    return {t, df, std::min(1.0, p)};
}

RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorKind::InsufficientData, "rank-sum test needs values in both classes");
    const std::size_t na = a.size(), nb = b.size(), n = na + nb;
    std::vector<double> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    const auto ranks = stats::average_ranks(all);

    double rank_sum = 0.0;
    for (std::size_t i = 0; i < na; ++i) rank_sum += ranks[i];
    const double w = rank_sum - static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;

    std::vector<double> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    if (sorted.front() == sorted.back()) throw Error(ErrorKind::DegenerateScale, "every value is tied");

    if (na <= 8 && nb <= 8) {
        // Doubled ranks are integers, so the rank-sum distribution over all
        // na-subsets is a count table indexed by subset size and sum.
        std::vector<int> r2(n);
        int total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            r2[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
            total += r2[i];
        }
        std::vector<std::vector<double>> ways(na + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
        ways[0][0] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = std::min(i + 1, na); k >= 1; --k) {
                auto& dst = ways[k];
                const auto& src = ways[k - 1];
                for (int s = total; s >= r2[i]; --s) dst[static_cast<std::size_t>(s)] += src[static_cast<std::size_t>(s - r2[i])];
            }
        }
        const int observed = static_cast<int>(std::lround(2.0 * rank_sum));
        double lower = 0.0, upper = 0.0, count = 0.0;
        for (int s = 0; s <= total; ++s) {
            const double c = ways[na][static_cast<std::size_t>(s)];
            count += c;
            if (s <= observed) lower += c;
            if (s >= observed) upper += c;
        }
        return {w, std::min(1.0, 2.0 * std::min(lower, upper) / count), true};
    }

    const double fa = static_cast<double>(na), fb = static_cast<double>(nb), fn = static_cast<double>(n);
    const double z0 = w - fa * fb / 2.0;
    const double sigma = std::sqrt(fa * fb / 12.0 * ((fn + 1.0) - tie_term / (fn * (fn - 1.0))));
    const double correction = z0 > 0.0 ? 0.5 : (z0 < 0.0 ? -0.5 : 0.0);
    const double z = (z0 - correction) / sigma;
    const double p = 2.0 * std::min(stats::normal_cdf(z), stats::normal_upper_tail(z));
    return {w, std::min(1.0, p), false};
}

double silverman_bandwidth(std::span<const double> x) {
    if (x.size() < 2) throw Error(ErrorKind::InsufficientData, "bandwidth needs at least two values");
    const double hi = stats::stddev(x);
    double lo = std::min(hi, stats::iqr(x) / 1.34);
    if (!(lo > 0.0)) {
        lo = hi;
        if (!(lo > 0.0)) lo = std::fabs(x[0]);
        if (!(lo > 0.0)) lo = 1.0;
    }
    return 0.9 * lo * std::pow(static_cast<double>(x.size()), -0.2);
}

std::vector<double> gaussian_kde(std::span<const double> x, double bw, std::span<const double> grid) {
    const double norm = 1.0 / (static_cast<double>(x.size()) * bw * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> out(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double s = 0.0;
        for (double v : x) {
            const double u = (grid[g] - v) / bw;
            s += std::exp(-0.5 * u * u);
        }
        out[g] = s * norm;
    }
    return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t points) {
    std::vector<double> out(points);
    if (points == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) out[i] = lo + step * static_cast<double>(i);
    if (points > 1) out.back() = hi;
    return out;
}

}  // namespace tsfeat::learn
