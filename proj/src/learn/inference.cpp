#include "tsfeat/learn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tsfeat/error.hpp"
#include "tsfeat/parallel.hpp"
#include "tsfeat/rng.hpp"
#include "tsfeat/stats.hpp"

namespace tsfeat::learn {

std::string_view to_string(NullMethod m) noexcept {
    return m == NullMethod::ModelFreeShuffles ? "ModelFreeShuffles" : "NullModelFits";
}

std::string_view to_string(PValueMethod m) noexcept { return m == PValueMethod::Gaussian ? "gaussian" : "empirical"; }

NullMethod parse_null_method(std::string_view name) {
    if (name == "ModelFreeShuffles" || name == "model-free") return NullMethod::ModelFreeShuffles;
    if (name == "NullModelFits" || name == "null-fits") return NullMethod::NullModelFits;
    throw Error(ErrorKind::InvalidParameter, "unknown null method '" + std::string(name) + "'");
}

PValueMethod parse_p_value_method(std::string_view name) {
    if (name == "gaussian") return PValueMethod::Gaussian;
    if (name == "empirical") return PValueMethod::Empirical;
    throw Error(ErrorKind::InvalidParameter, "unknown p-value method '" + std::string(name) + "'");
}

NullDistribution model_free_shuffles(std::span<const int> labels, std::size_t num_permutations, Metric metric,
                                     std::uint64_t seed) {
    if (num_permutations == 0) throw Error(ErrorKind::InvalidParameter, "num_permutations must be at least 1");
    if (labels.empty()) throw Error(ErrorKind::EmptyInput, "no labels to shuffle");
    NullDistribution null{std::vector<double>(num_permutations), NullMethod::ModelFreeShuffles, num_permutations, seed};
    parallel_for(num_permutations, [&](std::size_t k) {
        std::vector<int> shuffled(labels.begin(), labels.end());
        Rng rng(seed, k);
        rng.shuffle(std::span(shuffled));
        null.values[k] = score(metric, labels, shuffled);
    });
    return null;
}

double p_value(double observed, std::span<const double> null, PValueMethod method) {
    if (null.empty()) throw Error(ErrorKind::DegenerateNull, "null distribution is empty");
    if (method == PValueMethod::Empirical) {
        const auto hits = std::count_if(null.begin(), null.end(), [&](double v) { return v >= observed; });
        return static_cast<double>(hits) / static_cast<double>(null.size());
    }
    const double sd = stats::stddev(null);
    if (!(sd > 0.0)) throw Error(ErrorKind::DegenerateNull, "null distribution has zero spread; use empirical p-values");
    return stats::normal_upper_tail((observed - stats::mean(null)) / sd);
}

std::vector<double> holm_bonferroni(std::span<const double> p) {
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::OutOfRange, "p-value " + std::to_string(v) + " outside [0, 1]");
    }
    const std::size_t m = p.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> adjusted(m);
    double running = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        running = std::max(running, std::min(1.0, static_cast<double>(m - k) * p[order[k]]));
        adjusted[order[k]] = running;
    }
    return adjusted;
}

}  // namespace tsfeat::learn
