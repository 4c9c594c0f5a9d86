#include "tsfeat/learn/folds.hpp"

#include <map>
#include <numeric>

#include "tsfeat/error.hpp"
#include "tsfeat/rng.hpp"

namespace tsfeat::learn {

std::vector<std::size_t> assign_folds(std::span<const int> y, std::size_t k, bool stratified, std::uint64_t seed) {
    if (k < 2) throw Error(ErrorKind::InvalidParameter, "number of folds must be at least 2");
    Rng rng(seed);
    std::vector<std::size_t> fold(y.size(), 0);
    std::size_t dealer = 0;
    if (stratified) {
        std::map<int, std::vector<std::size_t>> by_class;
        for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
        for (auto& [c, members] : by_class) {
            rng.shuffle(std::span(members));
            for (std::size_t i : members) fold[i] = dealer++ % k;
        }
    } else {
        std::vector<std::size_t> order(y.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span(order));
        for (std::size_t i : order) fold[i] = dealer++ % k;
    }
    return fold;
}

void check_fold_feasibility(std::span<const int> y, std::size_t k) {
    std::map<int, std::size_t> counts;
    for (int c : y) ++counts[c];
    if (counts.size() < 2) {
        throw Error(ErrorKind::TooFewClasses, "classification needs at least two classes, found " +
                                                  std::to_string(counts.size()));
    }
    for (const auto& [c, n] : counts) {
        if (n < k) {
            throw Error(ErrorKind::ClassTooSmall, "a class has " + std::to_string(n) + " member(s), fewer than the " +
                                                      std::to_string(k) + " folds requested");
        }
    }
}

}  // namespace tsfeat::learn
