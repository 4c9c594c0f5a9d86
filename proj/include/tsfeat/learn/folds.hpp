#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tsfeat::learn {

struct CVConfig {
    bool use_k_fold = true;
    std::size_t num_folds = 10;
    bool stratified = true;
    bool balanced_accuracy = false;
    std::uint64_t seed = 0;
};

/// Fold index (0..k-1) of every sample. Stratified assignment shuffles each
/// class and deals its members round-robin, continuing the dealer position
/// across classes, so every fold holds floor or ceil of n_c/k members of
/// class c and fold sizes differ by at most one.
std::vector<std::size_t> assign_folds(std::span<const int> y, std::size_t k, bool stratified, std::uint64_t seed);

/// Throws ClassTooSmall if any class has fewer than `k` members, TooFewClasses
/// if fewer than two classes are present.
void check_fold_feasibility(std::span<const int> y, std::size_t k);

}  // namespace tsfeat::learn
