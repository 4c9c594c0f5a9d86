#pragma once

#include <span>
#include <string>
#include <vector>

namespace tsfeat::learn {

/// Class labels mapped to dense indices 0..k-1 in sorted label order.
struct LabelEncoding {
    std::vector<std::string> classes;
    std::vector<int> y;

    std::size_t num_classes() const noexcept { return classes.size(); }
};

LabelEncoding encode_labels(const std::vector<std::string>& labels);

struct AccuracyMetrics {
    double accuracy;
    double balanced_accuracy;  // unweighted mean recall over classes present in y_true
};

/// Throws LengthMismatch or EmptyInput.
AccuracyMetrics accuracy_metrics(std::span<const int> y_true, std::span<const int> y_pred);

enum class Metric { Accuracy, BalancedAccuracy };

double score(Metric m, std::span<const int> y_true, std::span<const int> y_pred);

}  // namespace tsfeat::learn
