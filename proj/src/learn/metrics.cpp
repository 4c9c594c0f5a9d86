#include "tsfeat/learn/metrics.hpp"

#include <algorithm>
#include <map>

#include "tsfeat/error.hpp"

namespace tsfeat::learn {

LabelEncoding encode_labels(const std::vector<std::string>& labels) {
    LabelEncoding enc;
    enc.classes = labels;
    std::sort(enc.classes.begin(), enc.classes.end());
    enc.classes.erase(std::unique(enc.classes.begin(), enc.classes.end()), enc.classes.end());
    enc.y.reserve(labels.size());
    for (const auto& l : labels) {
        const auto it = std::lower_bound(enc.classes.begin(), enc.classes.end(), l);
        enc.y.push_back(static_cast<int>(it - enc.classes.begin()));
    }
    return enc;
}

AccuracyMetrics accuracy_metrics(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw Error(ErrorKind::LengthMismatch, "truth has " + std::to_string(y_true.size()) +
                                                   " labels but prediction has " + std::to_string(y_pred.size()));
    }
    if (y_true.empty()) throw Error(ErrorKind::EmptyInput, "no labels to score");

    const auto [lo, hi] = std::minmax_element(y_true.begin(), y_true.end());
    std::size_t correct = 0;
    double recall_sum = 0.0;
    std::size_t present = 0;
    if (*lo >= 0 && *hi < 4096) {
        std::vector<std::size_t> hit(static_cast<std::size_t>(*hi) + 1, 0), total(hit.size(), 0);
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            const auto c = static_cast<std::size_t>(y_true[i]);
            ++total[c];
            if (y_true[i] == y_pred[i]) {
                ++hit[c];
                ++correct;
            }
        }
        for (std::size_t c = 0; c < hit.size(); ++c) {
            if (total[c] == 0) continue;
            recall_sum += static_cast<double>(hit[c]) / static_cast<double>(total[c]);
            ++present;
        }
    } else {
        std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // class -> (correct, total)
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            auto& [hit, total] = per_class[y_true[i]];
            ++total;
            if (y_true[i] == y_pred[i]) {
                ++hit;
                ++correct;
            }
        }
        for (const auto& [c, counts] : per_class)
            recall_sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
        present = per_class.size();
    }

    return {static_cast<double>(correct) / static_cast<double>(y_true.size()),
            recall_sum / static_cast<double>(present)};
}

double score(Metric m, std::span<const int> y_true, std::span<const int> y_pred) {
    const auto r = accuracy_metrics(y_true, y_pred);
    return m == Metric::Accuracy ? r.accuracy : r.balanced_accuracy;
}

}  // namespace tsfeat::learn
