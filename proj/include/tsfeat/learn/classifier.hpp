#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tsfeat/matrix.hpp"

namespace tsfeat::learn {

enum class ClassifierMethod { LinearSVM, BinomialLogistic };

std::string_view to_string(ClassifierMethod m) noexcept;
ClassifierMethod parse_classifier(std::string_view name);

struct ClassifierSpec {
    ClassifierMethod method = ClassifierMethod::LinearSVM;
    double cost = 1.0;  // C: weight of the loss term against 0.5*|w|^2
    std::size_t max_epochs = 1000;
    double tolerance = 1e-4;
    std::uint64_t seed = 0;
};

/// Linear decision functions, one per class for one-vs-rest, or a single
/// function for two classes (positive decision -> class 0).
class LinearModel {
public:
    LinearModel(std::size_t num_classes, std::vector<std::vector<double>> weights, std::vector<double> bias);

    std::size_t num_classes() const noexcept { return num_classes_; }
    const std::vector<std::vector<double>>& weights() const noexcept { return weights_; }
    const std::vector<double>& bias() const noexcept { return bias_; }

    /// Per-model decision values.
    std::vector<double> decision(std::span<const double> x) const;
    int predict(std::span<const double> x) const;
    std::vector<int> predict(const Matrix& x) const;

private:
    std::size_t num_classes_;
    std::vector<std::vector<double>> weights_;
    std::vector<double> bias_;
};

/// Binary L2-regularized hinge-loss SVM trained by dual coordinate descent
/// (with shrinking). `sign` holds +1/-1 targets. The bias is learned as the
/// weight of an appended constant feature. Returns {w, b}.
std::pair<std::vector<double>, double> train_svm_binary(const Matrix& x, std::span<const int> sign,
                                                        const ClassifierSpec& spec, std::uint64_t stream);

/// Binary L2-regularized logistic regression by damped Newton iterations.
/// The bias is not regularized.
std::pair<std::vector<double>, double> train_logistic_binary(const Matrix& x, std::span<const int> sign,
                                                             const ClassifierSpec& spec);

/// Trains on labels 0..num_classes-1. LinearSVM uses one-vs-rest for more
/// than two classes; BinomialLogistic requires exactly two.
LinearModel train_classifier(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                             const ClassifierSpec& spec);

/// One-vs-rest for any number of classes, including two. Used to check that
/// the two-class shortcut agrees with the general rule.
LinearModel train_one_vs_rest(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                              const ClassifierSpec& spec);

}  // namespace tsfeat::learn
