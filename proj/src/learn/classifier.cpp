#include "tsfeat/learn/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "tsfeat/error.hpp"
#include "tsfeat/parallel.hpp"
#include "tsfeat/rng.hpp"

namespace tsfeat::learn {

std::string_view to_string(ClassifierMethod m) noexcept {
    return m == ClassifierMethod::LinearSVM ? "LinearSVM" : "BinomialLogistic";
}

ClassifierMethod parse_classifier(std::string_view name) {
    if (name == "LinearSVM" || name == "svmLinear" || name == "linear_svm") return ClassifierMethod::LinearSVM;
    if (name == "BinomialLogistic" || name == "logistic") return ClassifierMethod::BinomialLogistic;
    throw Error(ErrorKind::InvalidParameter, "unknown classifier '" + std::string(name) + "'");
}

LinearModel::LinearModel(std::size_t num_classes, std::vector<std::vector<double>> weights, std::vector<double> bias)
    : num_classes_(num_classes), weights_(std::move(weights)), bias_(std::move(bias)) {}

std::vector<double> LinearModel::decision(std::span<const double> x) const {
    std::vector<double> out(weights_.size());
    for (std::size_t m = 0; m < weights_.size(); ++m) {
        double s = bias_[m];
        for (std::size_t j = 0; j < x.size(); ++j) s += weights_[m][j] * x[j];
        out[m] = s;
    }
    return out;
}

int LinearModel::predict(std::span<const double> x) const {
    const auto d = decision(x);
    if (weights_.size() == 1) return d[0] >= 0.0 ? 0 : 1;
    // first maximum wins ties
    return static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
}

std::vector<int> LinearModel::predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
    return out;
}

std::pair<std::vector<double>, double> train_svm_binary(const Matrix& x, std::span<const int> sign,
                                                        const ClassifierSpec& spec, std::uint64_t stream) {
    const std::size_t l = x.rows(), p = x.cols();
    const double upper = spec.cost;
    constexpr double inf = std::numeric_limits<double>::infinity();

    // w[p] is the bias, paired with an implicit constant feature 1
    std::vector<double> w(p + 1, 0.0), alpha(l, 0.0), qd(l);
    std::vector<std::size_t> index(l);
    for (std::size_t i = 0; i < l; ++i) {
        double q = 1.0;
        for (double v : x.row(i)) q += v * v;
        qd[i] = q;
        index[i] = i;
    }

    Rng rng(spec.seed, stream);
    std::size_t active = l;
    double pg_max_old = inf, pg_min_old = -inf;
    for (std::size_t epoch = 0; epoch < spec.max_epochs; ++epoch) {
        double pg_max_new = -inf, pg_min_new = inf;
        rng.shuffle(std::span(index.data(), active));

        for (std::size_t s = 0; s < active; ++s) {
            const std::size_t i = index[s];
            const double yi = sign[i];
            const auto xi = x.row(i);
            double g = w[p];
            for (std::size_t j = 0; j < p; ++j) g += w[j] * xi[j];
            g = g * yi - 1.0;

            double pg = 0.0;
            if (alpha[i] == 0.0) {
                if (g > pg_max_old) {
                    std::swap(index[s], index[--active]);
                    --s;
                    continue;
                }
                if (g < 0.0) pg = g;
            } else if (alpha[i] == upper) {
                if (g < pg_min_old) {
                    std::swap(index[s], index[--active]);
                    --s;
                    continue;
                }
                if (g > 0.0) pg = g;
            } else {
                pg = g;
            }
            pg_max_new = std::max(pg_max_new, pg);
            pg_min_new = std::min(pg_min_new, pg);

            if (std::fabs(pg) > 1e-12) {
                const double old = alpha[i];
                alpha[i] = std::min(std::max(old - g / qd[i], 0.0), upper);
                const double d = (alpha[i] - old) * yi;
                for (std::size_t j = 0; j < p; ++j) w[j] += d * xi[j];
                w[p] += d;
            }
        }

        if (pg_max_new - pg_min_new <= spec.tolerance) {
            if (active == l) break;
            active = l;
            pg_max_old = inf;
            pg_min_old = -inf;
            continue;
        }
        pg_max_old = pg_max_new <= 0.0 ? inf : pg_max_new;
        pg_min_old = pg_min_new >= 0.0 ? -inf : pg_min_new;
    }

    const double b = w[p];
    w.pop_back();
    return {std::move(w), b};
}

namespace {

// log(1 + exp(-z)) without overflow
double log1p_exp_neg(double z) {
    return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

}  // namespace

std::pair<std::vector<double>, double> train_logistic_binary(const Matrix& x, std::span<const int> sign,
                                                             const ClassifierSpec& spec) {
    const std::size_t n = x.rows(), p = x.cols();
    Eigen::MatrixXd a(n, p + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) a(i, j) = x(i, j);
        a(i, p) = 1.0;
    }
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) y(i) = sign[i];
    Eigen::VectorXd reg = Eigen::VectorXd::Ones(p + 1);
    reg(p) = 1e-8;  // keeps the Hessian definite on separable data without shrinking the bias

    const double c = spec.cost;
    auto objective = [&](const Eigen::VectorXd& beta) {
        const Eigen::VectorXd z = (a * beta).cwiseProduct(y);
        double f = 0.5 * beta.cwiseProduct(reg).dot(beta);
        for (Eigen::Index i = 0; i < z.size(); ++i) f += c * log1p_exp_neg(z(i));
        return f;
    };

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
    double f = objective(beta);
    double g0 = -1.0;
    const std::size_t max_iter = std::min<std::size_t>(spec.max_epochs, 100);
    for (std::size_t it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd z = (a * beta).cwiseProduct(y);
        Eigen::VectorXd coef(n), curv(n);
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            const double s = 1.0 / (1.0 + std::exp(-z(i)));  // P(correct)
            coef(i) = c * (s - 1.0) * y(i);
            curv(i) = c * s * (1.0 - s);
        }
        const Eigen::VectorXd grad = reg.cwiseProduct(beta) + a.transpose() * coef;
        const double gnorm = grad.norm();
        if (g0 < 0.0) g0 = std::max(gnorm, 1.0);
        if (gnorm <= spec.tolerance * g0) break;

        Eigen::MatrixXd h = a.transpose() * curv.asDiagonal() * a;
        h.diagonal() += reg;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
        if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "logistic Hessian factorization failed");
        const Eigen::VectorXd step = ldlt.solve(-grad);
        if (!step.allFinite()) throw Error(ErrorKind::NumericalFailure, "logistic Newton step is not finite");

        const double slope = grad.dot(step);
        double t = 1.0;
        bool moved = false;
        for (int k = 0; k < 40; ++k, t *= 0.5) {
            const Eigen::VectorXd cand = beta + t * step;
            const double fc = objective(cand);
            if (fc <= f + 1e-4 * t * slope) {
                beta = cand;
                f = fc;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }

    std::vector<double> w(beta.data(), beta.data() + p);
    return {std::move(w), beta(p)};
}

namespace {

std::vector<int> one_vs_rest_signs(std::span<const int> y, int positive) {
    std::vector<int> s(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) s[i] = y[i] == positive ? 1 : -1;
    return s;
}

}  // namespace

LinearModel train_one_vs_rest(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                              const ClassifierSpec& spec) {
    std::vector<std::vector<double>> weights(num_classes);
    std::vector<double> bias(num_classes);
    parallel_for(num_classes, [&](std::size_t c) {
        const auto s = one_vs_rest_signs(y, static_cast<int>(c));
        auto [w, b] = spec.method == ClassifierMethod::LinearSVM ? train_svm_binary(x, s, spec, c)
                                                                 : train_logistic_binary(x, s, spec);
        weights[c] = std::move(w);
        bias[c] = b;
    });
    return LinearModel(num_classes, std::move(weights), std::move(bias));
}

LinearModel train_classifier(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                             const ClassifierSpec& spec) {
    if (x.rows() != y.size()) {
        throw Error(ErrorKind::LengthMismatch, "feature matrix has " + std::to_string(x.rows()) + " rows but " +
                                                   std::to_string(y.size()) + " labels were given");
    }
    if (!(spec.cost > 0.0) || !std::isfinite(spec.cost))
        throw Error(ErrorKind::InvalidParameter, "classifier cost must be positive");
    if (spec.max_epochs == 0) throw Error(ErrorKind::InvalidParameter, "max_epochs must be positive");
    if (num_classes < 2) throw Error(ErrorKind::TooFewClasses, "a classifier needs at least two classes");
    if (spec.method == ClassifierMethod::BinomialLogistic && num_classes != 2) {
        throw Error(ErrorKind::InvalidParameter,
                    "BinomialLogistic supports exactly two classes, got " + std::to_string(num_classes));
    }
    if (num_classes == 2) {
        const auto s = one_vs_rest_signs(y, 0);
        auto [w, b] = spec.method == ClassifierMethod::LinearSVM ? train_svm_binary(x, s, spec, 0)
                                                                 : train_logistic_binary(x, s, spec);
        return LinearModel(2, {std::move(w)}, {b});
    }
    return train_one_vs_rest(x, y, num_classes, spec);
}

}  // namespace tsfeat::learn
