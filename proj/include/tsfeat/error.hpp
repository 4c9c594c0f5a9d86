#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsfeat {

/// Named failure conditions raised by the engine. The name of each kind is
/// part of the external contract (CLI messages, service error payloads).
enum class ErrorKind {
    // input / schema
    MissingColumn,
    DuplicateTimepoint,
    NonNumericValue,
    UnlabeledSeries,
    InconsistentLabel,
    IncompleteTable,
    EmptyRegistry,
    EmptyTable,
    LengthMismatch,
    EmptyInput,
    OutOfRange,
    InvalidParameter,
    MulticlassWithTwoSampleTest,
    IoError,
    // data degeneracy
    EmptySeries,
    ConstantSeries,
    DegenerateScale,
    InsufficientData,
    TooFewItems,
    NaNInput,
    ZeroVarianceColumn,
    PerplexityInfeasible,
    ClassTooSmall,
    TooFewClasses,
    NoSurvivingFeatures,
    DegenerateNull,
    // numerics
    NumericalFailure,
};

/// Coarse grouping used for CLI exit codes and HTTP status mapping.
enum class ErrorCategory { Schema, Degenerate, Numerical };

std::string_view error_name(ErrorKind kind) noexcept;
ErrorCategory error_category(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return error_name(kind_); }
    ErrorCategory category() const noexcept { return error_category(kind_); }

private:
    ErrorKind kind_;
};

}  // namespace tsfeat
