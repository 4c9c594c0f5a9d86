#include "tsfeat/error.hpp"

namespace tsfeat {

std::string_view error_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::DuplicateTimepoint: return "DuplicateTimepoint";
        case ErrorKind::NonNumericValue: return "NonNumericValue";
        case ErrorKind::UnlabeledSeries: return "UnlabeledSeries";
        case ErrorKind::InconsistentLabel: return "InconsistentLabel";
        case ErrorKind::IncompleteTable: return "IncompleteTable";
        case ErrorKind::EmptyRegistry: return "EmptyRegistry";
        case ErrorKind::EmptyTable: return "EmptyTable";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::InvalidParameter: return "InvalidParameter";
        case ErrorKind::MulticlassWithTwoSampleTest: return "MulticlassWithTwoSampleTest";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::EmptySeries: return "EmptySeries";
        case ErrorKind::ConstantSeries: return "ConstantSeries";
        case ErrorKind::DegenerateScale: return "DegenerateScale";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::TooFewItems: return "TooFewItems";
        case ErrorKind::NaNInput: return "NaNInput";
        case ErrorKind::ZeroVarianceColumn: return "ZeroVarianceColumn";
        case ErrorKind::PerplexityInfeasible: return "PerplexityInfeasible";
        case ErrorKind::ClassTooSmall: return "ClassTooSmall";
        case ErrorKind::TooFewClasses: return "TooFewClasses";
        case ErrorKind::NoSurvivingFeatures: return "NoSurvivingFeatures";
        case ErrorKind::DegenerateNull: return "DegenerateNull";
        case ErrorKind::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

ErrorCategory error_category(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EmptySeries:
        case ErrorKind::ConstantSeries:
        case ErrorKind::DegenerateScale:
        case ErrorKind::InsufficientData:
        case ErrorKind::TooFewItems:
        case ErrorKind::NaNInput:
        case ErrorKind::ZeroVarianceColumn:
        case ErrorKind::PerplexityInfeasible:
        case ErrorKind::ClassTooSmall:
        case ErrorKind::TooFewClasses:
        case ErrorKind::NoSurvivingFeatures:
        case ErrorKind::DegenerateNull:
            return ErrorCategory::Degenerate;
        case ErrorKind::NumericalFailure:
            return ErrorCategory::Numerical;
        default:
            return ErrorCategory::Schema;
    }
}

}  // namespace tsfeat
