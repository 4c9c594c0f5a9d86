#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "tsfeat/cluster.hpp"
#include "tsfeat/dataset.hpp"
#include "tsfeat/features.hpp"
#include "tsfeat/learn.hpp"
#include "tsfeat/project.hpp"

// Stage runner shared by the CLI, the replay command and the HTTP service.
// Every stage is fully described by its canonical parameter object, so two
// runs with equal canonical parameters on equal input produce equal bytes.

namespace tsfeat::pipeline {

using json = nlohmann::json;

inline constexpr std::string_view kEngineVersion = "0.1.0";

enum class Stage { Extract, Quality, Matrix, Project, Classify, TopFeatures };

/// "extract", "quality", "matrix", "project", "classify", "top-features".
std::string_view to_string(Stage s) noexcept;
Stage parse_stage(std::string_view name);

/// Defaults filled in, enum values respelled canonically, numbers coerced to
/// their declared type. Throws InvalidParameter for unknown keys, wrong
/// types and out-of-range values.
json canonical_params(Stage s, const json& params);

/// Compact serialization with sorted keys and a trailing newline.
std::string dump(const json& j);

FeatureTable run_extract(const Dataset& d, const json& canonical);

/// Runs an analysis stage (anything but Extract) and returns its artifact.
json run_analysis(Stage s, const FeatureTable& ft, const json& canonical);

json to_json(const QualityReport& q);
json to_json(const ClusteredMatrix& m);
json to_json(const ProjectedTable& p);
json to_json(const learn::ClassificationReport& r);
json to_json(const learn::TopFeatureResult& r);

/// Table-style CSV of ranked top features: feature,set,statistic,p_value,adjusted_p.
std::string top_features_csv(const json& artifact);

}  // namespace tsfeat::pipeline
