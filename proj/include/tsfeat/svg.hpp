#pragma once

#include <string>

#include <json.hpp>

// Minimal static plots rendered from stage artifacts. Output uses only
// rect, circle, line, path and text elements and carries no timestamps.

namespace tsfeat::svg {

std::string quality_plot(const nlohmann::json& quality);
std::string matrix_heatmap(const nlohmann::json& matrix);
std::string embedding_scatter(const nlohmann::json& embedding);
std::string accuracy_bars(const nlohmann::json& classification);
std::string correlation_heatmap(const nlohmann::json& top_features);
std::string violins(const nlohmann::json& top_features);

}  // namespace tsfeat::svg
