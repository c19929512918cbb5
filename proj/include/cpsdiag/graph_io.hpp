#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cpsdiag/causal_graph.hpp"

namespace cpsdiag {

// Reads and parses a JSON file. Parse failures become ValidationError with the
// file name and line/column context.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// {"nodes": [...], "edges": [[from, to], ...]}; unknown keys are rejected.
CausalGraph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const CausalGraph& g);
CausalGraph load_graph(const std::filesystem::path& path);

// Accepts {"sub": 0|1, ...} or a health-state record {"t": ..., "h": {...}}.
HealthStateVector health_from_json(const nlohmann::json& j);
nlohmann::json health_to_json(const HealthStateVector& h);

// Graphviz rendering. Symptomatic nodes are filled yellow, root causes drawn
// with penwidth=3.
std::string to_dot(const CausalGraph& g, const SubsystemSet& symptomatic,
                   const SubsystemSet& root_causes, const std::string& graph_name = "causal");

}  // namespace cpsdiag
