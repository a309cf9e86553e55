#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lcbn/dataset.hpp"
#include "lcbn/experiments.hpp"
#include "lcbn/hierarchy.hpp"
#include "lcbn/identifiability.hpp"
#include "lcbn/inference.hpp"
#include "lcbn/qmatrix.hpp"

namespace lcbn {

inline constexpr const char* kLibraryVersion = "0.1.0";

// ---- hashes and manifests --------------------------------------------------

std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file(const std::string& path);

// Every output artifact embeds a manifest: command, library version, seed,
// resolved config, input digests, wall clock.  Identical manifests (ignoring
// the wall clock) imply identical outputs.
nlohmann::json manifest_json(const std::string& command, const nlohmann::json& resolved_config,
                             const std::vector<std::string>& input_paths, std::uint64_t seed,
                             double wall_clock_sec);

// ---- CSV -------------------------------------------------------------------

// Q-matrix: J rows x K columns of 0/1, optional header row with attribute
// names, leading '#' lines ignored.
QMatrix load_q_csv(const std::string& path, std::vector<std::string>* warnings = nullptr);
void write_q_csv(const std::string& path, const QMatrix& q, const std::string& manifest_line = "");

// Responses: cells 0, 1, or empty/NA for missing.  Rows with no observed
// cell are rejected with their 1-based index.
Dataset load_responses_csv(const std::string& path);
void write_responses_csv(const std::string& path, const Dataset& data,
                         const std::string& manifest_line = "");

// ---- hierarchy files --------------------------------------------------------

// JSON form {"K": 4, "edges": [[1,3],[1,4]]}; text form one "k -> l" line
// per edge with an optional leading "K <n>" line.
Hierarchy load_hierarchy(const std::string& path);
Hierarchy hierarchy_from_json(const nlohmann::json& j);
nlohmann::json hierarchy_to_json(const Hierarchy& h);
void write_hierarchy_json(const std::string& path, const Hierarchy& h,
                          const nlohmann::json* manifest = nullptr);

// ---- config ------------------------------------------------------------------

// Parses one experiment setting; unknown fields are rejected by name.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
// A config file holds either a single setting or {"settings": [...]}.
std::vector<ExperimentConfig> load_experiment_configs(const std::string& path);
Control control_from_json(const nlohmann::json& j, Control base = Control{});
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

// ---- reports -------------------------------------------------------------------

nlohmann::json fit_report_json(const TwoStepResult& fit, const std::vector<double>& grid);
nlohmann::json fit_report_json(const FitResult& fit);  // hierarchy supplied, step 2 only
nlohmann::json condition_report_json(const ConditionReport& rep);
nlohmann::json metrics_table_json(const MetricsTable& table);
std::string metrics_table_csv(const MetricsTable& table);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);
std::string read_text_file(const std::string& path);

}  // namespace lcbn
