// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sepsr/cli/catalog.hpp"
#include "sepsr/dac.hpp"

namespace sepsr::cli {

inline constexpr int kSchemaVersion = 1;

// Reports list variables 1-based. Wall-clock values live only under the
// "timing" key so two runs can be compared with it removed.
[[nodiscard]] nlohmann::ordered_json to_json(const SeparabilityReport& report, const Target& target);
[[nodiscard]] nlohmann::ordered_json to_json(const RecoveredModel& model, const Target& target);
[[nodiscard]] nlohmann::ordered_json to_json(const ParseMatrix& genome);
[[nodiscard]] ParseMatrix genome_from_json(const nlohmann::json& j);

// Evidence as CSV rows: subset,test,reference,other,r,slope,intercept,passed.
[[nodiscard]] std::string evidence_csv(const SeparabilityReport& report);
// x1..xn,f,prediction,residual over the target data.
[[nodiscard]] std::string predictions_csv(const RecoveredModel& model, const SampleSet& data);
// Single-row summary of a fit.
[[nodiscard]] std::string model_csv(const RecoveredModel& model, const Target& target);

// Removes every "timing" member, recursively.
[[nodiscard]] nlohmann::json strip_timing(nlohmann::json j);

// Writes to a sibling temporary file, then renames it over `path`.
void write_atomic(const std::string& path, const std::string& contents);
[[nodiscard]] std::string read_file(const std::string& path);

} // namespace sepsr::cli
