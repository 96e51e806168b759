// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "sepsr/dac.hpp"

namespace sepsr::cli {

enum class Mode { Dac, Direct };
enum class Format { Json, Csv };

[[nodiscard]] std::string_view name(Mode m) noexcept;
[[nodiscard]] Mode parse_mode(std::string_view text);
[[nodiscard]] std::string_view name(Format f) noexcept;
[[nodiscard]] Format parse_format(std::string_view text);
[[nodiscard]] std::string_view name(SamplingMode m) noexcept;
[[nodiscard]] SamplingMode parse_sampling(std::string_view text);

// Everything a run depends on; a saved config replays the run.
struct RunConfig {
    std::string target;
    std::string box; // for expr:/exec: targets
    Mode mode = Mode::Dac;
    std::uint64_t seed = 1;
    DacConfig dac;
    std::string out;
    std::string predictions;
    Format format = Format::Json;
};

[[nodiscard]] RunConfig default_run_config();

[[nodiscard]] nlohmann::ordered_json to_json(const RunConfig& cfg);
// Missing keys keep their defaults; unknown keys are an InputError.
[[nodiscard]] RunConfig run_config_from_json(const nlohmann::json& j);

[[nodiscard]] RunConfig load_run_config(const std::string& path);

// Copies the master seed into every stage that takes one.
void propagate_seed(RunConfig& cfg);

} // namespace sepsr::cli
