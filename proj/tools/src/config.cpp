// SPDX-License-Identifier: Apache-2.0
#include "sepsr/cli/config.hpp"

#include "sepsr/cli/report.hpp"
#include "sepsr/error.hpp"

namespace sepsr::cli {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view name(Mode m) noexcept {
    return m == Mode::Dac ? "dac" : "direct";
}

Mode parse_mode(std::string_view text) {
    if (text == "dac") {
        return Mode::Dac;
    }
    if (text == "direct") {
        return Mode::Direct;
    }
    throw InputError("mode must be dac or direct, not '" + std::string(text) + "'");
}

std::string_view name(Format f) noexcept {
    return f == Format::Json ? "json" : "csv";
}

Format parse_format(std::string_view text) {
    if (text == "json") {
        return Format::Json;
    }
    if (text == "csv") {
        return Format::Csv;
    }
    throw InputError("format must be json or csv, not '" + std::string(text) + "'");
}

std::string_view name(SamplingMode m) noexcept {
    return m == SamplingMode::Lhs ? "lhs" : "grid";
}

SamplingMode parse_sampling(std::string_view text) {
    if (text == "lhs") {
        return SamplingMode::Lhs;
    }
    if (text == "grid") {
        return SamplingMode::Grid;
    }
    throw InputError("sampling mode must be lhs or grid, not '" + std::string(text) + "'");
}

RunConfig default_run_config() {
    RunConfig cfg;
    propagate_seed(cfg);
    return cfg;
}

void propagate_seed(RunConfig& cfg) {
    cfg.dac.seed = cfg.seed;
}

namespace {

ordered_json bict_json(const BictConfig& b) {
    return {{"samples", b.samples},
            {"anchors", b.anchors},
            {"epsilon_r", b.epsilon_r},
            {"epsilon_op", b.epsilon_op},
            {"method", std::string(name(b.method))},
            {"sampling", std::string(name(b.mode))},
            {"grid_points", b.grid_points},
            {"max_redraws", b.max_redraws},
            {"max_invalid_fraction", b.max_invalid_fraction},
            {"flat_tolerance", b.flat_tolerance}};
}

ordered_json pme_json(const PmeConfig& p) {
    return {{"height", p.height},
            {"mu", p.mu},
            {"lambda", p.lambda},
            {"budget", p.budget},
            {"threshold", p.threshold},
            {"mutation_rate", p.mutation_rate},
            {"linear_scaling", p.linear_scaling},
            {"restart_generations", p.restart_generations},
            {"max_stalled_generations", p.max_stalled_generations},
            {"constants",
             {{"restarts", p.constants.restarts},
              {"evaluations_per_restart", p.constants.evaluations_per_restart},
              {"refine_starts", p.constants.refine_starts},
              {"lo", p.constants.lo},
              {"hi", p.constants.hi},
              {"polish_evaluations", p.constants.polish_evaluations},
              {"polish_below", p.constants.polish_below}}}};
}

// Reads `key` into `out` when present and marks it consumed.
template <class T>
void take(const json& obj, const char* key, T& out, std::vector<std::string>& seen) {
    if (auto it = obj.find(key); it != obj.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw InputError(std::string("config key '") + key + "': " + e.what());
        }
        seen.emplace_back(key);
    }
}

void reject_unknown(const json& obj, const std::vector<std::string>& seen, const std::string& where) {
    if (!obj.is_object()) {
        throw InputError("config section '" + where + "' must be an object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
            throw InputError("unknown config key '" + where + key + "'");
        }
    }
}

void read_bict(const json& j, BictConfig& b) {
    std::vector<std::string> seen;
    std::string method(name(b.method));
    std::string sampling(name(b.mode));
    take(j, "samples", b.samples, seen);
    take(j, "anchors", b.anchors, seen);
    take(j, "epsilon_r", b.epsilon_r, seen);
    take(j, "epsilon_op", b.epsilon_op, seen);
    take(j, "method", method, seen);
    take(j, "sampling", sampling, seen);
    take(j, "grid_points", b.grid_points, seen);
    take(j, "max_redraws", b.max_redraws, seen);
    take(j, "max_invalid_fraction", b.max_invalid_fraction, seen);
    take(j, "flat_tolerance", b.flat_tolerance, seen);
    reject_unknown(j, seen, "bict.");
    const auto parsed = parse_correlation_method(method);
    if (!parsed) {
        throw InputError("correlation method must be pearson, spearman or kendall, not '" + method + "'");
    }
    b.method = *parsed;
    b.mode = parse_sampling(sampling);
}

void read_pme(const json& j, PmeConfig& p) {
    std::vector<std::string> seen;
    take(j, "height", p.height, seen);
    take(j, "mu", p.mu, seen);
    take(j, "lambda", p.lambda, seen);
    take(j, "budget", p.budget, seen);
    take(j, "threshold", p.threshold, seen);
    take(j, "mutation_rate", p.mutation_rate, seen);
    take(j, "linear_scaling", p.linear_scaling, seen);
    take(j, "restart_generations", p.restart_generations, seen);
    take(j, "max_stalled_generations", p.max_stalled_generations, seen);
    if (auto it = j.find("constants"); it != j.end()) {
        seen.emplace_back("constants");
        std::vector<std::string> cs;
        take(*it, "restarts", p.constants.restarts, cs);
        take(*it, "evaluations_per_restart", p.constants.evaluations_per_restart, cs);
        take(*it, "refine_starts", p.constants.refine_starts, cs);
        take(*it, "lo", p.constants.lo, cs);
        take(*it, "hi", p.constants.hi, cs);
        take(*it, "polish_evaluations", p.constants.polish_evaluations, cs);
        take(*it, "polish_below", p.constants.polish_below, cs);
        reject_unknown(*it, cs, "pme.constants.");
    }
    reject_unknown(j, seen, "pme.");
}

} // namespace

ordered_json to_json(const RunConfig& cfg) {
    const DacConfig& d = cfg.dac;
    return {{"schema_version", kSchemaVersion},
            {"target", cfg.target},
            {"box", cfg.box},
            {"mode", std::string(name(cfg.mode))},
            {"seed", cfg.seed},
            {"bict", bict_json(d.partition.bict)},
            {"partition", {{"max_combination", d.partition.max_combination}}},
            {"pme", pme_json(d.pme)},
            {"dac",
             {{"slice_samples", d.slice_samples},
              {"slice_sampling", std::string(name(d.slice_mode))},
              {"slice_grid_points", d.slice_grid_points},
              {"max_anchor_retries", d.max_anchor_retries},
              {"anchor", d.anchor},
              {"parallel_blocks", d.parallel_blocks}}},
            {"output", {{"out", cfg.out}, {"predictions", cfg.predictions}, {"format", std::string(name(cfg.format))}}}};
}

RunConfig run_config_from_json(const json& j) {
    RunConfig cfg = default_run_config();
    std::vector<std::string> seen;
    int version = kSchemaVersion;
    std::string mode(name(cfg.mode));
    take(j, "schema_version", version, seen);
    if (version != kSchemaVersion) {
        throw InputError("unsupported config schema_version " + std::to_string(version));
    }
    take(j, "target", cfg.target, seen);
    take(j, "box", cfg.box, seen);
    take(j, "mode", mode, seen);
    take(j, "seed", cfg.seed, seen);
    cfg.mode = parse_mode(mode);
    if (auto it = j.find("bict"); it != j.end()) {
        seen.emplace_back("bict");
        read_bict(*it, cfg.dac.partition.bict);
    }
    if (auto it = j.find("partition"); it != j.end()) {
        seen.emplace_back("partition");
        std::vector<std::string> ps;
        take(*it, "max_combination", cfg.dac.partition.max_combination, ps);
        reject_unknown(*it, ps, "partition.");
    }
    if (auto it = j.find("pme"); it != j.end()) {
        seen.emplace_back("pme");
        read_pme(*it, cfg.dac.pme);
    }
    if (auto it = j.find("dac"); it != j.end()) {
        seen.emplace_back("dac");
        std::vector<std::string> ds;
        std::string sampling(name(cfg.dac.slice_mode));
        take(*it, "slice_samples", cfg.dac.slice_samples, ds);
        take(*it, "slice_sampling", sampling, ds);
        take(*it, "slice_grid_points", cfg.dac.slice_grid_points, ds);
        take(*it, "max_anchor_retries", cfg.dac.max_anchor_retries, ds);
        take(*it, "anchor", cfg.dac.anchor, ds);
        take(*it, "parallel_blocks", cfg.dac.parallel_blocks, ds);
        reject_unknown(*it, ds, "dac.");
        cfg.dac.slice_mode = parse_sampling(sampling);
    }
    if (auto it = j.find("output"); it != j.end()) {
        seen.emplace_back("output");
        std::vector<std::string> os;
        std::string format(name(cfg.format));
        take(*it, "out", cfg.out, os);
        take(*it, "predictions", cfg.predictions, os);
        take(*it, "format", format, os);
        reject_unknown(*it, os, "output.");
        cfg.format = parse_format(format);
    }
    reject_unknown(j, seen, "");
    propagate_seed(cfg);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

} // namespace sepsr::cli
