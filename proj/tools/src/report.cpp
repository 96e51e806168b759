// SPDX-License-Identifier: Apache-2.0
#include "sepsr/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "sepsr/error.hpp"
#include "sepsr/expr.hpp"

namespace sepsr::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// JSON has no infinities; non-finite numbers become null.
ordered_json number(double v) {
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json one_based(std::span<const std::size_t> idx) {
    ordered_json out = ordered_json::array();
    for (auto i : idx) {
        out.push_back(i + 1);
    }
    return out;
}

ordered_json names_of(std::span<const std::size_t> idx, const Target& target) {
    ordered_json out = ordered_json::array();
    for (auto i : idx) {
        out.push_back(i < target.variables.size() ? target.variables[i] : "x" + std::to_string(i + 1));
    }
    return out;
}

ordered_json target_json(const Target& t) {
    ordered_json box = ordered_json::array();
    for (const auto& iv : t.box.intervals()) {
        box.push_back({iv.lo, iv.hi});
    }
    return {{"spec", t.spec},
            {"kind", std::string(name(t.kind))},
            {"formula", t.formula},
            {"variables", t.variables},
            {"box", box},
            {"data_points", t.data.size()}};
}

ordered_json metrics_json(const FitnessMetrics& m) {
    return {{"one_minus_r2", number(m.one_minus_r2)}, {"sse", number(m.sse)}, {"sst", number(m.sst)}};
}

ordered_json test_json(const SubsetTest& t) {
    ordered_json pairs = ordered_json::array();
    for (const auto& p : t.pairs) {
        pairs.push_back({{"reference", p.reference + 1},
                         {"other", p.other + 1},
                         {"r", number(p.pearson.r)},
                         {"slope", number(p.pearson.slope)},
                         {"intercept", number(p.pearson.intercept)},
                         {"method", std::string(name(p.primary.method))},
                         {"primary_r", number(p.primary.r)},
                         {"passed", p.passed}});
    }
    return {{"varied", one_based(t.varied)},
            {"anchored", one_based(t.anchored)},
            {"anchors", t.anchors},
            {"samples", t.samples},
            {"passed", t.passed},
            {"pairs", pairs}};
}

ordered_json blocks_json(std::span<const Block> blocks) {
    ordered_json out = ordered_json::array();
    for (const auto& b : blocks) {
        out.push_back(one_based(b));
    }
    return out;
}

std::string summary_of(const SeparabilityReport& r) {
    return std::to_string(r.blocks.size()) + (r.blocks.size() == 1 ? " block" : " blocks");
}

} // namespace

ordered_json to_json(const SeparabilityReport& report, const Target& target) {
    ordered_json evidence = ordered_json::array();
    for (const auto& v : report.evidence) {
        evidence.push_back({{"subset", one_based(v.subset)},
                            {"separable", v.separable},
                            {"indeterminate", v.indeterminate},
                            {"operator", std::string(name(v.op))},
                            {"offset", number(v.offset)},
                            {"seed", v.seed},
                            {"redraws", v.redraws},
                            {"test1", test_json(v.test1)},
                            {"test2", test_json(v.test2)}});
    }
    ordered_json block_names = ordered_json::array();
    for (const auto& b : report.blocks) {
        block_names.push_back(names_of(b, target));
    }
    ordered_json j = {{"schema_version", kSchemaVersion},
                      {"kind", "separability_report"},
                      {"target", target_json(target)},
                      {"dimension", report.dimension},
                      {"seed", report.seed},
                      {"blocks", blocks_json(report.blocks)},
                      {"block_names", block_names},
                      {"operator_class", std::string(name(report.op))},
                      {"offset", number(report.offset)},
                      {"indeterminate", report.indeterminate},
                      {"summary", summary_of(report)},
                      {"warnings", report.warnings},
                      {"oracle_evaluations", report.oracle_evaluations},
                      {"evidence", evidence}};
    if (target.truth) {
        const bool matches = target.truth->blocks == report.blocks &&
                             (report.blocks.size() < 2 || target.truth->op == report.op);
        j["ground_truth"] = {{"blocks", blocks_json(target.truth->blocks)},
                             {"operator_class", std::string(name(target.truth->op))},
                             {"matches", matches}};
    }
    j["timing"] = {{"t1", report.t1}};
    return j;
}

ordered_json to_json(const ParseMatrix& genome) {
    ordered_json rows = ordered_json::array();
    for (const auto& r : genome.rows()) {
        rows.push_back({r[0], r[1], r[2], r[3]});
    }
    return {{"dimension", genome.dimension()}, {"rows", rows}};
}

ParseMatrix genome_from_json(const json& j) {
    try {
        const auto d = j.at("dimension").get<std::size_t>();
        std::vector<ParseMatrix::Row> rows;
        for (const auto& r : j.at("rows")) {
            if (!r.is_array() || r.size() != 4) {
                throw InputError("genome rows must have four integers");
            }
            rows.push_back({r[0].get<int>(), r[1].get<int>(), r[2].get<int>(), r[3].get<int>()});
        }
        return ParseMatrix(d, std::move(rows));
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed genome: ") + e.what());
    }
}

ordered_json to_json(const RecoveredModel& model, const Target& target) {
    ordered_json blocks = ordered_json::array();
    ordered_json block_seconds = ordered_json::array();
    for (const auto& f : model.fits) {
        blocks.push_back({{"variables", one_based(f.block)},
                          {"names", names_of(f.block, target)},
                          {"expression", to_infix(f.expression)},
                          {"local_expression", to_infix(f.local)},
                          {"anchor", {{"variables", one_based(f.complement)}, {"values", f.anchor}}},
                          {"shift", number(f.shift)},
                          {"metrics", metrics_json(f.metrics)},
                          {"evaluations", f.evaluations},
                          {"oracle_evaluations", f.oracle_evaluations},
                          {"generations", f.generations},
                          {"genome", to_json(f.genome)},
                          {"converged", f.converged},
                          {"seed", f.seed}});
        block_seconds.push_back(f.seconds);
    }
    ordered_json j = {{"schema_version", kSchemaVersion},
                      {"kind", "recovered_model"},
                      {"target", target_json(target)},
                      {"mode", model.direct ? "direct" : "dac"},
                      {"seed", model.seed},
                      {"budget", model.budget},
                      {"operator_class", std::string(name(model.op))},
                      {"c0", number(model.c0)},
                      {"intercept", number(model.intercept)},
                      {"coefficients", ordered_json::array()},
                      {"expression", to_infix(model.expression)},
                      {"blocks", blocks},
                      {"metrics", metrics_json(model.metrics)},
                      {"converged", model.converged},
                      {"evaluations",
                       {{"model", model.model_evaluations},
                        {"oracle", model.oracle_evaluations},
                        {"total", model.total_evaluations()}}},
                      {"warnings", model.warnings}};
    for (double c : model.coefficients) {
        j["coefficients"].push_back(number(c));
    }
    if (model.separability) {
        const auto& r = *model.separability;
        j["separability"] = {{"blocks", blocks_json(r.blocks)},
                             {"operator_class", std::string(name(r.op))},
                             {"offset", number(r.offset)},
                             {"indeterminate", r.indeterminate},
                             {"subset_tests", r.evidence.size()},
                             {"oracle_evaluations", r.oracle_evaluations},
                             {"seed", r.seed}};
    } else {
        j["separability"] = nullptr;
    }
    j["timing"] = {{"t1", model.timing.t1},
                   {"t2", model.timing.t2},
                   {"t3", model.timing.t3},
                   {"total", model.timing.total},
                   {"blocks", block_seconds}};
    return j;
}

std::string evidence_csv(const SeparabilityReport& report) {
    std::ostringstream out;
    out << "subset,test,reference,other,r,slope,intercept,passed\n";
    for (const auto& v : report.evidence) {
        std::string subset;
        for (auto i : v.subset) {
            subset += (subset.empty() ? "" : " ") + std::to_string(i + 1);
        }
        for (int t = 1; t <= 2; ++t) {
            const auto& test = t == 1 ? v.test1 : v.test2;
            for (const auto& p : test.pairs) {
                out << subset << ',' << t << ',' << p.reference + 1 << ',' << p.other + 1 << ','
                    << format_double(p.pearson.r) << ',' << format_double(p.pearson.slope) << ','
                    << format_double(p.pearson.intercept) << ',' << (p.passed ? 1 : 0) << '\n';
            }
        }
    }
    return out.str();
}

std::string predictions_csv(const RecoveredModel& model, const SampleSet& data) {
    std::ostringstream out;
    for (std::size_t d = 0; d < data.dimension(); ++d) {
        out << 'x' << d + 1 << ',';
    }
    out << "f,prediction,residual\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto p = data.point(i);
        for (double v : p) {
            out << format_double(v) << ',';
        }
        const auto r = evaluate(model.expression, p);
        const double f = data.has_values() ? data.values()[i] : std::nan("");
        const double pred = r.valid ? r.value : std::nan("");
        out << format_double(f) << ',' << format_double(pred) << ',' << format_double(f - pred) << '\n';
    }
    return out.str();
}

std::string model_csv(const RecoveredModel& model, const Target& target) {
    std::ostringstream out;
    out << "target,mode,seed,operator_class,blocks,one_minus_r2,converged,model_evaluations,oracle_evaluations,"
           "total_evaluations,t1,t2,t3,total,expression\n";
    std::string blocks;
    for (const auto& f : model.fits) {
        std::string b;
        for (auto i : f.block) {
            b += (b.empty() ? "" : " ") + std::to_string(i + 1);
        }
        blocks += (blocks.empty() ? "" : "|") + b;
    }
    out << target.spec << ',' << (model.direct ? "direct" : "dac") << ',' << model.seed << ',' << name(model.op)
        << ',' << blocks << ',' << format_double(model.metrics.one_minus_r2) << ',' << (model.converged ? 1 : 0)
        << ',' << model.model_evaluations << ',' << model.oracle_evaluations << ',' << model.total_evaluations()
        << ',' << format_double(model.timing.t1) << ',' << format_double(model.timing.t2) << ','
        << format_double(model.timing.t3) << ',' << format_double(model.timing.total) << ",\""
        << to_infix(model.expression) << "\"\n";
    return out.str();
}

json strip_timing(json j) {
    if (j.is_object()) {
        j.erase("timing");
        for (auto& [_, v] : j.items()) {
            v = strip_timing(std::move(v));
        }
    } else if (j.is_array()) {
        for (auto& v : j) {
            v = strip_timing(std::move(v));
        }
    }
    return j;
}

void write_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path tmp = dir / ("." + target.filename().string() + ".tmp." + std::to_string(getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write '" + tmp.string() + "'");
        }
        out << contents;
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw InputError("failed writing '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InputError("cannot move output into place at '" + path + "'");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace sepsr::cli
