// SPDX-License-Identifier: Apache-2.0
#include "sepsr/cli/commands.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sepsr/cli/report.hpp"
#include "sepsr/error.hpp"

namespace sepsr::cli {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t parse_count(std::string_view text) {
    auto integer = [&](std::string_view s) {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
            throw InputError("not a count: '" + std::string(text) + "'");
        }
        return v;
    };
    if (const auto caret = text.find('^'); caret != std::string_view::npos) {
        const std::uint64_t base = integer(text.substr(0, caret));
        const std::uint64_t exp = integer(text.substr(caret + 1));
        std::uint64_t v = 1;
        for (std::uint64_t i = 0; i < exp; ++i) {
            if (base != 0 && v > UINT64_MAX / base) {
                throw InputError("count '" + std::string(text) + "' overflows");
            }
            v *= base;
        }
        return v;
    }
    if (text.find_first_of("eE.") != std::string_view::npos) {
        double d = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
        if (ec != std::errc() || ptr != text.data() + text.size() || !(d >= 0.0) || d > 1.8e19 ||
            d != std::floor(d)) {
            throw InputError("not a count: '" + std::string(text) + "'");
        }
        return static_cast<std::uint64_t>(d);
    }
    return integer(text);
}

Target target_for(const RunConfig& cfg) {
    if (cfg.target.empty()) {
        throw InputError("no target given (use --target)");
    }
    TargetOptions options;
    options.box = cfg.box;
    return resolve_target(cfg.target, options);
}

SeparabilityReport run_detection(const Target& target, const RunConfig& cfg) {
    PartitionConfig pcfg = cfg.dac.partition;
    pcfg.bict.seed = derive_seed(cfg.dac.seed, "bict");
    return detect_partition(*target.oracle, target.box, pcfg);
}

namespace {

DacConfig dac_config_for(const Target& target, const RunConfig& cfg) {
    DacConfig d = cfg.dac;
    if (d.anchor.empty()) {
        d.anchor = target.anchor;
    }
    return d;
}

SampleSet data_with_values(const Target& target, std::uint64_t& oracle_evaluations) {
    if (target.data.has_values()) {
        return target.data;
    }
    auto values = target.oracle->evaluate_rows(target.data.points());
    oracle_evaluations += values.size();
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw EvaluationDomainError("target is undefined at a point of its data set");
        }
    }
    return SampleSet(target.data.dimension(), target.data.points(), std::move(values));
}

} // namespace

RecoveredModel run_fit(const Target& target, const RunConfig& cfg) {
    const DacConfig d = dac_config_for(target, cfg);
    if (cfg.mode == Mode::Dac) {
        return dac_fit(*target.oracle, target.box, target.data, d);
    }
    std::uint64_t oracle_evaluations = 0;
    const SampleSet data = data_with_values(target, oracle_evaluations);
    RecoveredModel model = fit_direct(data, d);
    model.oracle_evaluations += oracle_evaluations;
    return model;
}

BenchResult run_bench(const std::string& suite, std::size_t repeats, const RunConfig& cfg,
                      std::uint64_t direct_budget) {
    if (repeats == 0) {
        throw InputError("repeats must be at least 1");
    }
    if (suite != "eq1" && suite != "eq2") {
        throw InputError("bench suite must be eq1 or eq2");
    }
    BenchResult result;
    result.suite = suite;
    result.repeats = repeats;
    const Target target = resolve_target(suite);
    for (std::size_t r = 0; r < repeats; ++r) {
        for (Mode mode : {Mode::Dac, Mode::Direct}) {
            RunConfig run_cfg = cfg;
            run_cfg.mode = mode;
            run_cfg.seed = cfg.seed + r;
            if (mode == Mode::Direct && direct_budget > 0) {
                run_cfg.dac.pme.budget = direct_budget;
            }
            propagate_seed(run_cfg);
            const RecoveredModel m = run_fit(target, run_cfg);
            result.runs.push_back({r + 1, mode, run_cfg.seed, m.timing, m.model_evaluations, m.oracle_evaluations,
                                   m.metrics.one_minus_r2, m.converged});
        }
    }
    return result;
}

namespace {

struct Averages {
    double t1 = 0, t2 = 0, t3 = 0, total = 0, evaluations = 0, converged = 0;
};

Averages average(const BenchResult& b, Mode mode) {
    Averages a;
    double n = 0;
    for (const auto& r : b.runs) {
        if (r.mode != mode) {
            continue;
        }
        n += 1;
        a.t1 += r.timing.t1;
        a.t2 += r.timing.t2;
        a.t3 += r.timing.t3;
        a.total += r.timing.total;
        a.evaluations += static_cast<double>(r.model_evaluations + r.oracle_evaluations);
        a.converged += r.converged ? 1.0 : 0.0;
    }
    if (n > 0) {
        a.t1 /= n;
        a.t2 /= n;
        a.t3 /= n;
        a.total /= n;
        a.evaluations /= n;
        a.converged /= n;
    }
    return a;
}

const BenchRun* partner(const BenchResult& b, const BenchRun& r) {
    for (const auto& o : b.runs) {
        if (o.run == r.run && o.mode != r.mode) {
            return &o;
        }
    }
    return nullptr;
}

double ratio(double num, double den) {
    return den > 0.0 ? num / den : std::nan("");
}

} // namespace

std::string bench_csv(const BenchResult& b) {
    std::ostringstream out;
    out << "suite,run,mode,seed,t1,t2,t3,total,model_evaluations,oracle_evaluations,total_evaluations,"
           "one_minus_r2,converged,speedup_time,speedup_evaluations\n";
    for (const auto& r : b.runs) {
        const BenchRun* other = partner(b, r);
        const BenchRun* dac = r.mode == Mode::Dac ? &r : other;
        const BenchRun* direct = r.mode == Mode::Direct ? &r : other;
        const double st = dac && direct ? ratio(direct->timing.total, dac->timing.total) : std::nan("");
        const double se = dac && direct ? ratio(static_cast<double>(direct->model_evaluations + direct->oracle_evaluations),
                                                static_cast<double>(dac->model_evaluations + dac->oracle_evaluations))
                                        : std::nan("");
        out << b.suite << ',' << r.run << ',' << name(r.mode) << ',' << r.seed << ',' << format_double(r.timing.t1)
            << ',' << format_double(r.timing.t2) << ',' << format_double(r.timing.t3) << ','
            << format_double(r.timing.total) << ',' << r.model_evaluations << ',' << r.oracle_evaluations << ','
            << r.model_evaluations + r.oracle_evaluations << ',' << format_double(r.one_minus_r2) << ','
            << (r.converged ? 1 : 0) << ',' << format_double(st) << ',' << format_double(se) << '\n';
    }
    const Averages dac = average(b, Mode::Dac);
    const Averages direct = average(b, Mode::Direct);
    for (Mode mode : {Mode::Dac, Mode::Direct}) {
        const Averages& a = mode == Mode::Dac ? dac : direct;
        out << b.suite << ",mean," << name(mode) << ",," << format_double(a.t1) << ',' << format_double(a.t2) << ','
            << format_double(a.t3) << ',' << format_double(a.total) << ",,," << format_double(a.evaluations) << ",,"
            << format_double(a.converged) << ',' << format_double(ratio(direct.total, dac.total)) << ','
            << format_double(ratio(direct.evaluations, dac.evaluations)) << '\n';
    }
    return out.str();
}

std::string bench_json(const BenchResult& b) {
    ordered_json runs = ordered_json::array();
    for (const auto& r : b.runs) {
        runs.push_back({{"run", r.run},
                        {"mode", std::string(name(r.mode))},
                        {"seed", r.seed},
                        {"t1", r.timing.t1},
                        {"t2", r.timing.t2},
                        {"t3", r.timing.t3},
                        {"total", r.timing.total},
                        {"model_evaluations", r.model_evaluations},
                        {"oracle_evaluations", r.oracle_evaluations},
                        {"one_minus_r2", std::isfinite(r.one_minus_r2) ? ordered_json(r.one_minus_r2) : ordered_json()},
                        {"converged", r.converged}});
    }
    auto avg_json = [](const Averages& a) {
        return ordered_json{{"t1", a.t1},         {"t2", a.t2},
                            {"t3", a.t3},         {"total", a.total},
                            {"evaluations", a.evaluations}, {"converged_fraction", a.converged}};
    };
    const Averages dac = average(b, Mode::Dac);
    const Averages direct = average(b, Mode::Direct);
    // Single-core timings reported in the original experiments, for context.
    const ordered_json reference = b.suite == "eq1" ? ordered_json{{"dac_total_s", 11.2}, {"direct_total_s", 746.0}}
                                                    : ordered_json{{"dac_total_s", 18.3}, {"direct_total_s", 5143.0}};
    ordered_json j = {{"suite", b.suite},
                      {"repeats", b.repeats},
                      {"runs", runs},
                      {"average", {{"dac", avg_json(dac)}, {"direct", avg_json(direct)}}},
                      {"speedup_time", ratio(direct.total, dac.total)},
                      {"speedup_evaluations", ratio(direct.evaluations, dac.evaluations)},
                      {"published_reference", reference}};
    return j.dump(2) + "\n";
}

namespace {

struct Overrides {
    std::string config;
    std::string target;
    std::string box;
    std::string mode;
    std::uint64_t seed = 0;
    std::string budget;
    std::size_t bict_n = 0;
    std::size_t bict_anchors = 0;
    double epsilon_r = 0.0;
    std::string out;
    std::string format;
    std::string predictions;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "RunConfig JSON file");
    cmd->add_option("--target", o.target, "builtin name, expr:<infix>, exec:<command> or grid CSV path");
    cmd->add_option("--box", o.box, "domain for expr:/exec: targets, lo:hi,lo:hi,...");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--budget", o.budget, "PME evaluation budget (e.g. 1e6 or 10^6)");
    cmd->add_option("--bict-n", o.bict_n, "BiCT samples per slice");
    cmd->add_option("--bict-anchors", o.bict_anchors, "BiCT anchor points");
    cmd->add_option("--epsilon-r", o.epsilon_r, "BiCT correlation tolerance");
    cmd->add_option("--out", o.out, "output file (stdout when omitted)");
    cmd->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

RunConfig apply(const Overrides& o, const CLI::App& cmd) {
    RunConfig cfg = o.config.empty() ? default_run_config() : load_run_config(o.config);
    auto given = [&](const char* flag) {
        const CLI::Option* opt = cmd.get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--target")) {
        cfg.target = o.target;
    }
    if (given("--box")) {
        cfg.box = o.box;
    }
    if (given("--mode")) {
        cfg.mode = parse_mode(o.mode);
    }
    if (given("--seed")) {
        cfg.seed = o.seed;
    }
    if (given("--budget")) {
        cfg.dac.pme.budget = parse_count(o.budget);
    }
    if (given("--bict-n")) {
        cfg.dac.partition.bict.samples = o.bict_n;
    }
    if (given("--bict-anchors")) {
        cfg.dac.partition.bict.anchors = o.bict_anchors;
    }
    if (given("--epsilon-r")) {
        cfg.dac.partition.bict.epsilon_r = o.epsilon_r;
    }
    if (given("--out")) {
        cfg.out = o.out;
    }
    if (given("--format")) {
        cfg.format = parse_format(o.format);
    }
    if (given("--predictions")) {
        cfg.predictions = o.predictions;
    }
    propagate_seed(cfg);
    return cfg;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
    } else {
        write_atomic(path, text);
    }
}

int cmd_detect(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Target target = target_for(cfg);
    const SeparabilityReport report = run_detection(target, cfg);
    if (cfg.format == Format::Csv) {
        emit(cfg.out, evidence_csv(report), out);
    } else {
        emit(cfg.out, to_json(report, target).dump(2) + "\n", out);
    }
    if (report.indeterminate) {
        err << "separability could not be decided for every subset\n";
        return kExitIndeterminate;
    }
    return kExitOk;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Target target = target_for(cfg);
    const RecoveredModel model = run_fit(target, cfg);
    if (cfg.format == Format::Csv) {
        emit(cfg.out, model_csv(model, target), out);
    } else {
        emit(cfg.out, to_json(model, target).dump(2) + "\n", out);
    }
    std::string predictions = cfg.predictions;
    if (predictions.empty() && !cfg.out.empty() && cfg.out != "-") {
        predictions = cfg.out + ".predictions.csv";
    }
    if (!predictions.empty()) {
        std::uint64_t unused = 0;
        write_atomic(predictions, predictions_csv(model, data_with_values(target, unused)));
    }
    if (!model.converged) {
        err << "budget exhausted before 1 - R^2 reached the threshold (best " << format_double(model.metrics.one_minus_r2)
            << ")\n";
        return kExitBudget;
    }
    return kExitOk;
}

int cmd_export(const RunConfig& cfg, std::ostream& out) {
    const Target target = target_for(cfg);
    std::uint64_t unused = 0;
    std::ostringstream csv;
    write_csv(csv, data_with_values(target, unused));
    emit(cfg.out, csv.str(), out);
    return kExitOk;
}

int cmd_replay(const RunConfig& cfg, const std::string& model_path, std::ostream& out) {
    json model;
    try {
        model = json::parse(read_file(model_path));
    } catch (const json::parse_error& e) {
        throw InputError("model '" + model_path + "' is not valid JSON: " + e.what());
    }
    RunConfig run = cfg;
    if (run.target.empty()) {
        run.target = model.at("target").at("spec").get<std::string>();
    }
    const Target target = target_for(run);
    const DacConfig d = dac_config_for(target, run);
    ordered_json report = {{"model", model_path}, {"blocks", ordered_json::array()}};
    bool all_match = true;
    for (const auto& b : model.at("blocks")) {
        if (!b.contains("genome")) {
            throw InputError("model block has no genome to replay");
        }
        const ParseMatrix genome = genome_from_json(b.at("genome"));
        Block block;
        for (const auto& v : b.at("variables")) {
            block.push_back(v.get<std::size_t>() - 1);
        }
        const auto seed = b.at("seed").get<std::uint64_t>();
        SampleSet data;
        if (block.size() == target.dimension()) {
            std::uint64_t unused = 0;
            data = data_with_values(target, unused);
        } else {
            const auto anchor = b.at("anchor").at("values").get<std::vector<double>>();
            std::uint64_t unused = 0;
            data = make_slice(*target.oracle, target.box, block, anchor, b.at("shift").is_null() ? 0.0 : b.at("shift").get<double>(),
                              d, seed, unused);
        }
        const GenomeScore score = score_genome(genome, data, block_pme_config(d.pme, seed));
        const Expression expr = realize(genome, score);
        const double recorded = b.at("metrics").at("one_minus_r2").is_null()
                                    ? std::numeric_limits<double>::infinity()
                                    : b.at("metrics").at("one_minus_r2").get<double>();
        const FitnessMetrics m = fitness(expr, data);
        const bool match = m.one_minus_r2 == recorded || std::fabs(m.one_minus_r2 - recorded) <= 1e-12;
        all_match = all_match && match;
        report["blocks"].push_back({{"variables", b.at("variables")},
                                    {"expression", to_infix(expr)},
                                    {"one_minus_r2", std::isfinite(m.one_minus_r2) ? ordered_json(m.one_minus_r2) : ordered_json()},
                                    {"recorded_one_minus_r2", b.at("metrics").at("one_minus_r2")},
                                    {"matches", match}});
    }
    report["matches"] = all_match;
    emit(cfg.out, report.dump(2) + "\n", out);
    return all_match ? kExitOk : kExitError;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Separability-aware symbolic regression: BiCT detection, parse-matrix evolution, recovery"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "sepsr 0.1.0");

    Overrides o;
    auto* detect = app.add_subcommand("detect", "find the variable partition and operator class");
    add_common(detect, o);

    auto* fit = app.add_subcommand("fit", "fit a model, with divide and conquer or directly");
    add_common(fit, o);
    fit->add_option("--mode", o.mode, "dac or direct")->check(CLI::IsMember({"dac", "direct"}));
    fit->add_option("--predictions", o.predictions, "predictions CSV (default <out>.predictions.csv)");

    std::string suite = "eq1";
    std::size_t repeats = 10;
    std::string direct_budget;
    auto* bench = app.add_subcommand("bench", "time dac against direct fitting");
    add_common(bench, o);
    bench->add_option("--suite", suite, "eq1 or eq2")->check(CLI::IsMember({"eq1", "eq2"}));
    bench->add_option("--repeats", repeats, "runs per mode")->check(CLI::PositiveNumber);
    bench->add_option("--direct-budget", direct_budget, "budget for direct runs (default --budget)");

    auto* exp = app.add_subcommand("export", "write a target's data set as CSV");
    add_common(exp, o);

    std::string model_path;
    auto* replay = app.add_subcommand("replay", "re-score the genomes saved in a model report");
    add_common(replay, o);
    replay->add_option("--model", model_path, "model JSON written by fit")->required();

    auto* config = app.add_subcommand("config", "print the effective RunConfig");
    add_common(config, o);
    config->add_option("--mode", o.mode, "dac or direct")->check(CLI::IsMember({"dac", "direct"}));

    std::vector<std::string> argv(args.rbegin(), args.rend());
    if (!argv.empty()) {
        argv.pop_back(); // program name
    }
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << "sepsr 0.1.0\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }

    try {
        if (detect->parsed()) {
            return cmd_detect(apply(o, *detect), out, err);
        }
        if (fit->parsed()) {
            return cmd_fit(apply(o, *fit), out, err);
        }
        if (bench->parsed()) {
            const RunConfig cfg = apply(o, *bench);
            const BenchResult result =
                run_bench(suite, repeats, cfg, direct_budget.empty() ? 0 : parse_count(direct_budget));
            const std::string prefix = cfg.out.empty() ? "bench_" + suite : cfg.out;
            write_atomic(prefix + ".csv", bench_csv(result));
            write_atomic(prefix + ".json", bench_json(result));
            out << bench_csv(result);
            return kExitOk;
        }
        if (exp->parsed()) {
            return cmd_export(apply(o, *exp), out);
        }
        if (replay->parsed()) {
            return cmd_replay(apply(o, *replay), model_path, out);
        }
        if (config->parsed()) {
            const RunConfig cfg = apply(o, *config);
            emit(cfg.out, to_json(cfg).dump(2) + "\n", out);
            return kExitOk;
        }
    } catch (const IndeterminateError& e) {
        err << "indeterminate: " << e.what() << "\n";
        return kExitIndeterminate;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const json::exception& e) {
        err << "error: malformed JSON input: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

} // namespace sepsr::cli
