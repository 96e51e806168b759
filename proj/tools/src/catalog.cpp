// SPDX-License-Identifier: Apache-2.0
#include "sepsr/cli/catalog.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "sepsr/cli/dataset_oracle.hpp"
#include "sepsr/cli/external_oracle.hpp"
#include "sepsr/error.hpp"
#include "sepsr/expr.hpp"

namespace sepsr::cli {

std::string_view name(TargetKind k) noexcept {
    switch (k) {
    case TargetKind::Builtin: return "builtin";
    case TargetKind::Infix: return "infix";
    case TargetKind::External: return "external";
    case TargetKind::Dataset: return "dataset";
    }
    return "?";
}

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;
constexpr std::uint64_t kCatalogSeed = 20170602;

std::vector<double> range(double first, double step, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = first + step * static_cast<double>(i);
    }
    return out;
}

// Full factorial over explicit axis levels, last axis fastest.
SampleSet factorial(const std::vector<std::vector<double>>& axes) {
    std::size_t total = 1;
    for (const auto& a : axes) {
        total *= a.size();
    }
    std::vector<double> points;
    points.reserve(total * axes.size());
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t r = 0; r < total; ++r) {
        for (std::size_t d = 0; d < axes.size(); ++d) {
            points.push_back(axes[d][idx[d]]);
        }
        for (std::size_t d = axes.size(); d-- > 0;) {
            if (++idx[d] < axes[d].size()) {
                break;
            }
            idx[d] = 0;
        }
    }
    return SampleSet(axes.size(), std::move(points));
}

Target expression_target(std::string spec, std::string formula, std::vector<std::string> variables, DomainBox box) {
    Target t;
    t.kind = TargetKind::Builtin;
    t.spec = std::move(spec);
    t.formula = std::move(formula);
    t.variables = std::move(variables);
    t.box = std::move(box);
    t.oracle = std::make_shared<ExpressionOracle>(parse_infix(t.formula, t.box.dimension()), t.box.dimension());
    return t;
}

Target eq1() {
    // theta is given in degrees (1..10); the formula converts to radians.
    const std::string rad = "(x1*" + format_double(kDegree) + ")";
    Target t = expression_target("eq1", "2.274*sin" + rad + "*sqrt(cos" + rad + ")/sqrt(x2)", {"theta", "Re_x"},
                                 DomainBox({{1.0, 10.0}, {1000.0, 10000.0}}));
    t.data = factorial({range(1.0, 1.0, 10), range(1000.0, 1000.0, 10)});
    t.anchor = {5.0, 5000.0};
    t.truth = GroundTruth{{{0}, {1}}, Combiner::Times};
    return t;
}

DomainBox eq2_box() {
    return DomainBox({{500.0, 1000.0}, {1e-4, 1e-3}, {0.01, 0.1}, {1e4, 5e4}, {1e5, 1e6}});
}

Target eq2_common(std::string spec) {
    Target t = expression_target(std::move(spec), "0.000183*x1^2*x1*sqrt(x2/x3)*(1-x4/x5)",
                                 {"v", "rho", "R", "h_w", "h_s"}, eq2_box());
    t.anchor = {800.0, 5e-4, 0.05, 2e4, 2e5};
    t.truth = GroundTruth{{{0}, {1}, {2}, {3, 4}}, Combiner::Times};
    return t;
}

Target eq2() {
    Target t = eq2_common("eq2");
    t.data = lhs_sample(t.box, 3000, kCatalogSeed);
    return t;
}

Target eq2_grid() {
    Target t = eq2_common("eq2_grid");
    t.data = factorial({range(500.0, 100.0, 6), range(1e-4, 1e-4, 10), range(0.01, 0.01, 10), range(1e4, 1e4, 5),
                        range(1e5, 1e5, 10)});
    return t;
}

Target toy(std::string spec, std::string formula, Combiner op) {
    Target t = expression_target(std::move(spec), std::move(formula), {"u", "v", "w"},
                                 DomainBox({{-3.0, 3.0}, {-3.0, 3.0}, {-3.0, 3.0}}));
    t.data = lhs_sample(t.box, 1000, kCatalogSeed);
    t.truth = GroundTruth{{{0}, {1, 2}}, op};
    return t;
}

Target nonsep3() {
    Target t = expression_target("nonsep3", "sin(x1+x2+x3)", {"x1", "x2", "x3"},
                                 DomainBox({{-3.0, 3.0}, {-3.0, 3.0}, {-3.0, 3.0}}));
    t.data = lhs_sample(t.box, 1000, kCatalogSeed);
    t.truth = GroundTruth{{{0, 1, 2}}, Combiner::None};
    return t;
}

std::optional<Target> builtin(std::string_view name) {
    if (name == "eq1") {
        return eq1();
    }
    if (name == "eq2") {
        return eq2();
    }
    if (name == "eq2_grid") {
        return eq2_grid();
    }
    if (name == "eq3") {
        return toy("eq3", "0.8+0.6*(x1^2+cos(x1))+sin(x2+x3)*(x2-x3)", Combiner::PlusMinus);
    }
    if (name == "eq4") {
        return toy("eq4", "0.8+0.6*(x1^2+cos(x1))-sin(x2+x3)*(x2-x3)", Combiner::PlusMinus);
    }
    if (name == "eq5") {
        return toy("eq5", "0.8+0.6*(x1^2+cos(x1))*(sin(x2+x3)*(x2-x3))", Combiner::Times);
    }
    if (name == "nonsep3") {
        return nonsep3();
    }
    return std::nullopt;
}

std::vector<std::string> default_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back("x" + std::to_string(i + 1));
    }
    return out;
}

double parse_number(std::string_view s) {
    while (!s.empty() && s.front() == ' ') {
        s.remove_prefix(1);
    }
    while (!s.empty() && s.back() == ' ') {
        s.remove_suffix(1);
    }
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw InputError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

// Largest k such that x<k> appears in the infix text.
std::size_t infer_dimension(std::string_view text) {
    std::size_t d = 0;
    for (std::size_t i = 0; i + 1 < text.size(); ++i) {
        if (text[i] != 'x' || (i > 0 && std::isalpha(static_cast<unsigned char>(text[i - 1])))) {
            continue;
        }
        std::size_t j = i + 1;
        std::size_t k = 0;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
            k = k * 10 + static_cast<std::size_t>(text[j] - '0');
            ++j;
        }
        d = std::max(d, k);
    }
    return d;
}

} // namespace

std::vector<std::string> builtin_names() {
    return {"eq1", "eq2", "eq2_grid", "eq3", "eq4", "eq5", "nonsep3"};
}

DomainBox parse_box(std::string_view text) {
    std::vector<Interval> intervals;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view item = text.substr(0, comma);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw InputError("box interval '" + std::string(item) + "' is not of the form lo:hi");
        }
        intervals.push_back({parse_number(item.substr(0, colon)), parse_number(item.substr(colon + 1))});
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    return DomainBox(std::move(intervals));
}

Target resolve_target(std::string_view spec, const TargetOptions& options) {
    if (auto t = builtin(spec)) {
        return std::move(*t);
    }
    Target t;
    t.spec = std::string(spec);
    if (spec.starts_with("expr:")) {
        t.kind = TargetKind::Infix;
        t.formula = std::string(spec.substr(5));
        if (!options.box.empty()) {
            t.box = parse_box(options.box);
        } else {
            const std::size_t d = infer_dimension(t.formula);
            if (d == 0) {
                throw InputError("expression uses no variables; pass --box to set its dimension");
            }
            t.box = DomainBox(std::vector<Interval>(d, Interval{-3.0, 3.0}));
        }
        t.oracle = std::make_shared<ExpressionOracle>(parse_infix(t.formula, t.box.dimension()), t.box.dimension());
    } else if (spec.starts_with("exec:")) {
        t.kind = TargetKind::External;
        if (options.box.empty()) {
            throw InputError("exec: targets need --box");
        }
        t.box = parse_box(options.box);
        t.formula = std::string(spec.substr(5));
        t.oracle = std::make_shared<ExternalOracle>(t.formula, t.box.dimension());
    } else if (spec.ends_with(".csv") || std::filesystem::exists(std::filesystem::path(spec))) {
        t.kind = TargetKind::Dataset;
        std::ifstream in{std::filesystem::path(spec)};
        if (!in) {
            throw InputError("cannot open dataset '" + std::string(spec) + "'");
        }
        SampleSet samples = read_csv(in);
        if (!samples.has_values()) {
            throw InputError("dataset '" + std::string(spec) + "' has no f column");
        }
        auto oracle = std::make_shared<DatasetOracle>(samples);
        t.box = oracle->hull();
        t.oracle = std::move(oracle);
        t.data = std::move(samples);
        t.variables = default_names(t.box.dimension());
        return t;
    } else {
        throw InputError("unknown target '" + std::string(spec) + "'");
    }
    t.variables = default_names(t.box.dimension());
    t.data = lhs_sample(t.box, options.data_points, options.data_seed);
    return t;
}

} // namespace sepsr::cli
