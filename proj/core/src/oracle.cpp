// SPDX-License-Identifier: Apache-2.0
#include "sepsr/oracle.hpp"

#include <limits>

#include "sepsr/error.hpp"

namespace sepsr {

namespace {

void check_shape(std::size_t dimension, std::span<const double> points, std::span<double> out) {
    if (dimension == 0 || points.size() != out.size() * dimension) {
        throw InputError("oracle batch has " + std::to_string(points.size()) + " coordinates for " +
                         std::to_string(out.size()) + " points of dimension " + std::to_string(dimension));
    }
}

} // namespace

std::vector<double> Oracle::evaluate_rows(std::span<const double> points) const {
    const std::size_t n = dimension();
    std::vector<double> out(n == 0 ? 0 : points.size() / n);
    evaluate(points, out);
    return out;
}

ExpressionOracle::ExpressionOracle(Expression expr, std::size_t dimension)
    : expr_(std::move(expr)), dimension_(dimension) {
    if (expr_.required_dimension() > dimension_) {
        throw InputError("expression references more variables than the declared dimension");
    }
    if (expr_.parameter_count() > 0) {
        throw InputError("oracle expression has unbound parameter slots");
    }
}

void ExpressionOracle::evaluate(std::span<const double> points, std::span<double> out) const {
    check_shape(dimension_, points, out);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto r = sepsr::evaluate(expr_, points.subspan(i * dimension_, dimension_));
        out[i] = r.valid ? r.value : std::numeric_limits<double>::quiet_NaN();
    }
}

void FunctionOracle::evaluate(std::span<const double> points, std::span<double> out) const {
    check_shape(dimension_, points, out);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = fn_(points.subspan(i * dimension_, dimension_));
    }
}

void CountingOracle::evaluate(std::span<const double> points, std::span<double> out) const {
    inner_.evaluate(points, out);
    count_.fetch_add(out.size());
}

} // namespace sepsr
