// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sepsr/expr.hpp"
#include "sepsr/pme.hpp"
#include "sepsr/rng.hpp"

namespace sepsr::test {

// Random decoded genome with its constant slots bound to values in [-3, 3].
inline Expression random_expression(std::size_t dimension, std::size_t height, Rng& rng) {
    const Expression e = decode(ParseMatrix::random(dimension, height, rng));
    const std::vector<double> params{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    return bind_parameters(e, params);
}

inline std::vector<double> random_point(std::size_t dimension, Rng& rng, double lo = -3.0, double hi = 3.0) {
    std::vector<double> x(dimension);
    for (auto& v : x) {
        v = rng.uniform(lo, hi);
    }
    return x;
}

inline bool close_relative(double a, double b, double tol) {
    if (a == b) {
        return true;
    }
    return std::fabs(a - b) <= tol * std::max({std::fabs(a), std::fabs(b), 1e-300});
}

// Pearson r straight from the textbook sum formula.
inline double pearson_reference(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

} // namespace sepsr::test
