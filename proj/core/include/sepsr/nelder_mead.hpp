// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sepsr {

struct NelderMeadOptions {
    std::size_t max_evaluations = 200;
    double initial_step = 1.0;
    // Stop when the simplex values agree to this relative spread.
    double tolerance = 1e-15;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
};

// Downhill simplex minimisation; non-finite objective values rank as +inf.
[[nodiscard]] NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                                           std::vector<double> start, const NelderMeadOptions& options = {});

} // namespace sepsr
