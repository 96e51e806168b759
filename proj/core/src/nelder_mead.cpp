// SPDX-License-Identifier: Apache-2.0
#include "sepsr/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sepsr/error.hpp"

namespace sepsr {

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options) {
    const std::size_t dim = start.size();
    if (dim == 0) {
        throw InputError("Nelder-Mead needs at least one coordinate");
    }
    constexpr double kReflect = 1.0;
    constexpr double kExpand = 2.0;
    constexpr double kContract = 0.5;
    constexpr double kShrink = 0.5;

    NelderMeadResult result;
    auto eval = [&](std::span<const double> x) {
        ++result.evaluations;
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(dim + 1, start);
    for (std::size_t i = 0; i < dim; ++i) {
        simplex[i + 1][i] += options.initial_step;
    }
    std::vector<double> values(dim + 1);
    for (std::size_t i = 0; i <= dim && result.evaluations < options.max_evaluations; ++i) {
        values[i] = eval(simplex[i]);
    }
    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim);
    std::vector<double> trial(dim);
    std::vector<double> trial2(dim);

    while (result.evaluations + 1 < options.max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[dim - 1];
        const double spread = std::fabs(values[worst] - values[best]);
        if (std::isfinite(values[worst]) && spread <= options.tolerance * (std::fabs(values[best]) + 1e-300)) {
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t k = 0; k < dim; ++k) {
                centroid[k] += simplex[i][k] / static_cast<double>(dim);
            }
        }
        for (std::size_t k = 0; k < dim; ++k) {
            trial[k] = centroid[k] + kReflect * (centroid[k] - simplex[worst][k]);
        }
        const double fr = eval(trial);
        if (fr < values[best]) {
            for (std::size_t k = 0; k < dim; ++k) {
                trial2[k] = centroid[k] + kExpand * (trial[k] - centroid[k]);
            }
            const double fe = eval(trial2);
            if (fe < fr) {
                simplex[worst] = trial2;
                values[worst] = fe;
            } else {
                simplex[worst] = trial;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = trial;
            values[worst] = fr;
            continue;
        }
        // Contraction, outside or inside depending on the reflected value.
        const bool outside = fr < values[worst];
        for (std::size_t k = 0; k < dim; ++k) {
            const double toward = outside ? trial[k] : simplex[worst][k];
            trial2[k] = centroid[k] + kContract * (toward - centroid[k]);
        }
        const double fc = eval(trial2);
        if (fc < std::min(fr, values[worst])) {
            simplex[worst] = trial2;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= dim && result.evaluations < options.max_evaluations; ++i) {
            if (i == best) {
                continue;
            }
            for (std::size_t k = 0; k < dim; ++k) {
                simplex[i][k] = simplex[best][k] + kShrink * (simplex[i][k] - simplex[best][k]);
            }
            values[i] = eval(simplex[i]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    result.x = simplex[best];
    result.value = values[best];
    return result;
}

} // namespace sepsr
