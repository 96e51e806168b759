// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sepsr::detail {

struct LeastSquares {
    std::vector<double> coefficients;
    std::size_t rank = 0;
};

// min ||sum_k c_k columns[k] - target||, solved by column-pivoted QR.
// `rank` < columns.size() flags collinear regressors.
[[nodiscard]] LeastSquares solve_least_squares(const std::vector<std::vector<double>>& columns,
                                               std::span<const double> target);

} // namespace sepsr::detail
