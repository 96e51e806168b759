// SPDX-License-Identifier: Apache-2.0
#include "sepsr/cli/dataset_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sepsr/error.hpp"

namespace sepsr::cli {

DatasetOracle::DatasetOracle(const SampleSet& samples) {
    if (!samples.has_values()) {
        throw InputError("dataset needs an f column");
    }
    const std::size_t n = samples.dimension();
    const std::size_t rows = samples.size();
    axes_.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
        auto col = samples.column(d);
        std::sort(col.begin(), col.end());
        col.erase(std::unique(col.begin(), col.end()), col.end());
        if (col.size() < 2) {
            throw UnsupportedLayoutError("axis x" + std::to_string(d + 1) + " has fewer than two levels");
        }
        axes_[d] = std::move(col);
    }
    std::size_t total = 1;
    strides_.assign(n, 1);
    for (std::size_t d = n; d-- > 0;) {
        strides_[d] = total;
        total *= axes_[d].size();
        if (total > rows) {
            break;
        }
    }
    if (total != rows) {
        throw UnsupportedLayoutError("points are not a full factorial grid (" + std::to_string(rows) +
                                     " rows, grid needs " + std::to_string(total) + ")");
    }
    values_.assign(total, std::numeric_limits<double>::quiet_NaN());
    std::vector<bool> seen(total, false);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto p = samples.point(r);
        std::size_t flat = 0;
        for (std::size_t d = 0; d < n; ++d) {
            const auto it = std::lower_bound(axes_[d].begin(), axes_[d].end(), p[d]);
            flat += static_cast<std::size_t>(it - axes_[d].begin()) * strides_[d];
        }
        if (seen[flat]) {
            throw UnsupportedLayoutError("grid node listed twice at row " + std::to_string(r + 1));
        }
        seen[flat] = true;
        values_[flat] = samples.values()[r];
    }
}

DomainBox DatasetOracle::hull() const {
    std::vector<Interval> intervals;
    for (const auto& a : axes_) {
        intervals.push_back({a.front(), a.back()});
    }
    return DomainBox(std::move(intervals));
}

double DatasetOracle::interpolate(std::span<const double> x) const {
    const std::size_t n = axes_.size();
    std::vector<std::size_t> lo(n);
    std::vector<double> w(n);
    for (std::size_t d = 0; d < n; ++d) {
        const auto& a = axes_[d];
        if (!(x[d] >= a.front() && x[d] <= a.back())) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        auto it = std::upper_bound(a.begin(), a.end(), x[d]);
        std::size_t i = static_cast<std::size_t>(it - a.begin());
        i = std::clamp<std::size_t>(i, 1, a.size() - 1) - 1;
        lo[d] = i;
        w[d] = (x[d] - a[i]) / (a[i + 1] - a[i]);
    }
    // Sum over the 2^n cell corners, skipping zero weights so a query on a
    // node returns the stored value exactly.
    double sum = 0.0;
    const std::size_t corners = std::size_t{1} << n;
    for (std::size_t c = 0; c < corners; ++c) {
        double weight = 1.0;
        std::size_t flat = 0;
        for (std::size_t d = 0; d < n && weight != 0.0; ++d) {
            const bool upper = ((c >> d) & 1U) != 0;
            weight *= upper ? w[d] : 1.0 - w[d];
            flat += (lo[d] + (upper ? 1 : 0)) * strides_[d];
        }
        if (weight != 0.0) {
            sum += weight * values_[flat];
        }
    }
    return sum;
}

void DatasetOracle::evaluate(std::span<const double> points, std::span<double> out) const {
    const std::size_t n = axes_.size();
    if (points.size() != out.size() * n) {
        throw InputError("dataset oracle: batch shape mismatch");
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = interpolate(points.subspan(i * n, n));
    }
}

} // namespace sepsr::cli
