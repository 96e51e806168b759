// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "sepsr/oracle.hpp"
#include "sepsr/sampler.hpp"

namespace sepsr::cli {

// Multilinear interpolation over a full-factorial grid of samples.
// Queries outside the grid's hull return NaN.
class DatasetOracle final : public Oracle {
public:
    // Throws UnsupportedLayoutError unless the points form a full factorial
    // grid with at least two levels per axis, InputError without values.
    explicit DatasetOracle(const SampleSet& samples);

    [[nodiscard]] std::size_t dimension() const override { return axes_.size(); }
    void evaluate(std::span<const double> points, std::span<double> out) const override;

    [[nodiscard]] const std::vector<std::vector<double>>& axes() const noexcept { return axes_; }
    [[nodiscard]] DomainBox hull() const;

private:
    [[nodiscard]] double interpolate(std::span<const double> x) const;

    std::vector<std::vector<double>> axes_;
    std::vector<std::size_t> strides_;
    std::vector<double> values_; // row-major over axes_, last axis fastest
};

} // namespace sepsr::cli
