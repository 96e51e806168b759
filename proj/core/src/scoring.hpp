// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sepsr/pme.hpp"
#include "sepsr/program.hpp"

namespace sepsr::detail {

// Column-major copy of a sample set for the genome interpreter.
struct ColumnData {
    explicit ColumnData(const SampleSet& data);

    std::size_t n = 0;
    std::vector<std::vector<double>> columns;
    std::vector<const double*> pointers;
};

struct Target {
    explicit Target(std::span<const double> values);

    std::vector<double> values;
    double mean = 0.0;
    double sst = 0.0;
};

// SSE of t against y, or of t against the least-squares line a + b y when
// `scaling` is set. Non-finite y gives kWorstFitness.
[[nodiscard]] double residual_sse(std::span<const double> y, const Target& t, bool scaling, double& offset,
                                  double& scale);

// Full candidate scoring with constant tuning; spends at most
// `max_evaluations` program runs (reported in metrics.evaluations).
[[nodiscard]] GenomeScore score_program(const Program& program, const ColumnData& data, const Target& target,
                                        const PmeConfig& cfg, std::uint64_t max_evaluations, ProgramWorkspace& ws);

} // namespace sepsr::detail
