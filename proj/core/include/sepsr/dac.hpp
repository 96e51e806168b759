// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sepsr/partition.hpp"
#include "sepsr/pme.hpp"

namespace sepsr {

struct DacConfig {
    PartitionConfig partition;
    // pme.budget is the total for all blocks, split evenly.
    PmeConfig pme;
    std::size_t slice_samples = 100;
    SamplingMode slice_mode = SamplingMode::Lhs;
    std::size_t slice_grid_points = 10;
    // Full-dimensional point whose coordinates fix the complement of each
    // block while it is fitted. Empty selects the box centre.
    std::vector<double> anchor;
    std::size_t max_anchor_retries = 5;
    bool parallel_blocks = true;
    std::uint64_t seed = 0;
};

struct SubFunctionFit {
    Block block;
    // Complement indices and the values they were frozen at.
    std::vector<std::size_t> complement;
    std::vector<double> anchor;
    // Over the block's own variables (x1 is block[0], ...).
    Expression local;
    // Same expression over the full variable vector.
    Expression expression;
    ParseMatrix genome;
    GenomeScore score;
    FitnessMetrics metrics; // on the slice
    // Shift subtracted from the slice before fitting (multiplicative class
    // with an additive constant).
    double shift = 0.0;
    std::uint64_t evaluations = 0;       // PME model evaluations
    std::uint64_t oracle_evaluations = 0; // slice points
    std::uint64_t generations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    double seconds = 0.0;
};

struct TimingBreakdown {
    double t1 = 0.0; // separability detection
    double t2 = 0.0; // sub-function fitting
    double t3 = 0.0; // recovery
    double total = 0.0;
};

struct RecoveredModel {
    std::size_t dimension = 0;
    Combiner op = Combiner::None;
    // Times:      f = intercept + c0 * prod g_i
    // PlusMinus:  f = c0 + sum coefficients[i] * g_i
    // None:       f = expression (c0 = 1)
    double c0 = 1.0;
    double intercept = 0.0;
    std::vector<double> coefficients;
    std::vector<SubFunctionFit> fits;
    Expression expression;
    FitnessMetrics metrics; // of `expression` on the full data
    bool converged = false;
    bool direct = false; // plain PME over all variables
    std::optional<SeparabilityReport> separability;
    TimingBreakdown timing;
    std::uint64_t model_evaluations = 0;
    std::uint64_t oracle_evaluations = 0;
    std::uint64_t budget = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    // Model plus oracle evaluations: the cost compared between modes.
    [[nodiscard]] std::uint64_t total_evaluations() const noexcept { return model_evaluations + oracle_evaluations; }
};

// Seed of the block's slice sample and PME run.
[[nodiscard]] std::uint64_t block_seed(std::uint64_t master, const Block& block);

// PME settings for a block fitted under `seed`.
[[nodiscard]] PmeConfig block_pme_config(const PmeConfig& pme, std::uint64_t seed);

// The slice a block is fitted on: block variables sampled per cfg, the
// complement frozen at `anchor`, `shift` subtracted from the values. Rows
// where the oracle is undefined are dropped (EvaluationDomainError when
// more than a fifth are). `oracle_evaluations` is incremented.
[[nodiscard]] SampleSet make_slice(const Oracle& oracle, const DomainBox& box, const Block& block,
                                   std::span<const double> anchor, double shift, const DacConfig& cfg,
                                   std::uint64_t seed, std::uint64_t& oracle_evaluations);

// Fits one block on a slice with the complement frozen at `anchor`
// (values in complement order). A flat slice is retried at fresh anchors;
// DegenerateTargetError once retries run out.
[[nodiscard]] SubFunctionFit fit_subfunction(const Oracle& oracle, const DomainBox& box, const Block& block,
                                             std::vector<double> anchor, double shift, const PmeConfig& pme,
                                             const DacConfig& cfg);

// Combines sub-fits by least squares over `data`. RankDeficiencyError names
// the first block whose values are collinear with the earlier regressors.
[[nodiscard]] RecoveredModel recover(std::vector<SubFunctionFit> fits, Combiner op, double offset,
                                     const SampleSet& data, double threshold = 1e-10);

// Detect, fit each block, recover. `data` supplies the full sample set the
// final model is scored on; without values the oracle fills them in.
[[nodiscard]] RecoveredModel dac_fit(const Oracle& oracle, const DomainBox& box, const SampleSet& data,
                                     const DacConfig& cfg);

// Plain PME over all variables with the whole budget.
[[nodiscard]] RecoveredModel fit_direct(const SampleSet& data, const DacConfig& cfg);

} // namespace sepsr
