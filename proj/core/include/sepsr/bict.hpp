// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sepsr/oracle.hpp"
#include "sepsr/sampler.hpp"

namespace sepsr {

enum class CorrelationMethod : std::uint8_t { Pearson, Spearman, Kendall };

[[nodiscard]] std::string_view name(CorrelationMethod m) noexcept;
[[nodiscard]] std::optional<CorrelationMethod> parse_correlation_method(std::string_view s) noexcept;

struct CorrelationResult {
    double r = 0.0;
    // Least-squares line ys ~ intercept + slope * xs (computed for every method).
    double slope = 0.0;
    double intercept = 0.0;
    CorrelationMethod method = CorrelationMethod::Pearson;
    std::size_t n = 0;
};

inline constexpr double kFlatTolerance = 1e-12;

// Requires equal lengths, N >= 3 and a sample standard deviation of at least
// `flat_tolerance` in both vectors; throws IndeterminateError for a flat
// vector and InputError for bad lengths.
[[nodiscard]] CorrelationResult correlation(std::span<const double> xs, std::span<const double> ys,
                                            CorrelationMethod method = CorrelationMethod::Pearson,
                                            double flat_tolerance = kFlatTolerance);

// How the blocks of a decomposition are combined.
enum class Combiner : std::uint8_t { None, Times, PlusMinus, Unknown };

[[nodiscard]] std::string_view name(Combiner c) noexcept;

struct OperatorInference {
    Combiner op = Combiner::Unknown;
    // Additive constant c in f = c + g(S) * h(rest); zero for a pure product.
    double offset = 0.0;
    // Every pair looks like both a pure shift and a pure scaling; the anchors
    // do not discriminate and must be redrawn.
    bool degenerate = false;
};

// Classifies the linear relations f_j ~ a + b f_i measured in test 1:
// b == 1 everywhere is a shift (PlusMinus); otherwise the implied offsets
// a / (1 - b) must agree, and a zero offset is a pure product.
// `scales[k]` is max(|mean of the reference vector|, 1) for fit k.
[[nodiscard]] OperatorInference infer_operator(std::span<const CorrelationResult> fits,
                                               std::span<const double> scales, double epsilon_op);

enum class SamplingMode : std::uint8_t { Lhs, Grid };

struct BictConfig {
    std::size_t samples = 50;      // N per test (LHS mode)
    std::size_t anchors = 3;       // K anchor assignments per test
    double epsilon_r = 1e-6;       // pass iff |r| >= 1 - epsilon_r
    double epsilon_op = 1e-6;
    CorrelationMethod method = CorrelationMethod::Pearson;
    SamplingMode mode = SamplingMode::Lhs;
    std::size_t grid_points = 13;  // per varied axis in grid mode
    std::size_t max_redraws = 10;
    double max_invalid_fraction = 0.2;
    double flat_tolerance = kFlatTolerance;
    std::uint64_t seed = 0;
};

struct PairCorrelation {
    std::size_t reference = 0; // index i of f_i (the regressor)
    std::size_t other = 0;     // index j of f_j
    CorrelationResult pearson;
    // Result of the configured method; equals `pearson` for Pearson.
    CorrelationResult primary;
    bool passed = false;
};

struct SubsetTest {
    std::vector<std::size_t> varied;
    std::vector<std::size_t> anchored;
    std::vector<std::vector<double>> anchors;
    std::vector<PairCorrelation> pairs;
    std::size_t samples = 0; // valid rows used
    bool passed = false;
};

struct SubsetVerdict {
    std::vector<std::size_t> subset;
    bool separable = false;
    // Flat slices persisted after max_redraws; no verdict could be reached.
    bool indeterminate = false;
    Combiner op = Combiner::Unknown;
    double offset = 0.0;
    SubsetTest test1; // subset varied, complement anchored
    SubsetTest test2; // complement varied, subset anchored
    std::uint64_t seed = 0;
    std::size_t redraws = 0;
};

// Bi-correlation test of `subset` against its complement. Throws InputError
// for an empty or improper subset and EvaluationDomainError when the oracle
// is undefined on more than max_invalid_fraction of a test's rows.
[[nodiscard]] SubsetVerdict bict_subset(const Oracle& oracle, const DomainBox& box,
                                        std::span<const std::size_t> subset, const BictConfig& cfg);

// Bit mask of a variable subset, used to derive per-subset seeds.
[[nodiscard]] std::uint64_t subset_key(std::span<const std::size_t> subset) noexcept;

} // namespace sepsr
