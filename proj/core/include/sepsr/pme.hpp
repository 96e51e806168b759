// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sepsr/expr.hpp"
#include "sepsr/rng.hpp"
#include "sepsr/sampler.hpp"

namespace sepsr {

// Parse-matrix genome: h rows of four integers.
//
//   column 1  operator   -5 sqrt  -4 ln  -3 cos  -2 /  -1 -  0 skip
//                         1 +     2 *    3 sin   4 exp  5 square
//   column 2,3 operands  -5 p2  -4 p1  -3 f  -2 f2  -1 f1  0 1.0  k x_k
//   column 4  copy       -1 none  0 f -> f1  1 f -> f2
//
// Rows run top to bottom; each non-skip row writes register f and
// optionally copies it. Registers start at 0 and the model is f.
class ParseMatrix {
public:
    using Row = std::array<int, 4>;

    ParseMatrix() = default;
    // Throws InputError when an entry is outside its column domain.
    ParseMatrix(std::size_t dimension, std::vector<Row> rows);

    static ParseMatrix random(std::size_t dimension, std::size_t height, Rng& rng);

    // Inclusive [lo, hi] domain of column `col` for `dimension` variables.
    [[nodiscard]] static std::pair<int, int> column_domain(std::size_t col, std::size_t dimension) noexcept;

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::size_t height() const noexcept { return rows_.size(); }
    [[nodiscard]] const Row& row(std::size_t i) const { return rows_.at(i); }
    [[nodiscard]] std::span<const Row> rows() const noexcept { return rows_; }

    // Copy with entry (i, j) replaced; validated like the constructor.
    [[nodiscard]] ParseMatrix with_entry(std::size_t i, std::size_t j, int value) const;

    friend bool operator==(const ParseMatrix&, const ParseMatrix&) = default;

private:
    std::size_t dimension_ = 0;
    std::vector<Row> rows_;
};

// Expression held in register f after the last row. Parameter slots 0/1
// stand for the tunable constants p1/p2.
[[nodiscard]] Expression decode(const ParseMatrix& genome);

// Number of distinct genomes: (11 * (6 + d)^2 * 3)^h.
[[nodiscard]] boost::multiprecision::cpp_int search_space_size(std::size_t dimension, std::size_t height);

inline constexpr double kWorstFitness = std::numeric_limits<double>::infinity();

struct FitnessMetrics {
    double one_minus_r2 = kWorstFitness; // SSE / SST
    double sse = kWorstFitness;
    double sst = 0.0;
    std::uint64_t evaluations = 0;
};

// 1 - R^2 of `model` on `data`. Any invalid point gives kWorstFitness.
// Throws DegenerateTargetError when SST < 1e-300.
[[nodiscard]] FitnessMetrics fitness(const Expression& model, const SampleSet& data);

struct ConstantOptions {
    std::size_t restarts = 8;
    std::size_t evaluations_per_restart = 40;
    // When nonzero and below `restarts`, every start is screened with a
    // single evaluation and only this many of the best are refined.
    std::size_t refine_starts = 0;
    double lo = -10.0;
    double hi = 10.0;
    // Extra simplex steps spent refining the best restart when its 1 - R^2
    // is already below `polish_below`.
    std::size_t polish_evaluations = 200;
    double polish_below = 1e-3;
    std::uint64_t seed = 0;
};

struct ConstantFit {
    std::array<double, 2> values{0.0, 0.0};
    FitnessMetrics metrics;
};

// Values of parameter slots p1/p2 minimising SSE: linear least squares when
// the expression is affine in them, Nelder-Mead restarts otherwise.
[[nodiscard]] ConstantFit optimize_constants(const Expression& model, const SampleSet& data,
                                             const ConstantOptions& options = {});

struct PmeConfig {
    std::size_t height = 6;
    std::size_t mu = 30;
    std::size_t lambda = 60;
    std::uint64_t budget = 1'000'000;
    double threshold = 1e-10;
    double mutation_rate = 0.0; // 0 selects 2 / (4 h)
    // Fit model a + b * g(x) instead of g(x) itself.
    bool linear_scaling = true;
    // Stop after this many generations without a single new evaluation.
    std::size_t max_stalled_generations = 500;
    // Re-initialise the population after this many generations without a 1%
    // gain on the best fitness of the current run; 0 disables restarts. The
    // best individual ever seen is kept aside and returned.
    std::size_t restart_generations = 50;
    // Per-candidate tuning is deliberately cheap: screened starts and a short
    // simplex run, with polishing reserved for near fits.
    ConstantOptions constants{.restarts = 8, .evaluations_per_restart = 10, .refine_starts = 1,
                              .polish_evaluations = 50};
    std::uint64_t seed = 0;
};

// Throws InputError when budget < mu, threshold <= 0 or a size is zero.
void validate(const PmeConfig& cfg);

struct GenomeScore {
    FitnessMetrics metrics;
    std::array<double, 2> constants{0.0, 0.0};
    double offset = 0.0; // a in a + b * g
    double scale = 1.0;  // b
};

// Scores a genome exactly as evolve() does (constant tuning and scaling
// included). Pure: the result depends only on the genome, data and cfg.
[[nodiscard]] GenomeScore score_genome(const ParseMatrix& genome, const SampleSet& data, const PmeConfig& cfg);

// Simplified closed form of a scored genome.
[[nodiscard]] Expression realize(const ParseMatrix& genome, const GenomeScore& score);

struct EvolveResult {
    Expression expression;
    FitnessMetrics metrics; // of `expression` on the data
    ParseMatrix genome;
    GenomeScore score;
    std::uint64_t evaluations = 0;
    std::uint64_t generations = 0;
    std::uint64_t restarts = 0;
    bool converged = false;
    // Best search fitness after initialization and after each generation.
    std::vector<double> best_history;
};

// (mu + lambda) evolution over parse matrices with per-entry reset
// mutation and truncation selection. Deterministic for a fixed seed.
[[nodiscard]] EvolveResult evolve(const SampleSet& data, const PmeConfig& cfg);

} // namespace sepsr
