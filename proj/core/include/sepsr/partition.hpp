// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sepsr/bict.hpp"

namespace sepsr {

using Block = std::vector<std::size_t>;

struct PartitionConfig {
    BictConfig bict;
    // Largest combination size tried in the second phase; 0 means n - 1.
    std::size_t max_combination = 0;
};

struct SeparabilityReport {
    std::size_t dimension = 0;
    // Disjoint, covering {0..n-1}, each sorted, ordered by first index.
    std::vector<Block> blocks;
    // None for a single block.
    Combiner op = Combiner::None;
    // Additive constant c in f = c + prod(blocks) for the Times class.
    double offset = 0.0;
    // Every subset test run during the search, in execution order.
    std::vector<SubsetVerdict> evidence;
    std::vector<std::string> warnings;
    bool indeterminate = false;
    std::uint64_t seed = 0;
    std::uint64_t oracle_evaluations = 0;
    double t1 = 0.0; // seconds
};

// Singletons first, then combinations of the unresolved remainder by
// increasing size (lexicographic within a size); an accepted combination
// is removed and the search restarts on the smaller remainder, which
// becomes the last block once no proper subset of it separates.
[[nodiscard]] SeparabilityReport detect_partition(const Oracle& oracle, const DomainBox& box,
                                                  const PartitionConfig& cfg);

// Throws InputError unless `blocks` is a partition of {0..n-1}.
void validate_partition(std::span<const Block> blocks, std::size_t n);

} // namespace sepsr
