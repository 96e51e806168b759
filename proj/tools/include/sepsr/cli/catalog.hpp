// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sepsr/bict.hpp"
#include "sepsr/oracle.hpp"
#include "sepsr/partition.hpp"
#include "sepsr/sampler.hpp"

namespace sepsr::cli {

enum class TargetKind { Builtin, Infix, External, Dataset };

[[nodiscard]] std::string_view name(TargetKind k) noexcept;

struct GroundTruth {
    std::vector<Block> blocks;
    Combiner op = Combiner::None;
};

struct Target {
    TargetKind kind = TargetKind::Builtin;
    // Text the target was resolved from (builtin name, expr:..., exec:..., path).
    std::string spec;
    std::string formula;
    std::vector<std::string> variables;
    DomainBox box;
    std::shared_ptr<const Oracle> oracle;
    // Data the final model is scored on; may lack values, in which case the
    // oracle fills them in.
    SampleSet data;
    // Point fixing the complement of each block during sub-function fits.
    std::vector<double> anchor;
    std::optional<GroundTruth> truth;

    [[nodiscard]] std::size_t dimension() const noexcept { return box.dimension(); }
};

struct TargetOptions {
    // "lo:hi,lo:hi,..." for expr:/exec: targets; expr: defaults to [-3,3]^d.
    std::string box;
    // Points in the default data set of non-builtin targets.
    std::size_t data_points = 1000;
    std::uint64_t data_seed = 20170602;
};

[[nodiscard]] std::vector<std::string> builtin_names();

// Accepts a builtin name, "expr:<infix>", "exec:<command>" or a CSV path.
// Throws InputError for anything else.
[[nodiscard]] Target resolve_target(std::string_view spec, const TargetOptions& options = {});

// "lo:hi,lo:hi" -> DomainBox.
[[nodiscard]] DomainBox parse_box(std::string_view text);

} // namespace sepsr::cli
