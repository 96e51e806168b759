// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sepsr/cli/catalog.hpp"
#include "sepsr/cli/config.hpp"
#include "sepsr/dac.hpp"

namespace sepsr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIndeterminate = 2;
inline constexpr int kExitError = 3;
inline constexpr int kExitBudget = 4;

// "1000000", "1e6" and "10^6" all give 10^6.
[[nodiscard]] std::uint64_t parse_count(std::string_view text);

[[nodiscard]] Target target_for(const RunConfig& cfg);

// The detection stage exactly as a dac fit runs it.
[[nodiscard]] SeparabilityReport run_detection(const Target& target, const RunConfig& cfg);
[[nodiscard]] RecoveredModel run_fit(const Target& target, const RunConfig& cfg);

struct BenchRun {
    std::size_t run = 0;
    Mode mode = Mode::Dac;
    std::uint64_t seed = 0;
    TimingBreakdown timing;
    std::uint64_t model_evaluations = 0;
    std::uint64_t oracle_evaluations = 0;
    double one_minus_r2 = 0.0;
    bool converged = false;
};

struct BenchResult {
    std::string suite;
    std::size_t repeats = 0;
    std::vector<BenchRun> runs;
};

[[nodiscard]] BenchResult run_bench(const std::string& suite, std::size_t repeats, const RunConfig& cfg,
                                    std::uint64_t direct_budget);
[[nodiscard]] std::string bench_csv(const BenchResult& result);
[[nodiscard]] std::string bench_json(const BenchResult& result);

// Full command line (argv[0] included). Writes results to files or `out`,
// diagnostics to `err`; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sepsr::cli
