// SPDX-License-Identifier: Apache-2.0
#include "sepsr/partition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "sepsr/error.hpp"
#include "sepsr/parallel.hpp"

namespace sepsr {

void validate_partition(std::span<const Block> blocks, std::size_t n) {
    std::vector<int> seen(n, 0);
    for (const auto& b : blocks) {
        if (b.empty()) {
            throw InputError("partition contains an empty block");
        }
        for (auto i : b) {
            if (i >= n) {
                throw InputError("partition references variable " + std::to_string(i + 1) + " of " + std::to_string(n));
            }
            if (++seen[i] > 1) {
                throw InputError("variable " + std::to_string(i + 1) + " appears in two blocks");
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (seen[i] == 0) {
            throw InputError("variable " + std::to_string(i + 1) + " is not covered by the partition");
        }
    }
}

namespace {

// Next k-combination of {0..m-1} in lexicographic order.
bool next_combination(std::vector<std::size_t>& c, std::size_t m) {
    const std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < m - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    return false;
}

class OperatorClass {
public:
    explicit OperatorClass(double epsilon) : epsilon_(epsilon) {}

    // Fixes the class on first use; afterwards reports whether `v` agrees.
    bool admit(const SubsetVerdict& v) {
        if (v.op == Combiner::Unknown || v.op == Combiner::None) {
            return false;
        }
        if (!fixed_) {
            fixed_ = true;
            op_ = v.op;
            offset_ = v.offset;
            return true;
        }
        if (op_ != v.op) {
            return false;
        }
        const double tol = std::sqrt(epsilon_) * std::max({1.0, std::fabs(offset_), std::fabs(v.offset)});
        return std::fabs(offset_ - v.offset) <= tol;
    }

    [[nodiscard]] std::optional<Combiner> op() const {
        return fixed_ ? std::optional<Combiner>(op_) : std::nullopt;
    }
    [[nodiscard]] double offset() const { return offset_; }

private:
    double epsilon_;
    bool fixed_ = false;
    Combiner op_ = Combiner::None;
    double offset_ = 0.0;
};

std::string describe(const Block& b) {
    std::string s = "{";
    for (std::size_t i = 0; i < b.size(); ++i) {
        s += (i == 0 ? "x" : ",x") + std::to_string(b[i] + 1);
    }
    return s + "}";
}

} // namespace

SeparabilityReport detect_partition(const Oracle& oracle, const DomainBox& box, const PartitionConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = box.dimension();
    if (oracle.dimension() != n) {
        throw InputError("oracle dimension does not match the domain box");
    }
    CountingOracle counted(oracle);

    SeparabilityReport report;
    report.dimension = n;
    report.seed = cfg.bict.seed;

    auto finish = [&] {
        std::sort(report.blocks.begin(), report.blocks.end(),
                  [](const Block& a, const Block& b) { return a.front() < b.front(); });
        validate_partition(report.blocks, n);
        if (report.blocks.size() <= 1) {
            report.op = Combiner::None;
            report.offset = 0.0;
        }
        report.oracle_evaluations = counted.count();
        report.t1 = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return report;
    };

    if (n == 1) {
        report.blocks.push_back({0});
        return finish();
    }

    // Phase 1: singletons are independent tests.
    std::vector<SubsetVerdict> singles(n);
    parallel_for(
        n,
        [&](std::size_t i) {
            const std::size_t subset[] = {i};
            singles[i] = bict_subset(counted, box, subset, cfg.bict);
        },
        oracle.thread_safe() ? 0 : 1);

    OperatorClass op_class(cfg.bict.epsilon_op);
    std::vector<std::size_t> remainder;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = singles[i];
        report.evidence.push_back(v);
        report.indeterminate = report.indeterminate || v.indeterminate;
        if (v.separable && op_class.admit(v)) {
            report.blocks.push_back({i});
        } else {
            if (v.separable) {
                report.warnings.push_back("x" + std::to_string(i + 1) + " separates with operator " +
                                          std::string(name(v.op)) + " inconsistent with the decomposition; merged into the remainder");
            }
            remainder.push_back(i);
        }
    }

    // Phase 2: grow combinations from the remainder.
    const std::size_t cap = cfg.max_combination == 0 ? n - 1 : cfg.max_combination;
    bool capped = false;
    bool progress = true;
    while (progress && remainder.size() >= 3) {
        progress = false;
        const std::size_t largest = remainder.size() - 1;
        if (largest > cap) {
            capped = true;
        }
        for (std::size_t size = 2; size <= std::min(largest, cap) && !progress; ++size) {
            std::vector<std::size_t> pick(size);
            for (std::size_t j = 0; j < size; ++j) {
                pick[j] = j;
            }
            do {
                Block subset;
                for (auto j : pick) {
                    subset.push_back(remainder[j]);
                }
                SubsetVerdict v = bict_subset(counted, box, subset, cfg.bict);
                report.indeterminate = report.indeterminate || v.indeterminate;
                const bool accepted = v.separable && op_class.admit(v);
                if (v.separable && !accepted) {
                    report.warnings.push_back(describe(subset) + " separates with operator " + std::string(name(v.op)) +
                                              " inconsistent with the decomposition; not split off");
                }
                report.evidence.push_back(std::move(v));
                if (accepted) {
                    report.blocks.push_back(subset);
                    std::erase_if(remainder, [&](std::size_t x) { return std::find(subset.begin(), subset.end(), x) != subset.end(); });
                    progress = true;
                    break;
                }
            } while (next_combination(pick, remainder.size()));
        }
    }
    if (capped) {
        report.warnings.push_back("combination size capped at " + std::to_string(cap) +
                                  "; larger sub-blocks of the remainder were not searched");
    }

    if (!remainder.empty()) {
        if (remainder.size() < n && remainder.size() > 1) {
            // Confirm the leftover block against everything else.
            SubsetVerdict v = bict_subset(counted, box, remainder, cfg.bict);
            report.indeterminate = report.indeterminate || v.indeterminate;
            if (!v.separable) {
                report.warnings.push_back("remainder block " + describe(remainder) + " did not pass its own separability test");
            } else if (!op_class.admit(v)) {
                report.warnings.push_back("remainder block " + describe(remainder) + " has an inconsistent operator");
            }
            report.evidence.push_back(std::move(v));
        } else if (remainder.size() == 1 && n > 1 && !report.blocks.empty()) {
            report.warnings.push_back("variable x" + std::to_string(remainder.front() + 1) +
                                      " failed its singleton test but is the only variable left");
        }
        report.blocks.push_back(remainder);
    }

    if (report.blocks.size() > 1) {
        report.op = op_class.op().value_or(Combiner::Unknown);
        report.offset = op_class.offset();
    }
    return finish();
}

} // namespace sepsr
