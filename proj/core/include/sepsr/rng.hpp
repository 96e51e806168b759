// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace sepsr {

// Name recorded in reports so other implementations can reproduce draws.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64+splitmix64";

// SplitMix64 finalizer; used to derive independent child seeds.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Deterministic seed for a named sub-stream of `master`.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::string_view label) noexcept;

// Seeded generator with distribution code that does not depend on the
// standard library's (implementation-defined) distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in the closed range [lo, hi], rejection sampled.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace sepsr
