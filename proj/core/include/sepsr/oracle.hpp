// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "sepsr/expr.hpp"

namespace sepsr {

// Black-box target f: R^n -> R evaluated in batches.
//
// `points` holds rows of dimension() values back to back. Implementations
// write one value per row into `out`; a point outside the oracle's domain
// yields NaN. Batches are the unit of work so that out-of-process
// evaluators can amortize round trips.
class Oracle {
public:
    virtual ~Oracle() = default;

    [[nodiscard]] virtual std::size_t dimension() const = 0;
    virtual void evaluate(std::span<const double> points, std::span<double> out) const = 0;
    // True when evaluate() may be called concurrently from several threads.
    [[nodiscard]] virtual bool thread_safe() const { return true; }

    [[nodiscard]] std::vector<double> evaluate_rows(std::span<const double> points) const;
};

class ExpressionOracle final : public Oracle {
public:
    ExpressionOracle(Expression expr, std::size_t dimension);

    [[nodiscard]] std::size_t dimension() const override { return dimension_; }
    void evaluate(std::span<const double> points, std::span<double> out) const override;
    [[nodiscard]] const Expression& expression() const noexcept { return expr_; }

private:
    Expression expr_;
    std::size_t dimension_;
};

class FunctionOracle final : public Oracle {
public:
    using Function = std::function<double(std::span<const double>)>;

    FunctionOracle(Function fn, std::size_t dimension, bool thread_safe = true)
        : fn_(std::move(fn)), dimension_(dimension), thread_safe_(thread_safe) {}

    [[nodiscard]] std::size_t dimension() const override { return dimension_; }
    void evaluate(std::span<const double> points, std::span<double> out) const override;
    [[nodiscard]] bool thread_safe() const override { return thread_safe_; }

private:
    Function fn_;
    std::size_t dimension_;
    bool thread_safe_;
};

// Forwards to another oracle and counts point evaluations.
class CountingOracle final : public Oracle {
public:
    explicit CountingOracle(const Oracle& inner) : inner_(inner) {}

    [[nodiscard]] std::size_t dimension() const override { return inner_.dimension(); }
    void evaluate(std::span<const double> points, std::span<double> out) const override;
    [[nodiscard]] bool thread_safe() const override { return inner_.thread_safe(); }

    [[nodiscard]] std::uint64_t count() const noexcept { return count_.load(); }

private:
    const Oracle& inner_;
    mutable std::atomic<std::uint64_t> count_{0};
};

} // namespace sepsr
