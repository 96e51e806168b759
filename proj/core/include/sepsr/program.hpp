// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sepsr/expr.hpp"
#include "sepsr/pme.hpp"

namespace sepsr {

// Codes used in parse-matrix columns.
namespace gene {

inline constexpr int kSqrt = -5;
inline constexpr int kLog = -4;
inline constexpr int kCos = -3;
inline constexpr int kDivide = -2;
inline constexpr int kMinus = -1;
inline constexpr int kSkip = 0;
inline constexpr int kPlus = 1;
inline constexpr int kTimes = 2;
inline constexpr int kSin = 3;
inline constexpr int kExp = 4;
inline constexpr int kSquare = 5;

inline constexpr int kP2 = -5;
inline constexpr int kP1 = -4;
inline constexpr int kF = -3;
inline constexpr int kF2 = -2;
inline constexpr int kF1 = -1;
inline constexpr int kOne = 0;

inline constexpr int kNoCopy = -1;
inline constexpr int kCopyF1 = 0;
inline constexpr int kCopyF2 = 1;

[[nodiscard]] constexpr bool is_unary(int op) noexcept {
    return op == kSqrt || op == kLog || op == kCos || op == kSin || op == kExp || op == kSquare;
}
[[nodiscard]] UnaryOp unary_op(int op);
[[nodiscard]] BinaryOp binary_op(int op);

} // namespace gene

// How the output depends on the constant slots p1/p2.
enum class ParameterUse : std::uint8_t { None, Affine, Nonlinear };

struct ProgramWorkspace {
    std::vector<double> f, f1, f2, tmp, one, p1, p2;
};

// A genome reduced to the rows that influence the output. Rows whose result
// is never read are replaced by skips and irrelevant operand/copy fields are
// zeroed, so genomes that differ only in dead code share a canonical key.
class Program {
public:
    explicit Program(const ParseMatrix& genome);

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] const std::vector<ParseMatrix::Row>& canonical_rows() const noexcept { return canonical_; }
    [[nodiscard]] const std::string& key() const noexcept { return key_; }
    [[nodiscard]] std::size_t live_rows() const noexcept { return live_.size(); }

    [[nodiscard]] ParameterUse parameter_use() const noexcept { return use_; }
    [[nodiscard]] bool uses_parameter(std::size_t slot) const noexcept { return used_[slot]; }
    // False when the output is the same at every data point.
    [[nodiscard]] bool uses_variables() const noexcept { return uses_variables_; }

    // Evaluates on column-major data (columns[k][i] is x_{k+1} of row i).
    // Invalid points come out as NaN.
    void run(std::span<const double* const> columns, std::size_t n, std::array<double, 2> params,
             ProgramWorkspace& ws, std::span<double> out) const;

private:
    std::size_t dimension_;
    std::vector<ParseMatrix::Row> canonical_;
    std::vector<ParseMatrix::Row> live_;
    std::string key_;
    ParameterUse use_ = ParameterUse::None;
    std::array<bool, 2> used_{false, false};
    bool uses_variables_ = false;
};

} // namespace sepsr
