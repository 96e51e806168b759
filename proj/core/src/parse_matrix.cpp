// SPDX-License-Identifier: Apache-2.0
#include "sepsr/error.hpp"
#include "sepsr/pme.hpp"
#include "sepsr/program.hpp"

namespace sepsr {

std::pair<int, int> ParseMatrix::column_domain(std::size_t col, std::size_t dimension) noexcept {
    switch (col) {
    case 0: return {-5, 5};
    case 1:
    case 2: return {-5, static_cast<int>(dimension)};
    default: return {-1, 1};
    }
}

ParseMatrix::ParseMatrix(std::size_t dimension, std::vector<Row> rows) : dimension_(dimension), rows_(std::move(rows)) {
    if (dimension_ == 0) {
        throw InputError("parse matrix needs at least one variable");
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            const auto [lo, hi] = column_domain(j, dimension_);
            if (rows_[i][j] < lo || rows_[i][j] > hi) {
                throw InputError("parse matrix entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                 ") = " + std::to_string(rows_[i][j]) + " outside [" + std::to_string(lo) + "," +
                                 std::to_string(hi) + "]");
            }
        }
    }
}

ParseMatrix ParseMatrix::random(std::size_t dimension, std::size_t height, Rng& rng) {
    std::vector<Row> rows(height);
    for (auto& r : rows) {
        for (std::size_t j = 0; j < 4; ++j) {
            const auto [lo, hi] = column_domain(j, dimension);
            r[j] = static_cast<int>(rng.uniform_int(lo, hi));
        }
    }
    return ParseMatrix(dimension, std::move(rows));
}

ParseMatrix ParseMatrix::with_entry(std::size_t i, std::size_t j, int value) const {
    auto rows = rows_;
    rows.at(i).at(j) = value;
    return ParseMatrix(dimension_, std::move(rows));
}

namespace {

Expression operand(int code, const Expression& f, const Expression& f1, const Expression& f2) {
    switch (code) {
    case gene::kP2: return Expression::parameter(1);
    case gene::kP1: return Expression::parameter(0);
    case gene::kF: return f;
    case gene::kF2: return f2;
    case gene::kF1: return f1;
    case gene::kOne: return Expression::constant(1.0);
    default: return Expression::variable(static_cast<std::size_t>(code - 1));
    }
}

} // namespace

Expression decode(const ParseMatrix& genome) {
    Expression f;
    Expression f1;
    Expression f2;
    for (const auto& row : genome.rows()) {
        const int op = row[0];
        if (op == gene::kSkip) {
            continue;
        }
        const Expression a = operand(row[1], f, f1, f2);
        if (gene::is_unary(op)) {
            f = Expression::unary(gene::unary_op(op), a);
        } else {
            f = Expression::binary(gene::binary_op(op), a, operand(row[2], f, f1, f2));
        }
        if (row[3] == 0) {
            f1 = f;
        } else if (row[3] == 1) {
            f2 = f;
        }
    }
    return f;
}

boost::multiprecision::cpp_int search_space_size(std::size_t dimension, std::size_t height) {
    const boost::multiprecision::cpp_int operands = 6 + static_cast<long long>(dimension);
    const boost::multiprecision::cpp_int per_row = 11 * operands * operands * 3;
    boost::multiprecision::cpp_int total = 1;
    for (std::size_t i = 0; i < height; ++i) {
        total *= per_row;
    }
    return total;
}

} // namespace sepsr
