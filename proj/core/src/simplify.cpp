// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <variant>

#include "sepsr/expr.hpp"

namespace sepsr {

namespace {

bool foldable(double v) { return std::isfinite(v); }

Expression simplify_binary(BinaryOp op, const Expression& lhs, const Expression& rhs) {
    if (lhs.is_constant() && rhs.is_constant()) {
        const double v = apply_binary(op, lhs.constant_value(), rhs.constant_value());
        if (foldable(v)) {
            return Expression::constant(v);
        }
    }
    switch (op) {
    case BinaryOp::Plus:
        if (rhs.is_constant(0.0)) {
            return lhs;
        }
        if (lhs.is_constant(0.0)) {
            return rhs;
        }
        break;
    case BinaryOp::Minus:
        if (rhs.is_constant(0.0)) {
            return lhs;
        }
        // a - (0 - b) -> a + b, and 0 - (0 - b) -> b
        if (const auto* inner = std::get_if<BinaryNode>(&rhs.node().data);
            inner != nullptr && inner->op == BinaryOp::Minus && inner->lhs.is_constant(0.0)) {
            if (lhs.is_constant(0.0)) {
                return inner->rhs;
            }
            return Expression::binary(BinaryOp::Plus, lhs, inner->rhs);
        }
        break;
    case BinaryOp::Times:
        if (rhs.is_constant(1.0)) {
            return lhs;
        }
        if (lhs.is_constant(1.0)) {
            return rhs;
        }
        if (lhs.is_constant(0.0) || rhs.is_constant(0.0)) {
            return Expression::constant(0.0);
        }
        break;
    case BinaryOp::Divide:
        if (rhs.is_constant(1.0)) {
            return lhs;
        }
        break;
    }
    return Expression::binary(op, lhs, rhs);
}

} // namespace

Expression simplify(const Expression& expr) {
    const auto& data = expr.node().data;
    if (const auto* u = std::get_if<UnaryNode>(&data)) {
        Expression child = simplify(u->child);
        if (child.is_constant()) {
            const double v = apply_unary(u->op, child.constant_value());
            if (foldable(v)) {
                return Expression::constant(v);
            }
        }
        return Expression::unary(u->op, child);
    }
    if (const auto* b = std::get_if<BinaryNode>(&data)) {
        return simplify_binary(b->op, simplify(b->lhs), simplify(b->rhs));
    }
    return expr;
}

} // namespace sepsr
