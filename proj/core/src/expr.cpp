// SPDX-License-Identifier: Apache-2.0
#include "sepsr/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "sepsr/error.hpp"

namespace sepsr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

std::string_view name(UnaryOp op) noexcept {
    switch (op) {
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "ln";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Square: return "square";
    }
    return "?";
}

char symbol(BinaryOp op) noexcept {
    switch (op) {
    case BinaryOp::Plus: return '+';
    case BinaryOp::Minus: return '-';
    case BinaryOp::Times: return '*';
    case BinaryOp::Divide: return '/';
    }
    return '?';
}

Expression::Expression() : Expression(constant(0.0)) {}

Expression Expression::constant(double value) {
    return Expression(std::make_shared<const ExprNode>(ExprNode{ConstantNode{value}}));
}

Expression Expression::variable(std::size_t index) {
    return Expression(std::make_shared<const ExprNode>(ExprNode{VariableNode{index}}));
}

Expression Expression::parameter(std::size_t slot) {
    return Expression(std::make_shared<const ExprNode>(ExprNode{ParameterNode{slot}}));
}

Expression Expression::unary(UnaryOp op, Expression child) {
    return Expression(std::make_shared<const ExprNode>(ExprNode{UnaryNode{op, std::move(child)}}));
}

Expression Expression::binary(BinaryOp op, Expression lhs, Expression rhs) {
    return Expression(std::make_shared<const ExprNode>(ExprNode{BinaryNode{op, std::move(lhs), std::move(rhs)}}));
}

bool Expression::is_constant() const noexcept {
    return std::holds_alternative<ConstantNode>(node_->data);
}

bool Expression::is_constant(double value) const noexcept {
    const auto* c = std::get_if<ConstantNode>(&node_->data);
    return c != nullptr && c->value == value;
}

double Expression::constant_value() const {
    const auto* c = std::get_if<ConstantNode>(&node_->data);
    if (c == nullptr) {
        throw InputError("expression is not a constant");
    }
    return c->value;
}

std::size_t Expression::node_count() const {
    return std::visit(overloaded{
                          [](const UnaryNode& u) { return 1 + u.child.node_count(); },
                          [](const BinaryNode& b) { return 1 + b.lhs.node_count() + b.rhs.node_count(); },
                          [](const auto&) -> std::size_t { return 1; },
                      },
                      node_->data);
}

std::size_t Expression::required_dimension() const {
    return std::visit(overloaded{
                          [](const VariableNode& v) { return v.index + 1; },
                          [](const UnaryNode& u) { return u.child.required_dimension(); },
                          [](const BinaryNode& b) {
                              return std::max(b.lhs.required_dimension(), b.rhs.required_dimension());
                          },
                          [](const auto&) -> std::size_t { return 0; },
                      },
                      node_->data);
}

std::size_t Expression::parameter_count() const {
    return std::visit(overloaded{
                          [](const ParameterNode& p) { return p.slot + 1; },
                          [](const UnaryNode& u) { return u.child.parameter_count(); },
                          [](const BinaryNode& b) {
                              return std::max(b.lhs.parameter_count(), b.rhs.parameter_count());
                          },
                          [](const auto&) -> std::size_t { return 0; },
                      },
                      node_->data);
}

bool Expression::structurally_equal(const Expression& other) const {
    if (node_ == other.node_) {
        return true;
    }
    const auto& a = node_->data;
    const auto& b = other.node_->data;
    if (a.index() != b.index()) {
        return false;
    }
    return std::visit(overloaded{
                          [&](const ConstantNode& c) {
                              // Bitwise comparison so that -0.0 and 0.0 differ but NaN == NaN.
                              const double o = std::get<ConstantNode>(b).value;
                              return std::memcmp(&c.value, &o, sizeof(double)) == 0;
                          },
                          [&](const VariableNode& v) { return v.index == std::get<VariableNode>(b).index; },
                          [&](const ParameterNode& p) { return p.slot == std::get<ParameterNode>(b).slot; },
                          [&](const UnaryNode& u) {
                              const auto& o = std::get<UnaryNode>(b);
                              return u.op == o.op && u.child.structurally_equal(o.child);
                          },
                          [&](const BinaryNode& n) {
                              const auto& o = std::get<BinaryNode>(b);
                              return n.op == o.op && n.lhs.structurally_equal(o.lhs) && n.rhs.structurally_equal(o.rhs);
                          },
                      },
                      a);
}

double apply_unary(UnaryOp op, double x) noexcept {
    switch (op) {
    case UnaryOp::Sin: return std::sin(x);
    case UnaryOp::Cos: return std::cos(x);
    case UnaryOp::Exp: return std::exp(x);
    case UnaryOp::Log: return x > 0.0 ? std::log(x) : kNaN;
    case UnaryOp::Sqrt: return x >= 0.0 ? std::sqrt(x) : kNaN;
    case UnaryOp::Square: return x * x;
    }
    return kNaN;
}

double apply_binary(BinaryOp op, double a, double b) noexcept {
    switch (op) {
    case BinaryOp::Plus: return a + b;
    case BinaryOp::Minus: return a - b;
    case BinaryOp::Times: return a * b;
    case BinaryOp::Divide: return std::fabs(b) < kDivisionGuard ? kNaN : a / b;
    }
    return kNaN;
}

namespace {

struct PointEvaluator {
    std::span<const double> point;
    std::span<const double> params;
    bool valid = true;

    double operator()(const Expression& e) {
        return std::visit(overloaded{
                              [](const ConstantNode& c) { return c.value; },
                              [&](const VariableNode& v) { return point[v.index]; },
                              [&](const ParameterNode& p) { return params[p.slot]; },
                              [&](const UnaryNode& u) {
                                  const double x = (*this)(u.child);
                                  if ((u.op == UnaryOp::Log && !(x > 0.0)) || (u.op == UnaryOp::Sqrt && x < 0.0)) {
                                      valid = false;
                                      return kNaN;
                                  }
                                  return apply_unary(u.op, x);
                              },
                              [&](const BinaryNode& b) {
                                  const double l = (*this)(b.lhs);
                                  const double r = (*this)(b.rhs);
                                  if (b.op == BinaryOp::Divide && !(std::fabs(r) >= kDivisionGuard)) {
                                      valid = false;
                                      return kNaN;
                                  }
                                  return apply_binary(b.op, l, r);
                              },
                          },
                          e.node().data);
    }
};

} // namespace

EvalOutcome evaluate(const Expression& expr, std::span<const double> point, std::span<const double> params) {
    if (expr.required_dimension() > point.size()) {
        throw InputError("expression needs " + std::to_string(expr.required_dimension()) +
                         " variables but the point has " + std::to_string(point.size()));
    }
    if (expr.parameter_count() > params.size()) {
        throw InputError("expression has unbound parameter slots");
    }
    PointEvaluator ev{point, params};
    const double value = ev(expr);
    return {value, ev.valid};
}

Expression bind_parameters(const Expression& expr, std::span<const double> values) {
    return std::visit(overloaded{
                          [&](const ParameterNode& p) {
                              if (p.slot >= values.size()) {
                                  throw InputError("no value for parameter slot " + std::to_string(p.slot + 1));
                              }
                              return Expression::constant(values[p.slot]);
                          },
                          [&](const UnaryNode& u) { return Expression::unary(u.op, bind_parameters(u.child, values)); },
                          [&](const BinaryNode& b) {
                              return Expression::binary(b.op, bind_parameters(b.lhs, values), bind_parameters(b.rhs, values));
                          },
                          [&](const auto&) { return expr; },
                      },
                      expr.node().data);
}

Expression remap_variables(const Expression& expr, std::span<const std::size_t> mapping) {
    return std::visit(overloaded{
                          [&](const VariableNode& v) {
                              if (v.index >= mapping.size()) {
                                  throw InputError("variable x" + std::to_string(v.index + 1) + " has no mapping");
                              }
                              return Expression::variable(mapping[v.index]);
                          },
                          [&](const UnaryNode& u) { return Expression::unary(u.op, remap_variables(u.child, mapping)); },
                          [&](const BinaryNode& b) {
                              return Expression::binary(b.op, remap_variables(b.lhs, mapping), remap_variables(b.rhs, mapping));
                          },
                          [&](const auto&) { return expr; },
                      },
                      expr.node().data);
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    (void)ec;
    return {buf.data(), end};
}

} // namespace sepsr
