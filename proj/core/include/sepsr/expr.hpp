// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace sepsr {

enum class UnaryOp : std::uint8_t { Sin, Cos, Exp, Log, Sqrt, Square };
enum class BinaryOp : std::uint8_t { Plus, Minus, Times, Divide };

[[nodiscard]] std::string_view name(UnaryOp op) noexcept;
[[nodiscard]] char symbol(BinaryOp op) noexcept;

struct ExprNode;

// Immutable expression tree. Copies share structure; nothing is ever
// mutated after construction, so expressions may be evaluated from many
// threads at once.
class Expression {
public:
    // The constant 0.
    Expression();

    static Expression constant(double value);
    static Expression variable(std::size_t index);
    // Tunable constant slot (0 or 1); bound to numbers by bind_parameters().
    static Expression parameter(std::size_t slot);
    static Expression unary(UnaryOp op, Expression child);
    static Expression binary(BinaryOp op, Expression lhs, Expression rhs);

    [[nodiscard]] const ExprNode& node() const noexcept { return *node_; }

    [[nodiscard]] bool is_constant() const noexcept;
    [[nodiscard]] bool is_constant(double value) const noexcept;
    [[nodiscard]] double constant_value() const;

    // Number of nodes counted as a tree (shared subtrees counted per use).
    [[nodiscard]] std::size_t node_count() const;
    // Smallest point dimension this expression can be evaluated on.
    [[nodiscard]] std::size_t required_dimension() const;
    // 1 + highest parameter slot referenced, 0 when none.
    [[nodiscard]] std::size_t parameter_count() const;

    [[nodiscard]] bool structurally_equal(const Expression& other) const;

    friend Expression operator+(Expression a, Expression b) { return binary(BinaryOp::Plus, std::move(a), std::move(b)); }
    friend Expression operator-(Expression a, Expression b) { return binary(BinaryOp::Minus, std::move(a), std::move(b)); }
    friend Expression operator*(Expression a, Expression b) { return binary(BinaryOp::Times, std::move(a), std::move(b)); }
    friend Expression operator/(Expression a, Expression b) { return binary(BinaryOp::Divide, std::move(a), std::move(b)); }

private:
    explicit Expression(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

    std::shared_ptr<const ExprNode> node_;
};

struct ConstantNode {
    double value;
};
struct VariableNode {
    std::size_t index;
};
struct ParameterNode {
    std::size_t slot;
};
struct UnaryNode {
    UnaryOp op;
    Expression child;
};
struct BinaryNode {
    BinaryOp op;
    Expression lhs;
    Expression rhs;
};

struct ExprNode {
    std::variant<ConstantNode, VariableNode, ParameterNode, UnaryNode, BinaryNode> data;
};

// Result of a point evaluation. `valid` is false when ln(x<=0), sqrt(x<0)
// or a division by |d| < 1e-300 happened anywhere in the tree; `value` must
// then not be used.
struct EvalOutcome {
    double value = 0.0;
    bool valid = true;
};

inline constexpr double kDivisionGuard = 1e-300;

// Throws InputError when the expression references a variable outside
// `point` or a parameter outside `params`.
[[nodiscard]] EvalOutcome evaluate(const Expression& expr, std::span<const double> point,
                                   std::span<const double> params = {});

// Point-wise primitives shared with the genome interpreter. Invalid results
// are reported as NaN.
[[nodiscard]] double apply_unary(UnaryOp op, double x) noexcept;
[[nodiscard]] double apply_binary(BinaryOp op, double a, double b) noexcept;

// Replace parameter slots by constants.
[[nodiscard]] Expression bind_parameters(const Expression& expr, std::span<const double> values);

// Rename variables: variable i becomes variable mapping[i].
[[nodiscard]] Expression remap_variables(const Expression& expr, std::span<const std::size_t> mapping);

// Constant folding and identity-element removal. The result evaluates to
// the same value as the input wherever the input is valid and never has
// more nodes.
[[nodiscard]] Expression simplify(const Expression& expr);

// Infix form: x1..xn variables (1-based), p1/p2 parameter slots, + - * /,
// postfix ^2, sin cos exp ln sqrt. Parenthesization preserves tree shape so
// parse_infix(to_infix(e)) is structurally identical to e.
[[nodiscard]] std::string to_infix(const Expression& expr);

// Throws ParseError (with character position) on malformed input or a
// variable index above `dimension`.
[[nodiscard]] Expression parse_infix(std::string_view text, std::size_t dimension);

// Shortest decimal string that reads back as exactly `value`.
[[nodiscard]] std::string format_double(double value);

} // namespace sepsr
