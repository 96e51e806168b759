// SPDX-License-Identifier: Apache-2.0
#include <cctype>
#include <cmath>
#include <charconv>
#include <string>
#include <variant>

#include "sepsr/error.hpp"
#include "sepsr/expr.hpp"

namespace sepsr {

namespace {

// Binding strength used by the printer; mirrors the parser's grammar levels.
constexpr int kSum = 1;
constexpr int kProduct = 2;
constexpr int kPower = 3;
constexpr int kAtom = 4;

int precedence(const Expression& e) {
    const auto& data = e.node().data;
    if (const auto* b = std::get_if<BinaryNode>(&data)) {
        return (b->op == BinaryOp::Plus || b->op == BinaryOp::Minus) ? kSum : kProduct;
    }
    if (const auto* u = std::get_if<UnaryNode>(&data)) {
        return u->op == UnaryOp::Square ? kPower : kAtom;
    }
    return kAtom;
}

void print(const Expression& e, std::string& out);

void print_wrapped(const Expression& e, bool parens, std::string& out) {
    if (parens) {
        out += '(';
    }
    print(e, out);
    if (parens) {
        out += ')';
    }
}

void print(const Expression& e, std::string& out) {
    const auto& data = e.node().data;
    if (const auto* c = std::get_if<ConstantNode>(&data)) {
        if (std::signbit(c->value)) {
            out += '(';
            out += format_double(c->value);
            out += ')';
        } else {
            out += format_double(c->value);
        }
    } else if (const auto* v = std::get_if<VariableNode>(&data)) {
        out += 'x';
        out += std::to_string(v->index + 1);
    } else if (const auto* p = std::get_if<ParameterNode>(&data)) {
        out += 'p';
        out += std::to_string(p->slot + 1);
    } else if (const auto* u = std::get_if<UnaryNode>(&data)) {
        if (u->op == UnaryOp::Square) {
            print_wrapped(u->child, precedence(u->child) < kPower, out);
            out += "^2";
        } else {
            out += name(u->op);
            out += '(';
            print(u->child, out);
            out += ')';
        }
    } else {
        const auto& b = std::get<BinaryNode>(data);
        const int p = precedence(e);
        print_wrapped(b.lhs, precedence(b.lhs) < p, out);
        out += symbol(b.op);
        print_wrapped(b.rhs, precedence(b.rhs) <= p, out);
    }
}

class Parser {
public:
    Parser(std::string_view text, std::size_t dimension) : text_(text), dimension_(dimension) {}

    Expression parse() {
        Expression e = sum();
        skip_space();
        if (pos_ != text_.size()) {
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            fail(std::string("expected '") + c + "'");
        }
    }

    Expression sum() {
        Expression lhs = product();
        for (;;) {
            if (accept('+')) {
                lhs = Expression::binary(BinaryOp::Plus, lhs, product());
            } else if (accept('-')) {
                lhs = Expression::binary(BinaryOp::Minus, lhs, product());
            } else {
                return lhs;
            }
        }
    }

    Expression product() {
        Expression lhs = power();
        for (;;) {
            if (accept('*')) {
                lhs = Expression::binary(BinaryOp::Times, lhs, power());
            } else if (accept('/')) {
                lhs = Expression::binary(BinaryOp::Divide, lhs, power());
            } else {
                return lhs;
            }
        }
    }

    Expression power() {
        Expression base = primary();
        while (accept('^')) {
            skip_space();
            if (pos_ >= text_.size() || text_[pos_] != '2' ||
                (pos_ + 1 < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) != 0 || text_[pos_ + 1] == '.'))) {
                fail("only the exponent 2 is supported");
            }
            ++pos_;
            base = Expression::unary(UnaryOp::Square, base);
        }
        return base;
    }

    Expression number(bool negative) {
        const std::size_t start = pos_;
        auto is_digit = [&](std::size_t i) { return i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i])) != 0; };
        while (is_digit(pos_)) {
            ++pos_;
        }
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (is_digit(pos_)) {
                ++pos_;
            }
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t q = pos_ + 1;
            if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) {
                ++q;
            }
            if (is_digit(q)) {
                pos_ = q;
                while (is_digit(pos_)) {
                    ++pos_;
                }
            }
        }
        // from_chars rejects a leading '+', which never appears here.
        double value = 0.0;
        const char* first = text_.data() + start;
        const char* last = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) {
            pos_ = start;
            fail("malformed number");
        }
        return Expression::constant(negative ? -value : value);
    }

    std::size_t index_after(char prefix) {
        const std::size_t start = pos_;
        ++pos_;
        std::size_t value = 0;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr == first) {
            pos_ = start;
            fail(std::string("expected an index after '") + prefix + "'");
        }
        pos_ += static_cast<std::size_t>(ptr - first);
        if (value == 0) {
            pos_ = start;
            fail("indices are 1-based");
        }
        return value - 1;
    }

    Expression primary() {
        skip_space();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expression inner = sum();
            expect(')');
            return inner;
        }
        if (c == '-') {
            ++pos_;
            skip_space();
            if (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0 || text_[pos_] == '.')) {
                return number(true);
            }
            return Expression::binary(BinaryOp::Minus, Expression::constant(0.0), power());
        }
        if (std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.') {
            return number(false);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) == 0) {
            fail("unexpected '" + std::string(1, c) + "'");
        }
        const std::size_t start = pos_;
        std::size_t end = pos_;
        while (end < text_.size() && std::isalpha(static_cast<unsigned char>(text_[end])) != 0) {
            ++end;
        }
        const std::string_view word = text_.substr(start, end - start);
        if ((word == "x" || word == "p") && end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end])) != 0) {
            const std::size_t index = index_after(word[0]);
            if (word == "x") {
                if (index >= dimension_) {
                    pos_ = start;
                    fail("variable x" + std::to_string(index + 1) + " exceeds dimension " + std::to_string(dimension_));
                }
                return Expression::variable(index);
            }
            if (index > 1) {
                pos_ = start;
                fail("only parameter slots p1 and p2 exist");
            }
            return Expression::parameter(index);
        }
        UnaryOp op{};
        if (word == "sin") {
            op = UnaryOp::Sin;
        } else if (word == "cos") {
            op = UnaryOp::Cos;
        } else if (word == "exp") {
            op = UnaryOp::Exp;
        } else if (word == "ln") {
            op = UnaryOp::Log;
        } else if (word == "sqrt") {
            op = UnaryOp::Sqrt;
        } else {
            fail("unknown identifier '" + std::string(word) + "'");
        }
        pos_ = end;
        expect('(');
        Expression arg = sum();
        expect(')');
        return Expression::unary(op, arg);
    }

    std::string_view text_;
    std::size_t dimension_;
    std::size_t pos_ = 0;
};

} // namespace

std::string to_infix(const Expression& expr) {
    std::string out;
    print(expr, out);
    return out;
}

Expression parse_infix(std::string_view text, std::size_t dimension) {
    return Parser(text, dimension).parse();
}

} // namespace sepsr
