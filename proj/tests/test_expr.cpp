// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "sepsr/error.hpp"
#include "sepsr/expr.hpp"
#include "support.hpp"

using namespace sepsr;

namespace {

const Expression x1 = Expression::variable(0);
const Expression x2 = Expression::variable(1);

Expression c(double v) { return Expression::constant(v); }

double eval(const Expression& e, std::vector<double> x) {
    const auto r = evaluate(e, x);
    REQUIRE(r.valid);
    return r.value;
}

} // namespace

TEST_CASE("evaluate examples") {
    CHECK(eval(Expression::unary(UnaryOp::Sin, x1), {0.0}) == 0.0);

    const Expression u = Expression::variable(0);
    const Expression v = Expression::variable(1);
    const Expression w = Expression::variable(2);
    const Expression eq3 =
        c(0.8) + c(0.6) * (Expression::unary(UnaryOp::Square, u) + Expression::unary(UnaryOp::Cos, u)) +
        Expression::unary(UnaryOp::Sin, v + w) * (v - w);
    CHECK(eval(eq3, {0.0, 0.0, 0.0}) == doctest::Approx(1.4).epsilon(1e-15));

    CHECK_FALSE(evaluate(Expression::unary(UnaryOp::Log, x1), std::vector<double>{-1.0}).valid);
    CHECK_FALSE(evaluate(Expression::unary(UnaryOp::Log, x1), std::vector<double>{0.0}).valid);
    CHECK_FALSE(evaluate(Expression::unary(UnaryOp::Sqrt, x1), std::vector<double>{-1e-9}).valid);
    CHECK(evaluate(Expression::unary(UnaryOp::Sqrt, x1), std::vector<double>{0.0}).valid);
    CHECK_FALSE(evaluate(c(1.0) / x1, std::vector<double>{1e-301}).valid);
    CHECK(evaluate(c(1.0) / x1, std::vector<double>{1e-299}).valid);
}

TEST_CASE("invalid subtree poisons the whole tree") {
    // 0 * ln(-1) is still invalid even though the product would vanish.
    const Expression e = c(0.0) * Expression::unary(UnaryOp::Log, x1) + c(2.0);
    CHECK_FALSE(evaluate(e, std::vector<double>{-1.0}).valid);
}

TEST_CASE("evaluate rejects short points and missing parameters") {
    CHECK_THROWS_AS((void)evaluate(x2, std::vector<double>{1.0}), InputError);
    CHECK_THROWS_AS((void)evaluate(Expression::parameter(1), std::vector<double>{1.0}, std::vector<double>{1.0}),
                    InputError);
}

TEST_CASE("evaluate is pure") {
    Rng rng(11);
    for (int k = 0; k < 200; ++k) {
        const Expression e = test::random_expression(3, 6, rng);
        const auto x = test::random_point(3, rng);
        const auto a = evaluate(e, x);
        const auto b = evaluate(e, x);
        CHECK(a.valid == b.valid);
        if (a.valid) {
            CHECK(std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value));
        }
    }
}

TEST_CASE("simplify examples") {
    CHECK(simplify(x1 * c(1.0)).structurally_equal(x1));
    const Expression folded = simplify(c(2.0) + c(3.0));
    REQUIRE(folded.is_constant());
    CHECK(folded.constant_value() == 5.0);

    const Expression e = Expression::unary(UnaryOp::Sin, x1) + c(0.0) * x2;
    const Expression s = simplify(e);
    CHECK(s.node_count() <= e.node_count());
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        const auto x = test::random_point(2, rng);
        CHECK(eval(s, x) == eval(e, x));
    }
}

TEST_CASE("simplify preserves value on valid points") {
    Rng rng(2024);
    int compared = 0;
    for (int k = 0; k < 1000; ++k) {
        const Expression e = test::random_expression(3, 6, rng);
        const Expression s = simplify(e);
        CHECK(s.node_count() <= e.node_count());
        for (int p = 0; p < 20; ++p) {
            const auto x = test::random_point(3, rng);
            const auto a = evaluate(e, x);
            if (!a.valid || !std::isfinite(a.value)) {
                continue;
            }
            const auto b = evaluate(s, x);
            REQUIRE(b.valid);
            CHECK(test::close_relative(a.value, b.value, 1e-12));
            ++compared;
        }
    }
    CHECK(compared > 5000);
}

TEST_CASE("infix printing and parsing examples") {
    CHECK(to_infix(x1) == "x1");
    const Expression e = parse_infix("0.1978/sqrt(x1)", 1);
    const Expression expected = c(0.1978) / Expression::unary(UnaryOp::Sqrt, x1);
    CHECK(e.structurally_equal(expected));

    const Expression s = parse_infix("sin(x1+x2+x3)", 3);
    CHECK(eval(s, {std::numbers::pi / 2, 0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(eval(parse_infix("x1^2", 1), {3.0}) == 9.0);
    CHECK(eval(parse_infix("-x1 + 2", 1), {3.0}) == -1.0);
    CHECK(eval(parse_infix("2*x1-x2/4", 2), {3.0, 8.0}) == 4.0);
    CHECK(eval(parse_infix("1e-3*exp(ln(x1))", 1), {2.0}) == doctest::Approx(2e-3));
}

TEST_CASE("parse errors carry a position") {
    for (const char* bad : {"", "x1+", "sin(x1", "x4", "x0", "foo(x1)", "x1 x2", "2**x1", "(x1))"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS((void)parse_infix(bad, 3), ParseError);
    }
    try {
        (void)parse_infix("x1+)", 1);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.position() == 3);
    }
}

TEST_CASE("infix round trip over random genomes") {
    Rng rng(77);
    for (int k = 0; k < 1000; ++k) {
        const Expression e = test::random_expression(3, 6, rng);
        const std::string text = to_infix(e);
        CAPTURE(text);
        const Expression back = parse_infix(text, 3);
        CHECK(back.structurally_equal(e));
        CHECK(to_infix(back) == text);
        for (int p = 0; p < 50; ++p) {
            const auto x = test::random_point(3, rng);
            const auto a = evaluate(e, x);
            if (!a.valid) {
                continue;
            }
            const auto b = evaluate(back, x);
            REQUIRE(b.valid);
            CHECK(test::close_relative(a.value, b.value, 1e-12));
        }
    }
}

TEST_CASE("infix round trip keeps parameter slots") {
    const Expression e = Expression::parameter(0) * x1 + Expression::parameter(1);
    const std::string text = to_infix(e);
    CHECK(parse_infix(text, 1).structurally_equal(e));
    const std::vector<double> params{2.0, -1.0};
    CHECK(evaluate(parse_infix(text, 1), std::vector<double>{3.0}, params).value == 5.0);
}

TEST_CASE("format_double is the shortest round trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-7) == "-2.5e-07");
    Rng rng(3);
    for (int k = 0; k < 10000; ++k) {
        const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.uniform_int(-300, 300)));
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("bind and remap") {
    const Expression e = Expression::parameter(0) * x1 + Expression::parameter(1) * x2;
    const std::vector<double> values{3.0, 4.0};
    const Expression bound = bind_parameters(e, values);
    CHECK(bound.parameter_count() == 0);
    CHECK(eval(bound, {1.0, 2.0}) == 11.0);

    const std::vector<std::size_t> mapping{2, 0};
    const Expression moved = remap_variables(bound, mapping);
    CHECK(moved.required_dimension() == 3);
    CHECK(eval(moved, {2.0, 0.0, 1.0}) == 11.0);
}
