// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "sepsr/error.hpp"
#include "sepsr/nelder_mead.hpp"
#include "sepsr/pme.hpp"
#include "sepsr/program.hpp"
#include "support.hpp"

using namespace sepsr;
using boost::multiprecision::cpp_int;

namespace {

ParseMatrix genome(std::size_t d, std::vector<ParseMatrix::Row> rows) { return ParseMatrix(d, std::move(rows)); }

SampleSet tabulate(const DomainBox& box, std::size_t n, std::uint64_t seed,
                   const std::function<double(std::span<const double>)>& f) {
    SampleSet s = lhs_sample(box, n, seed);
    std::vector<double> v;
    for (std::size_t i = 0; i < s.size(); ++i) {
        v.push_back(f(s.point(i)));
    }
    s.set_values(std::move(v));
    return s;
}

// Every genome of height h over d variables, row by row.
std::vector<ParseMatrix::Row> all_rows(std::size_t d) {
    std::vector<ParseMatrix::Row> rows;
    const auto [l0, h0] = ParseMatrix::column_domain(0, d);
    const auto [l1, h1] = ParseMatrix::column_domain(1, d);
    const auto [l2, h2] = ParseMatrix::column_domain(2, d);
    const auto [l3, h3] = ParseMatrix::column_domain(3, d);
    for (int a = l0; a <= h0; ++a) {
        for (int b = l1; b <= h1; ++b) {
            for (int c = l2; c <= h2; ++c) {
                for (int e = l3; e <= h3; ++e) {
                    rows.push_back({a, b, c, e});
                }
            }
        }
    }
    return rows;
}

double value_at(const Expression& e, std::vector<double> x) {
    const auto r = evaluate(e, x);
    REQUIRE(r.valid);
    return r.value;
}

} // namespace

TEST_CASE("decode examples") {
    const Expression s = decode(genome(1, {{3, 1, 0, -1}}));
    CHECK(to_infix(simplify(s)) == "sin(x1)");
    CHECK(value_at(s, {0.3}) == std::sin(0.3));

    const Expression skip = decode(genome(2, {{0, 1, 2, 0}, {0, -3, 1, 1}}));
    REQUIRE(skip.is_constant());
    CHECK(skip.constant_value() == 0.0);

    CHECK(value_at(decode(genome(1, {{5, 1, 0, -1}})), {3.0}) == 9.0);
}

TEST_CASE("decode follows the register semantics") {
    // f = x1 + x2 -> f1 ; f = sin(f) ; f = f * f1
    const Expression e = decode(genome(2, {{1, 1, 2, 0}, {3, -3, 0, -1}, {2, -3, -1, -1}}));
    CHECK(value_at(e, {0.4, -1.1}) == doctest::Approx(std::sin(-0.7) * -0.7));

    // Unused registers read as 0, operand 0 is the constant 1.
    const Expression f = decode(genome(1, {{1, -2, 0, -1}}));
    CHECK(value_at(f, {5.0}) == 1.0);

    // Constant slots decode to parameters p1/p2.
    const Expression p = decode(genome(1, {{2, -4, 1, 1}, {-1, -3, -5, -1}}));
    CHECK(p.parameter_count() == 2);
    const std::vector<double> params{3.0, 0.5};
    CHECK(evaluate(p, std::vector<double>{2.0}, params).value == 5.5);
}

TEST_CASE("genome entries are validated") {
    CHECK_THROWS_AS(genome(1, {{6, 1, 0, -1}}), InputError);
    CHECK_THROWS_AS(genome(1, {{1, 2, 0, -1}}), InputError);
    CHECK_THROWS_AS(genome(2, {{1, -6, 0, -1}}), InputError);
    CHECK_THROWS_AS(genome(1, {{1, 1, 0, 2}}), InputError);
    CHECK_NOTHROW(genome(3, {{-5, 3, -5, 1}}));
    CHECK_THROWS_AS((void)genome(1, {{1, 1, 0, -1}}).with_entry(0, 3, -2), InputError);
}

TEST_CASE("search space size") {
    CHECK(search_space_size(1, 2) == 2614689);
    CHECK(search_space_size(3, 0) == 1);
    const cpp_int big = search_space_size(5, 9);
    CHECK(big >= cpp_int("250000000000000000000000000000000"));
    CHECK(big <= cpp_int("270000000000000000000000000000000"));
    CHECK(big == boost::multiprecision::pow(cpp_int(3993), 9));
}

TEST_CASE("search space size matches exhaustive counting") {
    for (std::size_t d = 1; d <= 2; ++d) {
        const auto rows = all_rows(d);
        std::size_t valid_rows = 0;
        for (const auto& r : rows) {
            CHECK_NOTHROW(genome(d, {r}));
            ++valid_rows;
        }
        CHECK(search_space_size(d, 0) == 1);
        CHECK(search_space_size(d, 1) == valid_rows);
        // Height 2: every ordered pair of valid rows.
        std::uint64_t pairs = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            pairs += rows.size();
        }
        CHECK(search_space_size(d, 2) == pairs);
    }
    CHECK(all_rows(1).size() == 11 * 7 * 7 * 3);
}

TEST_CASE("decode is total") {
    Rng rng(123);
    for (int k = 0; k < 1'000'000; ++k) {
        const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_int(0, 4));
        const std::size_t h = static_cast<std::size_t>(rng.uniform_int(1, 8));
        const ParseMatrix g = ParseMatrix::random(d, h, rng);
        const Expression e = decode(g);
        REQUIRE(e.required_dimension() <= d);
    }
}

TEST_CASE("compiled programs agree with decoded expressions") {
    Rng rng(99);
    ProgramWorkspace ws;
    const DomainBox box({{-3.0, 3.0}, {-3.0, 3.0}});
    const SampleSet xs = lhs_sample(box, 40, 5);
    std::vector<std::vector<double>> cols{xs.column(0), xs.column(1)};
    std::vector<const double*> ptrs{cols[0].data(), cols[1].data()};
    std::vector<double> out(xs.size());
    for (int k = 0; k < 20000; ++k) {
        const ParseMatrix g = ParseMatrix::random(2, 6, rng);
        const Program program(g);
        const Expression e = decode(g);
        const std::array<double, 2> params{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        program.run(ptrs, xs.size(), params, ws, out);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const auto r = evaluate(e, xs.point(i), params);
            if (r.valid && std::isfinite(r.value)) {
                REQUIRE(std::isfinite(out[i]));
                CHECK(test::close_relative(out[i], r.value, 1e-12));
            }
        }
        // The canonical form decodes to the same values.
        const Expression canon = decode(ParseMatrix(2, program.canonical_rows()));
        const auto a = evaluate(e, xs.point(0), params);
        const auto b = evaluate(canon, xs.point(0), params);
        CHECK(a.valid == b.valid);
        if (a.valid && std::isfinite(a.value)) {
            CHECK(test::close_relative(a.value, b.value, 1e-12));
        }
    }
}

TEST_CASE("dead rows do not change the canonical key") {
    const ParseMatrix a = genome(1, {{3, 1, 0, -1}, {5, 1, 0, 0}, {4, 1, 0, -1}});
    const ParseMatrix b = genome(1, {{-3, 1, 0, 1}, {-2, 1, 1, -1}, {4, 1, -4, -1}});
    CHECK(Program(a).key() == Program(b).key());
    CHECK(Program(a).live_rows() == 1);
    const ParseMatrix c = genome(1, {{4, -1, 0, -1}});
    CHECK(Program(c).key() != Program(a).key());
    CHECK_FALSE(Program(genome(1, {{4, 0, 0, -1}})).uses_variables());
}

TEST_CASE("fitness examples") {
    const SampleSet data(1, {0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
    const Expression two_x = Expression::constant(2.0) * Expression::variable(0);
    const auto m = fitness(two_x, data);
    CHECK(m.sse == doctest::Approx(3.0));
    CHECK(m.sst == doctest::Approx(8.0));
    CHECK(m.one_minus_r2 == doctest::Approx(0.375));

    const Expression exact = two_x + Expression::constant(1.0);
    CHECK(fitness(exact, data).one_minus_r2 <= 1e-15);
    CHECK(fitness(Expression::constant(3.0), data).one_minus_r2 == doctest::Approx(1.0));

    const Expression bad = Expression::unary(UnaryOp::Log, Expression::variable(0));
    CHECK(fitness(bad, data).one_minus_r2 == kWorstFitness);

    const SampleSet flat(1, {0.0, 1.0}, {2.0, 2.0});
    CHECK_THROWS_AS((void)fitness(two_x, flat), DegenerateTargetError);
}

TEST_CASE("nelder-mead minimises rosenbrock") {
    NelderMeadOptions opt;
    opt.max_evaluations = 5000;
    opt.initial_step = 0.5;
    const auto r = nelder_mead(
        [](std::span<const double> x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); },
        {-1.2, 1.0}, opt);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.evaluations <= 5000);

    // Non-finite regions are avoided rather than fatal.
    const auto s = nelder_mead([](std::span<const double> x) { return x[0] < 0 ? std::nan("") : (x[0] - 2) * (x[0] - 2); },
                               {0.5}, opt);
    CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("constant optimisation examples") {
    const Expression p1 = Expression::parameter(0);
    const Expression x1 = Expression::variable(0);
    const SampleSet lin = tabulate(DomainBox({{-2.0, 2.0}}), 30, 1, [](auto x) { return 2.0 * x[0]; });
    const auto a = optimize_constants(p1 * x1, lin);
    CHECK(a.values[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(a.metrics.one_minus_r2 <= 1e-12);

    const auto m = optimize_constants(p1, lin);
    double mean = 0.0;
    for (double v : lin.values()) {
        mean += v;
    }
    mean /= static_cast<double>(lin.size());
    CHECK(m.values[0] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(m.metrics.one_minus_r2 == doctest::Approx(1.0));

    // Eq. 1 slice at theta = 5 degrees.
    const double k = 2.274 * std::sin(5.0 * std::numbers::pi / 180) * std::sqrt(std::cos(5.0 * std::numbers::pi / 180));
    const SampleSet slice = tabulate(DomainBox({{1000.0, 10000.0}}), 100, 2, [&](auto x) { return k / std::sqrt(x[0]); });
    const auto c = optimize_constants(p1 / Expression::unary(UnaryOp::Sqrt, x1), slice);
    CHECK(c.values[0] == doctest::Approx(0.1978).epsilon(1e-3));
    CHECK(c.metrics.one_minus_r2 <= 1e-12);

    // Nonlinear: sin(p1 * x1) on sin(1.5 x).
    const SampleSet wave = tabulate(DomainBox({{-2.0, 2.0}}), 60, 3, [](auto x) { return std::sin(1.5 * x[0]); });
    const auto w = optimize_constants(Expression::unary(UnaryOp::Sin, p1 * x1), wave);
    CHECK(w.metrics.one_minus_r2 <= 1e-8);

    // Invalid everywhere: worst fitness, no exception.
    const SampleSet neg = tabulate(DomainBox({{-2.0, -1.0}}), 10, 4, [](auto x) { return x[0]; });
    const auto bad = optimize_constants(Expression::unary(UnaryOp::Log, x1 * x1 * Expression::constant(-1.0) + p1 * Expression::constant(0.0)), neg);
    CHECK(bad.metrics.one_minus_r2 == kWorstFitness);

    CHECK_THROWS_AS((void)optimize_constants(p1, SampleSet(1, {1.0})), InputError);
}

TEST_CASE("config validation") {
    PmeConfig cfg;
    cfg.budget = 10;
    CHECK_THROWS_AS(validate(cfg), InputError);
    cfg = PmeConfig{};
    cfg.threshold = 0.0;
    CHECK_THROWS_AS(validate(cfg), InputError);
    cfg = PmeConfig{};
    cfg.height = 0;
    CHECK_THROWS_AS(validate(cfg), InputError);
    CHECK_NOTHROW(validate(PmeConfig{}));
}

TEST_CASE("evolve finds x1 squared") {
    const SampleSet data = tabulate(DomainBox({{-2.0, 3.0}}), 50, 1, [](auto x) { return x[0] * x[0]; });
    PmeConfig cfg;
    cfg.height = 2;
    cfg.budget = 100000;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        cfg.seed = seed;
        const auto r = evolve(data, cfg);
        CHECK(r.converged);
        CHECK(r.metrics.one_minus_r2 <= 1e-10);
    }
}

TEST_CASE("evolve on a constant target") {
    const SampleSet data(1, {1.0, 2.0, 3.0}, {3.7, 3.7, 3.7});
    const auto r = evolve(data, PmeConfig{});
    CHECK(r.converged);
    REQUIRE(r.expression.is_constant());
    CHECK(r.expression.constant_value() == 3.7);
}

TEST_CASE("evolve on the h_w/h_s slice") {
    const SampleSet data = tabulate(DomainBox({{1e4, 5e4}, {1e5, 1e6}}), 100, 6,
                                    [](auto x) { return 9370.0 - 9370.0 * x[0] / x[1]; });
    PmeConfig cfg;
    cfg.budget = 1'000'000;
    cfg.seed = 4;
    const auto r = evolve(data, cfg);
    CHECK(r.converged);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(value_at(r.expression, {data.point(i)[0], data.point(i)[1]}) ==
              doctest::Approx(data.values()[i]).epsilon(1e-8));
    }
}

TEST_CASE("evolve invariants") {
    const SampleSet data = tabulate(DomainBox({{-3.0, 3.0}, {-3.0, 3.0}}), 100, 7,
                                    [](auto x) { return std::sin(x[0] + x[1]) * (x[0] - x[1]); });
    for (std::uint64_t budget : {30u, 500u, 20000u}) {
        PmeConfig cfg;
        cfg.budget = budget;
        cfg.seed = budget;
        const auto r = evolve(data, cfg);
        CAPTURE(budget);
        CHECK(r.evaluations <= cfg.budget + cfg.mu);
        REQUIRE_FALSE(r.best_history.empty());
        for (std::size_t k = 1; k < r.best_history.size(); ++k) {
            CHECK(r.best_history[k] <= r.best_history[k - 1]);
        }
        CHECK(r.best_history.back() == r.score.metrics.one_minus_r2);
        // The realised expression reproduces the search fitness.
        if (std::isfinite(r.score.metrics.one_minus_r2)) {
            CHECK(r.metrics.one_minus_r2 ==
                  doctest::Approx(r.score.metrics.one_minus_r2).epsilon(1e-6).scale(1e-12));
        }
    }
}

TEST_CASE("evolve is deterministic") {
    const SampleSet data = tabulate(DomainBox({{0.5, 2.0}}), 40, 8, [](auto x) { return std::exp(-x[0]) * x[0]; });
    PmeConfig cfg;
    cfg.budget = 50000;
    cfg.seed = 17;
    const auto a = evolve(data, cfg);
    const auto b = evolve(data, cfg);
    CHECK(a.genome == b.genome);
    CHECK(a.evaluations == b.evaluations);
    CHECK(a.best_history == b.best_history);
    CHECK(to_infix(a.expression) == to_infix(b.expression));
}

TEST_CASE("scoring a genome is pure") {
    const SampleSet data = tabulate(DomainBox({{0.5, 2.0}}), 40, 8, [](auto x) { return std::cos(2.0 * x[0]); });
    const ParseMatrix g = genome(1, {{2, -4, 1, -1}, {-3, -3, 0, -1}});
    PmeConfig cfg;
    cfg.constants.refine_starts = 0;
    cfg.constants.evaluations_per_restart = 200;
    const auto a = score_genome(g, data, cfg);
    const auto b = score_genome(g, data, cfg);
    CHECK(a.metrics.one_minus_r2 == b.metrics.one_minus_r2);
    CHECK(a.constants == b.constants);
    CHECK(a.metrics.one_minus_r2 <= 1e-10);
    CHECK(fitness(realize(g, a), data).one_minus_r2 <= 1e-10);
}

TEST_CASE("height one: evolution matches exhaustive enumeration") {
    Rng rng(2718);
    int targets = 0;
    while (targets < 5) {
        const Expression truth = test::random_expression(1, 3, rng);
        const SampleSet xs = lhs_sample(DomainBox({{0.5, 2.5}}), 40, rng.next());
        std::vector<double> values;
        bool ok = true;
        for (std::size_t i = 0; i < xs.size() && ok; ++i) {
            const auto r = evaluate(truth, xs.point(i));
            ok = r.valid && std::isfinite(r.value) && std::fabs(r.value) < 1e6;
            values.push_back(r.value);
        }
        if (!ok) {
            continue;
        }
        const SampleSet data(1, xs.points(), values);
        double mean = 0.0;
        for (double v : values) {
            mean += v;
        }
        mean /= static_cast<double>(values.size());
        double sst = 0.0;
        for (double v : values) {
            sst += (v - mean) * (v - mean);
        }
        if (sst < 1e-6) {
            continue;
        }
        ++targets;

        PmeConfig cfg;
        cfg.height = 1;
        cfg.budget = 5 * 1617;
        double best = kWorstFitness;
        for (const auto& row : all_rows(1)) {
            best = std::min(best, score_genome(genome(1, {row}), data, cfg).metrics.one_minus_r2);
        }
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            cfg.seed = seed;
            const auto r = evolve(data, cfg);
            CAPTURE(to_infix(truth));
            CHECK(std::fabs(r.best_history.back() - best) <= 1e-12);
        }
    }
}
