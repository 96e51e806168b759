// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>

#include "sepsr/bict.hpp"
#include "sepsr/cli/catalog.hpp"
#include "sepsr/error.hpp"
#include "support.hpp"

using namespace sepsr;

namespace {

SubsetVerdict run(const cli::Target& t, std::vector<std::size_t> subset, std::uint64_t seed) {
    BictConfig cfg;
    cfg.seed = seed;
    return bict_subset(*t.oracle, t.box, subset, cfg);
}

double worst_gap(const SubsetTest& test) {
    double gap = 0.0;
    for (const auto& p : test.pairs) {
        gap = std::max(gap, 1.0 - std::fabs(p.pearson.r));
    }
    return gap;
}

} // namespace

TEST_CASE("correlation examples") {
    const std::vector<double> xs{0.5, 1.0, 2.0, 3.5, 7.0};
    std::vector<double> ys;
    for (double x : xs) {
        ys.push_back(2.0 * x + 1.0);
    }
    const auto r = correlation(xs, ys);
    CHECK(r.r == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r.intercept == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.n == 5);

    std::vector<double> neg;
    for (double x : xs) {
        neg.push_back(-x);
    }
    CHECK(correlation(xs, neg).r == doctest::Approx(-1.0).epsilon(1e-15));

    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{1, 4, 9, 16};
    CHECK(test::pearson_reference(a, b) == doctest::Approx(0.9844).epsilon(1e-4));
    CHECK(correlation(a, b).r == doctest::Approx(test::pearson_reference(a, b)).epsilon(1e-14));
}

TEST_CASE("rank correlations") {
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{1, 3, 2, 4};
    CHECK(correlation(a, b, CorrelationMethod::Spearman).r == doctest::Approx(0.8));
    CHECK(correlation(a, b, CorrelationMethod::Kendall).r == doctest::Approx(2.0 / 3.0));
    // Monotone but nonlinear: ranks agree perfectly.
    const std::vector<double> cube{1, 8, 27, 64};
    CHECK(correlation(a, cube, CorrelationMethod::Spearman).r == doctest::Approx(1.0));
    CHECK(correlation(a, cube, CorrelationMethod::Kendall).r == doctest::Approx(1.0));
    // Ties are handled by tau-b.
    const std::vector<double> tied{1, 1, 2, 2};
    const double tau = correlation(a, tied, CorrelationMethod::Kendall).r;
    CHECK(tau == doctest::Approx(4.0 / std::sqrt(6.0 * 4.0)));

    CHECK(parse_correlation_method("kendall") == CorrelationMethod::Kendall);
    CHECK_FALSE(parse_correlation_method("cosine").has_value());
}

TEST_CASE("correlation input errors") {
    const std::vector<double> flat{2, 2, 2, 2};
    const std::vector<double> a{1, 2, 3, 4};
    CHECK_THROWS_AS((void)correlation(a, flat), IndeterminateError);
    CHECK_THROWS_AS((void)correlation(flat, a), IndeterminateError);
    const std::vector<double> two{1, 2};
    CHECK_THROWS_AS((void)correlation(two, two), InputError);
    const std::vector<double> three{1, 2, 3};
    CHECK_THROWS_AS((void)correlation(a, three), InputError);
}

TEST_CASE("pearson r is invariant under positive affine maps") {
    Rng rng(8);
    for (int k = 0; k < 200; ++k) {
        std::vector<double> x(30);
        std::vector<double> y(30);
        for (std::size_t i = 0; i < 30; ++i) {
            x[i] = rng.uniform(-5, 5);
            y[i] = std::sin(x[i]) + rng.uniform(-0.3, 0.3);
        }
        const double r = correlation(x, y).r;
        CHECK(r == doctest::Approx(test::pearson_reference(x, y)).epsilon(1e-12));
        CHECK(std::fabs(r) <= 1.0 + 1e-12);
        const double s = rng.uniform(0.01, 100.0);
        const double t = rng.uniform(-100.0, 100.0);
        std::vector<double> x2 = x;
        std::vector<double> y2 = y;
        for (auto& v : x2) {
            v = s * v + t;
        }
        for (auto& v : y2) {
            v = rng.uniform(0.5, 2.0) > 0 ? 3.0 * v - 7.0 : v;
        }
        CHECK(correlation(x2, y2).r == doctest::Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("operator inference examples") {
    const auto fit = [](double a, double b) {
        CorrelationResult r;
        r.r = 1.0;
        r.intercept = a;
        r.slope = b;
        return r;
    };
    const std::vector<double> scales{1.0, 1.0};

    const std::vector<CorrelationResult> scaling{fit(0.0, 0.5), fit(1e-12, 0.5)};
    CHECK(infer_operator(scaling, scales, 1e-6).op == Combiner::Times);
    CHECK(infer_operator(scaling, scales, 1e-6).offset == doctest::Approx(0.0));

    const std::vector<CorrelationResult> shift{fit(2.0, 1.0), fit(-1.0, 1.0 + 1e-9)};
    CHECK(infer_operator(shift, scales, 1e-6).op == Combiner::PlusMinus);

    const std::vector<CorrelationResult> same{fit(0.0, 1.0), fit(0.0, 1.0)};
    const auto degenerate = infer_operator(same, scales, 1e-6);
    CHECK(degenerate.degenerate);

    // f = 0.8 + g * h gives f_B = 0.8 (1 - b) + b f_A.
    const std::vector<CorrelationResult> offset{fit(0.8 * (1 - 2.0), 2.0), fit(0.8 * (1 - 0.25), 0.25)};
    const auto inferred = infer_operator(offset, scales, 1e-6);
    CHECK(inferred.op == Combiner::Times);
    CHECK(inferred.offset == doctest::Approx(0.8));

    const std::vector<CorrelationResult> mixed{fit(0.5, 2.0), fit(0.0, 1.0 + 1e-3)};
    CHECK(infer_operator(mixed, scales, 1e-6).op == Combiner::Unknown);
}

TEST_CASE("bict examples from the catalog") {
    const auto eq3 = cli::resolve_target("eq3");
    const auto v3 = run(eq3, {0}, 1);
    CHECK(v3.separable);
    CHECK(v3.op == Combiner::PlusMinus);

    const auto eq5 = cli::resolve_target("eq5");
    const auto v5 = run(eq5, {0}, 1);
    CHECK(v5.separable);
    CHECK(v5.op == Combiner::Times);
    CHECK(v5.offset == doctest::Approx(0.8).epsilon(1e-6));

    const auto eq1 = cli::resolve_target("eq1");
    const auto v1 = run(eq1, {0}, 1);
    CHECK(v1.separable);
    CHECK(v1.op == Combiner::Times);
    for (const auto& p : v1.test1.pairs) {
        CHECK(std::fabs(p.pearson.intercept) <= 1e-9);
    }

    const auto nonsep = cli::resolve_target("nonsep3");
    CHECK_FALSE(run(nonsep, {0}, 1).separable);

    const auto eq2 = cli::resolve_target("eq2");
    CHECK_FALSE(run(eq2, {3}, 1).separable);
    const auto pair = run(eq2, {3, 4}, 1);
    CHECK(pair.separable);
    CHECK(pair.op == Combiner::Times);
}

TEST_CASE("necessity on every true block") {
    for (const char* name : {"eq1", "eq2", "eq3", "eq4", "eq5"}) {
        const auto t = cli::resolve_target(name);
        for (const auto& block : t.truth->blocks) {
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                CAPTURE(name);
                CAPTURE(seed);
                const auto v = run(t, block, seed);
                CHECK(v.separable);
                CHECK(worst_gap(v.test1) <= 1e-9);
                CHECK(worst_gap(v.test2) <= 1e-9);
            }
        }
    }
}

TEST_CASE("sufficiency guard on sin(x1+x2+x3)") {
    const auto t = cli::resolve_target("nonsep3");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CHECK_FALSE(run(t, {0}, seed).separable);
        CHECK_FALSE(run(t, {0, 1}, seed).separable);
    }
}

TEST_CASE("verdict is symmetric in a subset and its complement") {
    for (const auto& name : cli::builtin_names()) {
        if (name == "eq2_grid") {
            continue;
        }
        const auto t = cli::resolve_target(name);
        const std::size_t n = t.dimension();
        for (std::uint64_t mask = 1; mask + 1 < (1ULL << n); ++mask) {
            std::vector<std::size_t> s;
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < n; ++i) {
                ((mask >> i) & 1U ? s : rest).push_back(i);
            }
            CAPTURE(name);
            CAPTURE(mask);
            CHECK(run(t, s, 3).separable == run(t, rest, 3).separable);
        }
    }
}

TEST_CASE("bict is deterministic and records its inputs") {
    const auto t = cli::resolve_target("eq2");
    const auto a = run(t, {1}, 42);
    const auto b = run(t, {1}, 42);
    REQUIRE(a.test1.pairs.size() == 3);
    CHECK(a.test1.anchors == b.test1.anchors);
    for (std::size_t k = 0; k < a.test1.pairs.size(); ++k) {
        CHECK(a.test1.pairs[k].pearson.r == b.test1.pairs[k].pearson.r);
    }
    CHECK(a.test1.varied == std::vector<std::size_t>{1});
    CHECK(a.test1.anchored == std::vector<std::size_t>{0, 2, 3, 4});
    CHECK(a.test2.varied == a.test1.anchored);
    CHECK(a.test1.samples == 50);
}

TEST_CASE("bict input and domain errors") {
    const auto t = cli::resolve_target("eq3");
    CHECK_THROWS_AS((void)run(t, {}, 1), InputError);
    CHECK_THROWS_AS((void)run(t, {0, 1, 2}, 1), InputError);
    CHECK_THROWS_AS((void)run(t, {5}, 1), InputError);

    // Undefined on half the box.
    const FunctionOracle half([](std::span<const double> x) { return x[0] < 0 ? std::nan("") : x[0] * x[1]; }, 2);
    const DomainBox box({{-1.0, 1.0}, {1.0, 2.0}});
    BictConfig cfg;
    const std::vector<std::size_t> s{0};
    CHECK_THROWS_AS((void)bict_subset(half, box, s, cfg), EvaluationDomainError);
}

TEST_CASE("flat slices end indeterminate") {
    // Depends on x1 only, so varying x2 always gives a flat vector.
    const FunctionOracle f([](std::span<const double> x) { return std::sin(x[0]); }, 2);
    const DomainBox box({{-1.0, 1.0}, {-1.0, 1.0}});
    BictConfig cfg;
    cfg.max_redraws = 3;
    const std::vector<std::size_t> s{1};
    const auto v = bict_subset(f, box, s, cfg);
    CHECK(v.indeterminate);
    CHECK_FALSE(v.separable);
    CHECK(v.redraws == 3);
}
