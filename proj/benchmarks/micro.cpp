// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <cmath>

#include "sepsr/bict.hpp"
#include "sepsr/oracle.hpp"
#include "sepsr/pme.hpp"
#include "sepsr/program.hpp"

namespace {

using namespace sepsr;

SampleSet slice_data(std::size_t n) {
    SampleSet s = lhs_sample(DomainBox({{1.0, 10.0}}), n, 3);
    std::vector<double> v;
    for (std::size_t i = 0; i < s.size(); ++i) {
        v.push_back(std::sin(0.0174533 * s.point(i)[0]) * std::sqrt(std::cos(0.0174533 * s.point(i)[0])));
    }
    s.set_values(std::move(v));
    return s;
}

void BM_ProgramRun(benchmark::State& state) {
    Rng rng(1);
    const ParseMatrix g = ParseMatrix::random(2, 6, rng);
    const Program program(g);
    const SampleSet xs = lhs_sample(DomainBox({{0.5, 2.0}, {0.5, 2.0}}), static_cast<std::size_t>(state.range(0)), 2);
    const auto c0 = xs.column(0);
    const auto c1 = xs.column(1);
    std::vector<const double*> cols{c0.data(), c1.data()};
    std::vector<double> out(xs.size());
    ProgramWorkspace ws;
    const std::array<double, 2> params{0.7, -1.3};
    for (auto _ : state) {
        program.run(cols, xs.size(), params, ws, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ProgramRun)->Arg(100)->Arg(3000);

void BM_TreeEvaluate(benchmark::State& state) {
    const Expression e = parse_infix("2.274*sin(x1)*sqrt(cos(x1))/sqrt(x2)", 2);
    const std::vector<double> x{0.1, 5000.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(e, x).value);
    }
}
BENCHMARK(BM_TreeEvaluate);

void BM_ScoreGenome(benchmark::State& state) {
    const SampleSet data = slice_data(100);
    Rng rng(4);
    std::vector<ParseMatrix> genomes;
    for (int k = 0; k < 64; ++k) {
        genomes.push_back(ParseMatrix::random(1, 6, rng));
    }
    const PmeConfig cfg;
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(score_genome(genomes[k++ % genomes.size()], data, cfg).metrics.one_minus_r2);
    }
}
BENCHMARK(BM_ScoreGenome);

void BM_Pearson(benchmark::State& state) {
    Rng rng(5);
    std::vector<double> a(50);
    std::vector<double> b(50);
    for (std::size_t i = 0; i < 50; ++i) {
        a[i] = rng.uniform(-1, 1);
        b[i] = 3.0 * a[i] + rng.uniform(-0.1, 0.1);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(correlation(a, b).r);
    }
}
BENCHMARK(BM_Pearson);

void BM_BictSubset(benchmark::State& state) {
    const ExpressionOracle oracle(parse_infix("0.000183*x1^2*x1*sqrt(x2/x3)*(1-x4/x5)", 5), 5);
    const DomainBox box({{500.0, 1000.0}, {1e-4, 1e-3}, {0.01, 0.1}, {1e4, 5e4}, {1e5, 1e6}});
    const std::vector<std::size_t> subset{3, 4};
    BictConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bict_subset(oracle, box, subset, cfg).separable);
    }
}
BENCHMARK(BM_BictSubset);

void BM_LatinHypercube(benchmark::State& state) {
    const DomainBox box({{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}});
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(lhs_sample(box, 3000, ++seed).size());
    }
}
BENCHMARK(BM_LatinHypercube);

} // namespace

BENCHMARK_MAIN();
