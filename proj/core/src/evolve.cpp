// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "scoring.hpp"
#include "sepsr/error.hpp"
#include "sepsr/pme.hpp"
#include "sepsr/program.hpp"

namespace sepsr {

void validate(const PmeConfig& cfg) {
    if (cfg.height == 0 || cfg.mu == 0 || cfg.lambda == 0) {
        throw InputError("PME height, mu and lambda must be positive");
    }
    if (cfg.budget < cfg.mu) {
        throw InputError("evaluation budget (" + std::to_string(cfg.budget) + ") is smaller than mu (" +
                         std::to_string(cfg.mu) + ")");
    }
    if (!(cfg.threshold > 0.0)) {
        throw InputError("fitness threshold must be positive");
    }
    if (cfg.mutation_rate < 0.0 || cfg.mutation_rate > 1.0) {
        throw InputError("mutation rate must lie in [0, 1]");
    }
    if (!(cfg.constants.lo < cfg.constants.hi)) {
        throw InputError("constant search range is empty");
    }
}

GenomeScore score_genome(const ParseMatrix& genome, const SampleSet& data, const PmeConfig& cfg) {
    if (!data.has_values() || data.empty()) {
        throw InputError("scoring needs a sample set with target values");
    }
    if (genome.dimension() != data.dimension()) {
        throw InputError("genome dimension does not match the data");
    }
    const detail::ColumnData columns(data);
    const detail::Target target(data.values());
    if (target.sst < 1e-300) {
        throw DegenerateTargetError("target is constant (SST = 0); 1 - R^2 is undefined");
    }
    ProgramWorkspace ws;
    return detail::score_program(Program(genome), columns, target, cfg, cfg.budget, ws);
}

Expression realize(const ParseMatrix& genome, const GenomeScore& score) {
    Expression e = bind_parameters(decode(genome), score.constants);
    if (score.scale == 0.0) {
        return Expression::constant(score.offset);
    }
    if (score.scale != 1.0) {
        e = Expression::constant(score.scale) * e;
    }
    if (score.offset != 0.0) {
        e = Expression::constant(score.offset) + e;
    }
    return simplify(e);
}

namespace {

struct Individual {
    ParseMatrix genome;
    std::string key;
    GenomeScore score;
};

// A generation counts as progress when it beats the best of the current
// restart by at least this factor.
constexpr double kRestartProgress = 0.99;

double search_fitness(const Individual& ind) {
    const double v = ind.score.metrics.one_minus_r2;
    return std::isnan(v) ? kWorstFitness : v;
}

ParseMatrix mutate(const ParseMatrix& parent, double rate, Rng& rng) {
    std::vector<ParseMatrix::Row> rows(parent.rows().begin(), parent.rows().end());
    bool changed = false;
    for (auto& r : rows) {
        for (std::size_t j = 0; j < 4; ++j) {
            if (rng.bernoulli(rate)) {
                const auto [lo, hi] = ParseMatrix::column_domain(j, parent.dimension());
                const int v = static_cast<int>(rng.uniform_int(lo, hi));
                changed = changed || v != r[j];
                r[j] = v;
            }
        }
    }
    if (!changed) {
        // Force one effective change so every offspring differs from its parent.
        const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(rows.size()) - 1));
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, 3));
        const auto [lo, hi] = ParseMatrix::column_domain(j, parent.dimension());
        int v = static_cast<int>(rng.uniform_int(lo, hi - 1));
        if (v >= rows[i][j]) {
            ++v;
        }
        rows[i][j] = v;
    }
    return ParseMatrix(parent.dimension(), std::move(rows));
}

} // namespace

EvolveResult evolve(const SampleSet& data, const PmeConfig& cfg) {
    validate(cfg);
    if (!data.has_values() || data.empty()) {
        throw InputError("evolve needs a sample set with target values");
    }
    const detail::ColumnData columns(data);
    const detail::Target target(data.values());

    EvolveResult result;
    if (target.sst < 1e-300) {
        // Constant target: the mean is exact.
        result.expression = Expression::constant(target.mean);
        result.metrics.one_minus_r2 = 0.0;
        result.metrics.sse = 0.0;
        result.metrics.sst = 0.0;
        result.score.offset = target.mean;
        result.score.scale = 0.0;
        result.converged = true;
        result.genome = ParseMatrix(data.dimension(), std::vector<ParseMatrix::Row>(
                                                          cfg.height, ParseMatrix::Row{0, 0, 0, -1}));
        result.best_history.push_back(0.0);
        return result;
    }

    const double rate = cfg.mutation_rate > 0.0 ? cfg.mutation_rate : 2.0 / (4.0 * static_cast<double>(cfg.height));
    Rng rng(derive_seed(cfg.seed, "pme"));
    ProgramWorkspace ws;
    std::unordered_map<std::string, GenomeScore> cache;
    std::uint64_t evaluations = 0;

    auto score = [&](ParseMatrix genome) -> Individual {
        const Program program(genome);
        Individual ind{std::move(genome), program.key(), {}};
        if (auto it = cache.find(ind.key); it != cache.end()) {
            ind.score = it->second;
            return ind;
        }
        ind.score = detail::score_program(program, columns, target, cfg, cfg.budget - evaluations, ws);
        evaluations += ind.score.metrics.evaluations;
        cache.emplace(ind.key, ind.score);
        return ind;
    };
    auto by_fitness = [](const Individual& a, const Individual& b) { return search_fitness(a) < search_fitness(b); };

    std::vector<Individual> population;
    population.reserve(cfg.mu);
    while (population.size() < cfg.mu && evaluations < cfg.budget) {
        population.push_back(score(ParseMatrix::random(data.dimension(), cfg.height, rng)));
    }
    std::stable_sort(population.begin(), population.end(), by_fitness);
    result.best_history.push_back(search_fitness(population.front()));

    // Best individual ever seen; restarts may discard it from the population.
    Individual elite = population.front();
    std::size_t stalled = 0;
    std::size_t since_improvement = 0;
    double run_best = search_fitness(population.front());
    while (search_fitness(elite) > cfg.threshold && evaluations < cfg.budget &&
           stalled < cfg.max_stalled_generations) {
        const std::uint64_t before = evaluations;
        std::vector<Individual> merged;
        merged.reserve(cfg.lambda + population.size());
        for (std::size_t k = 0; k < cfg.lambda && evaluations < cfg.budget; ++k) {
            const auto p = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(population.size()) - 1));
            merged.push_back(score(mutate(population[p].genome, rate, rng)));
            if (search_fitness(merged.back()) <= cfg.threshold) {
                break;
            }
        }
        // Offspring precede parents so equally fit newcomers win ties.
        for (auto& ind : population) {
            merged.push_back(std::move(ind));
        }
        std::stable_sort(merged.begin(), merged.end(), by_fitness);
        population.clear();
        std::unordered_set<std::string> seen;
        std::vector<Individual> duplicates;
        for (auto& ind : merged) {
            if (population.size() >= cfg.mu) {
                break;
            }
            if (seen.insert(ind.key).second) {
                population.push_back(std::move(ind));
            } else if (duplicates.size() < cfg.mu) {
                duplicates.push_back(std::move(ind));
            }
        }
        for (auto& ind : duplicates) {
            if (population.size() >= cfg.mu) {
                break;
            }
            population.push_back(std::move(ind));
        }
        if (search_fitness(population.front()) < search_fitness(elite)) {
            elite = population.front();
        }
        ++result.generations;
        result.best_history.push_back(search_fitness(elite));
        stalled = evaluations == before ? stalled + 1 : 0;

        // Restart from scratch once the population stops making real progress.
        const double current = search_fitness(population.front());
        if (current < kRestartProgress * run_best) {
            run_best = current;
            since_improvement = 0;
        } else if (cfg.restart_generations > 0 && ++since_improvement >= cfg.restart_generations &&
                   search_fitness(elite) > cfg.threshold) {
            population.clear();
            while (population.size() < cfg.mu && evaluations < cfg.budget) {
                population.push_back(score(ParseMatrix::random(data.dimension(), cfg.height, rng)));
            }
            std::stable_sort(population.begin(), population.end(), by_fitness);
            if (search_fitness(population.front()) < search_fitness(elite)) {
                elite = population.front();
            }
            run_best = search_fitness(population.front());
            since_improvement = 0;
            ++result.restarts;
        }
    }

    const Individual& best = elite;
    result.genome = best.genome;
    result.score = best.score;
    result.evaluations = evaluations;
    result.expression = realize(best.genome, best.score);
    result.metrics = fitness(result.expression, data);
    result.metrics.evaluations = evaluations;
    result.converged = search_fitness(best) <= cfg.threshold;
    return result;
}

} // namespace sepsr
