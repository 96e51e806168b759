// SPDX-License-Identifier: Apache-2.0
#include "sepsr/dac.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>

#include "linalg.hpp"
#include "sepsr/error.hpp"
#include "sepsr/parallel.hpp"

namespace sepsr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::size_t> complement_of(const Block& block, std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::find(block.begin(), block.end(), i) == block.end()) {
            out.push_back(i);
        }
    }
    return out;
}

bool is_flat(std::span<const double> v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(v.size()));
    return !(sd > 1e-12 * std::max(1e-300, std::fabs(mean))) || sd < 1e-300;
}

std::vector<double> values_on(const Expression& e, const SampleSet& data) {
    std::vector<double> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = evaluate(e, data.point(i));
        out[i] = r.valid ? r.value : std::nan("");
    }
    return out;
}

} // namespace

std::uint64_t block_seed(std::uint64_t master, const Block& block) {
    return derive_seed(derive_seed(master, "block"), subset_key(block));
}

SampleSet make_slice(const Oracle& oracle, const DomainBox& box, const Block& block, std::span<const double> anchor,
                     double shift, const DacConfig& cfg, std::uint64_t seed, std::uint64_t& oracle_evaluations) {
    const std::size_t n = box.dimension();
    const auto complement = complement_of(block, n);
    if (anchor.size() != complement.size()) {
        throw InputError("anchor must give one value per complement variable");
    }
    const DomainBox sub = box.sub_box(block);
    SampleSet xs;
    if (cfg.slice_mode == SamplingMode::Grid) {
        std::vector<std::size_t> counts(block.size(), cfg.slice_grid_points);
        xs = grid_sample(sub, counts);
    } else {
        xs = lhs_sample(sub, cfg.slice_samples, derive_seed(seed, "slice"));
    }
    std::vector<double> batch(xs.size() * n);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto p = xs.point(i);
        for (std::size_t d = 0; d < block.size(); ++d) {
            batch[i * n + block[d]] = p[d];
        }
        for (std::size_t d = 0; d < complement.size(); ++d) {
            batch[i * n + complement[d]] = anchor[d];
        }
    }
    std::vector<double> values(xs.size());
    oracle.evaluate(batch, values);
    oracle_evaluations += xs.size();

    std::vector<double> points;
    std::vector<double> target;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::isfinite(values[i])) {
            const auto p = xs.point(i);
            points.insert(points.end(), p.begin(), p.end());
            target.push_back(values[i] - shift);
        }
    }
    if (target.size() < xs.size() * 4 / 5 || target.size() < 3) {
        throw EvaluationDomainError("oracle is undefined on too much of the slice for the block starting at x" +
                                    std::to_string(block.front() + 1));
    }
    return SampleSet(block.size(), std::move(points), std::move(target));
}

PmeConfig block_pme_config(const PmeConfig& pme, std::uint64_t seed) {
    PmeConfig out = pme;
    out.seed = derive_seed(seed, "pme");
    out.constants.seed = derive_seed(seed, "constants");
    return out;
}

SubFunctionFit fit_subfunction(const Oracle& oracle, const DomainBox& box, const Block& block,
                               std::vector<double> anchor, double shift, const PmeConfig& pme, const DacConfig& cfg) {
    const std::size_t n = box.dimension();
    validate(pme);
    if (block.empty() || block.size() > n || block.back() >= n) {
        throw InputError("block is not a subset of the variables");
    }
    SubFunctionFit fit;
    fit.block = block;
    fit.complement = complement_of(block, n);
    fit.shift = shift;
    fit.seed = block_seed(cfg.seed, block);
    if (anchor.size() != fit.complement.size()) {
        throw InputError("anchor must give one value per complement variable");
    }
    for (std::size_t k = 0; k < anchor.size(); ++k) {
        if (!box[fit.complement[k]].contains(anchor[k])) {
            throw InputError("anchor lies outside the domain box");
        }
    }
    const auto start = Clock::now();
    for (std::size_t attempt = 0;; ++attempt) {
        const SampleSet slice = make_slice(oracle, box, block, anchor, shift, cfg, fit.seed, fit.oracle_evaluations);
        if (!is_flat(slice.values())) {
            fit.anchor = anchor;
            const EvolveResult res = evolve(slice, block_pme_config(pme, fit.seed));
            fit.local = res.expression;
            fit.expression = remap_variables(res.expression, block);
            fit.genome = res.genome;
            fit.score = res.score;
            fit.metrics = res.metrics;
            fit.evaluations = res.evaluations;
            fit.generations = res.generations;
            fit.converged = res.converged;
            fit.seconds = seconds_since(start);
            return fit;
        }
        if (attempt >= cfg.max_anchor_retries || fit.complement.empty()) {
            throw DegenerateTargetError("slice for the block starting at x" + std::to_string(block.front() + 1) +
                                        " is flat at every anchor tried");
        }
        anchor = anchor_points(box, fit.complement, 2, derive_seed(fit.seed, 1000 + attempt)).front();
    }
}

RecoveredModel recover(std::vector<SubFunctionFit> fits, Combiner op, double offset, const SampleSet& data,
                       double threshold) {
    if (fits.empty()) {
        throw InputError("recovery needs at least one sub-function");
    }
    if (!data.has_values() || data.empty()) {
        throw InputError("recovery needs full data with values");
    }
    if (op != Combiner::Times && op != Combiner::PlusMinus) {
        throw InputError("recovery needs the times or plus_minus operator class");
    }
    RecoveredModel model;
    model.dimension = data.dimension();
    model.op = op;

    // Coefficients come from the rows where every sub-function is defined;
    // the model is still scored on all of them.
    std::vector<std::vector<double>> all;
    for (const auto& f : fits) {
        all.push_back(values_on(f.expression, data));
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (std::all_of(all.begin(), all.end(), [&](const auto& col) { return std::isfinite(col[i]); })) {
            rows.push_back(i);
        }
    }
    if (rows.size() < data.size()) {
        model.warnings.push_back("sub-functions are undefined at " + std::to_string(data.size() - rows.size()) +
                                 " of " + std::to_string(data.size()) + " data points");
    }
    const std::size_t n = rows.size();
    std::vector<std::vector<double>> g(all.size(), std::vector<double>(n));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < all.size(); ++k) {
            g[k][i] = all[k][rows[i]];
        }
        y[i] = data.values()[rows[i]];
    }

    if (n <= fits.size() + 1) {
        // Too few defined rows to estimate coefficients: keep the plain
        // combination, which scores as the worst fitness.
        Expression combined = fits.front().expression;
        for (std::size_t k = 1; k < fits.size(); ++k) {
            combined = op == Combiner::Times ? combined * fits[k].expression : combined + fits[k].expression;
        }
        if (op == Combiner::PlusMinus) {
            model.c0 = 0.0;
            model.coefficients.assign(fits.size(), 1.0);
        }
        model.expression = simplify(combined);
    } else if (op == Combiner::Times) {
        std::vector<double> p(n, 1.0);
        for (const auto& col : g) {
            for (std::size_t i = 0; i < n; ++i) {
                p[i] *= col[i];
            }
        }
        Expression product = fits.front().expression;
        for (std::size_t k = 1; k < fits.size(); ++k) {
            product = product * fits[k].expression;
        }
        if (offset == 0.0) {
            double pp = 0.0;
            double py = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                pp += p[i] * p[i];
                py += p[i] * y[i];
            }
            if (!(pp > 1e-300)) {
                throw RankDeficiencyError("product of sub-functions vanishes on the data", 0);
            }
            model.c0 = py / pp;
            model.expression = simplify(Expression::constant(model.c0) * product);
        } else {
            const auto ls = detail::solve_least_squares({std::vector<double>(n, 1.0), p}, y);
            if (ls.rank < 2) {
                throw RankDeficiencyError("product of sub-functions is constant on the data", 0);
            }
            model.intercept = ls.coefficients[0];
            model.c0 = ls.coefficients[1];
            model.expression = simplify(Expression::constant(model.intercept) +
                                        Expression::constant(model.c0) * product);
        }
    } else {
        std::vector<std::vector<double>> cols;
        cols.emplace_back(n, 1.0);
        for (std::size_t k = 0; k < g.size(); ++k) {
            cols.push_back(g[k]);
            if (detail::solve_least_squares(cols, y).rank < cols.size()) {
                throw RankDeficiencyError("sub-function values of block " + std::to_string(k + 1) + " are collinear with the other regressors", k);
            }
        }
        const auto ls = detail::solve_least_squares(cols, y);
        model.c0 = ls.coefficients[0];
        model.coefficients.assign(ls.coefficients.begin() + 1, ls.coefficients.end());
        Expression sum = Expression::constant(model.c0);
        for (std::size_t k = 0; k < fits.size(); ++k) {
            sum = sum + Expression::constant(model.coefficients[k]) * fits[k].expression;
        }
        model.expression = simplify(sum);
    }
    model.metrics = fitness(model.expression, data);
    model.converged = model.metrics.one_minus_r2 < threshold;
    for (const auto& f : fits) {
        model.model_evaluations += f.evaluations;
        model.oracle_evaluations += f.oracle_evaluations;
    }
    model.fits = std::move(fits);
    return model;
}

namespace {

SampleSet with_values(const Oracle& oracle, const SampleSet& data, std::uint64_t& evaluations) {
    if (data.has_values()) {
        return data;
    }
    auto values = oracle.evaluate_rows(data.points());
    evaluations += values.size();
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw EvaluationDomainError("oracle is undefined at a point of the full data set");
        }
    }
    return SampleSet(data.dimension(), data.points(), std::move(values));
}

} // namespace

RecoveredModel fit_direct(const SampleSet& data, const DacConfig& cfg) {
    const auto start = Clock::now();
    const std::uint64_t seed = derive_seed(cfg.seed, "direct");
    const PmeConfig pme = block_pme_config(cfg.pme, seed);
    const EvolveResult res = evolve(data, pme);

    RecoveredModel model;
    model.dimension = data.dimension();
    model.direct = true;
    model.expression = res.expression;
    model.metrics = res.metrics;
    model.converged = res.converged;
    model.model_evaluations = res.evaluations;
    model.budget = pme.budget;
    model.seed = cfg.seed;

    SubFunctionFit all;
    all.block.resize(data.dimension());
    std::iota(all.block.begin(), all.block.end(), std::size_t{0});
    all.local = res.expression;
    all.expression = res.expression;
    all.genome = res.genome;
    all.score = res.score;
    all.metrics = res.metrics;
    all.evaluations = res.evaluations;
    all.generations = res.generations;
    all.converged = res.converged;
    all.seed = seed;
    model.fits.push_back(std::move(all));

    model.timing.t2 = seconds_since(start);
    model.fits.front().seconds = model.timing.t2;
    model.timing.total = model.timing.t1 + model.timing.t2 + model.timing.t3;
    return model;
}

RecoveredModel dac_fit(const Oracle& oracle, const DomainBox& box, const SampleSet& data, const DacConfig& cfg) {
    if (oracle.dimension() != box.dimension() || data.dimension() != box.dimension()) {
        throw InputError("oracle, domain box and data must share one dimension");
    }
    if (!cfg.anchor.empty() && cfg.anchor.size() != box.dimension()) {
        throw InputError("anchor must have one coordinate per variable");
    }
    validate(cfg.pme);

    // t1: detection.
    auto start = Clock::now();
    PartitionConfig pcfg = cfg.partition;
    pcfg.bict.seed = derive_seed(cfg.seed, "bict");
    SeparabilityReport report = detect_partition(oracle, box, pcfg);
    const double t1 = seconds_since(start);

    std::uint64_t extra_oracle = report.oracle_evaluations;
    const SampleSet full = with_values(oracle, data, extra_oracle);

    if (report.blocks.size() < 2) {
        RecoveredModel model = fit_direct(full, cfg);
        if (report.indeterminate) {
            model.warnings.push_back("separability was indeterminate; fitted all variables together");
        }
        model.direct = false;
        model.separability = std::move(report);
        model.oracle_evaluations += extra_oracle;
        model.timing.t1 = t1;
        model.timing.total = model.timing.t1 + model.timing.t2 + model.timing.t3;
        return model;
    }

    // t2: one PME run per block on its slice.
    start = Clock::now();
    const std::vector<double> anchor_point = cfg.anchor.empty() ? box.center() : cfg.anchor;
    PmeConfig pme = cfg.pme;
    pme.budget = std::max<std::uint64_t>(cfg.pme.budget / report.blocks.size(), cfg.pme.mu);
    const double shift = report.op == Combiner::Times ? report.offset : 0.0;

    std::vector<SubFunctionFit> fits(report.blocks.size());
    std::vector<std::exception_ptr> errors(report.blocks.size());
    auto fit_block = [&](std::size_t k) {
        try {
            const Block& block = report.blocks[k];
            std::vector<double> anchor;
            for (std::size_t i : complement_of(block, box.dimension())) {
                anchor.push_back(anchor_point[i]);
            }
            fits[k] = fit_subfunction(oracle, box, block, std::move(anchor), shift, pme, cfg);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };
    const bool concurrent = cfg.parallel_blocks && oracle.thread_safe();
    parallel_for(report.blocks.size(), fit_block, concurrent ? 0 : 1);
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    const double t2 = seconds_since(start);

    // t3: recovery.
    start = Clock::now();
    RecoveredModel model = recover(std::move(fits), report.op, shift, full, cfg.pme.threshold);
    const double t3 = seconds_since(start);

    model.oracle_evaluations += extra_oracle;
    model.budget = cfg.pme.budget;
    model.seed = cfg.seed;
    model.warnings.insert(model.warnings.begin(), report.warnings.begin(), report.warnings.end());
    model.separability = std::move(report);
    model.timing = {t1, t2, t3, t1 + t2 + t3};
    return model;
}

} // namespace sepsr
