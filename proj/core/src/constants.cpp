// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "linalg.hpp"
#include "sepsr/error.hpp"
#include "sepsr/nelder_mead.hpp"
#include "sepsr/pme.hpp"
#include "sepsr/program.hpp"
#include "scoring.hpp"

namespace sepsr {

namespace detail {

LeastSquares solve_least_squares(const std::vector<std::vector<double>>& columns, std::span<const double> target) {
    const auto rows = static_cast<Eigen::Index>(target.size());
    const auto cols = static_cast<Eigen::Index>(columns.size());
    Eigen::MatrixXd a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        const auto& c = columns[static_cast<std::size_t>(j)];
        if (static_cast<Eigen::Index>(c.size()) != rows) {
            throw InputError("least-squares column length mismatch");
        }
        for (Eigen::Index i = 0; i < rows; ++i) {
            a(i, j) = c[static_cast<std::size_t>(i)];
        }
    }
    const Eigen::Map<const Eigen::VectorXd> b(target.data(), rows);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-12);
    const Eigen::VectorXd x = qr.solve(b);
    LeastSquares out;
    out.coefficients.assign(x.data(), x.data() + x.size());
    out.rank = static_cast<std::size_t>(qr.rank());
    return out;
}

ColumnData::ColumnData(const SampleSet& data) : n(data.size()) {
    columns.reserve(data.dimension());
    for (std::size_t j = 0; j < data.dimension(); ++j) {
        columns.push_back(data.column(j));
    }
    for (const auto& c : columns) {
        pointers.push_back(c.data());
    }
}

Target::Target(std::span<const double> v) : values(v.begin(), v.end()) {
    if (!values.empty() && std::all_of(values.begin(), values.end(), [&](double t) { return t == values[0]; })) {
        mean = values[0];
        return;
    }
    mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    for (double t : values) {
        sst += (t - mean) * (t - mean);
    }
}

double residual_sse(std::span<const double> y, const Target& t, bool scaling, double& offset, double& scale) {
    const std::size_t n = y.size();
    for (double v : y) {
        if (!std::isfinite(v)) {
            offset = 0.0;
            scale = 1.0;
            return kWorstFitness;
        }
    }
    if (!scaling) {
        offset = 0.0;
        scale = 1.0;
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = t.values[i] - y[i];
            sse += r * r;
        }
        return sse;
    }
    const double ymean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double syy = 0.0;
    double sty = 0.0;
    double ymax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dy = y[i] - ymean;
        syy += dy * dy;
        sty += dy * (t.values[i] - t.mean);
        ymax = std::max(ymax, std::fabs(y[i]));
    }
    // A constant output can only predict the mean.
    if (!(syy > 1e-26 * ymax * ymax * static_cast<double>(n)) || !std::isfinite(syy)) {
        offset = t.mean;
        scale = 0.0;
        return t.sst;
    }
    scale = sty / syy;
    offset = t.mean - scale * ymean;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = t.values[i] - (offset + scale * y[i]);
        sse += r * r;
    }
    return std::isfinite(sse) ? sse : kWorstFitness;
}

// Restarts a small simplex around `best` with shrinking steps until the
// allowance is spent or a round brings no improvement.
template <class Objective>
void polish(std::array<double, 2>& best, double& best_sse, const std::vector<std::size_t>& slots,
            std::size_t allowance, std::uint64_t max_evaluations, std::uint64_t& evals, Objective&& objective) {
    const std::uint64_t stop = std::min<std::uint64_t>(max_evaluations, evals + allowance);
    double relative_step = 1e-2;
    while (evals + slots.size() + 2 < stop && relative_step > 1e-12) {
        std::vector<double> start;
        double scale = 0.0;
        for (auto s : slots) {
            start.push_back(best[s]);
            scale = std::max(scale, std::fabs(best[s]));
        }
        NelderMeadOptions opt;
        opt.max_evaluations = static_cast<std::size_t>(stop - evals);
        opt.initial_step = relative_step * std::max(scale, 1e-3);
        const auto res = nelder_mead(
            [&](std::span<const double> x) {
                std::array<double, 2> p{0.0, 0.0};
                for (std::size_t k = 0; k < slots.size(); ++k) {
                    p[slots[k]] = x[k];
                }
                return objective(p);
            },
            start, opt);
        if (!(res.value < best_sse)) {
            relative_step *= 1e-3;
            continue;
        }
        const bool big_gain = res.value < 0.5 * best_sse;
        best_sse = res.value;
        for (std::size_t k = 0; k < slots.size(); ++k) {
            best[slots[k]] = res.x[k];
        }
        if (!big_gain) {
            relative_step *= 1e-2;
        }
    }
}

GenomeScore score_program(const Program& program, const ColumnData& data, const Target& target,
                          const PmeConfig& cfg, std::uint64_t max_evaluations, ProgramWorkspace& ws) {
    GenomeScore score;
    score.metrics.sst = target.sst;
    std::vector<double> y(data.n);
    std::uint64_t evals = 0;

    auto finish = [&](double sse, std::array<double, 2> constants, double offset, double scale) {
        score.metrics.sse = sse;
        score.metrics.one_minus_r2 = std::isfinite(sse) ? sse / target.sst : kWorstFitness;
        score.metrics.evaluations = evals;
        score.constants = constants;
        score.offset = offset;
        score.scale = scale;
        return score;
    };
    auto run = [&](std::array<double, 2> p, std::vector<double>& out) {
        ++evals;
        program.run(data.pointers, data.n, p, ws, out);
    };
    auto sse_at = [&](std::array<double, 2> p, double& offset, double& scale) {
        run(p, y);
        return residual_sse(y, target, cfg.linear_scaling, offset, scale);
    };

    double offset = 0.0;
    double scale = 1.0;
    if (cfg.linear_scaling && !program.uses_variables()) {
        // Best scaled fit of a constant is the target mean whatever the constants.
        ++evals;
        return finish(target.sst, {0.0, 0.0}, target.mean, 0.0);
    }
    if (program.parameter_use() == ParameterUse::None) {
        const double sse = sse_at({0.0, 0.0}, offset, scale);
        return finish(sse, {0.0, 0.0}, offset, scale);
    }

    std::vector<std::size_t> slots;
    for (std::size_t s = 0; s < 2; ++s) {
        if (program.uses_parameter(s)) {
            slots.push_back(s);
        }
    }

    if (program.parameter_use() == ParameterUse::Affine && max_evaluations >= slots.size() + 2) {
        // g(x; p) = c(x) + sum_k p_k u_k(x): one linear solve.
        std::vector<double> c(data.n);
        run({0.0, 0.0}, c);
        const bool finite = std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); });
        if (finite) {
            std::vector<std::vector<double>> basis;
            for (auto s : slots) {
                std::array<double, 2> p{0.0, 0.0};
                p[s] = 1.0;
                std::vector<double> u(data.n);
                run(p, u);
                for (std::size_t i = 0; i < data.n; ++i) {
                    u[i] -= c[i];
                }
                basis.push_back(std::move(u));
            }
            std::array<double, 2> constants{0.0, 0.0};
            bool solved = false;
            if (!cfg.linear_scaling) {
                std::vector<double> rhs(data.n);
                for (std::size_t i = 0; i < data.n; ++i) {
                    rhs[i] = target.values[i] - c[i];
                }
                const auto ls = solve_least_squares(basis, rhs);
                for (std::size_t k = 0; k < slots.size(); ++k) {
                    constants[slots[k]] = ls.coefficients[k];
                }
                solved = true;
            } else {
                const double cmin = *std::min_element(c.begin(), c.end());
                const double cmax = *std::max_element(c.begin(), c.end());
                std::vector<std::vector<double>> cols;
                cols.emplace_back(data.n, 1.0);
                const bool c_varies = cmax - cmin > 1e-13 * std::max(std::fabs(cmax), std::fabs(cmin));
                if (c_varies) {
                    cols.push_back(c);
                }
                for (auto& u : basis) {
                    cols.push_back(u);
                }
                const auto ls = solve_least_squares(cols, target.values);
                if (ls.rank == cols.size()) {
                    const double b = c_varies ? ls.coefficients[1] : 1.0;
                    const std::size_t first = c_varies ? 2 : 1;
                    if (std::fabs(b) > 1e-300) {
                        for (std::size_t k = 0; k < slots.size(); ++k) {
                            constants[slots[k]] = ls.coefficients[first + k] / b;
                        }
                        solved = std::all_of(constants.begin(), constants.end(), [](double v) { return std::isfinite(v); });
                    }
                }
            }
            if (solved) {
                const double sse = sse_at(constants, offset, scale);
                return finish(sse, constants, offset, scale);
            }
        }
    }

    // Nonlinear in the constants: seeded Nelder-Mead restarts.
    double best_sse = kWorstFitness;
    std::array<double, 2> best{0.0, 0.0};
    std::uint64_t key_hash = 0xcbf29ce484222325ULL;
    for (char ch : program.key()) {
        key_hash = (key_hash ^ static_cast<unsigned char>(ch)) * 0x100000001b3ULL;
    }
    Rng rng(derive_seed(cfg.constants.seed, key_hash));
    auto objective = [&](std::span<const double> x) {
        std::array<double, 2> p{0.0, 0.0};
        for (std::size_t k = 0; k < slots.size(); ++k) {
            p[slots[k]] = x[k];
        }
        double o = 0.0;
        double s = 1.0;
        return sse_at(p, o, s);
    };
    std::vector<std::vector<double>> starts(cfg.constants.restarts, std::vector<double>(slots.size()));
    for (auto& start : starts) {
        for (auto& v : start) {
            v = rng.uniform(cfg.constants.lo, cfg.constants.hi);
        }
    }
    const std::size_t refine = cfg.constants.refine_starts;
    if (refine > 0 && refine < starts.size()) {
        // Screen every start with one run and refine only the most promising.
        std::vector<std::pair<double, std::size_t>> ranked;
        for (std::size_t r = 0; r < starts.size() && evals < max_evaluations; ++r) {
            ranked.emplace_back(objective(starts[r]), r);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::vector<double>> kept;
        for (std::size_t r = 0; r < std::min(refine, ranked.size()); ++r) {
            kept.push_back(starts[ranked[r].second]);
        }
        starts = std::move(kept);
    }
    for (const auto& start : starts) {
        if (evals >= max_evaluations) {
            break;
        }
        NelderMeadOptions opt;
        opt.max_evaluations = static_cast<std::size_t>(
            std::min<std::uint64_t>(cfg.constants.evaluations_per_restart, max_evaluations - evals));
        opt.initial_step = 0.1 * (cfg.constants.hi - cfg.constants.lo);
        const auto res = nelder_mead(objective, start, opt);
        if (res.value < best_sse) {
            best_sse = res.value;
            best = {0.0, 0.0};
            for (std::size_t k = 0; k < slots.size(); ++k) {
                best[slots[k]] = res.x[k];
            }
        }
    }
    if (!std::isfinite(best_sse)) {
        return finish(kWorstFitness, best, 0.0, 1.0);
    }
    if (best_sse < cfg.constants.polish_below * target.sst) {
        polish(best, best_sse, slots, cfg.constants.polish_evaluations, max_evaluations, evals, [&](std::array<double, 2> p) {
            double o = 0.0;
            double s = 1.0;
            return sse_at(p, o, s);
        });
    }
    // Re-derive the scaling of the chosen constants; not counted as a search step.
    program.run(data.pointers, data.n, best, ws, y);
    const double sse = residual_sse(y, target, cfg.linear_scaling, offset, scale);
    return finish(sse, best, offset, scale);
}

} // namespace detail

FitnessMetrics fitness(const Expression& model, const SampleSet& data) {
    if (!data.has_values() || data.empty()) {
        throw InputError("fitness needs a sample set with target values");
    }
    const detail::Target target(data.values());
    if (target.sst < 1e-300) {
        throw DegenerateTargetError("target is constant (SST = 0); 1 - R^2 is undefined");
    }
    FitnessMetrics m;
    m.sst = target.sst;
    m.evaluations = 1;
    double sse = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = evaluate(model, data.point(i));
        if (!r.valid || !std::isfinite(r.value)) {
            return m;
        }
        const double e = target.values[i] - r.value;
        sse += e * e;
    }
    if (!std::isfinite(sse)) {
        return m;
    }
    m.sse = sse;
    m.one_minus_r2 = sse / target.sst;
    return m;
}

namespace {

ParameterUse expression_use(const Expression& e) {
    using enum ParameterUse;
    const auto& d = e.node().data;
    if (std::holds_alternative<ParameterNode>(d)) {
        return Affine;
    }
    if (const auto* u = std::get_if<UnaryNode>(&d)) {
        return expression_use(u->child) == None ? None : Nonlinear;
    }
    if (const auto* b = std::get_if<BinaryNode>(&d)) {
        const ParameterUse l = expression_use(b->lhs);
        const ParameterUse r = expression_use(b->rhs);
        switch (b->op) {
        case BinaryOp::Plus:
        case BinaryOp::Minus: return std::max(l, r);
        case BinaryOp::Times: return l == None ? r : (r == None ? l : Nonlinear);
        case BinaryOp::Divide: return r == None ? l : Nonlinear;
        }
    }
    return None;
}

void used_slots(const Expression& e, std::array<bool, 2>& used) {
    const auto& d = e.node().data;
    if (const auto* p = std::get_if<ParameterNode>(&d)) {
        if (p->slot < 2) {
            used[p->slot] = true;
        }
    } else if (const auto* u = std::get_if<UnaryNode>(&d)) {
        used_slots(u->child, used);
    } else if (const auto* b = std::get_if<BinaryNode>(&d)) {
        used_slots(b->lhs, used);
        used_slots(b->rhs, used);
    }
}

double expression_sse(const Expression& e, const SampleSet& data, std::span<const double> params) {
    double sse = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = evaluate(e, data.point(i), params);
        if (!r.valid || !std::isfinite(r.value)) {
            return kWorstFitness;
        }
        const double d = data.values()[i] - r.value;
        sse += d * d;
    }
    return std::isfinite(sse) ? sse : kWorstFitness;
}

} // namespace

ConstantFit optimize_constants(const Expression& model, const SampleSet& data, const ConstantOptions& options) {
    if (!data.has_values() || data.empty()) {
        throw InputError("constant optimisation needs target values");
    }
    if (model.parameter_count() > 2) {
        throw InputError("at most two constant slots (p1, p2) are supported");
    }
    std::array<bool, 2> used{false, false};
    used_slots(model, used);
    std::vector<std::size_t> slots;
    for (std::size_t s = 0; s < 2; ++s) {
        if (used[s]) {
            slots.push_back(s);
        }
    }
    ConstantFit fit;
    std::uint64_t evals = 0;
    auto metrics_for = [&](std::array<double, 2> values) {
        fit.values = values;
        fit.metrics = fitness(bind_parameters(model, values), data);
        fit.metrics.evaluations = evals + 1;
        return fit;
    };
    if (slots.empty()) {
        return metrics_for({0.0, 0.0});
    }

    const std::size_t n = data.size();
    if (expression_use(model) == ParameterUse::Affine) {
        std::vector<double> c(n);
        std::vector<std::vector<double>> basis(slots.size(), std::vector<double>(n));
        bool finite = true;
        for (std::size_t i = 0; i < n && finite; ++i) {
            const std::array<double, 2> zero{0.0, 0.0};
            const auto r0 = evaluate(model, data.point(i), zero);
            finite = r0.valid && std::isfinite(r0.value);
            c[i] = r0.value;
            for (std::size_t k = 0; k < slots.size() && finite; ++k) {
                std::array<double, 2> p{0.0, 0.0};
                p[slots[k]] = 1.0;
                const auto r = evaluate(model, data.point(i), p);
                finite = r.valid && std::isfinite(r.value);
                basis[k][i] = r.value - r0.value;
            }
        }
        evals += 1 + slots.size();
        if (finite) {
            std::vector<double> rhs(n);
            for (std::size_t i = 0; i < n; ++i) {
                rhs[i] = data.values()[i] - c[i];
            }
            const auto ls = detail::solve_least_squares(basis, rhs);
            std::array<double, 2> values{0.0, 0.0};
            for (std::size_t k = 0; k < slots.size(); ++k) {
                values[slots[k]] = ls.coefficients[k];
            }
            return metrics_for(values);
        }
    }

    Rng rng(options.seed);
    double best_sse = kWorstFitness;
    std::array<double, 2> best{0.0, 0.0};
    for (std::size_t r = 0; r < options.restarts; ++r) {
        std::vector<double> start(slots.size());
        for (auto& v : start) {
            v = rng.uniform(options.lo, options.hi);
        }
        NelderMeadOptions opt;
        opt.max_evaluations = options.evaluations_per_restart;
        opt.initial_step = 0.1 * (options.hi - options.lo);
        const auto res = nelder_mead(
            [&](std::span<const double> x) {
                std::array<double, 2> p{0.0, 0.0};
                for (std::size_t k = 0; k < slots.size(); ++k) {
                    p[slots[k]] = x[k];
                }
                return expression_sse(model, data, p);
            },
            start, opt);
        evals += res.evaluations;
        if (res.value < best_sse) {
            best_sse = res.value;
            best = {0.0, 0.0};
            for (std::size_t k = 0; k < slots.size(); ++k) {
                best[slots[k]] = res.x[k];
            }
        }
    }
    if (!std::isfinite(best_sse)) {
        fit.values = best;
        fit.metrics.sst = detail::Target(data.values()).sst;
        fit.metrics.evaluations = evals;
        return fit;
    }
    return metrics_for(best);
}

} // namespace sepsr
