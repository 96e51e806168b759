// SPDX-License-Identifier: Apache-2.0
#include "sepsr/bict.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sepsr/error.hpp"
#include "sepsr/rng.hpp"

namespace sepsr {

std::string_view name(Combiner c) noexcept {
    switch (c) {
    case Combiner::None: return "none";
    case Combiner::Times: return "times";
    case Combiner::PlusMinus: return "plus_minus";
    case Combiner::Unknown: return "unknown";
    }
    return "?";
}

std::uint64_t subset_key(std::span<const std::size_t> subset) noexcept {
    std::uint64_t key = 0;
    for (auto i : subset) {
        key |= std::uint64_t{1} << (i % 64);
    }
    return key;
}

OperatorInference infer_operator(std::span<const CorrelationResult> fits, std::span<const double> scales,
                                 double epsilon_op) {
    OperatorInference out;
    if (fits.empty() || fits.size() != scales.size()) {
        return out;
    }
    std::size_t shifts = 0;
    for (std::size_t k = 0; k < fits.size(); ++k) {
        const bool unit_slope = std::fabs(fits[k].slope - 1.0) <= epsilon_op;
        const bool zero_intercept = std::fabs(fits[k].intercept) <= epsilon_op * scales[k];
        if (unit_slope && zero_intercept) {
            out.degenerate = true;
            return out;
        }
        if (unit_slope) {
            ++shifts;
        }
    }
    if (shifts == fits.size()) {
        out.op = Combiner::PlusMinus;
        return out;
    }
    if (shifts != 0) {
        return out; // some pairs shift, others scale: no common operator
    }
    // f_j = c + b (f_i - c)  =>  a = c (1 - b)
    std::vector<double> offsets(fits.size());
    double min_gap = 1.0;
    double scale = 1.0;
    for (std::size_t k = 0; k < fits.size(); ++k) {
        offsets[k] = fits[k].intercept / (1.0 - fits[k].slope);
        min_gap = std::min(min_gap, std::fabs(1.0 - fits[k].slope));
        scale = std::max(scale, scales[k]);
    }
    const double mean_offset = std::accumulate(offsets.begin(), offsets.end(), 0.0) / static_cast<double>(offsets.size());
    const double tol = epsilon_op * std::max(scale, std::fabs(mean_offset)) / min_gap;
    const bool all_zero = std::all_of(offsets.begin(), offsets.end(), [&](double c) { return std::fabs(c) <= tol; });
    if (all_zero) {
        out.op = Combiner::Times;
        return out;
    }
    const bool consistent =
        std::all_of(offsets.begin(), offsets.end(), [&](double c) { return std::fabs(c - mean_offset) <= tol; });
    if (consistent) {
        out.op = Combiner::Times;
        out.offset = mean_offset;
    }
    return out;
}

namespace {

enum class TestStatus { Ok, Flat };

struct TestRun {
    TestStatus status = TestStatus::Ok;
    SubsetTest test;
    std::vector<double> scales; // per pair, for operator inference
};

double sample_std(std::span<const double> v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

SampleSet varied_sample(const DomainBox& box, std::span<const std::size_t> varied, const BictConfig& cfg,
                        std::uint64_t seed) {
    const DomainBox sub = box.sub_box(varied);
    if (cfg.mode == SamplingMode::Grid) {
        std::vector<std::size_t> counts(varied.size(), cfg.grid_points);
        return grid_sample(sub, counts);
    }
    return lhs_sample(sub, cfg.samples, seed);
}

TestRun run_test(const Oracle& oracle, std::span<const std::size_t> varied, std::span<const std::size_t> anchored,
                 const SampleSet& xs, std::vector<std::vector<double>> anchors, const BictConfig& cfg) {
    const std::size_t n = oracle.dimension();
    const std::size_t rows = xs.size();
    const std::size_t k = anchors.size();

    std::vector<double> batch(k * rows * n);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t i = 0; i < rows; ++i) {
            double* row = batch.data() + (a * rows + i) * n;
            const auto p = xs.point(i);
            for (std::size_t d = 0; d < varied.size(); ++d) {
                row[varied[d]] = p[d];
            }
            for (std::size_t d = 0; d < anchored.size(); ++d) {
                row[anchored[d]] = anchors[a][d];
            }
        }
    }
    std::vector<double> values(k * rows);
    oracle.evaluate(batch, values);

    std::vector<std::size_t> keep;
    keep.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        bool ok = true;
        for (std::size_t a = 0; a < k && ok; ++a) {
            ok = std::isfinite(values[a * rows + i]);
        }
        if (ok) {
            keep.push_back(i);
        }
    }
    const double invalid_fraction = 1.0 - static_cast<double>(keep.size()) / static_cast<double>(rows);
    if (invalid_fraction > cfg.max_invalid_fraction) {
        throw EvaluationDomainError("oracle is undefined on " + std::to_string(rows - keep.size()) + " of " +
                                    std::to_string(rows) + " sample rows");
    }
    if (keep.size() < 3) {
        throw EvaluationDomainError("fewer than 3 valid rows in a correlation test");
    }

    TestRun run;
    run.test.varied.assign(varied.begin(), varied.end());
    run.test.anchored.assign(anchored.begin(), anchored.end());
    run.test.anchors = std::move(anchors);
    run.test.samples = keep.size();

    std::vector<std::vector<double>> f(k, std::vector<double>(keep.size()));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t i = 0; i < keep.size(); ++i) {
            f[a][i] = values[a * rows + keep[i]];
        }
        if (sample_std(f[a]) < cfg.flat_tolerance) {
            run.status = TestStatus::Flat;
            return run;
        }
    }

    run.test.passed = true;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            PairCorrelation pc;
            pc.reference = i;
            pc.other = j;
            pc.pearson = correlation(f[i], f[j], CorrelationMethod::Pearson, cfg.flat_tolerance);
            pc.primary = cfg.method == CorrelationMethod::Pearson
                             ? pc.pearson
                             : correlation(f[i], f[j], cfg.method, cfg.flat_tolerance);
            const double threshold = 1.0 - cfg.epsilon_r;
            pc.passed = std::fabs(pc.pearson.r) >= threshold && std::fabs(pc.primary.r) >= threshold;
            run.test.passed = run.test.passed && pc.passed;
            run.test.pairs.push_back(pc);
            const double mean = std::accumulate(f[i].begin(), f[i].end(), 0.0) / static_cast<double>(f[i].size());
            run.scales.push_back(std::max(std::fabs(mean), 1.0));
        }
    }
    return run;
}

} // namespace

SubsetVerdict bict_subset(const Oracle& oracle, const DomainBox& box, std::span<const std::size_t> subset,
                          const BictConfig& cfg) {
    const std::size_t n = box.dimension();
    if (oracle.dimension() != n) {
        throw InputError("oracle dimension does not match the domain box");
    }
    if (cfg.anchors < 2) {
        throw InputError("BiCT needs at least two anchors");
    }
    std::vector<std::size_t> s(subset.begin(), subset.end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (s.empty() || s.size() >= n || s.back() >= n) {
        throw InputError("BiCT subset must be a nonempty proper subset of the variables");
    }
    std::vector<std::size_t> complement;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::binary_search(s.begin(), s.end(), i)) {
            complement.push_back(i);
        }
    }

    SubsetVerdict verdict;
    verdict.subset = s;
    verdict.seed = derive_seed(cfg.seed, subset_key(s));

    // Test 1: subset varied, complement anchored. Degenerate anchors (where
    // the slice relation is both a pure shift and a pure scaling) are
    // redrawn like flat ones.
    const SampleSet xs1 = varied_sample(box, s, cfg, derive_seed(verdict.seed, 1));
    bool resolved = false;
    OperatorInference inference;
    for (std::size_t attempt = 0; attempt <= cfg.max_redraws; ++attempt) {
        auto anchors = anchor_points(box, complement, cfg.anchors, derive_seed(verdict.seed, 100 + attempt));
        TestRun run = run_test(oracle, s, complement, xs1, std::move(anchors), cfg);
        verdict.test1 = std::move(run.test);
        if (run.status == TestStatus::Flat) {
            verdict.redraws += attempt < cfg.max_redraws ? 1 : 0;
            continue;
        }
        if (verdict.test1.passed) {
            std::vector<CorrelationResult> fits;
            for (const auto& pc : verdict.test1.pairs) {
                fits.push_back(pc.pearson);
            }
            inference = infer_operator(fits, run.scales, cfg.epsilon_op);
            if (inference.degenerate) {
                verdict.redraws += attempt < cfg.max_redraws ? 1 : 0;
                continue;
            }
        }
        resolved = true;
        break;
    }
    if (!resolved) {
        // Flat or degenerate slices persisted: undecidable with these draws.
        verdict.indeterminate = true;
        verdict.separable = false;
        verdict.op = Combiner::Unknown;
        return verdict;
    }

    // Test 2: complement varied, subset anchored.
    const SampleSet xs2 = varied_sample(box, complement, cfg, derive_seed(verdict.seed, 2));
    bool resolved2 = false;
    for (std::size_t attempt = 0; attempt <= cfg.max_redraws; ++attempt) {
        auto anchors = anchor_points(box, s, cfg.anchors, derive_seed(verdict.seed, 200 + attempt));
        TestRun run = run_test(oracle, complement, s, xs2, std::move(anchors), cfg);
        verdict.test2 = std::move(run.test);
        if (run.status == TestStatus::Flat) {
            verdict.redraws += attempt < cfg.max_redraws ? 1 : 0;
            continue;
        }
        resolved2 = true;
        break;
    }
    if (!resolved2) {
        verdict.indeterminate = true;
        verdict.separable = false;
        verdict.op = Combiner::Unknown;
        return verdict;
    }

    verdict.separable = verdict.test1.passed && verdict.test2.passed;
    if (verdict.separable) {
        verdict.op = inference.op;
        verdict.offset = inference.offset;
    } else {
        verdict.op = Combiner::Unknown;
    }
    return verdict;
}

} // namespace sepsr
