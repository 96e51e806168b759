// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sepsr/bict.hpp"
#include "sepsr/error.hpp"

namespace sepsr {

std::string_view name(CorrelationMethod m) noexcept {
    switch (m) {
    case CorrelationMethod::Pearson: return "pearson";
    case CorrelationMethod::Spearman: return "spearman";
    case CorrelationMethod::Kendall: return "kendall";
    }
    return "?";
}

std::optional<CorrelationMethod> parse_correlation_method(std::string_view s) noexcept {
    if (s == "pearson") {
        return CorrelationMethod::Pearson;
    }
    if (s == "spearman") {
        return CorrelationMethod::Spearman;
    }
    if (s == "kendall") {
        return CorrelationMethod::Kendall;
    }
    return std::nullopt;
}

namespace {

struct Moments {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
};

Moments moments(std::span<const double> xs, std::span<const double> ys) {
    const auto n = static_cast<double>(xs.size());
    Moments m;
    m.mean_x = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    m.mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - m.mean_x;
        const double dy = ys[i] - m.mean_y;
        m.sxx += dx * dx;
        m.syy += dy * dy;
        m.sxy += dx * dy;
    }
    return m;
}

double pearson_r(const Moments& m) {
    const double r = m.sxy / std::sqrt(m.sxx * m.syy);
    return std::clamp(r, -1.0, 1.0);
}

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            r[order[k]] = avg;
        }
        i = j + 1;
    }
    return r;
}

double kendall_tau_b(std::span<const double> xs, std::span<const double> ys) {
    double concordant = 0.0;
    double discordant = 0.0;
    double ties_x = 0.0;
    double ties_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            const double dx = xs[i] - xs[j];
            const double dy = ys[i] - ys[j];
            if (dx == 0.0 && dy == 0.0) {
                continue;
            }
            if (dx == 0.0) {
                ties_x += 1.0;
            } else if (dy == 0.0) {
                ties_y += 1.0;
            } else if ((dx > 0.0) == (dy > 0.0)) {
                concordant += 1.0;
            } else {
                discordant += 1.0;
            }
        }
    }
    const double denom = std::sqrt((concordant + discordant + ties_x) * (concordant + discordant + ties_y));
    return denom > 0.0 ? (concordant - discordant) / denom : 0.0;
}

} // namespace

CorrelationResult correlation(std::span<const double> xs, std::span<const double> ys, CorrelationMethod method,
                              double flat_tolerance) {
    if (xs.size() != ys.size()) {
        throw InputError("correlation needs vectors of equal length");
    }
    if (xs.size() < 3) {
        throw InputError("correlation needs at least 3 observations");
    }
    const Moments m = moments(xs, ys);
    const double denom = static_cast<double>(xs.size() - 1);
    if (std::sqrt(m.sxx / denom) < flat_tolerance || std::sqrt(m.syy / denom) < flat_tolerance) {
        throw IndeterminateError("correlation is undefined for a constant vector");
    }
    CorrelationResult res;
    res.method = method;
    res.n = xs.size();
    res.slope = m.sxy / m.sxx;
    res.intercept = m.mean_y - res.slope * m.mean_x;
    switch (method) {
    case CorrelationMethod::Pearson:
        res.r = pearson_r(m);
        break;
    case CorrelationMethod::Spearman: {
        const auto rx = ranks(xs);
        const auto ry = ranks(ys);
        res.r = pearson_r(moments(rx, ry));
        break;
    }
    case CorrelationMethod::Kendall:
        res.r = kendall_tau_b(xs, ys);
        break;
    }
    return res;
}

} // namespace sepsr
