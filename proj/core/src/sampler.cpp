// SPDX-License-Identifier: Apache-2.0
#include "sepsr/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sepsr/error.hpp"
#include "sepsr/expr.hpp"
#include "sepsr/rng.hpp"

namespace sepsr {

DomainBox::DomainBox(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
    if (intervals_.empty()) {
        throw InputError("domain box needs at least one dimension");
    }
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const auto& iv = intervals_[i];
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi)) {
            throw InputError("interval " + std::to_string(i + 1) + " must satisfy a < b with finite bounds");
        }
    }
}

bool DomainBox::contains(std::span<const double> point) const noexcept {
    if (point.size() != intervals_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < point.size(); ++i) {
        if (!intervals_[i].contains(point[i])) {
            return false;
        }
    }
    return true;
}

std::vector<double> DomainBox::center() const {
    std::vector<double> c(intervals_.size());
    std::transform(intervals_.begin(), intervals_.end(), c.begin(), [](const Interval& iv) { return iv.mid(); });
    return c;
}

DomainBox DomainBox::sub_box(std::span<const std::size_t> dims) const {
    std::vector<Interval> ivs;
    ivs.reserve(dims.size());
    for (auto d : dims) {
        ivs.push_back(intervals_.at(d));
    }
    return DomainBox(std::move(ivs));
}

SampleSet::SampleSet(std::size_t dimension, std::vector<double> points)
    : dimension_(dimension), points_(std::move(points)) {
    if (dimension_ == 0 || points_.size() % dimension_ != 0) {
        throw InputError("point buffer is not a whole number of rows");
    }
}

SampleSet::SampleSet(std::size_t dimension, std::vector<double> points, std::vector<double> values)
    : SampleSet(dimension, std::move(points)) {
    set_values(std::move(values));
}

std::vector<double> SampleSet::column(std::size_t j) const {
    if (j >= dimension_) {
        throw InputError("column index out of range");
    }
    std::vector<double> col(size());
    for (std::size_t i = 0; i < col.size(); ++i) {
        col[i] = points_[i * dimension_ + j];
    }
    return col;
}

void SampleSet::set_values(std::vector<double> values) {
    if (!values.empty() && values.size() != size()) {
        throw InputError("value count " + std::to_string(values.size()) + " does not match " +
                         std::to_string(size()) + " points");
    }
    values_ = std::move(values);
}

SampleSet grid_sample(const DomainBox& box, std::span<const std::size_t> counts, std::size_t cap) {
    const std::size_t n = box.dimension();
    if (counts.size() != n) {
        throw InputError("grid needs one count per dimension");
    }
    std::size_t total = 1;
    for (auto c : counts) {
        if (c == 0) {
            throw InputError("grid counts must be at least 1");
        }
        if (total > cap / c) {
            throw InputError("grid size exceeds the cap of " + std::to_string(cap) + " points");
        }
        total *= c;
    }
    std::vector<std::vector<double>> axes(n);
    for (std::size_t d = 0; d < n; ++d) {
        const auto& iv = box[d];
        if (counts[d] == 1) {
            axes[d] = {iv.mid()};
            continue;
        }
        axes[d].resize(counts[d]);
        const double step = iv.width() / static_cast<double>(counts[d] - 1);
        for (std::size_t k = 0; k < counts[d]; ++k) {
            axes[d][k] = iv.lo + step * static_cast<double>(k);
        }
        axes[d].back() = iv.hi;
    }
    std::vector<double> points(total * n);
    std::vector<std::size_t> idx(n, 0);
    for (std::size_t row = 0; row < total; ++row) {
        for (std::size_t d = 0; d < n; ++d) {
            points[row * n + d] = axes[d][idx[d]];
        }
        for (std::size_t d = n; d-- > 0;) {
            if (++idx[d] < counts[d]) {
                break;
            }
            idx[d] = 0;
        }
    }
    return SampleSet(n, std::move(points));
}

SampleSet lhs_sample(const DomainBox& box, std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw InputError("LHS needs at least one point");
    }
    const std::size_t dim = box.dimension();
    Rng rng(seed);
    std::vector<double> points(n * dim);
    std::vector<std::size_t> strata(n);
    for (std::size_t d = 0; d < dim; ++d) {
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(strata));
        const auto& iv = box[d];
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (static_cast<double>(strata[i]) + rng.uniform01()) / static_cast<double>(n);
            points[i * dim + d] = std::clamp(iv.lo + u * iv.width(), iv.lo, iv.hi);
        }
    }
    return SampleSet(dim, std::move(points));
}

std::vector<std::vector<double>> anchor_points(const DomainBox& box, std::span<const std::size_t> dims,
                                               std::size_t k, std::uint64_t seed) {
    if (k < 2) {
        throw InputError("at least two anchor points are required");
    }
    if (dims.empty()) {
        throw InputError("anchor points need at least one dimension");
    }
    const SampleSet s = lhs_sample(box.sub_box(dims), k, seed);
    std::vector<std::vector<double>> anchors;
    anchors.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto p = s.point(i);
        anchors.emplace_back(p.begin(), p.end());
    }
    return anchors;
}

void write_csv(std::ostream& out, const SampleSet& samples) {
    const std::size_t n = samples.dimension();
    for (std::size_t j = 0; j < n; ++j) {
        out << (j == 0 ? "" : ",") << 'x' << (j + 1);
    }
    if (samples.has_values()) {
        out << ",f";
    }
    out << '\n';
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto p = samples.point(i);
        for (std::size_t j = 0; j < n; ++j) {
            out << (j == 0 ? "" : ",") << format_double(p[j]);
        }
        if (samples.has_values()) {
            out << ',' << format_double(samples.values()[i]);
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    return fields;
}

} // namespace

SampleSet read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw InputError("CSV input is empty");
    }
    const auto header = split_fields(line);
    std::size_t dim = 0;
    bool has_f = false;
    for (std::size_t j = 0; j < header.size(); ++j) {
        const auto& h = header[j];
        if (h == "f" && j + 1 == header.size()) {
            has_f = true;
        } else if (h == "x" + std::to_string(j + 1)) {
            ++dim;
        } else {
            throw InputError("CSV header field " + std::to_string(j + 1) + " must be x" + std::to_string(j + 1) +
                             " or a trailing f, got '" + h + "'");
        }
    }
    if (dim == 0) {
        throw InputError("CSV header declares no variables");
    }
    std::vector<double> points;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw InputError("CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(header.size()));
        }
        for (std::size_t j = 0; j < fields.size(); ++j) {
            double v = 0.0;
            const auto& f = fields[j];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                throw InputError("CSV line " + std::to_string(line_no) + ": '" + f + "' is not a number");
            }
            (j < dim ? points : values).push_back(v);
        }
    }
    SampleSet s(dim, std::move(points));
    if (has_f) {
        s.set_values(std::move(values));
    }
    return s;
}

} // namespace sepsr
