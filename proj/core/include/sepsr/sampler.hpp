// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sepsr {

struct Interval {
    double lo;
    double hi;

    [[nodiscard]] double width() const noexcept { return hi - lo; }
    [[nodiscard]] double mid() const noexcept { return 0.5 * (lo + hi); }
    [[nodiscard]] bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

// Axis-aligned box [a1,b1] x ... x [an,bn] with a_i < b_i.
class DomainBox {
public:
    DomainBox() = default;
    // Throws InputError on an empty box, a non-finite bound or a_i >= b_i.
    explicit DomainBox(std::vector<Interval> intervals);

    [[nodiscard]] std::size_t dimension() const noexcept { return intervals_.size(); }
    [[nodiscard]] const Interval& operator[](std::size_t i) const { return intervals_.at(i); }
    [[nodiscard]] std::span<const Interval> intervals() const noexcept { return intervals_; }
    [[nodiscard]] bool contains(std::span<const double> point) const noexcept;
    [[nodiscard]] std::vector<double> center() const;
    // Box over the listed dimensions, in the listed order.
    [[nodiscard]] DomainBox sub_box(std::span<const std::size_t> dims) const;

private:
    std::vector<Interval> intervals_;
};

// N points of dimension n stored row-major, with optional target values.
class SampleSet {
public:
    SampleSet() = default;
    SampleSet(std::size_t dimension, std::vector<double> points);
    SampleSet(std::size_t dimension, std::vector<double> points, std::vector<double> values);

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::size_t size() const noexcept { return dimension_ == 0 ? 0 : points_.size() / dimension_; }
    [[nodiscard]] bool empty() const noexcept { return size() == 0; }
    [[nodiscard]] std::span<const double> point(std::size_t i) const {
        return std::span<const double>(points_).subspan(i * dimension_, dimension_);
    }
    [[nodiscard]] const std::vector<double>& points() const noexcept { return points_; }
    [[nodiscard]] std::vector<double> column(std::size_t j) const;

    [[nodiscard]] bool has_values() const noexcept { return !values_.empty(); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    // Throws InputError when the length does not match size().
    void set_values(std::vector<double> values);

private:
    std::size_t dimension_ = 0;
    std::vector<double> points_;
    std::vector<double> values_;
};

inline constexpr std::size_t kDefaultGridCap = 1'000'000;

// Cartesian product of equally spaced values per axis, endpoints included
// (a count of 1 gives the midpoint). The last axis varies fastest.
[[nodiscard]] SampleSet grid_sample(const DomainBox& box, std::span<const std::size_t> counts,
                                    std::size_t cap = kDefaultGridCap);

// Latin hypercube: every axis is cut into N equal strata holding exactly one
// point each. Deterministic for a fixed seed.
[[nodiscard]] SampleSet lhs_sample(const DomainBox& box, std::size_t n, std::uint64_t seed);

// K pairwise distinct LHS points in the sub-box spanned by `dims`; each
// returned vector lists coordinates in the order of `dims`.
[[nodiscard]] std::vector<std::vector<double>> anchor_points(const DomainBox& box,
                                                             std::span<const std::size_t> dims,
                                                             std::size_t k, std::uint64_t seed);

// CSV with header x1,...,xn[,f]; numbers use the shortest round-trip form.
void write_csv(std::ostream& out, const SampleSet& samples);
// Reads what write_csv produces. A trailing "f" column becomes the values.
[[nodiscard]] SampleSet read_csv(std::istream& in);

} // namespace sepsr
