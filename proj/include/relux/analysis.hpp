#pragma once

#include "relux/network.hpp"
#include "relux/pwl1d.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace relux {

using Point2 = std::array<Rational, 2>;

/// a*x + b*y + c.
struct Affine2 {
    Rational a, b, c;
    Rational operator()(const Point2& p) const { return a * p[0] + b * p[1] + c; }
    bool operator==(const Affine2& o) const { return a == o.a && b == o.b && c == o.c; }
};

struct Cell2D {
    std::vector<Point2> polygon;  // convex, counterclockwise
    std::vector<Affine2> map;     // one affine function per network output
    std::vector<std::vector<bool>> activation_pattern;
};

enum class RegionMethod { exact_1d, exact_2d_cells, sampled_lower_bound };
std::string method_name(RegionMethod m);

struct RegionReport {
    std::size_t regions = 0;
    std::size_t nonconstant_regions = 0;
    std::optional<std::size_t> monotone_regions;  // 1-D only
    std::vector<Cell2D> cells;                    // 2-D only
    RegionMethod method = RegionMethod::exact_1d;
};

RegionReport pwl1d_region_report(const Pwl1D& f);

// Shape predicates used by the width-2 property.
bool is_monotone(const Pwl1D& f);
bool is_bounded_above(const Pwl1D& f);
bool is_bounded_below(const Pwl1D& f);

struct Box2 {
    Rational xmin, xmax, ymin, ymax;
};

/// Cap on 2-D cells; RELUX_MAX_CELLS overrides the default of 10^6.
std::size_t max_cells_budget();

/// Exact decomposition of a 2-input ReLU network into convex cells, merged
/// into linear regions inside `box`.
RegionReport cell_decomposition_2d(const Network<Rational>& net, const Box2& box);

/// Lower bound on the region count for n_0 >= 3 (or any n_0) from exact 1-D
/// counts along random lines; counts distinct local affine maps seen.
RegionReport sampled_region_lower_bound(const Network<Rational>& net, int lines, std::uint64_t seed);

/// Exact integral of |f - g| over [a, b].
Rational exact_l1_distance_1d(const Pwl1D& f, const Pwl1D& g, const Rational& a, const Rational& b);

/// Region count of a network with n_0 in {1, 2} (vector outputs allowed).
std::size_t exact_region_count(const Network<Rational>& net, const Box2& box);

struct ReduceOptions {
    std::uint64_t seed = 0;
    long long bound = 1000000;  // z entries uniform in [-bound, bound]
    int max_attempts = 16;
    Box2 box{Rational(-64), Rational(64), Rational(-64), Rational(64)};  // only for n_0 = 2
    std::optional<std::vector<Rational>> first_z;  // tried before any random draw
};

struct ReduceResult {
    Network<Rational> net;
    std::vector<Rational> z;
    std::size_t regions_before = 0;
    std::size_t regions_after = 0;
    int attempts = 0;
};

/// Scalarizes the outputs by z . f, checking the region count is preserved.
ReduceResult reduce_output_dim(const Network<Rational>& net, const ReduceOptions& opt = {});

}  // namespace relux
