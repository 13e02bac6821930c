#pragma once

#include "relux/analysis.hpp"
#include "relux/compilend.hpp"
#include "relux/io.hpp"
#include "relux/network.hpp"
#include "relux/pwl1d.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace relux {

/// h(x) = 1 - relu(1-3x) - relu(3x-1) + relu(6x-4) composed L^2 times; width 3,
/// coefficients <= 6. L <= 3.
Network<Rational> width_ineff_gadget(int L);

/// Number of linear pieces of f that meet the open interval (a, b).
std::size_t regions_in(const Pwl1D& f, const Rational& a, const Rational& b);

struct SeparationCertificate {
    int L = 0;
    BigInt gadget_regions;     // 3^{L^2}
    BigInt candidate_regions;  // k used in the bound
    std::size_t candidate_pieces = 0;  // pieces of f meeting (0,1)
    std::size_t intervals = 0;         // 3^{L^2} - 1
    std::size_t good_intervals = 0;
    std::size_t non_good_intervals = 0;
    std::size_t good_pairs = 0;
    std::size_t crossings = 0;  // sign changes of f - 1/2 on [0,1]
    Rational lower_bound;       // (1/2)(3^{L^2} - k - 2)(1/4)3^{-L^2}
    Rational measured_l1;       // int_0^1 |f - g|

    /// The counting chain and measured >= lower_bound.
    bool holds() const;
    Json to_json() const;
};

/// Certificate for candidate f against the gadget of size L. `region_budget`
/// replaces k by an architecture bound such as (N+1)^L; it must be at least
/// the number of pieces of f on (0,1). Throws VerificationFailed if the chain
/// breaks.
SeparationCertificate separation_certificate(const Pwl1D& f, int L,
                                             const std::optional<BigInt>& region_budget = std::nullopt);

struct OracleResult {
    Pwl1D best;
    Rational best_l1;
    std::size_t candidates = 0;
};

/// Brute force over PWLs with at most 4 pieces on [0,1]: breakpoints on
/// multiples of 1/bp_den, knot values on multiples of 1/value_den in [0,1].
OracleResult four_region_oracle(int L, int bp_den = 6, int value_den = 4);

struct DepthEfficiencyResult {
    Network<Rational> net;       // width 2 n0 + 6
    PwlSimplicial complex;
    std::size_t input_regions = 0;  // inside the box
    BigInt region_bound;            // (1 + N^{n0})^L
    std::size_t probes = 0;
    SimplicialStats stats;

    Json to_json() const;
};

/// Rebuilds a compactly supported ReLU net (n0 <= 2, support inside `box`) as
/// a deep net of width 2 n0 + 6. For n0 = 1 only xmin, xmax are used.
DepthEfficiencyResult depth_efficiency_pipeline(const Network<Rational>& net, const Box2& box,
                                                std::uint64_t seed = 1);

/// Test function on [0,1]^{n0} that vanishes on the boundary, with its gradient.
struct SmoothTarget {
    std::string name;
    int n0 = 2;
    std::function<double(const std::vector<double>&)> f;
    std::function<std::vector<double>(const std::vector<double>&)> grad;
};

/// bump1d, bump2d, wave2d, cone2d, zero2d.
SmoothTarget smooth_target(const std::string& name);
std::vector<std::string> smooth_target_names();

struct SobolevRow {
    int r = 0;
    std::size_t vertices = 0, simplices = 0;
    std::size_t depth = 0, width = 0;
    double l1 = 0;        // int |f - g|
    double grad_l1 = 0;   // int sum_i |d_i f - d_i g|
    double w11 = 0;       // l1 + grad_l1
    double net_check = 0; // max |net - g| at the quadrature points
};

struct SobolevReport {
    std::string target;
    std::vector<SobolevRow> rows;
    double fitted_order = 0;    // -slope of log w11 against log r
    std::vector<double> ratios; // w11(r_i) / w11(r_{i+1})

    std::string to_csv() const;
    Json to_json() const;
};

struct SobolevOptions {
    /// Compile every interpolant and check the network at the quadrature points.
    bool compile = true;
};

SobolevReport sobolev_rate_experiment(const SmoothTarget& target, const std::vector<int>& resolutions,
                                      const SobolevOptions& opt = {});

}  // namespace relux
