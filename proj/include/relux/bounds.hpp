#pragma once

#include "relux/network.hpp"
#include "relux/scalar.hpp"

#include <string>
#include <utility>
#include <vector>

namespace relux {

/// C(a, b), zero when a < 0, b < 0 or b > a.
BigInt binom(long a, long b);

/// (R, R_tilde) for an input-dimension-1 design with hidden widths >= 2.
std::pair<BigInt, BigInt> r_exact_1d(const Design& design);

/// Regions cut by m generic hyperplanes in R^d.
BigInt zaslavsky_count(long m, long d);

/// Exact maximum for one hidden layer.
BigInt one_hidden_layer_count(long n0, long n1);

/// Bound on regions whose activation set misses exactly j of n neurons when
/// the layer sees a d-dimensional image. d = 0 gives [j = 0].
BigInt f_jd(long j, long d, long n);

enum class BoundVariant { corrected, verbatim, previous };

std::string variant_name(BoundVariant v);
BoundVariant parse_variant(const std::string& s);

struct BoundTerm {
    std::vector<int> j;
    std::vector<int> d;
    std::vector<BigInt> factors;
    BigInt product;
};

struct BoundBreakdown {
    Design design;
    BigInt value;
    std::vector<BoundTerm> terms;
    BoundVariant variant = BoundVariant::corrected;
    /// True when terms were not listed because there were too many.
    bool terms_truncated = false;

    /// Columns j-tuple, d-tuple, factor, product.
    std::string to_csv() const;
};

/// General upper bound on R(design). Terms are listed up to max_terms; the
/// value is always exact (memoized over (layer, d)).
BoundBreakdown upper_bound_general(const Design& design, BoundVariant variant = BoundVariant::corrected,
                                   std::size_t max_terms = 100000);

/// Moves every width-2 hidden layer behind the others.
Design bottleneck_normalize(const Design& design);

/// Best design among width-3 layers followed by 0, 1 or 2 width-2 layers.
std::pair<Design, BigInt> optimal_design(int budget);

/// (1 + N^n0)^L.
BigInt depth_efficiency_bound(long N, long L, long n0);

}  // namespace relux
