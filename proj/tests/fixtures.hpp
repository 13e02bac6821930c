#pragma once

#include "relux/builder.hpp"
#include "relux/network.hpp"
#include "relux/pwl1d.hpp"

#include <algorithm>

#include <random>

namespace fx {

using relux::Rational;

inline relux::AffineLayer<Rational> layer(std::size_t r, std::size_t c, std::vector<long> w, std::vector<long> b) {
    relux::AffineLayer<Rational> l(r, c);
    for (std::size_t i = 0; i < w.size(); ++i) l.weights[i] = w[i];
    for (std::size_t i = 0; i < b.size(); ++i) l.bias[i] = b[i];
    return l;
}

// h(x) = 1 - relu(1-3x) - relu(3x-1) + relu(6x-4)
inline relux::Network<Rational> h_net() {
    return relux::Network<Rational>({layer(3, 1, {-3, 3, 6}, {1, -1, -4}), layer(1, 3, {-1, -1, 1}, {1})},
                                    relux::Activation::relu);
}

// g_2(x) = 1 - relu(-3x+1) - relu(3x-2)
inline relux::Network<Rational> g2_net() {
    return relux::Network<Rational>({layer(2, 1, {-3, 3}, {1, -2}), layer(1, 2, {-1, -1}, {1})},
                                    relux::Activation::relu);
}

inline Rational rand_rational(std::mt19937_64& rng, long num, long den) {
    std::uniform_int_distribution<long> n(-num, num), d(1, den);
    return relux::make_rational(n(rng), d(rng));
}

/// Random relu net with rational entries p/q, |p| <= num, 1 <= q <= den.
inline relux::Network<Rational> random_net(std::mt19937_64& rng, const std::vector<int>& dims, long num = 5,
                                           long den = 3) {
    std::vector<relux::AffineLayer<Rational>> ls;
    for (std::size_t i = 1; i < dims.size(); ++i) {
        relux::AffineLayer<Rational> l(dims[i], dims[i - 1]);
        for (auto& w : l.weights) w = rand_rational(rng, num, den);
        for (auto& b : l.bias) b = rand_rational(rng, num, den);
        ls.push_back(l);
    }
    return relux::Network<Rational>(ls, relux::Activation::relu);
}

/// Random canonical PWL with exactly k regions; entries p/q with |p|, q <= bound.
/// About a third of the slopes come from {-1, 0, 1} so flat and repeated
/// pieces show up.
inline relux::Pwl1D random_pwl(std::mt19937_64& rng, std::size_t k, long bound = 100) {
    std::vector<Rational> bps;
    while (bps.size() + 1 < k) {
        Rational x = rand_rational(rng, bound, bound);
        if (std::find(bps.begin(), bps.end(), x) == bps.end()) bps.push_back(x);
    }
    std::sort(bps.begin(), bps.end());
    std::uniform_int_distribution<int> pick(0, 2), small(-1, 1);
    std::vector<Rational> sl;
    while (sl.size() < k) {
        Rational s = pick(rng) == 0 ? Rational(small(rng)) : rand_rational(rng, bound, bound);
        if (!sl.empty() && sl.back() == s) continue;
        sl.push_back(s);
    }
    Rational x0 = bps.empty() ? Rational(0) : bps[0];
    return relux::Pwl1D(bps, sl, {x0, rand_rational(rng, bound, bound)});
}

}  // namespace fx
