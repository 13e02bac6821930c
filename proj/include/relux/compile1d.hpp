#pragma once

#include "relux/network.hpp"
#include "relux/pwl1d.hpp"

namespace relux {

/// Hidden layer computing g_n (n >= 3) or g_2, as a one-layer network.
Network<Rational> g_layer_network(int n);

/// g_{n_L} o ... o g_{n_1}; has r_exact_1d(design) regions.
Network<Rational> build_max_region_network(const Design& design);

/// Exact width-3 network for f with max(1, k-2) hidden layers.
Network<Rational> compile_width3(const Pwl1D& f);

/// Exact width-W network (W >= 5) with max(1, ceil((k-2)/(W-4))) hidden layers.
Network<Rational> compile_widthW(const Pwl1D& f, int W);

/// Hidden layers compile_widthW uses for k regions.
int widthW_depth(std::size_t k, int W);

}  // namespace relux
