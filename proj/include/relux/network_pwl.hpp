#pragma once

#include "relux/network.hpp"
#include "relux/pwl1d.hpp"

namespace relux {

/// Every output of a 1-input ReLU network as an exact piecewise affine function.
template <class F>
std::vector<BasicPwl<F>> network_to_pwl1d_outputs(const Network<F>& net) {
    if (net.activation() != Activation::relu) throw ContractError("network_to_pwl1d needs relu activation");
    if (net.input_dim() != 1) throw DimensionMismatch("network_to_pwl1d needs n_0 = 1");
    std::vector<BasicPwl<F>> cur{BasicPwl<F>::affine(F(1), F(0))};
    const auto& layers = net.layers();
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const auto& l = layers[li];
        std::vector<const BasicPwl<F>*> ptrs;
        for (const auto& p : cur) ptrs.push_back(&p);
        std::vector<BasicPwl<F>> next;
        next.reserve(l.rows);
        std::vector<F> row(l.cols);
        for (std::size_t i = 0; i < l.rows; ++i) {
            for (std::size_t j = 0; j < l.cols; ++j) row[j] = l.w(i, j);
            BasicPwl<F> pre = lincomb<F>(ptrs, row, l.bias[i]);
            next.push_back(li + 1 < layers.size() ? relu(pre) : std::move(pre));
        }
        cur.swap(next);
    }
    return cur;
}

template <class F>
BasicPwl<F> network_to_pwl1d(const Network<F>& net) {
    if (net.output_dim() != 1) throw DimensionMismatch("network_to_pwl1d needs n_{L+1} = 1");
    return network_to_pwl1d_outputs(net)[0];
}

/// Number of linear regions of the vector-valued function (union of breakpoints).
template <class F>
std::size_t vector_region_count(const std::vector<BasicPwl<F>>& fs) {
    std::vector<F> xs;
    for (const auto& f : fs) xs.insert(xs.end(), f.breakpoints().begin(), f.breakpoints().end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs.size() + 1;
}

}  // namespace relux
