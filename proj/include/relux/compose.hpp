#pragma once

#include "relux/network.hpp"

#include <vector>

namespace relux {

/// (B o A)(x) = B(A x + a) + b.
template <class T>
AffineLayer<T> compose_affine(const AffineLayer<T>& b, const AffineLayer<T>& a) {
    if (b.cols != a.rows) throw DimensionMismatch("affine maps do not chain");
    AffineLayer<T> r(b.rows, a.cols);
    for (std::size_t i = 0; i < b.rows; ++i) {
        r.bias[i] = b.bias[i];
        for (std::size_t k = 0; k < b.cols; ++k) {
            const T& w = b.w(i, k);
            if (sign_of(w) == 0) continue;
            r.bias[i] += w * a.bias[k];
            for (std::size_t j = 0; j < a.cols; ++j)
                if (sign_of(a.w(k, j)) != 0) r.w(i, j) += w * a.w(k, j);
        }
    }
    return r;
}

/// net(A x + a).
template <class T>
Network<T> precompose(const Network<T>& net, const AffineLayer<T>& a) {
    auto layers = net.layers();
    layers.front() = compose_affine(layers.front(), a);
    return Network<T>(std::move(layers), net.activation());
}

/// B net(x) + b.
template <class T>
Network<T> postcompose(const Network<T>& net, const AffineLayer<T>& b) {
    auto layers = net.layers();
    layers.back() = compose_affine(b, layers.back());
    return Network<T>(std::move(layers), net.activation());
}

/// second(first(x)); depth adds, the joint affine map is folded.
template <class T>
Network<T> chain(const Network<T>& first, const Network<T>& second) {
    if (first.activation() != second.activation()) throw ContractError("cannot chain networks with different activations");
    auto layers = first.layers();
    layers.back() = compose_affine(second.layers().front(), layers.back());
    for (std::size_t i = 1; i < second.layers().size(); ++i) layers.push_back(second.layers()[i]);
    return Network<T>(std::move(layers), first.activation());
}

/// Side by side: inputs and outputs are concatenated; equal depths required.
template <class T>
Network<T> stack(const std::vector<Network<T>>& nets) {
    if (nets.empty()) throw ContractError("stack needs at least one network");
    const std::size_t depth = nets.front().depth();
    for (const auto& n : nets) {
        if (n.depth() != depth) throw DimensionMismatch("stacked networks need equal depth");
        if (n.activation() != nets.front().activation()) throw ContractError("stacked networks need one activation");
    }
    std::vector<AffineLayer<T>> layers;
    for (std::size_t l = 0; l <= depth; ++l) {
        std::size_t rows = 0, cols = 0;
        for (const auto& n : nets) {
            rows += n.layers()[l].rows;
            cols += n.layers()[l].cols;
        }
        AffineLayer<T> m(rows, cols);
        std::size_t r0 = 0, c0 = 0;
        for (const auto& n : nets) {
            const auto& s = n.layers()[l];
            for (std::size_t i = 0; i < s.rows; ++i) {
                m.bias[r0 + i] = s.bias[i];
                for (std::size_t j = 0; j < s.cols; ++j) m.w(r0 + i, c0 + j) = s.w(i, j);
            }
            r0 += s.rows;
            c0 += s.cols;
        }
        layers.push_back(std::move(m));
    }
    return Network<T>(std::move(layers), nets.front().activation());
}

/// Copies input i of `dim` to the output; helper for input maps.
template <class T>
AffineLayer<T> selector(std::size_t dim, const std::vector<std::size_t>& pick) {
    AffineLayer<T> a(pick.size(), dim);
    for (std::size_t r = 0; r < pick.size(); ++r) a.w(r, pick[r]) = T(1);
    return a;
}

/// Row-sparse evaluation for deep block-structured networks.
template <class T>
class SparseEvaluator {
public:
    explicit SparseEvaluator(const Network<T>& net) : act_(net.activation()) {
        for (const auto& l : net.layers()) {
            Layer s;
            s.bias = l.bias;
            s.start.push_back(0);
            for (std::size_t i = 0; i < l.rows; ++i) {
                for (std::size_t j = 0; j < l.cols; ++j)
                    if (sign_of(l.w(i, j)) != 0) {
                        s.col.push_back(j);
                        s.val.push_back(l.w(i, j));
                    }
                s.start.push_back(s.col.size());
            }
            layers_.push_back(std::move(s));
        }
    }

    std::vector<T> eval(std::vector<T> x) const {
        std::vector<T> y;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const auto& s = layers_[l];
            y = s.bias;
            for (std::size_t i = 0; i < y.size(); ++i)
                for (std::size_t k = s.start[i]; k < s.start[i + 1]; ++k) y[i] += s.val[k] * x[s.col[k]];
            if (l + 1 < layers_.size())
                for (auto& v : y) v = activate(act_, v);
            x.swap(y);
        }
        return x;
    }

    T eval1(const T& x) const { return eval(std::vector<T>{x})[0]; }

private:
    struct Layer {
        std::vector<std::size_t> start, col;
        std::vector<T> val, bias;
    };
    std::vector<Layer> layers_;
    Activation act_;
};

}  // namespace relux
