#pragma once

#include "relux/errors.hpp"
#include "relux/scalar.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace relux {

/// Width vector (n_0, ..., n_{L+1}).
struct Design {
    std::vector<int> dims;

    Design() = default;
    explicit Design(std::vector<int> d);

    int L() const { return static_cast<int>(dims.size()) - 2; }
    int n0() const { return dims.front(); }
    int outputs() const { return dims.back(); }
    /// Width of hidden layer l, 1-based.
    int hidden(int l) const { return dims.at(l); }
    /// Total number of hidden neurons.
    int neurons() const;
    int max_width() const;

    static Design parse(const std::string& s);
    std::string to_string() const;
    friend bool operator==(const Design& a, const Design& b) { return a.dims == b.dims; }
    friend bool operator<(const Design& a, const Design& b) { return a.dims < b.dims; }
};

enum class Activation { relu, square, gaussian, logistic, tanh, softplus };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& s);
bool is_catalog(Activation a);

// Activation application per scalar type. Exact types support relu and the
// ideal square only.
Rational activate(Activation a, const Rational& x);
FastRational activate(Activation a, const FastRational& x);
double activate(Activation a, double x);
BigFloat activate(Activation a, const BigFloat& x);

template <class T>
struct AffineLayer {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> weights;  // row-major
    std::vector<T> bias;

    AffineLayer() = default;
    AffineLayer(std::size_t r, std::size_t c) : rows(r), cols(c), weights(r * c, T(0)), bias(r, T(0)) {}

    T& w(std::size_t i, std::size_t j) { return weights[i * cols + j]; }
    const T& w(std::size_t i, std::size_t j) const { return weights[i * cols + j]; }

    std::vector<T> apply(const std::vector<T>& x) const {
        std::vector<T> y(bias);
        for (std::size_t i = 0; i < rows; ++i) {
            const T* row = &weights[i * cols];
            for (std::size_t j = 0; j < cols; ++j)
                if (sign_of(row[j]) != 0) y[i] += row[j] * x[j];
        }
        return y;
    }
};

template <class T>
class Network {
public:
    Network() = default;
    Network(std::vector<AffineLayer<T>> layers, Activation act) : layers_(std::move(layers)), act_(act) {
        if (layers_.empty()) throw ContractError("network needs at least one layer");
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const auto& l = layers_[i];
            if (l.rows == 0 || l.cols == 0) throw DimensionMismatch("empty layer");
            if (l.weights.size() != l.rows * l.cols || l.bias.size() != l.rows)
                throw DimensionMismatch("layer " + std::to_string(i) + ": storage does not match shape");
            if (i > 0 && layers_[i - 1].rows != l.cols)
                throw DimensionMismatch("layer " + std::to_string(i) + ": input width " + std::to_string(l.cols) +
                                        " does not chain with " + std::to_string(layers_[i - 1].rows));
        }
        if (ScalarTraits<T>::exact && is_catalog(act_))
            throw ModeError("catalog activation '" + activation_name(act_) + "' needs a floating scalar mode");
    }

    const std::vector<AffineLayer<T>>& layers() const { return layers_; }
    Activation activation() const { return act_; }
    std::size_t input_dim() const { return layers_.front().cols; }
    std::size_t output_dim() const { return layers_.back().rows; }
    /// Hidden layer count L.
    std::size_t depth() const { return layers_.size() - 1; }
    /// Largest hidden width (0 without hidden layers).
    std::size_t width() const {
        std::size_t w = 0;
        for (std::size_t i = 0; i + 1 < layers_.size(); ++i) w = std::max(w, layers_[i].rows);
        return w;
    }

    Design design() const {
        std::vector<int> d{static_cast<int>(input_dim())};
        for (const auto& l : layers_) d.push_back(static_cast<int>(l.rows));
        return Design(d);
    }

    std::vector<T> eval(std::vector<T> x) const {
        if (x.size() != input_dim())
            throw DimensionMismatch("input has dimension " + std::to_string(x.size()) + ", network expects " +
                                    std::to_string(input_dim()));
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            x = layers_[i].apply(x);
            if (i + 1 < layers_.size())
                for (auto& v : x) v = activate(act_, v);
        }
        return x;
    }

    /// Scalar in, scalar out.
    T eval1(const T& x) const {
        if (input_dim() != 1 || output_dim() != 1) throw DimensionMismatch("eval1 needs a 1 -> 1 network");
        return eval(std::vector<T>{x})[0];
    }

    /// Largest absolute weight or bias (the coefficient bound C).
    T max_abs_coefficient() const {
        T c(0);
        for (const auto& l : layers_) {
            for (const auto& w : l.weights)
                if (abs_of(w) > c) c = abs_of(w);
            for (const auto& b : l.bias)
                if (abs_of(b) > c) c = abs_of(b);
        }
        return c;
    }

private:
    std::vector<AffineLayer<T>> layers_;
    Activation act_ = Activation::relu;
};

/// Elementwise scalar conversion of a network.
template <class U, class T, class F>
Network<U> convert_network(const Network<T>& net, F&& f) {
    std::vector<AffineLayer<U>> out;
    for (const auto& l : net.layers()) {
        AffineLayer<U> m(l.rows, l.cols);
        for (std::size_t i = 0; i < l.weights.size(); ++i) m.weights[i] = f(l.weights[i]);
        for (std::size_t i = 0; i < l.bias.size(); ++i) m.bias[i] = f(l.bias[i]);
        out.push_back(std::move(m));
    }
    return Network<U>(std::move(out), net.activation());
}

template <class U>
Network<U> from_rational_network(const Network<Rational>& net) {
    return convert_network<U>(net, [](const Rational& q) { return scalar_from_rational<U>(q); });
}

}  // namespace relux
