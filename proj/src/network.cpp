#include "relux/network.hpp"

#include "relux/activation_math.hpp"

#include <sstream>

namespace relux {

Design::Design(std::vector<int> d) : dims(std::move(d)) {
    if (dims.size() < 2) throw ContractError("design needs at least input and output widths");
    for (int v : dims)
        if (v < 1) throw ContractError("design widths must be positive");
}

int Design::neurons() const {
    int s = 0;
    for (int l = 1; l <= L(); ++l) s += dims[l];
    return s;
}

int Design::max_width() const {
    int w = 0;
    for (int l = 1; l <= L(); ++l) w = std::max(w, dims[l]);
    return w;
}

Design Design::parse(const std::string& s) {
    std::vector<int> d;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            int v = std::stoi(tok, &used);
            if (used != tok.size()) throw ParseError("");
            d.push_back(v);
        } catch (const std::exception&) {
            throw ParseError("malformed design entry '" + tok + "' in '" + s + "'");
        }
    }
    return Design(d);
}

std::string Design::to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
    return s + ")";
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::square: return "square";
        case Activation::gaussian: return "gaussian";
        case Activation::logistic: return "logistic";
        case Activation::tanh: return "tanh";
        case Activation::softplus: return "softplus";
    }
    return "?";
}

Activation parse_activation(const std::string& s) {
    for (auto a : {Activation::relu, Activation::square, Activation::gaussian, Activation::logistic, Activation::tanh,
                   Activation::softplus})
        if (activation_name(a) == s) return a;
    throw ParseError("unknown activation '" + s + "'");
}

bool is_catalog(Activation a) { return a != Activation::relu && a != Activation::square; }

namespace {

template <class T>
T exact_activate(Activation a, const T& x) {
    if (a == Activation::relu) return relu(x);
    if (a == Activation::square) return x * x;
    throw ModeError("activation '" + activation_name(a) + "' cannot be evaluated exactly");
}

}  // namespace

Rational activate(Activation a, const Rational& x) { return exact_activate(a, x); }
FastRational activate(Activation a, const FastRational& x) { return exact_activate(a, x); }

double activate(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0 ? x : 0.0;
        case Activation::square: return x * x;
        case Activation::gaussian: return std::exp(-x * x);
        case Activation::logistic: return 1.0 / (1.0 + std::exp(-x));
        case Activation::tanh: return std::tanh(x);
        case Activation::softplus: return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
    return 0;
}

}  // namespace relux
