#pragma once

#include "relux/network.hpp"

#include <utility>
#include <vector>

namespace relux {

/// Affine combination of the neurons of one layer (or of the inputs).
/// `space` names that layer; constants carry space -1 and mix with anything.
template <class T>
struct Lin {
    int space = -1;
    std::vector<std::pair<std::size_t, T>> terms;  // sorted by index, no zeros
    T constant = T(0);

    Lin() = default;
    Lin(const T& c) : constant(c) {}  // NOLINT
    static Lin var(int space, std::size_t idx, const T& coef = T(1)) {
        Lin l;
        l.space = space;
        if (sign_of(coef) != 0) l.terms.emplace_back(idx, coef);
        return l;
    }

    bool is_constant() const { return terms.empty(); }

    friend Lin operator+(const Lin& a, const Lin& b) {
        Lin r;
        r.space = merge_space(a, b);
        r.constant = a.constant + b.constant;
        std::size_t i = 0, j = 0;
        while (i < a.terms.size() || j < b.terms.size()) {
            if (j == b.terms.size() || (i < a.terms.size() && a.terms[i].first < b.terms[j].first)) {
                r.terms.push_back(a.terms[i++]);
            } else if (i == a.terms.size() || b.terms[j].first < a.terms[i].first) {
                r.terms.push_back(b.terms[j++]);
            } else {
                T s = a.terms[i].second + b.terms[j].second;
                if (sign_of(s) != 0) r.terms.emplace_back(a.terms[i].first, s);
                ++i;
                ++j;
            }
        }
        if (r.terms.empty()) r.space = -1;
        return r;
    }
    friend Lin operator*(const T& c, const Lin& a) {
        Lin r;
        if (sign_of(c) == 0) return r;
        r.space = a.space;
        r.constant = c * a.constant;
        r.terms.reserve(a.terms.size());
        for (const auto& [k, v] : a.terms) r.terms.emplace_back(k, c * v);
        return r;
    }
    friend Lin operator-(const Lin& a) { return T(-1) * a; }
    friend Lin operator-(const Lin& a, const Lin& b) { return a + (-b); }
    Lin& operator+=(const Lin& o) { return *this = *this + o; }
    Lin& operator-=(const Lin& o) { return *this = *this - o; }

private:
    static int merge_space(const Lin& a, const Lin& b) {
        if (a.terms.empty()) return b.space;
        if (b.terms.empty()) return a.space;
        if (a.space != b.space) throw InternalError("combining values from different layers");
        return a.space;
    }
};

/// Builds a network layer by layer. Values are carried as Lin expressions
/// over the most recently committed layer; `neuron` adds a unit to the
/// pending layer and returns its output as a Lin over that pending layer.
template <class T>
class NetBuilder {
public:
    NetBuilder(std::size_t input_dim, Activation act) : in_dim_(input_dim), act_(act) {}

    Lin<T> input(std::size_t i) const {
        if (!layers_.empty() || !pending_.empty()) throw InternalError("input read after layers were added");
        return Lin<T>::var(0, i);
    }

    int current_space() const { return static_cast<int>(layers_.size()); }

    /// Adds act(pre) to the pending layer.
    Lin<T> neuron(const Lin<T>& pre) {
        check_space(pre);
        pending_.push_back(pre);
        return Lin<T>::var(current_space() + 1, pending_.size() - 1);
    }

    std::size_t pending_width() const { return pending_.size(); }

    /// Commits the pending layer, padding with zero neurons to `min_width`.
    void next_layer(std::size_t min_width = 1) {
        while (pending_.size() < min_width) pending_.push_back(Lin<T>(T(0)));
        layers_.push_back(to_layer(pending_, width_of_current()));
        pending_.clear();
    }

    std::size_t hidden_layers() const { return layers_.size(); }

    Network<T> finish(const std::vector<Lin<T>>& outputs) {
        if (!pending_.empty()) throw InternalError("finish with an uncommitted layer");
        for (const auto& o : outputs) check_space(o);
        auto layers = layers_;
        layers.push_back(to_layer(outputs, width_of_current()));
        return Network<T>(std::move(layers), act_);
    }

private:
    std::size_t in_dim_;
    Activation act_;
    std::vector<AffineLayer<T>> layers_;
    std::vector<Lin<T>> pending_;

    std::size_t width_of_current() const { return layers_.empty() ? in_dim_ : layers_.back().rows; }

    void check_space(const Lin<T>& l) const {
        if (!l.terms.empty() && l.space != current_space())
            throw InternalError("value from layer " + std::to_string(l.space) + " used at layer " +
                                std::to_string(current_space()));
    }

    static AffineLayer<T> to_layer(const std::vector<Lin<T>>& rows, std::size_t cols) {
        AffineLayer<T> l(rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (const auto& [k, v] : rows[i].terms) {
                if (k >= cols) throw InternalError("neuron index out of range");
                l.w(i, k) = v;
            }
            l.bias[i] = rows[i].constant;
        }
        return l;
    }
};

}  // namespace relux
