#pragma once

#include "relux/errors.hpp"
#include "relux/scalar.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace relux {

/// Continuous piecewise affine function given by knot values and the two tail
/// slopes. Not necessarily canonical; `xs` is strictly increasing and non-empty.
template <class F>
struct Knots {
    std::vector<F> xs;
    std::vector<F> ys;
    F left = F(0);
    F right = F(0);
};

/// Canonical continuous piecewise affine function of one variable.
/// k regions: k-1 breakpoints, k slopes, adjacent slopes distinct.
template <class F>
class BasicPwl {
public:
    BasicPwl() : slopes_{F(0)} {}

    /// Affine function y0 + s*x.
    static BasicPwl affine(const F& s, const F& y0) {
        BasicPwl p;
        p.slopes_ = {s};
        p.y0_ = y0;
        return p;
    }

    /// From the canonical triple; throws if slopes of adjacent pieces agree or
    /// the anchor is not at the first breakpoint (at 0 for a single piece).
    BasicPwl(std::vector<F> breakpoints, std::vector<F> slopes, std::pair<F, F> anchor)
        : bps_(std::move(breakpoints)), slopes_(std::move(slopes)) {
        if (slopes_.empty() || slopes_.size() != bps_.size() + 1)
            throw ContractError("pwl: need k slopes for k-1 breakpoints");
        for (std::size_t i = 1; i < bps_.size(); ++i)
            if (!(bps_[i - 1] < bps_[i])) throw ContractError("pwl: breakpoints must increase strictly");
        for (std::size_t i = 1; i < slopes_.size(); ++i)
            if (slopes_[i - 1] == slopes_[i]) throw ContractError("pwl: adjacent slopes must differ");
        if (bps_.empty()) {
            if (anchor.first != F(0)) throw ContractError("pwl: single-piece anchor must sit at x = 0");
            y0_ = anchor.second;
            return;
        }
        if (anchor.first != bps_[0]) throw ContractError("pwl: anchor must sit at the first breakpoint");
        vals_.resize(bps_.size());
        vals_[0] = anchor.second;
        for (std::size_t i = 1; i < bps_.size(); ++i) vals_[i] = vals_[i - 1] + slopes_[i] * (bps_[i] - bps_[i - 1]);
    }

    /// Canonical function through the given knots.
    static BasicPwl from_knots(const Knots<F>& kn) {
        if (kn.xs.empty() || kn.xs.size() != kn.ys.size()) throw ContractError("pwl: malformed knot list");
        const std::size_t n = kn.xs.size();
        std::vector<F> seg(n + 1);
        seg[0] = kn.left;
        seg[n] = kn.right;
        for (std::size_t i = 1; i < n; ++i) {
            if (!(kn.xs[i - 1] < kn.xs[i])) throw ContractError("pwl: knots must increase strictly");
            seg[i] = (kn.ys[i] - kn.ys[i - 1]) / (kn.xs[i] - kn.xs[i - 1]);
        }
        BasicPwl p;
        p.slopes_.clear();
        p.slopes_.push_back(seg[0]);
        for (std::size_t i = 0; i < n; ++i) {
            if (seg[i + 1] == p.slopes_.back()) continue;
            p.bps_.push_back(kn.xs[i]);
            p.vals_.push_back(kn.ys[i]);
            p.slopes_.push_back(seg[i + 1]);
        }
        if (p.bps_.empty()) p.y0_ = kn.ys[0] - kn.left * kn.xs[0];
        return p;
    }

    std::size_t regions() const { return slopes_.size(); }
    const std::vector<F>& breakpoints() const { return bps_; }
    const std::vector<F>& slopes() const { return slopes_; }
    /// Values at the breakpoints.
    const std::vector<F>& values() const { return vals_; }
    std::pair<F, F> anchor() const {
        if (bps_.empty()) return {F(0), y0_};
        return {bps_[0], vals_[0]};
    }

    F operator()(const F& x) const {
        if (bps_.empty()) return y0_ + slopes_[0] * x;
        auto it = std::upper_bound(bps_.begin(), bps_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - bps_.begin());
        if (i == 0) return vals_[0] + slopes_[0] * (x - bps_[0]);
        return vals_[i - 1] + slopes_[i] * (x - bps_[i - 1]);
    }

    Knots<F> knots() const {
        Knots<F> k;
        if (bps_.empty()) {
            k.xs = {F(0)};
            k.ys = {y0_};
        } else {
            k.xs = bps_;
            k.ys = vals_;
        }
        k.left = slopes_.front();
        k.right = slopes_.back();
        return k;
    }

    friend bool operator==(const BasicPwl& a, const BasicPwl& b) {
        return a.bps_ == b.bps_ && a.slopes_ == b.slopes_ && a.vals_ == b.vals_ && a.y0_ == b.y0_;
    }
    friend bool operator!=(const BasicPwl& a, const BasicPwl& b) { return !(a == b); }

private:
    std::vector<F> bps_;
    std::vector<F> vals_;
    std::vector<F> slopes_;
    F y0_ = F(0);  // value at 0, used only when there is a single piece
};

using Pwl1D = BasicPwl<Rational>;

/// Sum of c_i * f_i plus a constant.
template <class F>
BasicPwl<F> lincomb(const std::vector<const BasicPwl<F>*>& fs, const std::vector<F>& coef, const F& constant) {
    std::vector<F> xs;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (sign_of(coef[i]) == 0) continue;
        const auto& b = fs[i]->breakpoints();
        std::vector<F> merged;
        merged.reserve(xs.size() + b.size());
        std::set_union(xs.begin(), xs.end(), b.begin(), b.end(), std::back_inserter(merged));
        xs.swap(merged);
    }
    Knots<F> k;
    if (xs.empty()) xs.push_back(F(0));
    k.xs = xs;
    k.ys.assign(xs.size(), constant);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (sign_of(coef[i]) == 0) continue;
        const auto& f = *fs[i];
        for (std::size_t j = 0; j < xs.size(); ++j) k.ys[j] += coef[i] * f(xs[j]);
        k.left += coef[i] * f.slopes().front();
        k.right += coef[i] * f.slopes().back();
    }
    return BasicPwl<F>::from_knots(k);
}

template <class F>
BasicPwl<F> operator+(const BasicPwl<F>& a, const BasicPwl<F>& b) {
    return lincomb<F>({&a, &b}, {F(1), F(1)}, F(0));
}

template <class F>
BasicPwl<F> operator-(const BasicPwl<F>& a, const BasicPwl<F>& b) {
    return lincomb<F>({&a, &b}, {F(1), F(-1)}, F(0));
}

template <class F>
BasicPwl<F> scale(const BasicPwl<F>& a, const F& c, const F& offset = F(0)) {
    return lincomb<F>({&a}, {c}, offset);
}

/// max(0, f).
template <class F>
BasicPwl<F> relu(const BasicPwl<F>& f) {
    const Knots<F> k = f.knots();
    const std::size_t n = k.xs.size();
    Knots<F> out;
    auto push = [&](const F& x, const F& y) {
        out.xs.push_back(x);
        out.ys.push_back(sign_of(y) > 0 ? y : F(0));
    };
    if (sign_of(k.left) != 0) {
        F z = k.xs[0] - k.ys[0] / k.left;
        if (z < k.xs[0]) push(z, F(0));
    }
    for (std::size_t i = 0; i < n; ++i) {
        push(k.xs[i], k.ys[i]);
        if (i + 1 < n && sign_of(k.ys[i]) * sign_of(k.ys[i + 1]) < 0) {
            F z = k.xs[i] - k.ys[i] * (k.xs[i + 1] - k.xs[i]) / (k.ys[i + 1] - k.ys[i]);
            push(z, F(0));
        }
    }
    if (sign_of(k.right) != 0) {
        F z = k.xs[n - 1] - k.ys[n - 1] / k.right;
        if (z > k.xs[n - 1]) push(z, F(0));
    }
    out.left = sign_of(k.left) < 0 ? k.left : F(0);
    out.right = sign_of(k.right) > 0 ? k.right : F(0);
    return BasicPwl<F>::from_knots(out);
}

/// g o h.
template <class F>
BasicPwl<F> compose(const BasicPwl<F>& g, const BasicPwl<F>& h) {
    const Knots<F> k = h.knots();
    const auto& gb = g.breakpoints();
    const std::size_t n = k.xs.size();
    std::vector<F> xs(k.xs);
    // preimages of g's breakpoints inside each piece of h
    auto scan = [&](const F& x0, const F& y0, const F& s, int dir) {
        // piece {x0 + dir*t : t > 0} with h = y0 + s*(x - x0)
        if (sign_of(s) == 0) return;
        bool up = (sign_of(s) > 0) == (dir > 0);
        auto it = up ? std::upper_bound(gb.begin(), gb.end(), y0) : gb.begin();
        auto end = up ? gb.end() : std::lower_bound(gb.begin(), gb.end(), y0);
        for (; it != end; ++it) xs.push_back(x0 + (*it - y0) / s);
    };
    scan(k.xs[0], k.ys[0], k.left, -1);
    scan(k.xs[n - 1], k.ys[n - 1], k.right, +1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const F &ya = k.ys[i], &yb = k.ys[i + 1];
        if (ya == yb) continue;
        const F& lo = ya < yb ? ya : yb;
        const F& hi = ya < yb ? yb : ya;
        F s = (yb - ya) / (k.xs[i + 1] - k.xs[i]);
        for (auto it = std::upper_bound(gb.begin(), gb.end(), lo); it != gb.end() && *it < hi; ++it)
            xs.push_back(k.xs[i] + (*it - ya) / s);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    Knots<F> out;
    out.xs = xs;
    out.ys.reserve(xs.size());
    for (const auto& x : xs) out.ys.push_back(g(h(x)));
    auto tail = [&](const F& s, bool right_side) -> F {
        int sg = sign_of(s);
        if (sg == 0) return F(0);
        bool to_plus = (sg > 0) == right_side;
        return s * (to_plus ? g.slopes().back() : g.slopes().front());
    };
    out.left = tail(k.left, false);
    out.right = tail(k.right, true);
    return BasicPwl<F>::from_knots(out);
}

template <class G, class F>
BasicPwl<G> convert_pwl(const BasicPwl<F>& f, G (*conv)(const F&)) {
    Knots<F> k = f.knots();
    Knots<G> o;
    for (const auto& x : k.xs) o.xs.push_back(conv(x));
    for (const auto& y : k.ys) o.ys.push_back(conv(y));
    o.left = conv(k.left);
    o.right = conv(k.right);
    return BasicPwl<G>::from_knots(o);
}

}  // namespace relux
