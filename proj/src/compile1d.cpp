#include "relux/compile1d.hpp"

#include "relux/builder.hpp"
#include "relux/errors.hpp"

#include <sstream>

namespace relux {

namespace {

using L = Lin<Rational>;

void require_1d(const Design& d) {
    if (d.dims.size() < 3) throw ContractError("design needs a hidden layer");
    if (d.n0() != 1 || d.outputs() != 1) throw ContractError("max-region networks need n_0 = n_{L+1} = 1");
    for (int l = 1; l <= d.L(); ++l)
        if (d.hidden(l) < 2)
            throw ContractError("hidden width " + std::to_string(d.hidden(l)) + " < 2 at layer " + std::to_string(l));
}

// Adds the neurons of g_n applied to `in`; returns g_n as a Lin over them.
L g_neurons(NetBuilder<Rational>& b, const L& in, int n) {
    if (n == 2) {
        L u = b.neuron(Rational(-3) * in + Rational(1));
        L v = b.neuron(Rational(3) * in - Rational(2));
        return Rational(1) - u - v;
    }
    const Rational s(2 * n + 1);
    L out = Rational(5);
    out += make_rational(-3, 2) * b.neuron(s * in - Rational(1));
    out += b.neuron(s * in - Rational(3));
    out -= b.neuron(Rational(-1) * s * in + Rational(5));
    for (int i = 4; i <= n; ++i) out += Rational(i % 2 ? -1 : 1) * b.neuron(s * in - Rational(2 * i - 1));
    return out;
}

}  // namespace

Network<Rational> g_layer_network(int n) {
    return build_max_region_network(Design({1, n, 1}));
}

Network<Rational> build_max_region_network(const Design& design) {
    require_1d(design);
    NetBuilder<Rational> b(1, Activation::relu);
    L cur = b.input(0);
    for (int l = 1; l <= design.L(); ++l) {
        cur = g_neurons(b, cur, design.hidden(l));
        b.next_layer();
    }
    return b.finish({cur});
}

// ---------------------------------------------------------------------------
// width 3

namespace {

// Pieces with at most 3 regions, one hidden layer of 3 neurons each.
struct Piece3 {
    Rational x1, x2, y1, a1, a2, a3;
};

Piece3 piece_of(const Pwl1D& p) {
    const auto& bp = p.breakpoints();
    const auto& sl = p.slopes();
    Piece3 r;
    if (bp.empty()) {
        r.x1 = 0;
        r.x2 = 1;
        r.y1 = p(Rational(0));
        r.a1 = r.a2 = r.a3 = sl[0];
    } else if (bp.size() == 1) {
        r.x1 = bp[0];
        r.x2 = bp[0] + 1;
        r.y1 = p.values()[0];
        r.a1 = sl[0];
        r.a2 = r.a3 = sl[1];
    } else if (bp.size() == 2) {
        r.x1 = bp[0];
        r.x2 = bp[1];
        r.y1 = p.values()[0];
        r.a1 = sl[0];
        r.a2 = sl[1];
        r.a3 = sl[2];
    } else {
        throw InternalError("width-3 base piece with more than 3 regions");
    }
    return r;
}

// y1 - sgn(a1) relu(-|a1|(x-x1)) + sgn(a2) relu(|a2|(x-x1)) + sgn(a3-a2) relu(|a3-a2|(x-x2))
L piece_neurons(NetBuilder<Rational>& b, const L& in, const Piece3& p) {
    const Rational d = p.a3 - p.a2;
    L n1 = b.neuron(Rational(-abs(p.a1)) * (in - p.x1));
    L n2 = b.neuron(Rational(abs(p.a2)) * (in - p.x1));
    L n3 = b.neuron(Rational(abs(d)) * (in - p.x2));
    return L(p.y1) - Rational(sgn(p.a1)) * n1 + Rational(sgn(p.a2)) * n2 + Rational(sgn(d)) * n3;
}

// Height at a breakpoint, or the extended height at either end.
struct Height {
    int inf = 0;  // -1, 0, +1
    Rational v;
};

bool le(const Height& a, const Height& b) {
    if (a.inf != b.inf) return a.inf < b.inf;
    return a.inf != 0 || a.v <= b.v;
}

std::string heights_str(const std::vector<Height>& Y) {
    std::ostringstream os;
    for (std::size_t i = 0; i < Y.size(); ++i) {
        os << (i ? " " : "");
        if (Y[i].inf) os << (Y[i].inf > 0 ? "+inf" : "-inf");
        else os << Y[i].v.get_str();
    }
    return os.str();
}

struct Split {
    Pwl1D g, h;
};

Pwl1D from(std::vector<Rational> xs, std::vector<Rational> ys, const Rational& left, const Rational& right) {
    Knots<Rational> k;
    k.xs = std::move(xs);
    k.ys = std::move(ys);
    k.left = left;
    k.right = right;
    return Pwl1D::from_knots(k);
}

// One step of the induction: f = g o h, h with <= 3 regions, g with fewer
// regions than f. Needs k >= 4.
Split split_step(const Pwl1D& f) {
    const std::size_t k = f.regions();
    // 1-based: a[1..k], x[1..k-1], y[1..k-1]
    std::vector<Rational> a(k + 1), x(k), y(k);
    for (std::size_t i = 1; i <= k; ++i) a[i] = f.slopes()[i - 1];
    for (std::size_t i = 1; i < k; ++i) {
        x[i] = f.breakpoints()[i - 1];
        y[i] = f.values()[i - 1];
    }
    std::vector<Height> Y(k + 1);
    for (std::size_t i = 1; i < k; ++i) Y[i].v = y[i];
    Y[0] = sgn(a[1]) == 0 ? Height{0, y[1]} : Height{-sgn(a[1]), 0};
    Y[k] = sgn(a[k]) == 0 ? Height{0, y[k - 1]} : Height{sgn(a[k]), 0};

    // Case 1: monotone triple around breakpoint i.
    for (std::size_t i = 1; i + 1 <= k; ++i) {
        bool inc = le(Y[i - 1], Y[i]) && le(Y[i], Y[i + 1]);
        bool dec = le(Y[i], Y[i - 1]) && le(Y[i + 1], Y[i]);
        if (!inc && !dec) continue;
        std::vector<Rational> gx, gy;
        if (sgn(a[i + 1]) != 0) {
            Rational r = a[i] / a[i + 1];
            if (i >= 2) {
                Rational hi = x[i - 1] + r * (x[i] - x[i - 1]);
                Rational delta = hi - x[i];
                Pwl1D h = from({x[i - 1], x[i]}, {x[i - 1], hi}, 1, 1);
                for (std::size_t j = 1; j < i; ++j) gx.push_back(x[j]), gy.push_back(y[j]);
                for (std::size_t j = i + 1; j < k; ++j) gx.push_back(x[j] + delta), gy.push_back(y[j]);
                return {from(gx, gy, a[1], a[k]), h};
            }
            Pwl1D h = from({x[1]}, {x[1]}, r, 1);
            for (std::size_t j = 1; j < k; ++j) gx.push_back(x[j]), gy.push_back(y[j]);
            return {from(gx, gy, a[2], a[k]), h};
        }
        // flat region i+1
        if (i + 1 < k) {
            Rational w = x[i + 1] - x[i];
            Pwl1D h = from({x[i], x[i + 1]}, {x[i], x[i]}, 1, 1);
            for (std::size_t j = 1; j <= i; ++j) gx.push_back(x[j]), gy.push_back(y[j]);
            for (std::size_t j = i + 2; j < k; ++j) gx.push_back(x[j] - w), gy.push_back(y[j]);
            return {from(gx, gy, a[1], a[k]), h};
        }
        Pwl1D h = from({x[k - 1]}, {x[k - 1]}, 1, 0);
        for (std::size_t j = 1; j + 1 < k; ++j) gx.push_back(x[j]), gy.push_back(y[j]);
        return {from(gx, gy, a[1], a[k - 1]), h};
    }

    // Case 2: interleaved quadruple y_{i-1} <= y_{i+1} <= y_i <= y_{i+2} (or reversed).
    for (std::size_t i = 1; i + 2 <= k; ++i) {
        if (sgn(a[i]) == 0 || sgn(a[i + 1]) == 0 || sgn(a[i + 2]) == 0) continue;
        bool up = le(Y[i - 1], Y[i + 1]) && le(Y[i + 1], Y[i]) && le(Y[i], Y[i + 2]);
        bool down = le(Y[i + 1], Y[i - 1]) && le(Y[i], Y[i + 1]) && le(Y[i + 2], Y[i]);
        if (!up && !down) continue;
        Rational r1 = a[i + 1] / a[i], r2 = a[i + 2] / a[i];
        Rational hmid = x[i] + r1 * (x[i + 1] - x[i]);
        Pwl1D h = from({x[i], x[i + 1]}, {x[i], hmid}, 1, r2);
        std::vector<Rational> gx, gy;
        for (std::size_t j = 1; j < i; ++j) gx.push_back(x[j]), gy.push_back(y[j]);
        Rational right = a[i];
        if (i + 2 < k) {
            Rational xhat = hmid + r2 * (x[i + 2] - x[i + 1]);
            gx.push_back(xhat);
            gy.push_back(y[i + 2]);
            for (std::size_t j = i + 3; j < k; ++j) gx.push_back(xhat + r2 * (x[j] - x[i + 2])), gy.push_back(y[j]);
            right = a[k] / r2;
        }
        return {from(gx, gy, i >= 2 ? a[1] : a[i], right), h};
    }
    throw InternalError("width-3 compiler found neither case; heights " + heights_str(Y));
}

}  // namespace

Network<Rational> compile_width3(const Pwl1D& f) {
    const std::size_t k = f.regions();
    const std::size_t depth = k > 3 ? k - 2 : 1;
    // f = base o h_m o ... o h_1; inner collects h_1 first
    std::vector<Pwl1D> inner;
    Pwl1D cur = f;
    while (cur.regions() > 3) {
        Split s = split_step(cur);
        if (s.g.regions() >= cur.regions() || s.h.regions() > 3 || compose(s.g, s.h) != cur)
            throw InternalError("width-3 split step failed to verify");
        inner.push_back(s.h);
        cur = s.g;
    }
    // h_1 is applied first; identity pieces pad the front to the promised depth
    std::vector<Pwl1D> order(depth - (inner.size() + 1), Pwl1D::affine(Rational(1), Rational(0)));
    order.insert(order.end(), inner.begin(), inner.end());
    order.push_back(cur);

    NetBuilder<Rational> b(1, Activation::relu);
    L v = b.input(0);
    for (const auto& p : order) {
        v = piece_neurons(b, v, piece_of(p));
        b.next_layer(3);
    }
    return b.finish({v});
}

// ---------------------------------------------------------------------------
// width >= 5

int widthW_depth(std::size_t k, int W) {
    if (W < 5) throw ContractError("compile_widthW needs W >= 5 (width 4 adds no capacity)");
    long terms = static_cast<long>(k) - 2;
    if (terms <= 0) return 1;
    return static_cast<int>((terms + (W - 4) - 1) / (W - 4));
}

Network<Rational> compile_widthW(const Pwl1D& f, int W) {
    const int depth = widthW_depth(f.regions(), W);
    const auto& bp = f.breakpoints();
    const auto& sl = f.slopes();
    // f(x) = c0 + a1 x + sum_i (a_{i+1} - a_i) relu(x - x_i)
    Rational c0 = f(Rational(0));
    for (std::size_t i = 0; i < bp.size(); ++i)
        if (bp[i] < 0) c0 -= (sl[i + 1] - sl[i]) * (-bp[i]);

    NetBuilder<Rational> b(1, Activation::relu);
    L x = b.input(0);
    L sum;  // running sum of emitted terms
    std::size_t next = 0;
    for (int layer = 0; layer < depth; ++layer) {
        L p = b.neuron(x), m = b.neuron(-x);
        L s;
        std::size_t room = static_cast<std::size_t>(W - 2);
        if (layer > 0) {
            L sp = b.neuron(sum), sm = b.neuron(-sum);
            s = sp - sm;
            room = static_cast<std::size_t>(W - 4);
        }
        for (std::size_t t = 0; t < room && next < bp.size(); ++t, ++next)
            s += (sl[next + 1] - sl[next]) * b.neuron(x - bp[next]);
        b.next_layer(static_cast<std::size_t>(W));
        x = p - m;
        sum = s;
    }
    if (next != bp.size()) throw InternalError("width-W layout ran out of room");
    return b.finish({L(c0) + sl[0] * x + sum});
}

}  // namespace relux
