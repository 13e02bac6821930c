#include "relux/approx.hpp"

#include "relux/activation_math.hpp"
#include "relux/builder.hpp"
#include "relux/compose.hpp"
#include "relux/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace relux {

namespace {

constexpr double kSlack = 1e-9;

template <class T>
T pow2(int e) {
    if constexpr (std::is_same_v<T, double>) {
        return std::ldexp(1.0, e);
    } else if constexpr (std::is_same_v<T, Rational>) {
        Rational r(1);
        if (e >= 0) mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(e));
        else mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(-e));
        return r;
    } else {
        return ldexp(T(1), e);
    }
}

template <class T>
T from_double(double v) {
    if constexpr (std::is_same_v<T, Rational>) return rational_from_double(v);
    else return T(v);
}

double sup_error(const std::function<double(double)>& approx, const std::function<double(double)>& target,
                 const std::vector<double>& pts) {
    double e = 0;
    for (double x : pts) e = std::max(e, std::abs(approx(x) - target(x)));
    return e;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// catalog

std::vector<double> ActivationSpec::taylor_coeffs(double center, int count) const {
    return relux::taylor_coeffs(act, center, count);
}

std::vector<Activation> activation_catalog() {
    return {Activation::gaussian, Activation::logistic, Activation::tanh, Activation::softplus};
}

ActivationSpec activation_spec(const std::string& name) { return activation_spec(parse_activation(name)); }

ActivationSpec activation_spec(Activation a) {
    if (!is_catalog(a)) throw ContractError("'" + activation_name(a) + "' is not a catalog activation");
    ActivationSpec s;
    s.act = a;
    s.alpha = catalog_alpha(a);
    s.deriv_point = catalog_deriv_point(a);
    s.second_at_alpha = 2 * relux::taylor_coeffs(a, s.alpha, 3)[2];
    s.deriv_value = relux::taylor_coeffs(a, s.deriv_point, 2)[1];
    const Rational d = make_rational(1, 1000000);  // ramp half-width for the step-like l
    const double r = 3.0;                            // Cauchy radius in (3pi/4, pi)
    switch (a) {
        case Activation::gaussian:
            s.asymptotic = Pwl1D::affine(0, 0);
            s.tail_bound = [](double t) { return std::exp(-t * t); };
            s.envelope = [](int n) {
                int m = n / 2;
                return std::pow(2.0, m) / std::tgamma(m + 1.0);
            };
            break;
        case Activation::logistic:
            s.asymptotic = Pwl1D::from_knots({{-d, d}, {0, 1}, 0, 0});
            s.tail_bound = [](double t) { return std::exp(-t); };
            s.envelope = [r](int n) { return 1 / (std::sin(r) * std::pow(r, n)); };
            break;
        case Activation::tanh:
            s.asymptotic = Pwl1D::from_knots({{-d, d}, {-1, 1}, 0, 0});
            s.tail_bound = [](double t) { return 2 * std::exp(-2 * t); };
            s.envelope = [](int n) { return 4 * std::pow(12 / (5 * M_PI), n); };
            break;
        case Activation::softplus:
            s.asymptotic = Pwl1D::from_knots({{Rational(0)}, {Rational(0)}, 0, 1});
            s.tail_bound = [](double t) { return std::exp(-t); };
            // rho' is the logistic function
            s.envelope = [r](int n) { return n == 1 ? 1.0 : 1 / (n * std::sin(r) * std::pow(r, n - 1)); };
            break;
        default: break;
    }
    return s;
}

// ---------------------------------------------------------------------------
// reports

Json ApproxReport::to_json() const {
    return {{"target", target}, {"interval", {lo, hi}}, {"grid_size", grid_size}, {"max_abs_error", max_abs_error},
            {"bound", bound},   {"depth", depth},       {"width", width},         {"within_bound", within_bound()}};
}

Json CertificateReport::to_json() const {
    return {{"activation", activation_name(act)}, {"n_max", n_max}, {"grid_size", grid_size},
            {"max_normalized", max_normalized},   {"max_envelope_ratio", max_envelope_ratio},
            {"rho_at_zero", rho_at_zero},         {"violations", violations}, {"ok", ok()}};
}

std::vector<double> probe_points(double lo, double hi, std::size_t grid, std::size_t random, std::uint64_t seed) {
    std::vector<double> pts;
    for (std::size_t i = 0; i < grid; ++i)
        pts.push_back(grid == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    for (std::size_t i = 0; i < random; ++i) pts.push_back(u(rng));
    return pts;
}

// ---------------------------------------------------------------------------
// one-layer blocks

double IdentityBlock::operator()(double x) const { return (activate(act, point + h * x) - rho_point) / (h * slope); }

std::pair<IdentityBlock, ApproxReport> identity_block(const ActivationSpec& act, double lo, double hi, double eps) {
    if (!(eps > 0)) throw ContractError("identity block needs eps > 0");
    if (!(lo < hi)) throw ContractError("identity block needs lo < hi");
    IdentityBlock b;
    b.act = act.act;
    b.point = act.deriv_point;
    b.rho_point = act(act.deriv_point);
    b.slope = act.deriv_value;
    auto pts = probe_points(lo, hi);
    double best = INFINITY;
    for (int k = 1; k <= 60; ++k) {
        b.h = std::ldexp(1.0, -k);
        double e = sup_error(b, [](double x) { return x; }, pts);
        best = std::min(best, e);
        if (e <= eps) {
            ApproxReport r{"identity (" + act.name() + ")", lo, hi, pts.size(), e, eps, 1, 1};
            return {b, r};
        }
    }
    throw ContractError("identity block: eps = " + fmt(eps) + " out of reach in binary64 (best " + fmt(best) + ")");
}

double SquareBlock::operator()(double x) const {
    return (activate(act, alpha + h * x) - 2 * rho_alpha + activate(act, alpha - h * x)) / (h * h * second);
}

std::pair<SquareBlock, ApproxReport> square_block(const ActivationSpec& act, double h) {
    if (!(h > 0)) throw ContractError("square block needs h > 0");
    SquareBlock b;
    b.act = act.act;
    b.alpha = act.alpha;
    b.h = h;
    b.rho_alpha = act(act.alpha);
    b.second = act.second_at_alpha;
    b.condition = 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b.rho_alpha)) /
                  (h * h * std::abs(b.second));
    if (b.condition > 1e-3)
        throw ContractError("square block: h = " + fmt(h) + " too small for binary64 (condition estimate " +
                            fmt(b.condition) + ")");
    auto pts = probe_points(-1, 1);
    double e = sup_error(b, [](double x) { return x * x; }, pts);
    // sigma_h - x^2 = h^2 x^4 rho''''(xi) / (12 rho''(alpha)), |rho''''| / 4! <= envelope(4)
    double bound = 2 * h * h * act.envelope(4) / std::abs(b.second) + b.condition + kSlack;
    ApproxReport r{"square (" + act.name() + ")", -1, 1, pts.size(), e, bound, 1, 2};
    return {b, r};
}

InverseChain inverse_chain(const Rational& eps_domain, int m) {
    if (!(sgn(eps_domain) > 0 && eps_domain < 1)) throw ContractError("inverse chain needs 0 < eps < 1");
    if (m < 1 || m > 24) throw ContractError("inverse chain needs 1 <= m <= 24");
    using L = Lin<Rational>;
    NetBuilder<Rational> b(1, Activation::square);
    L z = Rational(1) - b.input(0);
    L s = z, p(Rational(1));
    const Rational half = make_rational(1, 2);
    for (int j = 1; j <= m + 1; ++j) {
        L sn = j <= m ? b.neuron(s) : L();
        // p (1 + s) = ((p + 1 + s) / 2)^2 - ((p - 1 - s) / 2)^2
        L pn = b.neuron(half * (p + Rational(1) + s)) - b.neuron(half * (p - Rational(1) - s));
        b.next_layer();
        s = sn;
        p = pn;
    }
    InverseChain out{b.finish({p}), Rational(1) - eps_domain};
    for (int i = 0; i <= m; ++i) out.bound *= out.bound;
    out.bound /= eps_domain;
    return out;
}

// ---------------------------------------------------------------------------
// Newman's rational function

BigFloat newman_rational_mp(int n, const BigFloat& x) {
    if (n < 1) throw ContractError("newman needs n >= 1");
    BigFloat xi = exp(BigFloat(-1) / sqrt(BigFloat(n)));
    BigFloat p(1), q(1), f(1);
    for (int k = 0; k < n; ++k) {
        p *= x + f;
        q *= f - x;
        f *= xi;
    }
    if (x.sign() == 0) return BigFloat(0);
    return x * p / (p + q);
}

double newman_rational_reference(int n, double x) {
    PrecisionGuard g(50);
    return newman_rational_mp(n, BigFloat(x)).convert_to<double>();
}

int newman_chain_length(int n) {
    if (n < 1) throw ContractError("newman needs n >= 1");
    const double rn = std::sqrt(static_cast<double>(n));
    const double a = rn * (n + 1) / 2;
    double m = n - 2 + (a + std::log(rn + a + (n - 1) * std::log(2.0))) / std::log(2.0);
    return std::max(1, static_cast<int>(std::ceil(m - 1e-12)));
}

// ---------------------------------------------------------------------------
// multiprecision networks

namespace {

std::vector<double> mp_eval_many(const MpNetwork& m, const std::vector<std::vector<double>>& xs) {
    PrecisionGuard g(m.digits10);
    SparseEvaluator<BigFloat> ev(m.net);
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
        std::vector<BigFloat> in;
        for (double v : x) in.emplace_back(v);
        out.push_back(ev.eval(in)[0].convert_to<double>());
    }
    return out;
}

std::vector<double> mp_eval_points(const MpNetwork& m, const std::vector<double>& pts) {
    std::vector<std::vector<double>> xs;
    for (double x : pts) xs.push_back({x});
    return mp_eval_many(m, xs);
}

// log2 of the largest value 2^{n-1} / xi^{C(n+1,2)} the inverse chain produces
double newman_log2_range(int n) {
    return (n - 1) + (n * (n + 1) / 2.0) / (std::sqrt(static_cast<double>(n)) * std::log(2.0));
}

unsigned bits_for_newman(int n) {
    return std::max(160u, static_cast<unsigned>(std::ceil(2 * newman_log2_range(n))) + 112u);
}

// `bits` fixes the step sizes h = 2^{-bits/2}, 2^{-bits/4}. Pre-activations
// c + h v are rounded to an ulp of c, which the blocks divide by h again, so
// a nonzero expansion point costs the matching number of extra bits.
unsigned digits_for_bits(Activation act, unsigned bits) {
    unsigned work = bits;
    if (catalog_deriv_point(act) != 0) work += bits / 2;
    if (catalog_alpha(act) != 0) work += bits / 4;
    return static_cast<unsigned>(std::ceil(work * 0.30103)) + 2;
}

using LinB = Lin<BigFloat>;

// Enhanced-neuron identity and square blocks over a NetBuilder.
struct MpOps {
    NetBuilder<BigFloat>* b;
    BigFloat d, rd, r1d, a, ra, r2a, hid, hsq;

    MpOps(NetBuilder<BigFloat>* builder, Activation act, unsigned bits) : b(builder) {
        d = catalog_deriv_point_mp(act);
        auto cd = taylor_coeffs_mp(act, d, 2);
        rd = cd[0];
        r1d = cd[1];
        a = BigFloat(catalog_alpha(act));
        auto ca = taylor_coeffs_mp(act, a, 3);
        ra = ca[0];
        r2a = 2 * ca[2];
        hid = pow2<BigFloat>(-static_cast<int>(bits / 2));
        hsq = pow2<BigFloat>(-static_cast<int>(bits / 4));
    }

    // v with |v| <= S
    LinB id(const LinB& v, const BigFloat& S) {
        LinB n = b->neuron(LinB(d) + BigFloat(hid / S) * v);
        return BigFloat(S / (hid * r1d)) * (n - LinB(rd));
    }
    LinB sq(const LinB& v, const BigFloat& S) {
        BigFloat k = hsq / S;
        LinB n1 = b->neuron(LinB(a) + k * v);
        LinB n2 = b->neuron(LinB(a) - k * v);
        return BigFloat(S * S / (hsq * hsq * r2a)) * (n1 + n2 - LinB(BigFloat(2 * ra)));
    }
    // u v with |u| <= Su, |v| <= Sv
    LinB prod(const LinB& u, const LinB& v, const BigFloat& Su, const BigFloat& Sv) {
        LinB u1 = BigFloat(1 / Su) * u, v1 = BigFloat(1 / Sv) * v;
        return BigFloat(Su * Sv / 4) * (sq(u1 + v1, BigFloat(2)) - sq(u1 - v1, BigFloat(2)));
    }
};

// Width-8 approximation of max(0, x) on [-1, 1]; built at the current precision.
Network<BigFloat> relu_block_mp(Activation act, int n, unsigned bits) {
    NetBuilder<BigFloat> b(1, act);
    MpOps ops(&b, act, bits);
    const int m = newman_chain_length(n);
    BigFloat xi = exp(BigFloat(-1) / sqrt(BigFloat(n)));
    // coefficients of P(x) = prod_{k<n} (x + xi^k)
    std::vector<BigFloat> c{BigFloat(1)};
    BigFloat f(1);
    for (int k = 0; k < n; ++k) {
        std::vector<BigFloat> nc(c.size() + 1, BigFloat(0));
        for (std::size_t j = 0; j < c.size(); ++j) {
            nc[j] += c[j] * f;
            nc[j + 1] += c[j];
        }
        c = std::move(nc);
        f *= xi;
    }
    const BigFloat two_n = pow2<BigFloat>(n);
    const BigFloat one(1);
    LinB x = b.input(0);
    LinB Ap(c[0]), Am(c[0]), pw = x;
    for (int k = 1; k <= n; ++k) {
        BigFloat ck = c[static_cast<std::size_t>(k)];
        BigFloat ckm = k % 2 ? BigFloat(-ck) : ck;
        LinB xn = ops.id(x, one);
        LinB apn = ops.id(Ap + ck * pw, two_n);
        LinB amn = ops.id(Am + ckm * pw, two_n);
        LinB pwn = k < n ? ops.prod(x, pw, one, one) : LinB();
        b.next_layer();
        x = xn;
        Ap = apn;
        Am = amn;
        pw = pwn;
    }
    // 2^n / (P(x) + P(-x)) = prod (1 + z^{2^i}), z = 1 - (P(x) + P(-x)) / 2^n
    const BigFloat V = pow2<BigFloat>(n - 1) / pow(xi, n * (n + 1) / 2);
    LinB s = LinB(one) - BigFloat(1 / two_n) * (Ap + Am);
    LinB p(one);
    BigFloat Sp(1);
    for (int j = 1; j <= m; ++j) {
        LinB xn = ops.id(x, one);
        LinB Pn = ops.id(Ap, two_n);
        LinB sn = ops.sq(s, one);
        LinB pn = ops.prod(p, LinB(one) + s, Sp, BigFloat(2));
        b.next_layer();
        x = xn;
        Ap = Pn;
        s = sn;
        p = pn;
        Sp = BigFloat(2 * Sp) < V ? BigFloat(2 * Sp) : V;
    }
    LinB pn = ops.prod(p, LinB(one) + s, Sp, BigFloat(2));
    LinB A = ops.prod(x, BigFloat(1 / two_n) * Ap, one, one);
    b.next_layer();
    LinB R = ops.prod(A, pn, one, V);
    b.next_layer();
    return b.finish({R});
}

}  // namespace

std::vector<double> MpNetwork::eval(const std::vector<double>& x) const {
    PrecisionGuard g(digits10);
    std::vector<BigFloat> in;
    for (double v : x) in.emplace_back(v);
    std::vector<double> out;
    for (const auto& v : net.eval(in)) out.push_back(v.convert_to<double>());
    return out;
}

std::pair<MpNetwork, ApproxReport> relu_from_activation_net(const ActivationSpec& act, int n) {
    if (n < 1) throw ContractError("relu_from_activation_net needs n >= 1");
    if (act.second_at_alpha == 0) throw ContractError("activation has no square point");
    const unsigned bits = bits_for_newman(n);
    MpNetwork out;
    out.digits10 = digits_for_bits(act.act, bits);
    {
        PrecisionGuard g(out.digits10);
        out.net = relu_block_mp(act.act, n, bits);
    }
    auto pts = probe_points(-1, 1);
    auto ys = mp_eval_points(out, pts);
    double e = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) e = std::max(e, std::abs(ys[i] - std::max(0.0, pts[i])));
    ApproxReport r{"relu (" + act.name() + ", n = " + std::to_string(n) + ")", -1, 1, pts.size(), e,
                   2.5 * std::exp(-std::sqrt(static_cast<double>(n))) + 1e-6, out.net.depth(), out.net.width()};
    return {out, r};
}

// ---------------------------------------------------------------------------
// ReLU building blocks

namespace {

template <class T>
Network<T> sawtooth_net(int n) {
    using L = Lin<T>;
    NetBuilder<T> b(1, Activation::relu);
    const T one(1), two(2);
    L x = b.input(0);
    // layer 1: h(x) = 2|x| - 1
    L h = two * b.neuron(x) + two * b.neuron(-x) - L(one);
    b.next_layer();
    // layer 2: g0 = (h + 1) / 2 = |x|
    T half(1);
    half /= 2;
    L g = b.neuron(half * (h + L(one)) + L(one)) - L(one);
    L hn = n >= 1 ? two * b.neuron(h) + two * b.neuron(-h) - L(one) : L();
    b.next_layer();
    h = hn;
    for (int j = 3; j <= n + 2; ++j) {
        // g^{(j-2)} = g^{(j-3)} + 2^{-2j+3} (h^{(j-1)} - 1)
        L gn = b.neuron(g + pow2<T>(-2 * j + 3) * (h - L(one)) + L(one)) - L(one);
        hn = j <= n + 1 ? two * b.neuron(h) + two * b.neuron(-h) - L(one) : L();
        b.next_layer();
        g = gn;
        h = hn;
    }
    // min(g, 1)
    L out = b.neuron(g + L(one)) - L(one) - b.neuron(g - L(one));
    b.next_layer();
    return b.finish({out});
}

// relu(v + s) carried for `depth` layers, minus s at the end.
template <class T>
Network<T> shifted_identity(std::size_t depth, const T& s) {
    using L = Lin<T>;
    NetBuilder<T> b(1, Activation::relu);
    L v = b.neuron(b.input(0) + L(s));
    b.next_layer();
    for (std::size_t i = 1; i < depth; ++i) {
        v = b.neuron(v);
        b.next_layer();
    }
    return b.finish({v - L(s)});
}

// relu(v) - relu(-v) carried for `depth` layers.
template <class T>
Network<T> pair_identity(std::size_t depth) {
    using L = Lin<T>;
    NetBuilder<T> b(1, Activation::relu);
    L v = b.input(0);
    for (std::size_t i = 0; i < depth; ++i) {
        v = b.neuron(v) - b.neuron(-v);
        b.next_layer();
    }
    return b.finish({v});
}

template <class T>
AffineLayer<T> rows(std::size_t cols, const std::vector<std::vector<T>>& w, const std::vector<T>& bias) {
    AffineLayer<T> a(w.size(), cols);
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) a.w(i, j) = w[i][j];
        a.bias[i] = bias[i];
    }
    return a;
}

template <class T>
T abs_sum(const std::vector<T>& c) {
    T s(0);
    for (const auto& v : c) s += abs_of(v);
    return s;
}

// sum_j c_j u^j on u in [-1, 1] with sawtooth squares of n_s steps; width 8.
template <class T>
Network<T> polynomial_net(const std::vector<T>& c, int n_s) {
    const T zero(0), one(1);
    T half(1);
    half /= 2;
    const std::size_t m = c.empty() ? 0 : c.size() - 1;
    const T c0 = c.empty() ? zero : c[0];
    const T c1 = m >= 1 ? c[1] : zero;
    if (m <= 1) return postcompose(shifted_identity<T>(1, one), rows<T>(1, {{c1}}, {c0}));
    const T K = abs_sum(c) + one;
    const std::size_t D = static_cast<std::size_t>(n_s) + 3;
    auto sq = sawtooth_net<T>(n_s);
    auto core = stack<T>({sq, sq, shifted_identity<T>(D, one), shifted_identity<T>(D, K)});
    Network<T> net;
    for (std::size_t k = 2; k <= m; ++k) {
        // inputs (x, pw = x^{k-1}, acc) -> (x, x^k, acc + c_{k-1} x^{k-1})
        auto pre = rows<T>(3, {{half, half, zero}, {half, T(-half), zero}, {one, zero, zero}, {zero, c[k - 1], one}},
                           {zero, zero, zero, zero});
        auto post = rows<T>(4, {{zero, zero, one, zero}, {one, T(-one), zero, zero}, {zero, zero, zero, one}},
                            {zero, zero, zero});
        auto blk = postcompose(precompose(core, pre), post);
        net = k == 2 ? precompose(blk, rows<T>(1, {{one}, {one}, {zero}}, {zero, zero, c0})) : chain(net, blk);
    }
    return postcompose(net, rows<T>(3, {{zero, c[m], one}}, {zero}));
}

int steps_for(double target) {
    // 4^{-n} <= target
    int n = 0;
    while (std::pow(4.0, -n) > target) ++n;
    return n;
}

}  // namespace

std::pair<Network<Rational>, ApproxReport> sawtooth_square_net(int n) {
    if (n < 0) throw ContractError("sawtooth square needs n >= 0");
    auto net = sawtooth_net<Rational>(n);
    auto d = from_rational_network<double>(net);
    SparseEvaluator<double> ev(d);
    auto pts = probe_points(-1, 1);
    double e = sup_error([&](double x) { return ev.eval1(x); }, [](double x) { return x * x; }, pts);
    ApproxReport r{"square (sawtooth, n = " + std::to_string(n) + ")", -1, 1, pts.size(), e,
                   std::pow(4.0, -n) + 1e-12, net.depth(), net.width()};
    return {net, r};
}

std::pair<Network<Rational>, ApproxReport> relu_polynomial_net(const std::vector<Rational>& coeffs, double eps) {
    if (!(eps > 0)) throw ContractError("polynomial net needs eps > 0");
    std::vector<Rational> c = coeffs;
    while (c.size() > 1 && sgn(c.back()) == 0) c.pop_back();
    const std::size_t m = c.empty() ? 0 : c.size() - 1;
    double C = 0;
    for (const auto& v : c) C = std::max(C, std::abs(v.get_d()));
    int n_s = 0;
    if (m >= 2) n_s = steps_for(eps / (2 * C * static_cast<double>(m) * static_cast<double>(m - 1)));
    auto net = polynomial_net<Rational>(c, n_s);
    SparseEvaluator<double> ev(from_rational_network<double>(net));
    auto poly = [&](double x) {
        double s = 0;
        for (std::size_t j = c.size(); j-- > 0;) s = s * x + c[j].get_d();
        return s;
    };
    auto pts = probe_points(-1, 1);
    double e = sup_error([&](double x) { return ev.eval1(x); }, poly, pts);
    ApproxReport r{"polynomial of degree " + std::to_string(m), -1, 1, pts.size(), e, eps, net.depth(), net.width()};
    return {net, r};
}

// ---------------------------------------------------------------------------
// width-11 approximation of a catalog activation

namespace {

const CertificateReport& cached_certificate(const ActivationSpec& act) {
    static std::map<int, CertificateReport> cache;
    auto it = cache.find(static_cast<int>(act.act));
    if (it != cache.end()) return it->second;
    std::vector<double> grid;
    for (int i = 0; i <= 160; ++i) grid.push_back(-20 + 0.25 * i);
    return cache[static_cast<int>(act.act)] = certificate_check(act, 40, grid);
}

// (x, acc) -> (l(x) + acc) in one layer; l from the catalog entry.
struct PwlParts {
    std::vector<double> bps, jumps;
    double value_at_0 = 0, left_slope = 0;
};

PwlParts pwl_parts(const Pwl1D& l) {
    PwlParts p;
    const auto& b = l.breakpoints();
    const auto& s = l.slopes();
    p.left_slope = s[0].get_d();
    for (std::size_t i = 0; i < b.size(); ++i) {
        p.bps.push_back(b[i].get_d());
        p.jumps.push_back(Rational(s[i + 1] - s[i]).get_d());
    }
    // l(x) = l(0) + left_slope * x + sum jumps * (relu(x - b) - relu(-b))
    p.value_at_0 = l(Rational(0)).get_d();
    return p;
}

Lin<double> emit_pwl(NetBuilder<double>& b, const Lin<double>& x, const Lin<double>& x_linear, const PwlParts& p) {
    Lin<double> v = Lin<double>(p.value_at_0) + p.left_slope * x_linear;
    for (std::size_t i = 0; i < p.bps.size(); ++i)
        v = v + p.jumps[i] * (b.neuron(x + Lin<double>(-p.bps[i])) - Lin<double>(std::max(0.0, -p.bps[i])));
    return v;
}

}  // namespace

std::pair<Network<double>, ApproxReport> relu_activation_approx_net(const ActivationSpec& act, double eps,
                                                                    ActivationApproxPlan* plan_out) {
    if (!(eps > 0 && eps < 1.0 / 3)) throw ContractError("activation approximation needs 0 < eps < 1/3");
    if (!act.envelope || !act.tail_bound) throw ContractError("certificate missing for '" + act.name() + "'");
    const auto& cert = cached_certificate(act);
    if (!cert.ok()) throw ContractError("certificate violated for '" + act.name() + "': " + cert.violations.front());

    ActivationApproxPlan plan;
    // I = [-T, T]: outside (and on the outer ramps) |rho - l| < eps / 2
    double T = 1;
    while (act.tail_bound(T - 1 + 1e-5) > eps / 2) T += 0.25;
    plan.half_width = T;
    plan.degree = 1;
    while (act.envelope(plan.degree + 1) > eps / 4) ++plan.degree;
    const int m = plan.degree;
    plan.square_steps = m >= 2 ? steps_for(eps / 4 / (2.0 * m * (m - 1))) : 0;
    const PwlParts l = pwl_parts(act.asymptotic);
    // |rho - l| <= 1 for gaussian, logistic, softplus and <= 2 for tanh; headroom for the polynomial error
    const double M = act.act == Activation::tanh ? 2.5 : 1.25;
    plan.product_steps = steps_for(eps / 8 / (2 * M));

    std::vector<double> centers;
    for (double a = -T + 1;; a += 2 - eps) {
        centers.push_back(a);
        if (a + 1 >= T) break;
    }
    plan.windows = centers.size();

    double rho_max = 0;
    for (double x = -T - 2; x <= T + 2; x += 0.01) rho_max = std::max(rho_max, std::abs(act(x)));
    const double KP = rho_max + 4, Ka = 2 * M + 2;
    const std::size_t Dp = static_cast<std::size_t>(plan.product_steps) + 3;
    auto sqp = sawtooth_net<double>(plan.product_steps);
    auto prod_core = stack<double>({sqp, sqp, pair_identity<double>(Dp), shifted_identity<double>(Dp, Ka)});
    // (tau, D, x, acc) -> (x, acc + tau * D)
    auto product = postcompose(
        precompose(prod_core, rows<double>(4, {{0.5, 0.5 / M, 0, 0}, {0.5, -0.5 / M, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}},
                                           {0, 0, 0, 0})),
        rows<double>(4, {{0, 0, 1, 0}, {M, -M, 0, 1}}, {0, 0}));

    Network<double> net;
    for (std::size_t w = 0; w < centers.size(); ++w) {
        const double a = centers[w];
        auto coef = act.taylor_coeffs(a, m + 1);
        auto poly = polynomial_net<double>(coef, plan.square_steps);
        const std::size_t dp = poly.depth();
        // (x, acc) -> (P(x - a), x, acc)
        auto stage1 = precompose(stack<double>({poly, pair_identity<double>(dp), shifted_identity<double>(dp, Ka)}),
                                 rows<double>(2, {{1, 0}, {1, 0}, {0, 1}}, {-a, 0, 0}));
        // (P, x, acc) -> (tau, P - l(x), x, acc)
        NetBuilder<double> b(3, Activation::relu);
        Lin<double> P = b.input(0), x = b.input(1), acc = b.input(2);
        const double lo = a - 1, hi = a + 1;
        Lin<double> r = (1 / eps) * x;
        Lin<double> tau = b.neuron(r + Lin<double>(-lo / eps)) - b.neuron(r + Lin<double>(-lo / eps - 1)) -
                          b.neuron(r + Lin<double>(-hi / eps + 1)) + b.neuron(r + Lin<double>(-hi / eps));
        Lin<double> xs = b.neuron(x) - b.neuron(-x);
        Lin<double> lv = emit_pwl(b, x, xs, l);
        Lin<double> Ps = b.neuron(P + Lin<double>(KP)) - Lin<double>(KP);
        Lin<double> as = b.neuron(acc + Lin<double>(Ka)) - Lin<double>(Ka);
        b.next_layer();
        auto stage2 = b.finish({tau, Ps - lv, xs, as});
        auto window = chain(chain(stage1, stage2), product);
        net = w == 0 ? precompose(window, rows<double>(1, {{1}, {0}}, {0, 0})) : chain(net, window);
    }
    {
        NetBuilder<double> b(2, Activation::relu);
        Lin<double> x = b.input(0), acc = b.input(1);
        Lin<double> xs = b.neuron(x) - b.neuron(-x);
        Lin<double> lv = emit_pwl(b, x, xs, l);
        Lin<double> as = b.neuron(acc + Lin<double>(Ka)) - Lin<double>(Ka);
        b.next_layer();
        net = chain(net, b.finish({lv + as}));
    }
    const double span = std::max(20.0, T + 5);
    SparseEvaluator<double> ev(net);
    auto pts = probe_points(-span, span);
    double e = sup_error([&](double x) { return ev.eval1(x); }, act, pts);
    if (plan_out) *plan_out = plan;
    ApproxReport r{act.name() + " (relu, eps = " + fmt(eps) + ")", -span, span, pts.size(), e, eps, net.depth(),
                   net.width()};
    return {net, r};
}

// ---------------------------------------------------------------------------
// transforms

namespace {

template <class T>
double row_sum_norm(const AffineLayer<T>& l) {
    double best = 0;
    for (std::size_t i = 0; i < l.rows; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < l.cols; ++j) s += std::abs(ScalarTraits<T>::to_double(l.w(i, j)));
        best = std::max(best, s);
    }
    return best;
}

// Lipschitz factor (sup norm) from the outputs of hidden layer k to the network output.
template <class T>
std::vector<double> amplifications(const Network<T>& net) {
    const std::size_t L = net.depth();
    std::vector<double> amp(L + 1, 1.0);
    for (std::size_t k = L; k-- > 0;) amp[k] = amp[k + 1] * row_sum_norm(net.layers()[k + 1]);
    return amp;  // amp[k] for hidden layer k+1 (0-based k)
}

std::vector<std::vector<double>> input_probes(std::size_t n0) {
    std::vector<std::vector<double>> xs;
    if (n0 == 1) {
        for (double x : probe_points(-1, 1)) xs.push_back({x});
        return xs;
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t c = 0; c < (std::size_t{1} << std::min<std::size_t>(n0, 10)); ++c) {
        std::vector<double> x(n0);
        for (std::size_t i = 0; i < n0; ++i) x[i] = (c >> i) & 1 ? 1.0 : -1.0;
        xs.push_back(x);
    }
    while (xs.size() < 11000) {
        std::vector<double> x(n0);
        for (auto& v : x) v = u(rng);
        xs.push_back(x);
    }
    return xs;
}

}  // namespace

std::pair<MpNetwork, ApproxReport> transform_relu_to_activation(const Network<Rational>& net, const ActivationSpec& act,
                                                                double eps, TransformDetails* details) {
    if (net.activation() != Activation::relu) throw ContractError("transform expects a relu network");
    if (!(eps > 0)) throw ContractError("transform needs eps > 0");
    const std::size_t L = net.depth();
    if (L == 0) throw ContractError("transform needs at least one hidden layer");
    const std::size_t n0 = net.input_dim();
    const double C = std::max(1e-300, net.max_abs_coefficient().get_d());
    const double N1 = static_cast<double>(std::max(net.width(), n0)) + 1;
    if (L > 12) throw BudgetExceeded("transform: depth beyond the supported cap of 12");

    // exact interval bounds of the pre-activations on [-1, 1]^{n0}
    std::vector<Rational> lo(n0, Rational(-1)), hi(n0, Rational(1));
    TransformDetails det;
    std::vector<int> ns;
    for (std::size_t k = 0; k < L; ++k) {
        const auto& layer = net.layers()[k];
        std::vector<Rational> nlo(layer.rows), nhi(layer.rows);
        Rational B = 0;
        for (std::size_t i = 0; i < layer.rows; ++i) {
            Rational a = layer.bias[i], c = layer.bias[i];
            for (std::size_t j = 0; j < layer.cols; ++j) {
                const Rational& w = layer.w(i, j);
                if (sgn(w) >= 0) {
                    a += w * lo[j];
                    c += w * hi[j];
                } else {
                    a += w * hi[j];
                    c += w * lo[j];
                }
            }
            B = std::max<Rational>(B, std::max<Rational>(abs(a), abs(c)));
            nlo[i] = sgn(a) > 0 ? a : Rational(0);
            nhi[i] = sgn(c) > 0 ? c : Rational(0);
        }
        lo = nlo;
        hi = nhi;
        TransformLayerInfo info;
        // factor 2 on the scale leaves room for the error of earlier blocks
        info.input_scale = sgn(B) > 0 ? 1 / (2 * B.get_d()) : 1.0;
        double n = std::pow(std::log(static_cast<double>(L) * std::pow(C * N1, static_cast<double>(k)) / eps), 2);
        info.n = std::max(1, static_cast<int>(std::ceil(n)));
        info.block_eps = 2.5 * std::exp(-std::sqrt(static_cast<double>(info.n)));
        det.layers.push_back(info);
        ns.push_back(info.n);
    }
    auto amp = amplifications(net);
    for (std::size_t k = 0; k < L; ++k) det.layers[k].amplification = amp[k + 1];

    unsigned bits = 0;
    for (int n : ns) bits = std::max(bits, bits_for_newman(n));
    MpNetwork out;
    out.digits10 = digits_for_bits(act.act, bits);
    {
        PrecisionGuard g(out.digits10);
        auto big = from_rational_network<BigFloat>(net);
        std::map<int, Network<BigFloat>> blocks;
        Network<BigFloat> acc;
        for (std::size_t k = 0; k < L; ++k) {
            int n = ns[k];
            if (!blocks.count(n)) blocks[n] = relu_block_mp(act.act, n, bits);
            const BigFloat s(det.layers[k].input_scale);
            const auto& layer = big.layers()[k];
            AffineLayer<BigFloat> in(1, 1), back(1, 1);
            in.w(0, 0) = s;
            back.w(0, 0) = BigFloat(1 / s);
            auto one = postcompose(precompose(blocks[n], in), back);
            auto lay = precompose(stack(std::vector<Network<BigFloat>>(layer.rows, one)), layer);
            acc = k == 0 ? lay : chain(acc, lay);
        }
        out.net = postcompose(acc, big.layers().back());
    }

    // block error: Newman's bound on |relu - R| plus the measured deviation of the block from R
    for (std::size_t k = 0; k < L; ++k) {
        MpNetwork blk;
        blk.digits10 = out.digits10;
        {
            PrecisionGuard g(blk.digits10);
            blk.net = relu_block_mp(act.act, ns[k], bits);
        }
        auto pts = probe_points(-1, 1, 2001, 0);
        auto ys = mp_eval_points(blk, pts);
        double dev = 0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            dev = std::max(dev, std::abs(ys[i] - newman_rational_reference(ns[k], pts[i])));
        det.layers[k].block_error = 1.5 * std::exp(-std::sqrt(static_cast<double>(ns[k]))) + dev;
        det.composed_bound += det.layers[k].amplification * det.layers[k].block_error / det.layers[k].input_scale;
    }

    auto xs = input_probes(n0);
    auto ys = mp_eval_many(out, xs);
    auto ref = from_rational_network<double>(net);
    double e = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) e = std::max(e, std::abs(ys[i] - ref.eval(xs[i])[0]));
    if (details) *details = det;
    ApproxReport r{"relu network -> " + act.name(), -1, 1, xs.size(), e, eps, out.net.depth(), out.net.width()};
    return {out, r};
}

std::pair<Network<double>, ApproxReport> transform_activation_to_relu(const Network<double>& net, double eps,
                                                                      TransformDetails* details) {
    if (!is_catalog(net.activation())) throw ContractError("transform expects a catalog activation");
    if (!(eps > 0)) throw ContractError("transform needs eps > 0");
    const std::size_t L = net.depth();
    if (L == 0) throw ContractError("transform needs at least one hidden layer");
    const ActivationSpec act = activation_spec(net.activation());
    auto amp = amplifications(net);
    TransformDetails det;
    Network<double> acc;
    std::map<double, std::pair<Network<double>, ApproxReport>> blocks;
    for (std::size_t k = 0; k < L; ++k) {
        TransformLayerInfo info;
        info.amplification = amp[k + 1];
        // catalog activations are 1-Lipschitz, so layer errors add up scaled by the later row sums
        info.block_eps = std::min(0.3, eps / (static_cast<double>(L) * std::max(info.amplification, 1e-12)));
        if (!blocks.count(info.block_eps)) blocks.emplace(info.block_eps, relu_activation_approx_net(act, info.block_eps));
        const auto& blk = blocks.at(info.block_eps);
        info.block_error = blk.second.max_abs_error;
        det.composed_bound += info.amplification * info.block_error;
        det.layers.push_back(info);
        const auto& layer = net.layers()[k];
        auto lay = precompose(stack(std::vector<Network<double>>(layer.rows, blk.first)), layer);
        acc = k == 0 ? lay : chain(acc, lay);
    }
    auto out = postcompose(acc, net.layers().back());
    SparseEvaluator<double> ev(out);
    PrecisionGuard g(30);
    auto ref = convert_network<BigFloat>(net, [](double v) { return BigFloat(v); });
    auto xs = input_probes(net.input_dim());
    double e = 0;
    for (const auto& x : xs) {
        std::vector<BigFloat> in(x.begin(), x.end());
        e = std::max(e, std::abs(ev.eval(x)[0] - ref.eval(in)[0].convert_to<double>()));
    }
    if (details) *details = det;
    ApproxReport r{act.name() + " network -> relu", -1, 1, xs.size(), e, eps, out.depth(), out.width()};
    return {out, r};
}

// ---------------------------------------------------------------------------
// certificates

CertificateReport certificate_check(const ActivationSpec& act, int n_max, const std::vector<double>& grid) {
    if (n_max < 1 || n_max > 40) throw ContractError("certificate check needs 1 <= n_max <= 40");
    CertificateReport r;
    r.act = act.act;
    r.n_max = n_max;
    r.grid_size = grid.size();
    r.rho_at_zero = act(0);
    if (std::abs(r.rho_at_zero) > 1) r.violations.push_back("|rho(0)| > 1");
    for (double x : grid) {
        auto c = act.taylor_coeffs(x, n_max + 1);
        for (int n = 1; n <= n_max; ++n) {
            double v = std::abs(c[static_cast<std::size_t>(n)]);
            double env = act.envelope(n);
            r.max_normalized = std::max(r.max_normalized, v);
            r.max_envelope_ratio = std::max(r.max_envelope_ratio, v / env);
            if (v > 1 + kSlack)
                r.violations.push_back("n = " + std::to_string(n) + ", x = " + fmt(x) + ": normalized derivative " +
                                       fmt(v) + " > 1");
            if (v > env * (1 + kSlack))
                r.violations.push_back("n = " + std::to_string(n) + ", x = " + fmt(x) + ": " + fmt(v) +
                                       " above the envelope " + fmt(env));
        }
    }
    return r;
}

}  // namespace relux
