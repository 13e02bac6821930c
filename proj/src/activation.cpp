#include "relux/activation_math.hpp"

#include <map>
#include <mutex>
#include <tuple>

namespace relux {

namespace {

using Poly = std::vector<mpz_class>;

// p'(s) * (s - s^2) for the logistic family, p'(t) * (1 - t^2) for tanh.
Poly next_poly(const Poly& p, bool tanh_family) {
    Poly d(p.size() > 1 ? p.size() - 1 : 1, 0);
    for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * static_cast<unsigned long>(i);
    Poly r(d.size() + 2, 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (tanh_family) {
            r[i] += d[i];
            r[i + 2] -= d[i];
        } else {
            r[i + 1] += d[i];
            r[i + 2] -= d[i];
        }
    }
    while (r.size() > 1 && r.back() == 0) r.pop_back();
    return r;
}

const std::vector<Poly>& derivative_polys(bool tanh_family, std::size_t n) {
    static std::mutex mu;
    static std::vector<Poly> cache[2];
    std::lock_guard<std::mutex> lock(mu);
    auto& c = cache[tanh_family ? 1 : 0];
    if (c.empty()) c.push_back(Poly{0, 1});
    while (c.size() <= n) c.push_back(next_poly(c.back(), tanh_family));
    return c;
}

BigFloat horner(const Poly& p, const BigFloat& s) {
    BigFloat r(0);
    for (std::size_t i = p.size(); i-- > 0;) {
        r *= s;
        r += BigFloat(p[i].get_mpz_t());
    }
    return r;
}

BigFloat logistic_mp(const BigFloat& x) { return 1 / (1 + exp(-x)); }

struct Expansion {
    BigFloat center;
    std::vector<BigFloat> coef;
};

struct CacheKey {
    int act;
    unsigned digits;
    bool operator<(const CacheKey& o) const { return std::tie(act, digits) < std::tie(o.act, o.digits); }
};

std::vector<Expansion>& expansions_for(Activation a) {
    thread_local std::map<CacheKey, std::vector<Expansion>> cache;
    thread_local CacheKey last{-1, 0};
    thread_local std::vector<Expansion>* last_slot = nullptr;
    unsigned digits = BigFloat::default_precision();
    CacheKey key{static_cast<int>(a), digits};
    if (last_slot && !(key < last) && !(last < key)) return *last_slot;
    auto& slot = cache[key];
    last = key;
    last_slot = &slot;
    if (slot.empty()) {
        const int count = static_cast<int>(digits * 3.33 / 16.0) + 8;
        std::vector<BigFloat> centers{BigFloat(catalog_alpha(a)), catalog_deriv_point_mp(a)};
        for (auto& c : centers) slot.push_back({c, taylor_coeffs_mp(a, c, count)});
    }
    return slot;
}

}  // namespace

double catalog_alpha(Activation a) {
    switch (a) {
        case Activation::logistic:
        case Activation::tanh:
        case Activation::gaussian: return 1.0;
        case Activation::softplus: return 0.0;
        default: throw ContractError("no square point for activation '" + activation_name(a) + "'");
    }
}

double catalog_deriv_point(Activation a) {
    if (a == Activation::gaussian) return std::sqrt(0.5);
    if (is_catalog(a)) return 0.0;
    throw ContractError("no identity point for activation '" + activation_name(a) + "'");
}

BigFloat catalog_deriv_point_mp(Activation a) {
    if (a == Activation::gaussian) return sqrt(BigFloat(0.5));
    return BigFloat(catalog_deriv_point(a));
}

BigFloat activate_direct(Activation a, const BigFloat& x) {
    switch (a) {
        case Activation::relu: return x.sign() > 0 ? x : BigFloat(0);
        case Activation::square: return x * x;
        case Activation::gaussian: return exp(-x * x);
        case Activation::logistic: return logistic_mp(x);
        case Activation::tanh: return tanh(x);
        case Activation::softplus: return x.sign() > 0 ? BigFloat(x + log1p(exp(-x))) : BigFloat(log1p(exp(x)));
    }
    return BigFloat(0);
}

std::vector<BigFloat> taylor_coeffs_mp(Activation a, const BigFloat& c0, int count) {
    if (!is_catalog(a)) throw ContractError("taylor coefficients need a catalog activation");
    std::vector<BigFloat> out;
    if (count <= 0) return out;
    const unsigned outer = BigFloat::default_precision();
    std::vector<BigFloat> work;
    {
        // The integer derivative polynomials cancel heavily; work with headroom.
        PrecisionGuard g(outer + static_cast<unsigned>(count) + 20);
        BigFloat c(c0);
        if (a == Activation::gaussian) {
            work.push_back(exp(-c * c));
            if (count > 1) work.push_back(-2 * c * work[0]);
            for (int n = 1; n + 1 < count; ++n) work.push_back((-2 * c * work[n] - 2 * work[n - 1]) / (n + 1));
        } else {
            const bool th = a == Activation::tanh;
            const BigFloat s = th ? BigFloat(tanh(c)) : logistic_mp(c);
            const auto& polys = derivative_polys(th, static_cast<std::size_t>(count));
            BigFloat fact(1);
            for (int n = 0; n < count; ++n) {
                if (n > 0) fact *= n;
                if (a == Activation::softplus) {
                    if (n == 0)
                        work.push_back(activate_direct(a, c));
                    else
                        work.push_back(horner(polys[n - 1], s) / fact);
                } else {
                    work.push_back(horner(polys[n], s) / fact);
                }
            }
        }
    }
    for (auto& w : work) out.emplace_back(w, outer);
    for (auto& w : out) w.precision(outer);
    return out;
}

std::vector<double> taylor_coeffs(Activation a, double c, int count) {
    PrecisionGuard g(40);
    auto mp = taylor_coeffs_mp(a, BigFloat(c), count);
    std::vector<double> out;
    for (auto& v : mp) out.push_back(v.convert_to<double>());
    return out;
}

BigFloat activate(Activation a, const BigFloat& x) {
    if (!is_catalog(a)) return activate_direct(a, x);
    // Blocks feed the activation points alpha + tiny; a short Taylor series
    // there is exact to working precision and far cheaper than exp.
    struct Scratch {
        mpfr_t t, r;
        Scratch() {
            mpfr_init2(t, 64);
            mpfr_init2(r, 64);
        }
        ~Scratch() {
            mpfr_clear(t);
            mpfr_clear(r);
        }
    };
    thread_local Scratch sc;
    const mpfr_srcptr xs = x.backend().data();
    const mpfr_prec_t bits = mpfr_get_prec(xs);
    if (mpfr_get_prec(sc.t) != bits) {
        mpfr_set_prec(sc.t, bits);
        mpfr_set_prec(sc.r, bits);
    }
    for (const auto& e : expansions_for(a)) {
        mpfr_sub(sc.t, xs, e.center.backend().data(), MPFR_RNDN);
        if (mpfr_zero_p(sc.t)) return e.coef[0];
        long ex = mpfr_get_exp(sc.t);  // |t| < 2^ex
        if (ex > -16) continue;
        long terms = static_cast<long>(bits) / (-ex) + 2;
        if (terms > static_cast<long>(e.coef.size())) continue;
        mpfr_set(sc.r, e.coef[static_cast<std::size_t>(terms - 1)].backend().data(), MPFR_RNDN);
        for (long j = terms - 2; j >= 0; --j) {
            mpfr_mul(sc.r, sc.r, sc.t, MPFR_RNDN);
            mpfr_add(sc.r, sc.r, e.coef[static_cast<std::size_t>(j)].backend().data(), MPFR_RNDN);
        }
        BigFloat out;
        mpfr_set(out.backend().data(), sc.r, MPFR_RNDN);
        return out;
    }
    return activate_direct(a, x);
}

}  // namespace relux
