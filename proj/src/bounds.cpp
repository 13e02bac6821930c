#include "relux/bounds.hpp"

#include "relux/errors.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace relux {

BigInt binom(long a, long b) {
    if (a < 0 || b < 0 || b > a) return 0;
    BigInt r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(a), static_cast<unsigned long>(b));
    return r;
}

std::pair<BigInt, BigInt> r_exact_1d(const Design& design) {
    if (design.dims.size() < 3) throw ContractError("design needs at least one hidden layer");
    if (design.n0() != 1) throw ContractError("r_exact_1d needs n_0 = 1");
    BigInt R = 1, prod = 1;
    for (int l = 1; l <= design.L(); ++l) {
        int n = design.hidden(l);
        if (n < 2) throw ContractError("hidden width " + std::to_string(n) + " < 2 at layer " + std::to_string(l));
        R += n * prod;
        prod *= n + (n > 2 ? 1 : 0);
    }
    return {R, prod};
}

BigInt zaslavsky_count(long m, long d) {
    if (m < 0 || d < 1) throw ContractError("zaslavsky_count needs m >= 0, d >= 1");
    BigInt s = 0;
    for (long i = 0; i <= d; ++i) s += binom(m, i);
    return s;
}

BigInt one_hidden_layer_count(long n0, long n1) {
    if (n0 < 1 || n1 < 1) throw ContractError("one_hidden_layer_count needs n0, n1 >= 1");
    BigInt s = 0;
    for (long i = 0; i <= std::min(n0, n1); ++i) s += binom(n1, i);
    return s;
}

BigInt f_jd(long j, long d, long n) {
    if (j < 0 || d < 0 || n < 0) throw ContractError("f_jd needs j, d, n >= 0");
    if (d == 0) return j == 0 ? 1 : 0;
    if (j < d) return binom(n, j);
    return binom(n - 2 * j + 2 * d - 1, d - 1) + binom(n - 2 * j + 2 * d - 2, d - 1);
}

std::string variant_name(BoundVariant v) {
    switch (v) {
        case BoundVariant::corrected: return "corrected";
        case BoundVariant::verbatim: return "verbatim";
        case BoundVariant::previous: return "previous";
    }
    return "?";
}

BoundVariant parse_variant(const std::string& s) {
    if (s == "corrected") return BoundVariant::corrected;
    if (s == "verbatim") return BoundVariant::verbatim;
    if (s == "previous") return BoundVariant::previous;
    throw ParseError("unknown bound variant '" + s + "'");
}

namespace {

struct Enumerator {
    const Design& design;
    BoundVariant variant;
    std::size_t max_terms;
    std::map<std::pair<int, int>, BigInt> memo;
    BoundBreakdown* out = nullptr;

    int L() const { return design.L(); }

    int j_max(int l, int d) const {
        int n = design.hidden(l);
        if (variant == BoundVariant::previous || l == L()) return std::min(n, d);
        return (n + std::min(n, d)) / 2;
    }

    BigInt factor(int l, int j, int d) const {
        int n = design.hidden(l);
        if (variant == BoundVariant::previous) return binom(n, j);
        if (variant == BoundVariant::corrected && l == L()) return binom(n, j);
        return f_jd(j, d, n);
    }

    // Bound for layers l..L starting from a d-dimensional image.
    BigInt value(int l, int d) {
        if (l > L()) return 1;
        auto key = std::make_pair(l, d);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        BigInt s = 0;
        int n = design.hidden(l);
        for (int j = 0; j <= j_max(l, d); ++j) {
            BigInt f = factor(l, j, d);
            if (f == 0) continue;
            s += f * value(l + 1, std::min(d, n - j));
        }
        memo.emplace(key, s);
        return s;
    }

    void list(int l, int d, BoundTerm& t) {
        if (out->terms_truncated) return;
        if (l > L()) {
            if (out->terms.size() >= max_terms) {
                out->terms_truncated = true;
                out->terms.clear();
                return;
            }
            out->terms.push_back(t);
            return;
        }
        int n = design.hidden(l);
        for (int j = 0; j <= j_max(l, d); ++j) {
            BigInt f = factor(l, j, d);
            if (f == 0) continue;
            t.j.push_back(j);
            t.d.push_back(d);
            t.factors.push_back(f);
            BigInt saved = t.product;
            t.product *= f;
            list(l + 1, std::min(d, n - j), t);
            t.product = saved;
            t.j.pop_back();
            t.d.pop_back();
            t.factors.pop_back();
        }
    }
};

template <class V>
std::string tuple_str(const V& v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    os << ')';
    return os.str();
}

}  // namespace

std::string BoundBreakdown::to_csv() const {
    std::ostringstream os;
    os << "j_tuple,d_tuple,factor,product\n";
    for (const auto& t : terms) {
        std::ostringstream f;
        for (std::size_t i = 0; i < t.factors.size(); ++i) f << (i ? "*" : "") << t.factors[i].get_str();
        os << '"' << tuple_str(t.j) << "\",\"" << tuple_str(t.d) << "\"," << f.str() << ',' << t.product.get_str()
           << '\n';
    }
    return os.str();
}

BoundBreakdown upper_bound_general(const Design& design, BoundVariant variant, std::size_t max_terms) {
    if (design.dims.size() < 3) throw ContractError("upper_bound_general needs L >= 1");
    for (int v : design.dims)
        if (v < 1) throw ContractError("design widths must be positive");
    BoundBreakdown b;
    b.design = design;
    b.variant = variant;
    Enumerator e{design, variant, max_terms, {}, &b};
    b.value = e.value(1, design.n0());
    BoundTerm t;
    t.product = 1;
    if (max_terms > 0) e.list(1, design.n0(), t);
    else b.terms_truncated = true;
    return b;
}

Design bottleneck_normalize(const Design& design) {
    if (design.n0() != 1) throw ContractError("bottleneck_normalize needs n_0 = 1");
    std::vector<int> wide, narrow;
    for (int l = 1; l <= design.L(); ++l) {
        int n = design.hidden(l);
        if (n < 2) throw ContractError("hidden widths must be >= 2");
        (n == 2 ? narrow : wide).push_back(n);
    }
    std::vector<int> dims{1};
    dims.insert(dims.end(), wide.begin(), wide.end());
    dims.insert(dims.end(), narrow.begin(), narrow.end());
    dims.push_back(design.outputs());
    return Design(dims);
}

std::pair<Design, BigInt> optimal_design(int budget) {
    if (budget < 2) throw ContractError("optimal_design needs a budget of at least 2 neurons");
    std::pair<Design, BigInt> best{Design(), -1};
    for (int k = 0; k <= 2; ++k) {
        int rest = budget - 2 * k;
        if (rest < 0 || rest % 3 != 0) continue;
        std::vector<int> dims{1};
        dims.insert(dims.end(), rest / 3, 3);
        dims.insert(dims.end(), k, 2);
        dims.push_back(1);
        Design d(dims);
        BigInt R = r_exact_1d(d).first;
        if (R > best.second) best = {d, R};
    }
    return best;
}

BigInt depth_efficiency_bound(long N, long L, long n0) {
    if (N < 1 || L < 1 || n0 < 1) throw ContractError("depth_efficiency_bound needs N, L, n0 >= 1");
    BigInt p, r;
    mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(N), static_cast<unsigned long>(n0));
    p += 1;
    mpz_pow_ui(r.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(L));
    return r;
}

}  // namespace relux
