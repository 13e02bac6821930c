#include "relux/compilend.hpp"

#include "relux/builder.hpp"
#include "relux/errors.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace relux {

Rational AffineN::operator()(const PointN& x) const {
    Rational s = c;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (sgn(a[i]) != 0) s += a[i] * x[i];
    return s;
}

namespace {

std::string point_str(const PointN& x) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i].get_str();
    os << ')';
    return os.str();
}

// Inverse of a square rational matrix; nullopt when singular.
std::optional<std::vector<std::vector<Rational>>> invert(std::vector<std::vector<Rational>> m) {
    const std::size_t n = m.size();
    std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && sgn(m[piv][col]) == 0) ++piv;
        if (piv == n) return std::nullopt;
        std::swap(m[piv], m[col]);
        std::swap(inv[piv], inv[col]);
        Rational d = m[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || sgn(m[r][col]) == 0) continue;
            Rational f = m[r][col];
            for (std::size_t j = 0; j < n; ++j) {
                m[r][j] -= f * m[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

std::vector<PointN> simplex_points(const PwlSimplicial& f, std::size_t s) {
    std::vector<PointN> pts;
    for (auto v : f.simplices[s]) pts.push_back(f.vertices[v]);
    return pts;
}

bool in_bbox(const std::vector<PointN>& pts, const PointN& x) {
    for (std::size_t k = 0; k < x.size(); ++k) {
        bool below = true, above = true;
        for (const auto& p : pts) {
            if (!(x[k] < p[k])) below = false;
            if (!(x[k] > p[k])) above = false;
        }
        if (below || above) return false;
    }
    return true;
}

bool inside(const std::vector<PointN>& simplex, const PointN& x) {
    if (!in_bbox(simplex, x)) return false;
    for (const auto& l : barycentric_coordinates(simplex, x))
        if (sgn(l) < 0) return false;
    return true;
}

}  // namespace

std::vector<AffineN> barycentric_functionals(const std::vector<PointN>& simplex) {
    const std::size_t n = simplex.empty() ? 0 : simplex[0].size();
    if (simplex.size() != n + 1) throw ContractError("simplex in R^" + std::to_string(n) + " needs n+1 vertices");
    std::vector<std::vector<Rational>> m(n + 1, std::vector<Rational>(n + 1));
    for (std::size_t j = 0; j <= n; ++j) {
        if (simplex[j].size() != n) throw DimensionMismatch("simplex vertices of mixed dimension");
        for (std::size_t k = 0; k < n; ++k) m[k][j] = simplex[j][k];
        m[n][j] = 1;
    }
    auto inv = invert(m);
    if (!inv) throw ContractError("degenerate simplex");
    std::vector<AffineN> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        out[i].a.assign((*inv)[i].begin(), (*inv)[i].begin() + static_cast<long>(n));
        out[i].c = (*inv)[i][n];
    }
    return out;
}

std::vector<Rational> barycentric_coordinates(const std::vector<PointN>& simplex, const PointN& x) {
    std::vector<Rational> l;
    for (const auto& f : barycentric_functionals(simplex)) l.push_back(f(x));
    return l;
}

std::vector<AffineN> barycentric_decompose(const std::vector<PointN>& simplex, const AffineN& f) {
    auto lam = barycentric_functionals(simplex);
    std::vector<AffineN> out;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        Rational v = f(simplex[i]);
        AffineN g = lam[i];
        for (auto& c : g.a) c *= v;
        g.c *= v;
        out.push_back(std::move(g));
    }
    return out;
}

// ---------------------------------------------------------------------------
// PwlSimplicial

std::vector<std::size_t> PwlSimplicial::star(std::size_t p) const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < simplices.size(); ++i)
        if (std::find(simplices[i].begin(), simplices[i].end(), p) != simplices[i].end()) s.push_back(i);
    return s;
}

PointN PwlSimplicial::barycenter(std::size_t s) const {
    PointN c(static_cast<std::size_t>(dim), Rational(0));
    for (auto v : simplices[s])
        for (int k = 0; k < dim; ++k) c[k] += vertices[v][k];
    for (auto& x : c) x /= static_cast<long>(simplices[s].size());
    return c;
}

std::optional<std::size_t> PwlSimplicial::locate(const PointN& x) const {
    if (static_cast<int>(x.size()) != dim) throw DimensionMismatch("point has the wrong dimension");
    for (std::size_t s = 0; s < simplices.size(); ++s)
        if (inside(simplex_points(*this, s), x)) return s;
    return std::nullopt;
}

Rational PwlSimplicial::operator()(const PointN& x) const {
    auto s = locate(x);
    if (!s) return 0;
    auto pts = simplex_points(*this, *s);
    auto l = barycentric_coordinates(pts, x);
    Rational v = 0;
    for (std::size_t i = 0; i < l.size(); ++i) v += l[i] * values[simplices[*s][i]];
    return v;
}

std::vector<std::size_t> PwlSimplicial::boundary_vertices() const {
    std::map<std::vector<std::size_t>, int> facets;
    for (const auto& s : simplices)
        for (std::size_t drop = 0; drop < s.size(); ++drop) {
            std::vector<std::size_t> f;
            for (std::size_t i = 0; i < s.size(); ++i)
                if (i != drop) f.push_back(s[i]);
            std::sort(f.begin(), f.end());
            ++facets[f];
        }
    std::vector<std::size_t> out;
    for (const auto& [f, c] : facets)
        if (c == 1) out.insert(out.end(), f.begin(), f.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool PwlSimplicial::boundary_is_zero() const {
    for (auto v : boundary_vertices())
        if (sgn(values[v]) != 0) return false;
    return true;
}

void PwlSimplicial::validate() const {
    if (dim < 1) throw ContractError("complex dimension must be >= 1");
    if (values.size() != vertices.size()) throw ContractError("one value per vertex required");
    for (std::size_t v = 0; v < vertices.size(); ++v)
        if (static_cast<int>(vertices[v].size()) != dim)
            throw ContractError("vertex " + std::to_string(v) + " has the wrong dimension");
    std::vector<std::vector<AffineN>> lam;
    for (std::size_t s = 0; s < simplices.size(); ++s) {
        const auto& sx = simplices[s];
        if (static_cast<int>(sx.size()) != dim + 1)
            throw ContractError("simplex " + std::to_string(s) + " needs " + std::to_string(dim + 1) + " vertices");
        for (auto v : sx)
            if (v >= vertices.size()) throw ContractError("simplex " + std::to_string(s) + " has a bad vertex index");
        try {
            lam.push_back(barycentric_functionals(simplex_points(*this, s)));
        } catch (const ContractError&) {
            throw ContractError("simplex " + std::to_string(s) + " is degenerate");
        }
    }
    // facets: at most two simplices, on opposite sides
    std::map<std::vector<std::size_t>, std::vector<std::pair<std::size_t, std::size_t>>> facets;
    for (std::size_t s = 0; s < simplices.size(); ++s)
        for (std::size_t drop = 0; drop < simplices[s].size(); ++drop) {
            std::vector<std::size_t> f;
            for (std::size_t i = 0; i < simplices[s].size(); ++i)
                if (i != drop) f.push_back(simplices[s][i]);
            std::sort(f.begin(), f.end());
            facets[f].emplace_back(s, drop);
        }
    for (const auto& [f, users] : facets) {
        if (users.size() > 2) throw ContractError("a facet is shared by more than two simplices");
        if (users.size() == 2) {
            auto [a, da] = users[0];
            auto [b, db] = users[1];
            if (!(sgn(lam[a][da](vertices[simplices[b][db]])) < 0))
                throw ContractError("simplices " + std::to_string(a) + " and " + std::to_string(b) +
                                    " lie on the same side of their shared facet");
        }
    }
    // no vertex inside a foreign simplex, no barycenter in two simplices
    for (std::size_t s = 0; s < simplices.size(); ++s) {
        auto pts = simplex_points(*this, s);
        for (std::size_t v = 0; v < vertices.size(); ++v) {
            if (std::find(simplices[s].begin(), simplices[s].end(), v) != simplices[s].end()) continue;
            if (!in_bbox(pts, vertices[v])) continue;
            bool in = true;
            for (const auto& l : lam[s])
                if (sgn(l(vertices[v])) < 0) in = false;
            if (in) throw ContractError("vertex " + std::to_string(v) + " lies in simplex " + std::to_string(s));
        }
        for (std::size_t t = 0; t < simplices.size(); ++t) {
            if (t == s) continue;
            PointN c = barycenter(t);
            if (!in_bbox(pts, c)) continue;
            bool in = true;
            for (const auto& l : lam[s])
                if (sgn(l(c)) < 0) in = false;
            if (in) throw ContractError("simplices " + std::to_string(s) + " and " + std::to_string(t) + " overlap");
        }
    }
    if (compact_support && !boundary_is_zero()) throw ContractError("compact_support claimed but a boundary value is nonzero");
}

Json pwl_simplicial_to_json(const PwlSimplicial& f) {
    Json verts = Json::array(), simp = Json::array(), vals = Json::array();
    for (const auto& v : f.vertices) {
        Json p = Json::array();
        for (const auto& c : v) p.push_back(format_rational(c));
        verts.push_back(p);
    }
    for (const auto& s : f.simplices) simp.push_back(s);
    for (const auto& v : f.values) vals.push_back(format_rational(v));
    return {{"dim", f.dim}, {"vertices", verts}, {"simplices", simp}, {"values", vals}, {"compact_support", f.compact_support}};
}

PwlSimplicial pwl_simplicial_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("simplicial document must be an object");
    for (const char* k : {"dim", "vertices", "simplices", "values"})
        if (!j.contains(k)) throw ParseError(std::string("field '") + k + "': missing");
    PwlSimplicial f;
    if (!j["dim"].is_number_integer()) throw ParseError("field 'dim': expected an integer");
    f.dim = j["dim"].get<int>();
    for (std::size_t i = 0; i < j["vertices"].size(); ++i) {
        const auto& v = j["vertices"][i];
        if (!v.is_array()) throw ParseError("vertices[" + std::to_string(i) + "]: expected an array");
        PointN p;
        for (std::size_t k = 0; k < v.size(); ++k)
            p.push_back(rational_from_json(v[k], "vertices[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
        f.vertices.push_back(p);
    }
    for (std::size_t i = 0; i < j["simplices"].size(); ++i) {
        const auto& s = j["simplices"][i];
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (!s[k].is_number_unsigned())
                throw ParseError("simplices[" + std::to_string(i) + "][" + std::to_string(k) + "]: expected an index");
            idx.push_back(s[k].get<std::size_t>());
        }
        f.simplices.push_back(idx);
    }
    for (std::size_t i = 0; i < j["values"].size(); ++i)
        f.values.push_back(rational_from_json(j["values"][i], "values[" + std::to_string(i) + "]"));
    f.compact_support = j.value("compact_support", false);
    try {
        f.validate();
    } catch (const ContractError& e) {
        throw ParseError(e.what());
    }
    return f;
}

PwlSimplicial kuhn_grid_interpolant(const GridSampler& sampler, int n0, int r) {
    if (n0 < 1) throw ContractError("kuhn grid needs n0 >= 1");
    if (r < 1) throw ContractError("kuhn grid needs resolution >= 1");
    PwlSimplicial f;
    f.dim = n0;
    const std::size_t side = static_cast<std::size_t>(r) + 1;
    std::size_t count = 1;
    for (int k = 0; k < n0; ++k) count *= side;
    auto index_of = [&](const std::vector<int>& m) {
        std::size_t idx = 0, mul = 1;
        for (int k = 0; k < n0; ++k) {
            idx += static_cast<std::size_t>(m[k]) * mul;
            mul *= side;
        }
        return idx;
    };
    for (std::size_t idx = 0; idx < count; ++idx) {
        PointN p;
        std::size_t t = idx;
        for (int k = 0; k < n0; ++k) {
            p.push_back(make_rational(static_cast<long>(t % side), r));
            t /= side;
        }
        f.values.push_back(sampler(p));
        f.vertices.push_back(std::move(p));
    }
    std::size_t cubes = 1;
    for (int k = 0; k < n0; ++k) cubes *= static_cast<std::size_t>(r);
    for (std::size_t c = 0; c < cubes; ++c) {
        std::vector<int> corner(n0);
        std::size_t t = c;
        for (int k = 0; k < n0; ++k) {
            corner[k] = static_cast<int>(t % static_cast<std::size_t>(r));
            t /= static_cast<std::size_t>(r);
        }
        std::vector<int> perm(n0);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            std::vector<std::size_t> s{index_of(corner)};
            auto m = corner;
            for (int i = 0; i < n0; ++i) {
                ++m[perm[i]];
                s.push_back(index_of(m));
            }
            f.simplices.push_back(std::move(s));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    f.compact_support = f.boundary_is_zero();
    return f;
}

// ---------------------------------------------------------------------------
// network assembly

namespace {

using LinQ = Lin<Rational>;

// Fixed-width layer writer: 2n input-storage neurons, optional global and
// partial sum pairs, then up to 2 compute neurons; every layer padded to the
// full width.
class Emitter {
public:
    Emitter(int n, bool sums) : n_(n), sums_(sums), b_(static_cast<std::size_t>(n), Activation::relu) {
        for (int i = 0; i < n; ++i) x_.push_back(b_.input(static_cast<std::size_t>(i)));
    }

    std::size_t width() const { return static_cast<std::size_t>(2 * n_ + (sums_ ? 6 : 2)); }
    const std::vector<LinQ>& x() const { return x_; }

    LinQ affine(const AffineN& f) const {
        LinQ s(f.c);
        for (int i = 0; i < n_; ++i)
            if (sgn(f.a[i]) != 0) s += f.a[i] * x_[i];
        return s;
    }

    // One layer; returns the outputs of the compute neurons.
    std::vector<LinQ> layer(const std::vector<LinQ>& compute) {
        if (compute.size() > 2) throw InternalError("more than 2 compute neurons requested");
        std::vector<LinQ> nx;
        for (int i = 0; i < n_; ++i) {
            LinQ p = b_.neuron(x_[i]);
            LinQ m = b_.neuron(-x_[i]);
            nx.push_back(p - m);
        }
        LinQ ng, np;
        if (sums_) {
            ng = b_.neuron(global) - b_.neuron(-global);
            np = b_.neuron(partial) - b_.neuron(-partial);
        }
        std::vector<LinQ> outs;
        for (const auto& c : compute) outs.push_back(b_.neuron(c));
        b_.next_layer(width());
        x_ = nx;
        global = ng;
        partial = np;
        ++layers_;
        return outs;
    }

    // relu(min_i fns_i) via the running minimum l_1 - U with U >= 0.
    LinQ min_chain(const std::vector<AffineN>& fns) {
        LinQ U;
        for (std::size_t s = 1; s < fns.size(); ++s) {
            LinQ u = affine(fns[0]) - U - affine(fns[s]);
            auto o = s == 1 ? layer({u}) : layer({U, u});
            U = s == 1 ? o[0] : o[0] + o[1];
        }
        return layer({affine(fns[0]) - U})[0];
    }

    std::size_t layers() const { return layers_; }
    Network<Rational> finish(const LinQ& out) { return b_.finish({out}); }

    LinQ global;
    LinQ partial;

private:
    int n_;
    bool sums_;
    NetBuilder<Rational> b_;
    std::vector<LinQ> x_;
    std::size_t layers_ = 0;
};

std::vector<AffineN> dedup(const std::vector<AffineN>& fs) {
    std::vector<AffineN> out;
    for (const auto& f : fs)
        if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    return out;
}

// How f(p) * hat_p gets computed.
struct VertexPlan {
    std::size_t vertex = 0;
    Rational value;
    bool fast = false;
    std::vector<std::vector<AffineN>> chains;  // fast: one chain; general: one per edge
    std::size_t star_size = 0;

    std::size_t layers() const {
        std::size_t l = 0;
        for (const auto& c : chains) l += c.size();
        return fast ? l : l + 1;
    }

    static Rational relu_min(const std::vector<AffineN>& fns, const PointN& x) {
        Rational m = fns[0](x);
        for (std::size_t i = 1; i < fns.size(); ++i) {
            Rational v = fns[i](x);
            if (v < m) m = v;
        }
        return sgn(m) > 0 ? m : Rational(0);
    }

    Rational eval(const PointN& x) const {
        if (fast) return value * relu_min(chains[0], x);
        Rational s = 1;
        for (const auto& c : chains) s -= relu_min(c, x);
        return sgn(s) > 0 ? value * s : Rational(0);
    }
};

// Probe set around p: p, its link, edge midpoints, reflected and extended
// edge points and the barycenters of its star.
std::vector<PointN> probes(const PwlSimplicial& f, std::size_t p, const std::vector<std::size_t>& star) {
    std::vector<PointN> out{f.vertices[p]};
    std::vector<std::size_t> link;
    for (auto s : star) {
        out.push_back(f.barycenter(s));
        for (auto q : f.simplices[s])
            if (q != p) link.push_back(q);
    }
    std::sort(link.begin(), link.end());
    link.erase(std::unique(link.begin(), link.end()), link.end());
    const auto& P = f.vertices[p];
    for (auto q : link) {
        const auto& Q = f.vertices[q];
        PointN mid(P.size()), far(P.size()), back(P.size());
        for (std::size_t k = 0; k < P.size(); ++k) {
            mid[k] = (P[k] + Q[k]) / 2;
            far[k] = P[k] + 2 * (Q[k] - P[k]);
            back[k] = P[k] - (Q[k] - P[k]);
        }
        out.push_back(Q);
        out.push_back(mid);
        out.push_back(far);
        out.push_back(back);
    }
    return out;
}

// nullopt off the complex when p is a boundary vertex: the hat has no
// prescribed extension there.
std::optional<Rational> hat_direct(const PwlSimplicial& f, std::size_t p, const PointN& x, bool boundary) {
    auto s = f.locate(x);
    if (!s) return boundary ? std::nullopt : std::optional<Rational>(Rational(0));
    const auto& sx = f.simplices[*s];
    auto it = std::find(sx.begin(), sx.end(), p);
    if (it == sx.end()) return 0;
    return barycentric_coordinates(simplex_points(f, *s), x)[static_cast<std::size_t>(it - sx.begin())];
}

bool is_boundary(const PwlSimplicial& f, std::size_t p) {
    auto b = f.boundary_vertices();
    return std::binary_search(b.begin(), b.end(), p);
}

std::optional<PointN> first_mismatch(const PwlSimplicial& f, const VertexPlan& plan, const std::vector<PointN>& pts,
                                     bool boundary) {
    for (const auto& x : pts) {
        auto h = hat_direct(f, plan.vertex, x, boundary);
        if (h && plan.eval(x) != plan.value * *h) return x;
    }
    return std::nullopt;
}

VertexPlan plan_vertex(const PwlSimplicial& f, std::size_t p) {
    VertexPlan plan;
    plan.vertex = p;
    plan.value = f.values[p];
    auto star = f.star(p);
    plan.star_size = star.size();
    if (star.empty()) throw ContractError("vertex " + std::to_string(p) + " belongs to no simplex");
    std::vector<std::size_t> link;
    std::vector<AffineN> hat_pieces;
    // per-simplex functionals lambda_q for every q in the simplex
    std::vector<std::vector<AffineN>> lam;
    for (auto s : star) {
        lam.push_back(barycentric_functionals(simplex_points(f, s)));
        const auto& sx = f.simplices[s];
        for (std::size_t i = 0; i < sx.size(); ++i) {
            if (sx[i] == p) hat_pieces.push_back(lam.back()[i]);
            else link.push_back(sx[i]);
        }
    }
    std::sort(link.begin(), link.end());
    link.erase(std::unique(link.begin(), link.end()), link.end());
    auto pts = probes(f, p, star);
    const bool boundary = is_boundary(f, p);

    bool convex = true;
    for (const auto& h : hat_pieces)
        for (auto q : link)
            if (sgn(h(f.vertices[q])) < 0) convex = false;
    if (convex) {
        plan.fast = true;
        plan.chains = {dedup(hat_pieces)};
        if (!first_mismatch(f, plan, pts, boundary)) return plan;
    }
    // per-edge lego functions: for edge (p, q), the lambda_q of each simplex holding both
    plan.fast = false;
    plan.chains.clear();
    for (auto q : link) {
        std::vector<AffineN> fns;
        for (std::size_t k = 0; k < star.size(); ++k) {
            const auto& sx = f.simplices[star[k]];
            auto it = std::find(sx.begin(), sx.end(), q);
            if (it != sx.end()) fns.push_back(lam[k][static_cast<std::size_t>(it - sx.begin())]);
        }
        plan.chains.push_back(dedup(fns));
    }
    if (auto bad = first_mismatch(f, plan, pts, boundary))
        throw ReconstructionMismatch("vertex block " + std::to_string(p) + " disagrees with the hat function at " +
                                     point_str(*bad));
    return plan;
}

void emit_vertex(Emitter& em, const VertexPlan& plan) {
    if (plan.fast) {
        LinQ r = em.min_chain(plan.chains[0]);
        em.global = em.global + plan.value * r;
        return;
    }
    em.partial = LinQ();
    for (const auto& c : plan.chains) {
        LinQ r = em.min_chain(c);
        em.partial = em.partial - r;
    }
    LinQ clip = em.layer({Rational(1) + em.partial})[0];
    em.global = em.global + plan.value * clip;
    em.partial = LinQ();
}

VertexBlockInfo info_of(const VertexPlan& plan) {
    return {plan.vertex, plan.fast, plan.layers(), plan.star_size};
}

}  // namespace

Network<Rational> lego_min_network(const ConeSpec& cone) {
    const std::size_t n = cone.apex.size();
    if (cone.face_normals.empty()) throw ContractError("cone needs at least one face");
    if (cone.interior_direction.size() != n) throw DimensionMismatch("interior direction has the wrong dimension");
    std::vector<AffineN> fns;
    for (std::size_t i = 0; i < cone.face_normals.size(); ++i) {
        const auto& a = cone.face_normals[i];
        if (a.size() != n) throw DimensionMismatch("face normal " + std::to_string(i) + " has the wrong dimension");
        Rational av = 0;
        for (std::size_t k = 0; k < n; ++k) av += a[k] * cone.interior_direction[k];
        if (sgn(av) <= 0) throw ContractError("interior direction is not inside the cone (face " + std::to_string(i) + ")");
        AffineN f;
        f.c = 0;
        for (std::size_t k = 0; k < n; ++k) {
            f.a.push_back(a[k] / av);
            f.c -= a[k] / av * cone.apex[k];
        }
        fns.push_back(f);
    }
    Emitter em(static_cast<int>(n), false);
    LinQ r = em.min_chain(fns);
    return em.finish(cone.slope * r);
}

Network<Rational> compile_vertex_block(const PwlSimplicial& f, std::size_t p, VertexBlockInfo* info) {
    if (p >= f.vertices.size()) throw ContractError("vertex index out of range");
    Emitter em(f.dim, true);
    if (sgn(f.values[p]) == 0) {
        em.layer({});
        if (info) *info = {p, false, 0, f.star(p).size()};
        return em.finish(em.global);
    }
    VertexPlan plan = plan_vertex(f, p);
    emit_vertex(em, plan);
    if (info) *info = info_of(plan);
    Network<Rational> net = em.finish(em.global);
    const bool boundary = is_boundary(f, p);
    for (const auto& x : probes(f, p, f.star(p))) {
        auto h = hat_direct(f, p, x, boundary);
        if (h && net.eval(x)[0] != plan.value * *h)
            throw ReconstructionMismatch("vertex block network disagrees with the hat function at " + point_str(x));
    }
    return net;
}

Network<Rational> compile_simplicial(const PwlSimplicial& f, SimplicialStats* stats, const SimplicialOptions& opt) {
    if (!f.compact_support || !f.boundary_is_zero())
        throw ContractError("compile_simplicial needs a compactly supported function");
    Emitter em(f.dim, true);
    SimplicialStats st;
    for (std::size_t p = 0; p < f.vertices.size(); ++p) {
        if (sgn(f.values[p]) == 0) continue;
        VertexPlan plan = plan_vertex(f, p);
        emit_vertex(em, plan);
        st.blocks.push_back(info_of(plan));
        st.layer_budget += 1 + static_cast<std::size_t>(f.dim) * plan.star_size;
    }
    if (em.layers() == 0) em.layer({});
    Network<Rational> net = em.finish(em.global);
    st.depth = net.depth();
    st.width = net.width();
    if (opt.verify) {
        std::vector<PointN> pts = f.vertices;
        for (std::size_t s = 0; s < f.simplices.size(); ++s) pts.push_back(f.barycenter(s));
        for (const auto& x : pts)
            if (net.eval(x)[0] != f(x))
                throw ReconstructionMismatch("compiled network disagrees with the complex at " + point_str(x));
    }
    if (stats) *stats = std::move(st);
    return net;
}

}  // namespace relux
