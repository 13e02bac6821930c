#include "relux/analysis.hpp"

#include "relux/network_pwl.hpp"

#include <cstdlib>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace relux {

std::string method_name(RegionMethod m) {
    switch (m) {
        case RegionMethod::exact_1d: return "exact-1d";
        case RegionMethod::exact_2d_cells: return "exact-2d-cells";
        case RegionMethod::sampled_lower_bound: return "sampled-lower-bound";
    }
    return "?";
}

RegionReport pwl1d_region_report(const Pwl1D& f) {
    RegionReport r;
    r.method = RegionMethod::exact_1d;
    const auto& s = f.slopes();
    const std::size_t k = s.size();
    r.regions = k;
    std::vector<int> sg(k);
    for (std::size_t i = 0; i < k; ++i) {
        sg[i] = sgn(s[i]);
        if (sg[i] != 0) ++r.nonconstant_regions;
    }
    if (r.nonconstant_regions == 0) {
        r.monotone_regions = 1;
        return r;
    }
    // A plateau joins the neighbour whose adjacent slope is steeper (left on ties).
    std::vector<int> joined(sg);
    for (std::size_t i = 0; i < k;) {
        if (sg[i] != 0) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < k && sg[j] == 0) ++j;
        int fill;
        if (i == 0)
            fill = sg[j];
        else if (j == k)
            fill = sg[i - 1];
        else
            fill = abs(s[j]) > abs(s[i - 1]) ? sg[j] : sg[i - 1];
        for (std::size_t t = i; t < j; ++t) joined[t] = fill;
        i = j;
    }
    std::size_t runs = 1;
    for (std::size_t i = 1; i < k; ++i)
        if (joined[i] != joined[i - 1]) ++runs;
    r.monotone_regions = runs;
    return r;
}

bool is_monotone(const Pwl1D& f) {
    bool pos = false, neg = false;
    for (const auto& s : f.slopes()) {
        pos |= sgn(s) > 0;
        neg |= sgn(s) < 0;
    }
    return !(pos && neg);
}

bool is_bounded_above(const Pwl1D& f) { return sgn(f.slopes().front()) >= 0 && sgn(f.slopes().back()) <= 0; }

bool is_bounded_below(const Pwl1D& f) { return sgn(f.slopes().front()) <= 0 && sgn(f.slopes().back()) >= 0; }

std::size_t max_cells_budget() {
    if (const char* v = std::getenv("RELUX_MAX_CELLS")) {
        char* end = nullptr;
        unsigned long long n = std::strtoull(v, &end, 10);
        if (end != v && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
    }
    return 1000000;
}

namespace {

using Polygon = std::vector<Point2>;

Rational twice_area(const Polygon& p) {
    Rational a = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& u = p[i];
        const auto& v = p[(i + 1) % p.size()];
        a += u[0] * v[1] - u[1] * v[0];
    }
    return a;
}

void dedupe(Polygon& p) {
    Polygon q;
    for (const auto& v : p)
        if (q.empty() || q.back() != v) q.push_back(v);
    while (q.size() > 1 && q.front() == q.back()) q.pop_back();
    p.swap(q);
}

// Splits a convex polygon by the sign of f; empty result side means no area there.
void split(const Polygon& poly, const Affine2& f, Polygon& pos, Polygon& neg) {
    pos.clear();
    neg.clear();
    const std::size_t n = poly.size();
    std::vector<Rational> v(n);
    std::vector<int> s(n);
    bool any_pos = false, any_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = f(poly[i]);
        s[i] = sgn(v[i]);
        any_pos |= s[i] > 0;
        any_neg |= s[i] < 0;
    }
    if (!any_neg) {
        pos = poly;
        return;
    }
    if (!any_pos) {
        neg = poly;
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = (i + 1) % n;
        if (s[i] >= 0) pos.push_back(poly[i]);
        if (s[i] <= 0) neg.push_back(poly[i]);
        if (s[i] * s[j] < 0) {
            Rational t = v[i] / (v[i] - v[j]);
            Point2 q{poly[i][0] + t * (poly[j][0] - poly[i][0]), poly[i][1] + t * (poly[j][1] - poly[i][1])};
            pos.push_back(q);
            neg.push_back(q);
        }
    }
    dedupe(pos);
    dedupe(neg);
    if (pos.size() < 3 || sgn(twice_area(pos)) == 0) pos.clear();
    if (neg.size() < 3 || sgn(twice_area(neg)) == 0) neg.clear();
}

Point2 centroid(const Polygon& p) {
    Point2 c{Rational(0), Rational(0)};
    for (const auto& v : p) {
        c[0] += v[0];
        c[1] += v[1];
    }
    Rational n(static_cast<long>(p.size()));
    c[0] /= n;
    c[1] /= n;
    return c;
}

struct Work {
    Polygon poly;
    std::vector<Affine2> vals;
    std::vector<std::vector<bool>> pattern;
};

struct Dsu {
    std::vector<std::size_t> p;
    explicit Dsu(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    std::size_t find(std::size_t x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { p[find(a)] = find(b); }
};

struct LineKey {
    Rational a, b, c;
    bool operator<(const LineKey& o) const {
        if (a != o.a) return a < o.a;
        if (b != o.b) return b < o.b;
        return c < o.c;
    }
};

struct EdgeRec {
    Rational t0, t1;
    std::size_t cell;
};

// Union-find over cells sharing a positive-length edge with an identical map.
std::size_t merge_cells(const std::vector<Cell2D>& cells, std::vector<std::size_t>* comp) {
    std::map<LineKey, std::vector<EdgeRec>> lines;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const auto& p = cells[ci].polygon;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto& u = p[i];
            const auto& v = p[(i + 1) % p.size()];
            LineKey k{v[1] - u[1], u[0] - v[0], Rational(0)};
            k.c = -(k.a * u[0] + k.b * u[1]);
            const Rational& lead = sgn(k.a) != 0 ? k.a : k.b;
            Rational inv = 1 / lead;
            k.a *= inv;
            k.b *= inv;
            k.c *= inv;
            bool use_x = sgn(k.b) != 0;
            Rational t0 = use_x ? u[0] : u[1], t1 = use_x ? v[0] : v[1];
            if (t1 < t0) std::swap(t0, t1);
            lines[k].push_back({t0, t1, ci});
        }
    }
    Dsu dsu(cells.size());
    for (auto& [key, edges] : lines) {
        std::sort(edges.begin(), edges.end(), [](const EdgeRec& x, const EdgeRec& y) { return x.t0 < y.t0; });
        for (std::size_t i = 0; i < edges.size(); ++i) {
            for (std::size_t j = i + 1; j < edges.size() && edges[j].t0 < edges[i].t1; ++j) {
                if (edges[i].cell == edges[j].cell) continue;
                if (cells[edges[i].cell].map == cells[edges[j].cell].map) dsu.unite(edges[i].cell, edges[j].cell);
            }
        }
    }
    std::set<std::size_t> roots;
    if (comp) comp->resize(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        roots.insert(dsu.find(i));
        if (comp) (*comp)[i] = dsu.find(i);
    }
    return roots.size();
}

}  // namespace

RegionReport cell_decomposition_2d(const Network<Rational>& net, const Box2& box) {
    if (net.activation() != Activation::relu) throw ContractError("cell decomposition needs relu activation");
    if (net.input_dim() != 2) throw DimensionMismatch("cell decomposition needs n_0 = 2");
    if (!(box.xmin < box.xmax) || !(box.ymin < box.ymax)) throw ContractError("degenerate bounding box");
    const std::size_t budget = max_cells_budget();
    std::vector<Work> cells(1);
    cells[0].poly = {{box.xmin, box.ymin}, {box.xmax, box.ymin}, {box.xmax, box.ymax}, {box.xmin, box.ymax}};
    cells[0].vals = {{Rational(1), Rational(0), Rational(0)}, {Rational(0), Rational(1), Rational(0)}};
    const auto& layers = net.layers();
    std::vector<Cell2D> finals;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const auto& l = layers[li];
        const bool last = li + 1 == layers.size();
        std::vector<Work> next;
        for (auto& cell : cells) {
            std::vector<Affine2> pre(l.rows, Affine2{Rational(0), Rational(0), Rational(0)});
            for (std::size_t i = 0; i < l.rows; ++i) {
                pre[i].c = l.bias[i];
                for (std::size_t j = 0; j < l.cols; ++j) {
                    const Rational& w = l.w(i, j);
                    if (sgn(w) == 0) continue;
                    pre[i].a += w * cell.vals[j].a;
                    pre[i].b += w * cell.vals[j].b;
                    pre[i].c += w * cell.vals[j].c;
                }
            }
            if (last) {
                finals.push_back({std::move(cell.poly), std::move(pre), std::move(cell.pattern)});
                continue;
            }
            std::vector<Polygon> pieces{cell.poly}, tmp;
            Polygon pos, neg;
            for (std::size_t i = 0; i < l.rows; ++i) {
                if (sgn(pre[i].a) == 0 && sgn(pre[i].b) == 0) continue;
                tmp.clear();
                for (const auto& pc : pieces) {
                    split(pc, pre[i], pos, neg);
                    if (!pos.empty()) tmp.push_back(pos);
                    if (!neg.empty()) tmp.push_back(neg);
                }
                pieces.swap(tmp);
            }
            for (auto& pc : pieces) {
                Work w;
                Point2 c = centroid(pc);
                std::vector<bool> pat(l.rows);
                w.vals.resize(l.rows, Affine2{Rational(0), Rational(0), Rational(0)});
                for (std::size_t i = 0; i < l.rows; ++i) {
                    pat[i] = sgn(pre[i](c)) > 0;
                    if (pat[i]) w.vals[i] = pre[i];
                }
                w.pattern = cell.pattern;
                w.pattern.push_back(std::move(pat));
                w.poly = std::move(pc);
                next.push_back(std::move(w));
                if (next.size() > budget)
                    throw BudgetExceeded("2-D decomposition exceeds " + std::to_string(budget) +
                                         " cells (RELUX_MAX_CELLS)");
            }
        }
        if (!last) cells.swap(next);
    }
    RegionReport r;
    r.method = RegionMethod::exact_2d_cells;
    std::vector<std::size_t> comp;
    r.regions = merge_cells(finals, &comp);
    std::set<std::size_t> nonconst;
    for (std::size_t i = 0; i < finals.size(); ++i) {
        for (const auto& m : finals[i].map)
            if (sgn(m.a) != 0 || sgn(m.b) != 0) nonconst.insert(comp[i]);
    }
    r.nonconstant_regions = nonconst.size();
    r.cells = std::move(finals);
    return r;
}

namespace {

// Output affine map of the region containing x, or nullopt when x lies on a
// neuron's switching set.
std::optional<std::vector<Rational>> local_map(const Network<Rational>& net, const std::vector<Rational>& x) {
    const std::size_t n0 = net.input_dim();
    // rows: value gradient (n0 entries) then offset
    std::vector<std::vector<Rational>> g(n0, std::vector<Rational>(n0 + 1, Rational(0)));
    for (std::size_t i = 0; i < n0; ++i) g[i][i] = 1;
    std::vector<Rational> v(x);
    const auto& layers = net.layers();
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const auto& l = layers[li];
        std::vector<std::vector<Rational>> ng(l.rows, std::vector<Rational>(n0 + 1, Rational(0)));
        std::vector<Rational> nv = l.apply(v);
        for (std::size_t i = 0; i < l.rows; ++i) {
            for (std::size_t j = 0; j < l.cols; ++j) {
                if (sgn(l.w(i, j)) == 0) continue;
                for (std::size_t c = 0; c <= n0; ++c) ng[i][c] += l.w(i, j) * g[j][c];
            }
            ng[i][n0] += l.bias[i];
            if (li + 1 < layers.size()) {
                int s = sgn(nv[i]);
                if (s == 0) return std::nullopt;
                if (s < 0) {
                    nv[i] = 0;
                    for (auto& e : ng[i]) e = 0;
                }
            }
        }
        g.swap(ng);
        v.swap(nv);
    }
    std::vector<Rational> flat;
    for (const auto& row : g) flat.insert(flat.end(), row.begin(), row.end());
    return flat;
}

}  // namespace

RegionReport sampled_region_lower_bound(const Network<Rational>& net, int lines, std::uint64_t seed) {
    if (net.activation() != Activation::relu) throw ContractError("region sampling needs relu activation");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(-1000, 1000);
    const std::size_t n0 = net.input_dim();
    std::set<std::vector<Rational>> maps;
    for (int li = 0; li < lines; ++li) {
        std::vector<Rational> p(n0), d(n0);
        for (std::size_t i = 0; i < n0; ++i) {
            p[i] = make_rational(dist(rng), 100);
            d[i] = make_rational(dist(rng), 100);
        }
        // restrict to x = p + t d
        auto layers = net.layers();
        AffineLayer<Rational> first(layers[0].rows, 1);
        for (std::size_t i = 0; i < first.rows; ++i) {
            first.bias[i] = layers[0].bias[i];
            for (std::size_t j = 0; j < n0; ++j) {
                first.w(i, 0) += layers[0].w(i, j) * d[j];
                first.bias[i] += layers[0].w(i, j) * p[j];
            }
        }
        layers[0] = first;
        Network<Rational> line(layers, Activation::relu);
        auto outs = network_to_pwl1d_outputs(line);
        std::vector<Rational> ts;
        for (const auto& f : outs) ts.insert(ts.end(), f.breakpoints().begin(), f.breakpoints().end());
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        std::vector<Rational> probes;
        if (ts.empty()) {
            probes.push_back(0);
        } else {
            probes.push_back(ts.front() - 1);
            for (std::size_t i = 0; i + 1 < ts.size(); ++i) probes.push_back((ts[i] + ts[i + 1]) / 2);
            probes.push_back(ts.back() + 1);
        }
        for (const auto& t : probes) {
            std::vector<Rational> x(n0);
            for (std::size_t i = 0; i < n0; ++i) x[i] = p[i] + t * d[i];
            if (auto m = local_map(net, x)) maps.insert(*m);
        }
    }
    RegionReport r;
    r.method = RegionMethod::sampled_lower_bound;
    r.regions = maps.size();
    for (const auto& m : maps) {
        bool nc = false;
        for (std::size_t i = 0; i < m.size(); ++i)
            if ((i % (n0 + 1)) != n0 && sgn(m[i]) != 0) nc = true;
        if (nc) ++r.nonconstant_regions;
    }
    return r;
}

Rational exact_l1_distance_1d(const Pwl1D& f, const Pwl1D& g, const Rational& a, const Rational& b) {
    if (!(a < b)) throw ContractError("exact_l1_distance_1d: empty interval");
    Pwl1D d = f - g;
    std::vector<Rational> xs{a};
    for (const auto& x : d.breakpoints())
        if (a < x && x < b) xs.push_back(x);
    xs.push_back(b);
    Rational total = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const Rational &x0 = xs[i], &x1 = xs[i + 1];
        Rational y0 = d(x0), y1 = d(x1);
        if (sgn(y0) * sgn(y1) >= 0) {
            total += abs(y0 + y1) / 2 * (x1 - x0);
        } else {
            // split at the zero crossing: two triangles
            Rational z = x0 + y0 * (x1 - x0) / (y0 - y1);
            total += abs(y0) / 2 * (z - x0) + abs(y1) / 2 * (x1 - z);
        }
    }
    return total;
}

std::size_t exact_region_count(const Network<Rational>& net, const Box2& box) {
    if (net.input_dim() == 1) return vector_region_count(network_to_pwl1d_outputs(net));
    if (net.input_dim() == 2) return cell_decomposition_2d(net, box).regions;
    throw ContractError("exact region counting is available for n_0 in {1, 2} only");
}

ReduceResult reduce_output_dim(const Network<Rational>& net, const ReduceOptions& opt) {
    if (net.input_dim() > 2) throw ContractError("reduce_output_dim needs exact region counting (n_0 <= 2)");
    const std::size_t m = net.output_dim();
    ReduceResult res;
    res.regions_before = exact_region_count(net, opt.box);
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<long long> dist(-opt.bound, opt.bound);
    std::size_t last_after = 0;
    for (int attempt = 1; attempt <= opt.max_attempts; ++attempt) {
        std::vector<Rational> z(m);
        if (attempt == 1 && opt.first_z) {
            if (opt.first_z->size() != m) throw DimensionMismatch("first_z has the wrong length");
            z = *opt.first_z;
        } else {
            for (auto& v : z) v = Rational(static_cast<long>(dist(rng)));
        }
        auto layers = net.layers();
        const auto& last = layers.back();
        AffineLayer<Rational> out(1, last.cols);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < last.cols; ++j) out.w(0, j) += z[i] * last.w(i, j);
            out.bias[0] += z[i] * last.bias[i];
        }
        layers.back() = out;
        Network<Rational> cand(layers, net.activation());
        last_after = exact_region_count(cand, opt.box);
        if (last_after == res.regions_before) {
            res.net = std::move(cand);
            res.z = std::move(z);
            res.regions_after = last_after;
            res.attempts = attempt;
            return res;
        }
    }
    throw VerificationFailed("reduce_output_dim: region count " + std::to_string(res.regions_before) +
                             " not preserved after " + std::to_string(opt.max_attempts) + " attempts (last " +
                             std::to_string(last_after) + ")");
}

}  // namespace relux
