#include "relux/separation.hpp"

#include "relux/bounds.hpp"
#include "relux/compose.hpp"
#include "relux/errors.hpp"
#include "relux/network_pwl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace relux {

namespace {

BigInt pow3(unsigned long e) {
    BigInt r;
    mpz_ui_pow_ui(r.get_mpz_t(), 3, e);
    return r;
}

AffineLayer<Rational> rat_layer(std::size_t r, std::size_t c, std::vector<long> w, std::vector<long> b) {
    AffineLayer<Rational> l(r, c);
    for (std::size_t i = 0; i < w.size(); ++i) l.weights[i] = w[i];
    for (std::size_t i = 0; i < b.size(); ++i) l.bias[i] = b[i];
    return l;
}

}  // namespace

// ---------------------------------------------------------------------------
// width inefficiency

Network<Rational> width_ineff_gadget(int L) {
    if (L < 1) throw ContractError("gadget needs L >= 1");
    if (L > 3) throw BudgetExceeded("gadget: 3^{L^2} regions beyond exact propagation for L > 3");
    const int depth = L * L;
    std::vector<AffineLayer<Rational>> layers;
    layers.push_back(rat_layer(3, 1, {-3, 3, 6}, {1, -1, -4}));
    // next pre-activation = w * (1 - a - b + c) + bias
    for (int l = 1; l < depth; ++l)
        layers.push_back(rat_layer(3, 3, {3, 3, -3, -3, -3, 3, -6, -6, 6}, {-2, 2, 2}));
    layers.push_back(rat_layer(1, 3, {-1, -1, 1}, {1}));
    return Network<Rational>(std::move(layers), Activation::relu);
}

std::size_t regions_in(const Pwl1D& f, const Rational& a, const Rational& b) {
    std::size_t n = 1;
    for (const auto& x : f.breakpoints())
        if (a < x && x < b) ++n;
    return n;
}

bool SeparationCertificate::holds() const {
    const BigInt M = gadget_regions;
    return good_pairs <= crossings && BigInt(crossings) <= candidate_regions &&
           BigInt(2 * non_good_intervals) >= M - candidate_regions - 2 && measured_l1 >= lower_bound;
}

Json SeparationCertificate::to_json() const {
    return {{"L", L},
            {"gadget_regions", gadget_regions.get_str()},
            {"candidate_regions", candidate_regions.get_str()},
            {"candidate_pieces", candidate_pieces},
            {"intervals", intervals},
            {"good_intervals", good_intervals},
            {"non_good_intervals", non_good_intervals},
            {"good_pairs", good_pairs},
            {"crossings", crossings},
            {"lower_bound", format_rational(lower_bound)},
            {"measured_l1", format_rational(measured_l1)},
            {"holds", holds()}};
}

namespace {

const Pwl1D& gadget_pwl(int L) {
    static std::map<int, Pwl1D> cache;
    auto it = cache.find(L);
    if (it == cache.end()) it = cache.emplace(L, network_to_pwl1d(width_ineff_gadget(L))).first;
    return it->second;
}

}  // namespace

SeparationCertificate separation_certificate(const Pwl1D& f, int L, const std::optional<BigInt>& region_budget) {
    const Pwl1D& g = gadget_pwl(L);
    SeparationCertificate c;
    c.L = L;
    c.gadget_regions = pow3(static_cast<unsigned long>(L * L));
    const long M = c.gadget_regions.get_si();
    c.candidate_pieces = regions_in(f, Rational(0), Rational(1));
    c.candidate_regions = region_budget ? *region_budget : BigInt(c.candidate_pieces);
    if (c.candidate_regions < c.candidate_pieces)
        throw ContractError("region budget " + c.candidate_regions.get_str() + " is below the " +
                            std::to_string(c.candidate_pieces) + " pieces of the candidate");
    const Rational half = make_rational(1, 2);

    // good intervals: f - 1/2 takes the sign of g - 1/2 (odd i: +, even i: -) somewhere in I_i
    const auto& bps = f.breakpoints();
    c.intervals = static_cast<std::size_t>(M - 1);
    std::vector<bool> good(c.intervals + 1, false);
    for (long i = 1; i < M; ++i) {
        Rational lo = make_rational(2 * i - 1, 2 * M), hi = make_rational(2 * i + 1, 2 * M);
        Rational mx = std::max(f(lo), f(hi)), mn = std::min(f(lo), f(hi));
        for (auto it = std::upper_bound(bps.begin(), bps.end(), lo); it != bps.end() && *it < hi; ++it) {
            Rational v = f(*it);
            mx = std::max(mx, v);
            mn = std::min(mn, v);
        }
        // f is continuous, so a strict inequality on the closure also holds inside
        good[static_cast<std::size_t>(i)] = i % 2 ? mx > half : mn < half;
        if (good[static_cast<std::size_t>(i)]) ++c.good_intervals;
    }
    c.non_good_intervals = c.intervals - c.good_intervals;
    for (std::size_t i = 1; i < c.intervals; ++i)
        if (good[i] && good[i + 1]) ++c.good_pairs;

    int last = 0;
    auto visit = [&](const Rational& x) {
        int s = sgn(Rational(f(x) - half));
        if (s == 0) return;
        if (last != 0 && s != last) ++c.crossings;
        last = s;
    };
    visit(Rational(0));
    for (const auto& x : bps)
        if (0 < x && x < 1) visit(x);
    visit(Rational(1));

    c.lower_bound = Rational(Rational(c.gadget_regions - c.candidate_regions - 2) / 8) / Rational(c.gadget_regions);
    c.measured_l1 = exact_l1_distance_1d(f, g, Rational(0), Rational(1));
    if (!c.holds())
        throw VerificationFailed("separation certificate chain broken for L = " + std::to_string(L));
    return c;
}

OracleResult four_region_oracle(int L, int bp_den, int value_den) {
    if (bp_den < 4 || value_den < 1) throw ContractError("oracle grid too coarse");
    const Pwl1D& g = gadget_pwl(L);
    OracleResult best;
    bool have = false;
    std::vector<Rational> vals;
    for (int v = 0; v <= value_den; ++v) vals.push_back(make_rational(v, value_den));
    const std::size_t nv = vals.size();
    std::size_t total = nv * nv * nv * nv * nv;
    for (int b1 = 1; b1 < bp_den; ++b1)
        for (int b2 = b1 + 1; b2 < bp_den; ++b2)
            for (int b3 = b2 + 1; b3 < bp_den; ++b3) {
                std::vector<Rational> xs{Rational(0), make_rational(b1, bp_den), make_rational(b2, bp_den),
                                         make_rational(b3, bp_den), Rational(1)};
                for (std::size_t code = 0; code < total; ++code) {
                    std::vector<Rational> ys(5);
                    std::size_t c = code;
                    for (auto& y : ys) {
                        y = vals[c % nv];
                        c /= nv;
                    }
                    Pwl1D f = Pwl1D::from_knots({xs, ys, Rational(0), Rational(0)});
                    Rational d = exact_l1_distance_1d(f, g, Rational(0), Rational(1));
                    ++best.candidates;
                    if (!have || d < best.best_l1) {
                        have = true;
                        best.best_l1 = d;
                        best.best = f;
                    }
                }
            }
    return best;
}

// ---------------------------------------------------------------------------
// depth efficiency

Json DepthEfficiencyResult::to_json() const {
    return {{"depth", net.depth()},
            {"width", net.width()},
            {"input_regions", input_regions},
            {"region_bound", region_bound.get_str()},
            {"vertices", complex.vertices.size()},
            {"simplices", complex.simplices.size()},
            {"probes", probes},
            {"layer_budget", stats.layer_budget}};
}

namespace {

// Widens the first hidden layer with zero neurons.
Network<Rational> pad_width(const Network<Rational>& net, std::size_t width) {
    if (net.width() >= width || net.depth() != 1) return net;
    auto layers = net.layers();
    const std::size_t extra = width - layers[0].rows;
    AffineLayer<Rational> a(width, layers[0].cols), b(layers[1].rows, width);
    for (std::size_t i = 0; i < layers[0].rows; ++i) {
        a.bias[i] = layers[0].bias[i];
        for (std::size_t j = 0; j < a.cols; ++j) a.w(i, j) = layers[0].w(i, j);
    }
    for (std::size_t i = 0; i < b.rows; ++i) {
        b.bias[i] = layers[1].bias[i];
        for (std::size_t j = 0; j + extra < width; ++j) b.w(i, j) = layers[1].w(i, j);
    }
    return Network<Rational>({a, b}, net.activation());
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
    Rational cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    if (sgn(cross) != 0) return false;
    Rational dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
    Rational len = (b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1]);
    return sgn(dot) > 0 && dot < len;
}

PwlSimplicial complex_1d(const Network<Rational>& net, const Rational& a, const Rational& b, std::size_t* regions) {
    Pwl1D f = network_to_pwl1d(net);
    for (const auto& x : f.breakpoints())
        if (x < a || x > b) throw ContractError("depth efficiency: support is not inside the box");
    if (sgn(f(a)) != 0 || sgn(f(b)) != 0 || sgn(f.slopes().front()) != 0 || sgn(f.slopes().back()) != 0)
        throw ContractError("depth efficiency: function is not compactly supported in the box");
    *regions = f.regions();
    std::vector<Rational> xs{a};
    for (const auto& x : f.breakpoints())
        if (a < x && x < b) xs.push_back(x);
    xs.push_back(b);
    PwlSimplicial c;
    c.dim = 1;
    for (const auto& x : xs) {
        c.vertices.push_back({x});
        c.values.push_back(f(x));
    }
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) c.simplices.push_back({i, i + 1});
    c.compact_support = true;
    return c;
}

PwlSimplicial complex_2d(const Network<Rational>& net, const Box2& box, std::size_t* regions) {
    // compact support: zero along the box boundary
    for (int i = 0; i <= 64; ++i) {
        Rational t = make_rational(i, 64);
        Rational x = box.xmin + t * (box.xmax - box.xmin), y = box.ymin + t * (box.ymax - box.ymin);
        for (const auto& p : {std::vector<Rational>{x, box.ymin}, std::vector<Rational>{x, box.ymax},
                              std::vector<Rational>{box.xmin, y}, std::vector<Rational>{box.xmax, y}})
            if (sgn(net.eval(p)[0]) != 0)
                throw ContractError("depth efficiency: function is not zero on the box boundary");
    }
    RegionReport rep = cell_decomposition_2d(net, box);
    *regions = rep.regions;
    std::map<Point2, std::size_t> index;
    std::vector<Point2> pts;
    auto vid = [&](const Point2& p) {
        auto it = index.find(p);
        if (it != index.end()) return it->second;
        index.emplace(p, pts.size());
        pts.push_back(p);
        return pts.size() - 1;
    };
    for (const auto& cell : rep.cells)
        for (const auto& p : cell.polygon) vid(p);
    const std::vector<Point2> corners = pts;

    PwlSimplicial c;
    c.dim = 2;
    std::vector<Rational> vals;
    for (const auto& cell : rep.cells) {
        // boundary with every corner of a neighbouring cell that lies on an edge (no T-junctions)
        std::vector<Point2> ring;
        const auto& poly = cell.polygon;
        for (std::size_t e = 0; e < poly.size(); ++e) {
            const Point2& a = poly[e];
            const Point2& b = poly[(e + 1) % poly.size()];
            ring.push_back(a);
            std::vector<std::pair<Rational, Point2>> mids;
            for (const auto& p : corners)
                if (on_segment(a, b, p))
                    mids.push_back({Rational((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])), p});
            std::sort(mids.begin(), mids.end(), [](const auto& u, const auto& v) { return u.first < v.first; });
            for (const auto& m : mids) ring.push_back(m.second);
        }
        Point2 ctr{Rational(0), Rational(0)};
        for (const auto& p : poly) {
            ctr[0] += p[0];
            ctr[1] += p[1];
        }
        ctr[0] /= static_cast<long>(poly.size());
        ctr[1] /= static_cast<long>(poly.size());
        std::size_t ci = vid(ctr);
        for (std::size_t e = 0; e < ring.size(); ++e)
            c.simplices.push_back({ci, vid(ring[e]), vid(ring[(e + 1) % ring.size()])});
    }
    for (const auto& p : pts) {
        c.vertices.push_back({p[0], p[1]});
        c.values.push_back(net.eval({p[0], p[1]})[0]);
    }
    c.compact_support = true;
    return c;
}

}  // namespace

DepthEfficiencyResult depth_efficiency_pipeline(const Network<Rational>& net, const Box2& box, std::uint64_t seed) {
    if (net.activation() != Activation::relu) throw ContractError("depth efficiency needs a relu network");
    if (net.output_dim() != 1) throw DimensionMismatch("depth efficiency needs one output");
    const std::size_t n0 = net.input_dim();
    if (n0 != 1 && n0 != 2) throw DimensionMismatch("depth efficiency supports n0 = 1 or 2");
    DepthEfficiencyResult r;
    r.complex = n0 == 1 ? complex_1d(net, box.xmin, box.xmax, &r.input_regions) : complex_2d(net, box, &r.input_regions);
    if (!r.complex.boundary_is_zero()) throw ContractError("depth efficiency: function is not compactly supported");
    r.net = pad_width(compile_simplicial(r.complex, &r.stats), 2 * n0 + 6);
    r.region_bound = depth_efficiency_bound(static_cast<long>(net.width()), static_cast<long>(net.depth()),
                                            static_cast<long>(n0));

    // exact agreement at vertices, barycenters and random points in and around the box
    std::vector<std::vector<Rational>> probes = r.complex.vertices;
    for (std::size_t s = 0; s < r.complex.simplices.size(); ++s) probes.push_back(r.complex.barycenter(s));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> u(-64, 1088);
    for (int i = 0; i < 300; ++i) {
        std::vector<Rational> x;
        Rational t = make_rational(u(rng), 1024), s = make_rational(u(rng), 1024);
        x.push_back(box.xmin + t * (box.xmax - box.xmin));
        if (n0 == 2) x.push_back(box.ymin + s * (box.ymax - box.ymin));
        probes.push_back(x);
    }
    for (const auto& x : probes) {
        if (net.eval(x)[0] != r.net.eval(x)[0])
            throw ReconstructionMismatch("depth efficiency: rebuilt network differs from the input");
    }
    r.probes = probes.size();
    return r;
}

// ---------------------------------------------------------------------------
// Sobolev rate

std::vector<std::string> smooth_target_names() { return {"bump1d", "bump2d", "wave2d", "cone2d", "zero2d"}; }

SmoothTarget smooth_target(const std::string& name) {
    SmoothTarget t;
    t.name = name;
    if (name == "bump1d") {
        t.n0 = 1;
        t.f = [](const std::vector<double>& x) {
            double u = x[0] * (1 - x[0]);
            return 16 * u * u;
        };
        t.grad = [](const std::vector<double>& x) {
            double u = x[0] * (1 - x[0]);
            return std::vector<double>{32 * u * (1 - 2 * x[0])};
        };
    } else if (name == "bump2d") {
        // (16 x(1-x) y(1-y))^2: smooth, zero with zero gradient on the boundary
        t.f = [](const std::vector<double>& x) {
            double u = 16 * x[0] * (1 - x[0]) * x[1] * (1 - x[1]);
            return u * u;
        };
        t.grad = [](const std::vector<double>& x) {
            double a = x[0] * (1 - x[0]), b = x[1] * (1 - x[1]);
            double u = 16 * a * b;
            return std::vector<double>{2 * u * 16 * (1 - 2 * x[0]) * b, 2 * u * 16 * a * (1 - 2 * x[1])};
        };
    } else if (name == "wave2d") {
        t.f = [](const std::vector<double>& x) { return std::sin(2 * M_PI * x[0]) * std::sin(M_PI * x[1]); };
        t.grad = [](const std::vector<double>& x) {
            return std::vector<double>{2 * M_PI * std::cos(2 * M_PI * x[0]) * std::sin(M_PI * x[1]),
                                       M_PI * std::sin(2 * M_PI * x[0]) * std::cos(M_PI * x[1])};
        };
    } else if (name == "cone2d") {
        // Lipschitz only: max(0, 1 - 3 |x - c|)
        t.f = [](const std::vector<double>& x) {
            double d = std::hypot(x[0] - 0.5, x[1] - 0.5);
            return std::max(0.0, 1 - 3 * d);
        };
        t.grad = [](const std::vector<double>& x) {
            double dx = x[0] - 0.5, dy = x[1] - 0.5, d = std::hypot(dx, dy);
            if (d >= 1.0 / 3 || d == 0) return std::vector<double>{0, 0};
            return std::vector<double>{-3 * dx / d, -3 * dy / d};
        };
    } else if (name == "zero2d") {
        t.f = [](const std::vector<double>&) { return 0.0; };
        t.grad = [](const std::vector<double>&) { return std::vector<double>{0, 0}; };
    } else {
        throw ContractError("unknown target '" + name + "'");
    }
    return t;
}

std::string SobolevReport::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "target,r,vertices,simplices,depth,width,l1,grad_l1,w11,net_check\n";
    for (const auto& r : rows)
        os << target << ',' << r.r << ',' << r.vertices << ',' << r.simplices << ',' << r.depth << ',' << r.width << ','
           << r.l1 << ',' << r.grad_l1 << ',' << r.w11 << ',' << r.net_check << '\n';
    return os.str();
}

Json SobolevReport::to_json() const {
    Json rs = Json::array();
    for (const auto& r : rows)
        rs.push_back({{"r", r.r},
                      {"vertices", r.vertices},
                      {"simplices", r.simplices},
                      {"depth", r.depth},
                      {"width", r.width},
                      {"l1", r.l1},
                      {"grad_l1", r.grad_l1},
                      {"w11", r.w11},
                      {"net_check", r.net_check}});
    return {{"target", target}, {"rows", rs}, {"fitted_order", fitted_order}, {"ratios", ratios}};
}

namespace {

struct QuadPoint {
    std::vector<double> bary;
    double w;
};

// Gauss-Legendre with 5 nodes on a segment; the 7-point degree-5 rule on a triangle.
const std::vector<QuadPoint>& quadrature(int n0) {
    static const std::vector<QuadPoint> seg = [] {
        const double x[] = {0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640, -0.9061798459386640};
        const double w[] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                            0.2369268850561891};
        std::vector<QuadPoint> q;
        for (int i = 0; i < 5; ++i) q.push_back({{(1 - x[i]) / 2, (1 + x[i]) / 2}, w[i] / 2});
        return q;
    }();
    static const std::vector<QuadPoint> tri = [] {
        std::vector<QuadPoint> q{{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.225}};
        const double a1 = 0.0597158717897698, b1 = 0.4701420641051151, w1 = 0.1323941527885062;
        const double a2 = 0.7974269853530873, b2 = 0.1012865073234563, w2 = 0.1259391805448271;
        for (auto [a, b, w] : {std::tuple{a1, b1, w1}, std::tuple{a2, b2, w2}}) {
            q.push_back({{a, b, b}, w});
            q.push_back({{b, a, b}, w});
            q.push_back({{b, b, a}, w});
        }
        return q;
    }();
    return n0 == 1 ? seg : tri;
}

}  // namespace

SobolevReport sobolev_rate_experiment(const SmoothTarget& target, const std::vector<int>& resolutions,
                                      const SobolevOptions& opt) {
    const int n0 = target.n0;
    if (n0 != 1 && n0 != 2) throw ContractError("sobolev experiment supports n0 = 1 or 2");
    if (resolutions.empty()) throw ContractError("no resolutions given");
    for (int i = 0; i <= 100; ++i) {
        double t = i / 100.0;
        std::vector<std::vector<double>> pts{{0.0}, {1.0}};
        if (n0 == 2) pts = {{t, 0.0}, {t, 1.0}, {0.0, t}, {1.0, t}};
        for (const auto& p : pts)
            if (std::abs(target.f(p)) > 1e-12) throw ContractError("target '" + target.name + "' does not vanish on the boundary");
    }
    SobolevReport rep;
    rep.target = target.name;
    for (int r : resolutions) {
        if (r < 1) throw ContractError("resolution must be >= 1");
        PwlSimplicial g = kuhn_grid_interpolant(
            [&](const PointN& x) {
                std::vector<double> xd;
                for (const auto& v : x) xd.push_back(v.get_d());
                return rational_from_double(target.f(xd));
            },
            n0, r);
        SobolevRow row;
        row.r = r;
        row.vertices = g.vertices.size();
        row.simplices = g.simplices.size();
        std::optional<SparseEvaluator<double>> ev;
        if (opt.compile) {
            SimplicialOptions so;
            so.verify = false;  // checked below in binary64 at the quadrature points
            auto net = compile_simplicial(g, nullptr, so);
            row.depth = net.depth();
            row.width = net.width();
            ev.emplace(from_rational_network<double>(net));
        }
        double gmax = 0;
        for (const auto& s : g.simplices) {
            std::vector<PointN> verts;
            for (auto i : s) verts.push_back(g.vertices[i]);
            auto lam = barycentric_functionals(verts);
            std::vector<double> grad(static_cast<std::size_t>(n0), 0.0);
            for (std::size_t k = 0; k < s.size(); ++k)
                for (int d = 0; d < n0; ++d) grad[static_cast<std::size_t>(d)] += g.values[s[k]].get_d() * lam[k].a[d].get_d();
            double vol = 0;
            if (n0 == 1) {
                vol = std::abs(Rational(verts[1][0] - verts[0][0]).get_d());
            } else {
                Rational det = (verts[1][0] - verts[0][0]) * (verts[2][1] - verts[0][1]) -
                               (verts[2][0] - verts[0][0]) * (verts[1][1] - verts[0][1]);
                vol = std::abs(det.get_d()) / 2;
            }
            for (const auto& qp : quadrature(n0)) {
                std::vector<double> x(static_cast<std::size_t>(n0), 0.0);
                double gv = 0;
                for (std::size_t k = 0; k < s.size(); ++k) {
                    for (int d = 0; d < n0; ++d) x[static_cast<std::size_t>(d)] += qp.bary[k] * verts[k][d].get_d();
                    gv += qp.bary[k] * g.values[s[k]].get_d();
                }
                gmax = std::max(gmax, std::abs(gv));
                row.l1 += qp.w * vol * std::abs(target.f(x) - gv);
                auto df = target.grad(x);
                double e = 0;
                for (int d = 0; d < n0; ++d) e += std::abs(df[static_cast<std::size_t>(d)] - grad[static_cast<std::size_t>(d)]);
                row.grad_l1 += qp.w * vol * e;
                if (ev) row.net_check = std::max(row.net_check, std::abs(ev->eval(x)[0] - gv));
            }
        }
        row.w11 = row.l1 + row.grad_l1;
        if (ev && row.net_check > 1e-9 * (1 + gmax))
            throw VerificationFailed("sobolev: compiled network deviates from the interpolant by " +
                                     std::to_string(row.net_check));
        rep.rows.push_back(row);
    }
    // least squares slope of log w11 against log r over the rows with nonzero error
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rep.rows) {
        if (r.w11 <= 0) continue;
        double lx = std::log(static_cast<double>(r.r)), ly = std::log(r.w11);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n >= 2) rep.fitted_order = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
        rep.ratios.push_back(rep.rows[i + 1].w11 > 0 ? rep.rows[i].w11 / rep.rows[i + 1].w11 : 0.0);
    return rep;
}

}  // namespace relux
