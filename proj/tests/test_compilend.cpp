#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "relux/analysis.hpp"
#include "relux/compile1d.hpp"
#include "relux/compilend.hpp"
#include "relux/network_pwl.hpp"

using namespace relux;

namespace {

Rational q(long p, long d = 1) { return make_rational(p, d); }

PointN pt(std::initializer_list<Rational> xs) { return PointN(xs); }

PwlSimplicial center_hat() {
    return kuhn_grid_interpolant([](const PointN& x) { return x == pt({q(1, 2), q(1, 2)}) ? q(1) : q(0); }, 2, 2);
}

// Random values on interior grid vertices, zero on the boundary.
PwlSimplicial random_grid(std::mt19937_64& rng, int n0, int r) {
    return kuhn_grid_interpolant(
        [&](const PointN& x) {
            for (const auto& c : x)
                if (c == 0 || c == 1) return q(0);
            return fx::rand_rational(rng, 9, 4);
        },
        n0, r);
}

PointN random_point(std::mt19937_64& rng, int n, long lo, long hi, long den) {
    std::uniform_int_distribution<long> d(lo * den, hi * den);
    PointN x;
    for (int i = 0; i < n; ++i) x.push_back(make_rational(d(rng), den));
    return x;
}

void check_everywhere(const PwlSimplicial& f, const Network<Rational>& net, std::mt19937_64& rng, int samples) {
    for (const auto& v : f.vertices) CHECK(net.eval(v)[0] == f(v));
    for (std::size_t s = 0; s < f.simplices.size(); ++s) CHECK(net.eval(f.barycenter(s))[0] == f(f.barycenter(s)));
    int bad = 0;
    for (int t = 0; t < samples; ++t) {
        auto x = random_point(rng, f.dim, -1, 2, 97);
        if (net.eval(x)[0] != f(x)) ++bad;
    }
    CHECK(bad == 0);
}

}  // namespace

TEST_CASE("kuhn grid examples") {
    auto f = kuhn_grid_interpolant([](const PointN&) { return q(0); }, 2, 2);
    CHECK(f.vertices.size() == 9);
    CHECK(f.simplices.size() == 8);
    CHECK(f.compact_support);
    CHECK_NOTHROW(f.validate());

    auto u = kuhn_grid_interpolant([](const PointN& x) -> Rational { return x[0] + 2 * x[1]; }, 2, 1);
    REQUIRE(u.simplices.size() == 2);
    auto tri = [&](std::size_t s) {
        std::vector<PointN> v;
        for (auto i : u.simplices[s]) v.push_back(u.vertices[i]);
        return v;
    };
    CHECK(tri(0) == std::vector<PointN>{pt({q(0), q(0)}), pt({q(1), q(0)}), pt({q(1), q(1)})});
    CHECK(tri(1) == std::vector<PointN>{pt({q(0), q(0)}), pt({q(0), q(1)}), pt({q(1), q(1)})});
    CHECK_FALSE(u.compact_support);

    auto g = kuhn_grid_interpolant([](const PointN& x) -> Rational { return x[0] * x[1] * x[2]; }, 3, 2);
    CHECK(g.vertices.size() == 27);
    CHECK(g.simplices.size() == 48);
    CHECK_NOTHROW(g.validate());
    for (const auto& v : g.vertices) CHECK(g(v) == v[0] * v[1] * v[2]);
    CHECK_THROWS_AS(kuhn_grid_interpolant([](const PointN&) { return q(0); }, 2, 0), ContractError);
}

TEST_CASE("barycentric decomposition") {
    std::vector<PointN> tri{pt({q(0), q(0)}), pt({q(1), q(0)}), pt({q(0), q(1)})};
    auto one = barycentric_decompose(tri, AffineN{{q(0), q(0)}, q(1)});
    auto lam = barycentric_functionals(tri);
    for (int i = 0; i < 3; ++i) CHECK(one[i] == lam[i]);

    AffineN f{{q(2), q(3)}, q(1)};
    auto parts = barycentric_decompose(tri, f);
    PointN c = pt({q(1, 3), q(1, 3)});
    CHECK(parts[0](c) == q(1, 3));
    CHECK(parts[1](c) == q(1));
    CHECK(parts[2](c) == q(4, 3));
    CHECK(parts[0](c) + parts[1](c) + parts[2](c) == q(8, 3));

    AffineN z{{q(1), q(1)}, q(0)};
    std::vector<PointN> line_tri{pt({q(0), q(0)}), pt({q(1), q(-1)}), pt({q(2), q(-2)})};
    CHECK_THROWS_AS(barycentric_decompose(line_tri, z), ContractError);
    for (const auto& p : barycentric_decompose(tri, AffineN{{q(0), q(0)}, q(0)})) CHECK(p == AffineN{{q(0), q(0)}, q(0)});
}

TEST_CASE("decomposition components sum to f and vanish on opposite faces") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 30; ++t) {
        int n = 2 + t % 2;
        std::vector<PointN> s;
        for (int i = 0; i <= n; ++i) s.push_back(random_point(rng, n, -3, 3, 7));
        std::vector<AffineN> lam;
        try {
            lam = barycentric_functionals(s);
        } catch (const ContractError&) {
            continue;
        }
        AffineN f;
        for (int i = 0; i < n; ++i) f.a.push_back(fx::rand_rational(rng, 9, 5));
        f.c = fx::rand_rational(rng, 9, 5);
        auto parts = barycentric_decompose(s, f);
        for (int k = 0; k < 100; ++k) {
            auto x = random_point(rng, n, -4, 4, 13);
            Rational sum = 0;
            for (const auto& p : parts) sum += p(x);
            CHECK(sum == f(x));
        }
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                CHECK(lam[i](s[j]) == (i == j ? 1 : 0));
                if (i != j) CHECK(parts[i](s[j]) == 0);
            }
    }
}

TEST_CASE("lego min network") {
    ConeSpec quad{pt({q(0), q(0)}), {{q(1), q(0)}, {q(0), q(1)}}, {q(1), q(1)}, q(2)};
    auto net = lego_min_network(quad);
    CHECK(net.eval({q(2), q(3)})[0] == 4);
    CHECK(net.eval({q(-1), q(5)})[0] == 0);
    CHECK(net.depth() == 2);
    CHECK(net.width() == 6);

    ConeSpec bad = quad;
    bad.interior_direction = {q(1), q(-1)};
    CHECK_THROWS_AS(lego_min_network(bad), ContractError);

    // random cones: exact min-chain algebra at rational probes
    std::mt19937_64 rng(77);
    for (int t = 0; t < 40; ++t) {
        int n = 2 + t % 2;
        std::size_t k = 1 + t % 5;
        ConeSpec c;
        c.apex = random_point(rng, n, -2, 2, 3);
        c.interior_direction = random_point(rng, n, -2, 2, 3);
        c.slope = fx::rand_rational(rng, 5, 3);
        while (c.face_normals.size() < k) {
            auto a = random_point(rng, n, -3, 3, 2);
            Rational av = 0;
            for (int i = 0; i < n; ++i) av += a[i] * c.interior_direction[i];
            if (sgn(av) > 0) c.face_normals.push_back(a);
        }
        auto ln = lego_min_network(c);
        CHECK(ln.depth() == k);
        for (int s = 0; s < 50; ++s) {
            auto x = random_point(rng, n, -4, 4, 11);
            Rational m;
            for (std::size_t i = 0; i < k; ++i) {
                Rational av = 0, ax = 0;
                for (int j = 0; j < n; ++j) {
                    av += c.face_normals[i][j] * c.interior_direction[j];
                    ax += c.face_normals[i][j] * (x[j] - c.apex[j]);
                }
                Rational v = ax / av;
                if (i == 0 || v < m) m = v;
            }
            CHECK(ln.eval(x)[0] == c.slope * (sgn(m) > 0 ? m : Rational(0)));
        }
    }
}

TEST_CASE("vertex blocks") {
    auto f = center_hat();
    std::size_t center = 4;
    REQUIRE(f.vertices[center] == pt({q(1, 2), q(1, 2)}));
    VertexBlockInfo info;
    auto net = compile_vertex_block(f, center, &info);
    CHECK(info.fast_path);
    CHECK(info.star_simplices == 6);
    CHECK(info.layers <= 1 + 2 * 6);
    CHECK(net.width() == 10);
    for (std::size_t v = 0; v < f.vertices.size(); ++v) CHECK(net.eval(f.vertices[v])[0] == (v == center ? 1 : 0));
    for (auto s : f.star(center)) CHECK(net.eval(f.barycenter(s))[0] == q(1, 3));

    auto zero = compile_vertex_block(f, 0, &info);
    CHECK(info.layers == 0);
    for (int t = 0; t < 5; ++t) CHECK(zero.eval({q(t, 4), q(1, 3)})[0] == 0);

    // single simplex, apex vertex: lambda_p * f(p) inside
    PwlSimplicial one{2, {pt({q(0), q(0)}), pt({q(2), q(0)}), pt({q(0), q(3)})}, {{0, 1, 2}}, {q(5), q(0), q(0)}, false};
    auto lam = barycentric_functionals(one.vertices);
    auto apex = compile_vertex_block(one, 0);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
        auto x = random_point(rng, 2, 0, 2, 29);
        if (!one.locate(x)) continue;
        CHECK(apex.eval(x)[0] == 5 * lam[0](x));
    }
}

TEST_CASE("non-convex star falls back to the per-edge blocks") {
    // dart-shaped star around the origin: the link polygon has a reflex vertex at (0,-1)
    std::vector<PointN> v{pt({q(0), q(0)}), pt({q(3), q(-3)}), pt({q(0), q(-1)}), pt({q(-3), q(-3)}),
                          pt({q(-2), q(2)}), pt({q(2), q(2)})};
    std::vector<std::vector<std::size_t>> s{{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}, {0, 5, 1}};
    PwlSimplicial f{2, v, s, {q(7, 2), q(0), q(0), q(0), q(0), q(0)}, true};
    REQUIRE_NOTHROW(f.validate());
    VertexBlockInfo info;
    Network<Rational> net;
    bool built = true;
    try {
        net = compile_vertex_block(f, 0, &info);
    } catch (const ReconstructionMismatch&) {
        built = false;
    }
    REQUIRE(built);
    CHECK_FALSE(info.fast_path);
    CHECK(info.layers <= 1 + 2 * info.star_simplices);
    std::mt19937_64 rng(12);
    for (int t = 0; t < 500; ++t) {
        auto x = random_point(rng, 2, -4, 4, 17);
        CHECK(net.eval(x)[0] == f(x));
    }
}

TEST_CASE("compile_simplicial examples") {
    std::mt19937_64 rng(3);
    auto f = center_hat();
    SimplicialStats st;
    auto net = compile_simplicial(f, &st);
    CHECK(net.width() == 10);
    CHECK(st.depth == net.depth());
    CHECK(st.layer_budget == 1 + 2 * 6);
    CHECK(st.depth <= st.layer_budget);
    check_everywhere(f, net, rng, 1000);

    auto z = kuhn_grid_interpolant([](const PointN&) { return q(0); }, 2, 3);
    auto zn = compile_simplicial(z);
    for (int t = 0; t < 20; ++t) CHECK(zn.eval(random_point(rng, 2, -1, 2, 5))[0] == 0);

    auto u = kuhn_grid_interpolant([](const PointN& x) { return x[0]; }, 2, 1);
    CHECK_THROWS_AS(compile_simplicial(u), ContractError);
}

TEST_CASE("n0 = 1 tent matches the width-3 compiler") {
    auto tent = kuhn_grid_interpolant([](const PointN& x) { return x[0] == q(1, 2) ? q(1) : q(0); }, 1, 2);
    auto net = compile_simplicial(tent);
    CHECK(net.width() == 8);
    auto g = network_to_pwl1d(net);
    Pwl1D want({q(0), q(1, 2), q(1)}, {q(0), q(2), q(-2), q(0)}, {q(0), q(0)});
    CHECK(g == want);
    auto w3 = network_to_pwl1d(compile_width3(want));
    CHECK(exact_l1_distance_1d(g, w3, q(-2), q(3)) == 0);
}

TEST_CASE("compiled complexes are exact everywhere") {
    std::mt19937_64 rng(19);
    for (int r : {3, 4}) {
        auto f = random_grid(rng, 2, r);
        SimplicialStats st;
        auto net = compile_simplicial(f, &st);
        CHECK(net.width() == 10);
        CHECK(st.depth <= st.layer_budget);
        check_everywhere(f, net, rng, 300);
    }
    auto f3 = random_grid(rng, 3, 3);
    SimplicialStats st3;
    auto n3 = compile_simplicial(f3, &st3);
    CHECK(n3.width() == 12);
    CHECK(st3.blocks.size() == 8);
    for (const auto& b : st3.blocks) {
        CHECK(b.fast_path);
        CHECK(b.layers <= 1 + 3 * b.star_simplices);
    }
    check_everywhere(f3, n3, rng, 200);
}

TEST_CASE("validation rejects broken complexes") {
    auto f = center_hat();
    auto bad = f;
    bad.simplices[0] = {0, 1, 1};
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = f;
    bad.simplices.push_back(f.simplices[0]);
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = f;
    bad.values[0] = 1;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = f;
    bad.simplices[0][0] = 99;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    // overlapping triangles that share no facet
    PwlSimplicial ov{2, {pt({q(0), q(0)}), pt({q(2), q(0)}), pt({q(0), q(2)}), pt({q(1), q(1, 4)}), pt({q(3), q(1)}), pt({q(3), q(3)})},
                     {{0, 1, 2}, {3, 4, 5}}, {q(0), q(0), q(0), q(0), q(0), q(0)}, false};
    CHECK_THROWS_AS(ov.validate(), ContractError);
}

TEST_CASE("simplicial json round trip") {
    std::mt19937_64 rng(8);
    auto f = random_grid(rng, 2, 3);
    auto j = pwl_simplicial_to_json(f);
    auto g = pwl_simplicial_from_json(Json::parse(j.dump()));
    CHECK(g.dim == f.dim);
    CHECK(g.vertices == f.vertices);
    CHECK(g.simplices == f.simplices);
    CHECK(g.values == f.values);
    CHECK(g.compact_support == f.compact_support);
    j["values"][0] = "1";
    CHECK_THROWS_AS(pwl_simplicial_from_json(j), ParseError);
    CHECK_THROWS_AS(pwl_simplicial_from_json(Json::parse(R"({"dim":2})")), ParseError);
}
