#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "relux/analysis.hpp"
#include "relux/errors.hpp"
#include "relux/network_pwl.hpp"
#include "relux/separation.hpp"

#include <random>

using namespace relux;

namespace {

Rational q(long p, long d = 1) { return make_rational(p, d); }

// k pieces on [0,1], breakpoints inside, values roughly around [0,1].
Pwl1D random_candidate(std::mt19937_64& rng, std::size_t k) {
    std::uniform_int_distribution<long> bx(1, 999), vy(-50, 150);
    std::set<long> cuts;
    while (cuts.size() + 1 < k) cuts.insert(bx(rng));
    std::vector<Rational> xs{q(0)}, ys;
    for (long c : cuts) xs.push_back(q(c, 1000));
    xs.push_back(q(1));
    for (std::size_t i = 0; i < xs.size(); ++i) ys.push_back(q(vy(rng), 100));
    std::uniform_int_distribution<long> s(-3, 3);
    return Pwl1D::from_knots({xs, ys, q(s(rng)), q(s(rng))});
}

// relu(relu(x) - 2 relu(x-1)): tent on [0,2], width 2, two hidden layers
Network<Rational> tent_net() {
    return Network<Rational>(
        {fx::layer(2, 1, {1, 1}, {0, -1}), fx::layer(1, 2, {1, -2}, {0}), fx::layer(1, 1, {1}, {0})},
        Activation::relu);
}

// relu(1 - |x| - |y|)
Network<Rational> pyramid_net() {
    return Network<Rational>({fx::layer(4, 2, {1, 0, -1, 0, 0, 1, 0, -1}, {0, 0, 0, 0}),
                              fx::layer(1, 4, {-1, -1, -1, -1}, {1}), fx::layer(1, 1, {1}, {0})},
                             Activation::relu);
}

}  // namespace

TEST_CASE("gadget region counts and coefficients") {
    auto g1 = width_ineff_gadget(1);
    Pwl1D p1 = network_to_pwl1d(g1);
    CHECK(regions_in(p1, q(0), q(1)) == 3);
    CHECK(g1.max_abs_coefficient() == 6);
    CHECK(g1.width() == 3);
    auto g2 = width_ineff_gadget(2);
    Pwl1D p2 = network_to_pwl1d(g2);
    CHECK(g2.depth() == 4);
    CHECK(g2.width() == 3);
    CHECK(g2.max_abs_coefficient() <= 6);
    CHECK(regions_in(p2, q(0), q(1)) == 81);
    // zigzag between 0 and 1 on the grid of thirds of the depth
    for (long i = 0; i <= 81; ++i) CHECK(p2(q(i, 81)) == (i % 2 ? q(1) : q(0)));
    CHECK_THROWS_AS(width_ineff_gadget(4), BudgetExceeded);
    CHECK_THROWS_AS(width_ineff_gadget(0), ContractError);
}

TEST_CASE("certificate for a constant candidate") {
    Pwl1D half = Pwl1D::affine(q(0), q(1, 2));
    auto c = separation_certificate(half, 2, BigInt(4));
    CHECK(c.gadget_regions == 81);
    CHECK(c.good_intervals == 0);
    CHECK(c.non_good_intervals == 80);
    CHECK(c.crossings == 0);
    CHECK(c.measured_l1 == q(1, 4));
    CHECK(c.lower_bound == q(75, 648));
    CHECK(c.lower_bound >= q(1, 9));
    CHECK(c.holds());
    // without an explicit budget k is the piece count, 1
    auto c1 = separation_certificate(half, 2);
    CHECK(c1.candidate_regions == 1);
    CHECK(c1.lower_bound == q(78, 648));
    CHECK_THROWS_AS(separation_certificate(network_to_pwl1d(width_ineff_gadget(2)), 2, BigInt(4)), ContractError);
}

TEST_CASE("certificate degenerates on the gadget itself") {
    auto c = separation_certificate(network_to_pwl1d(width_ineff_gadget(2)), 2);
    CHECK(c.measured_l1 == 0);
    CHECK(c.candidate_regions == 81);
    CHECK(c.lower_bound <= 0);
    CHECK(c.non_good_intervals == 0);
    CHECK(c.crossings == 81);
}

TEST_CASE("certificate chain on random candidates") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> kd(1, 20);
    for (int t = 0; t < 200; ++t) {
        Pwl1D f = random_candidate(rng, kd(rng));
        auto c = separation_certificate(f, 2);
        CHECK(c.candidate_regions <= 20);
        CHECK(c.good_pairs <= c.crossings);
        CHECK(BigInt(c.crossings) <= c.candidate_regions);
        CHECK(BigInt(2 * c.non_good_intervals) >= c.gadget_regions - c.candidate_regions - 2);
        CHECK(c.measured_l1 >= c.lower_bound);
        // each non-good interval alone carries at least 1/(4M)
        CHECK(c.measured_l1 >= Rational(q(static_cast<long>(c.non_good_intervals)) / (4 * 81)));
    }
}

TEST_CASE("certificate at L = 1") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
        auto c = separation_certificate(random_candidate(rng, 1 + t % 3), 1);
        CHECK(c.gadget_regions == 3);
        CHECK(c.measured_l1 >= c.lower_bound);
    }
}

TEST_CASE("four region oracle") {
    auto o = four_region_oracle(2, 6, 4);
    CHECK(o.candidates == 10 * 3125);
    CHECK(regions_in(o.best, q(0), q(1)) <= 4);
    MESSAGE("oracle minimum " << o.best_l1.get_str());
    CHECK(o.best_l1 >= q(1, 9));
    auto c = separation_certificate(o.best, 2, BigInt(4));
    CHECK(c.measured_l1 == o.best_l1);
    CHECK(c.measured_l1 >= c.lower_bound);
}

TEST_CASE("depth efficiency: 1-D tent") {
    auto net = tent_net();
    auto r = depth_efficiency_pipeline(net, Box2{q(-1), q(3), q(0), q(0)}, 5);
    CHECK(r.net.width() == 8);
    CHECK(r.input_regions == 4);
    CHECK(BigInt(r.input_regions) <= r.region_bound);
    CHECK(exact_l1_distance_1d(network_to_pwl1d(net), network_to_pwl1d(r.net), q(-5), q(5)) == 0);
    CHECK(network_to_pwl1d(r.net) == network_to_pwl1d(net));
    CHECK(r.probes > 300);
}

TEST_CASE("depth efficiency: 2-D pyramid") {
    auto net = pyramid_net();
    auto r = depth_efficiency_pipeline(net, Box2{q(-2), q(2), q(-2), q(2)}, 9);
    CHECK(r.net.width() == 10);
    CHECK(BigInt(r.input_regions) <= r.region_bound);
    CHECK_NOTHROW(r.complex.validate());
    CHECK(r.complex.boundary_is_zero());
    for (const auto& v : r.complex.vertices) CHECK(net.eval(v)[0] == r.net.eval(v)[0]);
}

TEST_CASE("depth efficiency: zero net and contract errors") {
    Network<Rational> zero({fx::layer(1, 1, {0}, {0}), fx::layer(1, 1, {0}, {0})}, Activation::relu);
    auto r = depth_efficiency_pipeline(zero, Box2{q(0), q(1), q(0), q(0)});
    CHECK(r.net.width() == 8);
    CHECK(network_to_pwl1d(r.net) == Pwl1D::affine(q(0), q(0)));
    // relu(x) is not compactly supported
    Network<Rational> ramp({fx::layer(1, 1, {1}, {0}), fx::layer(1, 1, {1}, {0})}, Activation::relu);
    CHECK_THROWS_AS(depth_efficiency_pipeline(ramp, Box2{q(-1), q(1), q(0), q(0)}), ContractError);
    // pyramid does not fit in the small box
    CHECK_THROWS_AS(depth_efficiency_pipeline(pyramid_net(), Box2{q(-1, 2), q(1, 2), q(-2), q(2)}), ContractError);
}

TEST_CASE("sobolev rate on the smooth bump") {
    auto rep = sobolev_rate_experiment(smooth_target("bump2d"), {4, 8, 16});
    REQUIRE(rep.rows.size() == 3);
    MESSAGE("order " << rep.fitted_order << " ratios " << rep.ratios[0] << ", " << rep.ratios[1]);
    CHECK(rep.fitted_order >= 0.8);
    for (double r : rep.ratios) {
        CHECK(r >= 1.6);
        CHECK(r <= 2.6);
    }
    for (const auto& row : rep.rows) {
        CHECK(row.width == 10);
        CHECK(row.net_check < 1e-9);
    }
    CHECK(rep.to_csv().find("target,r,") == 0);
}

TEST_CASE("sobolev rate in 1-D and for zero") {
    auto rep = sobolev_rate_experiment(smooth_target("bump1d"), {4, 8, 16});
    CHECK(rep.fitted_order >= 0.8);
    for (const auto& row : rep.rows) CHECK(row.width == 8);
    auto z = sobolev_rate_experiment(smooth_target("zero2d"), {2, 4});
    for (const auto& row : z.rows) {
        CHECK(row.l1 == 0);
        CHECK(row.grad_l1 == 0);
        CHECK(row.w11 == 0);
    }
    SmoothTarget bad{"bad", 2, [](const std::vector<double>&) { return 1.0; },
                     [](const std::vector<double>&) { return std::vector<double>{0, 0}; }};
    CHECK_THROWS_AS(sobolev_rate_experiment(bad, {2}), ContractError);
    CHECK_THROWS_AS(smooth_target("nope"), ContractError);
}

TEST_CASE("universal approximation demo: error falls with resolution") {
    SobolevOptions opt;
    opt.compile = false;
    for (const char* name : {"bump2d", "wave2d", "cone2d"}) {
        auto rep = sobolev_rate_experiment(smooth_target(name), {2, 4, 8, 16}, opt);
        for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) CHECK(rep.rows[i + 1].l1 < rep.rows[i].l1);
    }
}
