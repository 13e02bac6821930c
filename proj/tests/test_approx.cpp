#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "relux/approx.hpp"
#include "relux/compose.hpp"
#include "relux/errors.hpp"

#include <cmath>

using namespace relux;

namespace {

Rational q(long p, long d = 1) { return make_rational(p, d); }

AffineLayer<double> dlayer(std::size_t r, std::size_t c, std::vector<double> w, std::vector<double> b) {
    AffineLayer<double> l(r, c);
    l.weights = std::move(w);
    l.bias = std::move(b);
    return l;
}

}  // namespace

TEST_CASE("catalog entries satisfy the basic certificate") {
    for (auto a : activation_catalog()) {
        auto s = activation_spec(a);
        CHECK(std::abs(s(0)) <= 1);
        CHECK(s.second_at_alpha != 0);
        CHECK(s.deriv_value != 0);
        CHECK(s.tail_bound(5) < 0.01);
    }
    CHECK(activation_spec("logistic").alpha == 1);
    CHECK(activation_spec("tanh").alpha == 1);
    CHECK(activation_spec("gaussian").alpha == 1);
    CHECK(activation_spec("softplus").alpha == 0);
    CHECK_THROWS_AS(activation_spec(Activation::relu), ContractError);
}

TEST_CASE("asymptotic pwl stays within the tail bound") {
    for (auto a : activation_catalog()) {
        auto s = activation_spec(a);
        for (double t = 1; t <= 30; t += 0.125)
            for (double x : {t, -t}) {
                double l = s.asymptotic(rational_from_double(x)).get_d();
                CHECK(std::abs(s(x) - l) <= s.tail_bound(t) + 1e-12);
            }
    }
}

TEST_CASE("identity block") {
    auto [g, rg] = identity_block(activation_spec("gaussian"), -1, 1, 1e-6);
    CHECK(rg.max_abs_error <= 1e-6);
    CHECK(rg.grid_size == 11000);
    CHECK(std::abs(g(0)) <= 1e-12);
    auto [l, rl] = identity_block(activation_spec("logistic"), -2, 2, 1e-4);
    CHECK(rl.max_abs_error <= 1e-4);
    CHECK(rl.within_bound());
    CHECK_THROWS_AS(identity_block(activation_spec("logistic"), -1, 1, 1e-30), ContractError);
}

TEST_CASE("square block") {
    for (auto a : activation_catalog()) {
        auto [b, r] = square_block(activation_spec(a), 1e-3);
        CHECK(b(0) == 0);
        for (double x : probe_points(-1, 1, 200, 50)) CHECK(b(x) == doctest::Approx(b(-x)).epsilon(1e-12));
        CHECK(r.within_bound());
    }
    auto [b, r] = square_block(activation_spec("logistic"), 1e-3);
    CHECK(b.alpha == 1);
    CHECK(r.max_abs_error <= 5e-3);
    CHECK_THROWS_AS(square_block(activation_spec("logistic"), 1e-9), ContractError);
}

TEST_CASE("product identity is exact for exact squares") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        Rational x = fx::rand_rational(rng, 50, 17), y = fx::rand_rational(rng, 50, 17);
        Rational s = x + y, d = x - y;
        CHECK(Rational((s * s - d * d) / 4) == Rational(x * y));
    }
    // with sawtooth squares the product error is at most twice the square error
    auto [sq, r] = sawtooth_square_net(6);
    for (double x = -0.5; x <= 0.5; x += 0.05)
        for (double y = -0.5; y <= 0.5; y += 0.05) {
            double p = sq.eval1(rational_from_double(x + y)).get_d() - sq.eval1(rational_from_double(x - y)).get_d();
            CHECK(std::abs(p / 4 - x * y) <= 2 * std::pow(4.0, -6) / 4 + 1e-12);
        }
}

TEST_CASE("inverse chain") {
    auto c = inverse_chain(q(1, 2), 3);
    CHECK(c.bound == q(1, 32768));
    CHECK(c.net.eval1(q(1)) == 1);
    CHECK(c.net.width() == 3);
    CHECK(c.net.depth() == 4);
    CHECK(c.net.activation() == Activation::square);
    auto c6 = inverse_chain(q(1, 2), 6);
    Rational y = c6.net.eval1(q(1, 2));
    CHECK(abs(Rational(y - 2)) <= c6.bound);
    // the partial product is exact: (1 - z^{2^{m+1}}) / (1 - z)
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        Rational x = make_rational(std::uniform_int_distribution<long>(1, 199)(rng), 100);
        Rational z = 1 - x, zp = z;
        for (int k = 0; k < 7; ++k) zp *= zp;
        CHECK(c6.net.eval1(x) == Rational((1 - zp) / x));
        if (x == 1) continue;
        Rational err = abs(Rational(c6.net.eval1(x) - 1 / x));
        Rational eps = x < 1 ? x : Rational(2 - x);
        CHECK(err <= inverse_chain(eps, 6).bound);
    }
    CHECK_THROWS_AS(inverse_chain(q(0), 3), ContractError);
}

TEST_CASE("newman reference") {
    CHECK(newman_rational_reference(9, 0) == 0);
    for (int n : {4, 9, 16}) {
        double e = 0;
        for (double x : probe_points(-1, 1)) e = std::max(e, std::abs(newman_rational_reference(n, x) - std::max(0.0, x)));
        CHECK(e <= 1.5 * std::exp(-std::sqrt(static_cast<double>(n))) + 1e-9);
    }
    CHECK(newman_chain_length(1) >= 1);
    for (int n = 1; n < 30; ++n) CHECK(newman_chain_length(n + 1) >= newman_chain_length(n));
}

TEST_CASE("relu from activation") {
    auto [lg, rl] = relu_from_activation_net(activation_spec("logistic"), 9);
    CHECK(rl.max_abs_error <= 2.5 * std::exp(-3.0) + 1e-6);
    CHECK(rl.width <= 8);
    CHECK(lg.net.activation() == Activation::logistic);
    CHECK(std::abs(lg.eval1(-1)) <= 2.5 * std::exp(-3.0) + 1e-6);
    auto [ga, rg] = relu_from_activation_net(activation_spec("gaussian"), 4);
    CHECK(rg.max_abs_error <= 2.5 * std::exp(-2.0) + 1e-6);
    CHECK(rg.width <= 8);
    CHECK(rg.depth == static_cast<std::size_t>(4 + newman_chain_length(4) + 2));
    // the network tracks Newman's R closely
    for (double x : probe_points(-1, 1, 201, 0))
        CHECK(std::abs(ga.eval1(x) - newman_rational_reference(4, x)) <= 1e-6);
    for (auto a : {"tanh", "softplus"}) {
        auto [n, r] = relu_from_activation_net(activation_spec(a), 4);
        CHECK(r.within_bound());
    }
}

TEST_CASE("sawtooth square") {
    auto [n0, r0] = sawtooth_square_net(0);
    CHECK(n0.eval1(q(1, 2)) == q(1, 2));
    CHECK(Rational(n0.eval1(q(1, 2)) - q(1, 4)) == q(1, 4));
    for (int n : {0, 1, 2, 3, 5, 7}) {
        auto [net, r] = sawtooth_square_net(n);
        CHECK(net.depth() == static_cast<std::size_t>(n + 3));
        CHECK(net.width() == (n == 0 ? 2u : 3u));
        CHECK(r.max_abs_error <= std::pow(4.0, -n) + 1e-12);
        CHECK(net.eval1(q(2)) == 1);
        CHECK(net.eval1(q(-7, 3)) == 1);
        CHECK(net.eval1(q(9, 8)) == 1);
        long K = 1L << n;
        for (long k = -K; k <= K; ++k) {
            Rational x = make_rational(k, K);
            CHECK(net.eval1(x) == Rational(x * x));
            CHECK(net.eval1(x) == net.eval1(Rational(-x)));
        }
        // slopes between points of a fine grid
        for (long i = -3 * K * 4; i < 3 * K * 4; ++i) {
            Rational a = make_rational(i, 8 * K), b = make_rational(i + 1, 8 * K);
            Rational s = (net.eval1(b) - net.eval1(a)) / (b - a);
            CHECK(abs(s) <= 2);
        }
    }
    auto [n5, r5] = sawtooth_square_net(5);
    CHECK(r5.max_abs_error <= 1.0 / 1024);
}

TEST_CASE("polynomial nets") {
    auto [c, rc] = relu_polynomial_net({q(3, 7)}, 1e-3);
    for (double x : probe_points(-1, 1, 101, 0)) CHECK(c.eval1(rational_from_double(x)) == q(3, 7));
    CHECK(rc.max_abs_error == 0);
    auto [lin, rlin] = relu_polynomial_net({q(1), q(-2)}, 1e-3);
    CHECK(lin.eval1(q(1, 3)) == q(1, 3));
    auto [sq, rs] = relu_polynomial_net({q(0), q(0), q(1)}, 1e-3);
    CHECK(rs.max_abs_error <= 1e-3);
    CHECK(rs.width <= 8);
    auto [cu, ru] = relu_polynomial_net({q(0), q(-1), q(0), q(1)}, 1e-2);
    CHECK(ru.max_abs_error <= 1e-2);
    CHECK(ru.width <= 8);
    std::mt19937_64 rng(11);
    for (int t = 0; t < 5; ++t) {
        std::vector<Rational> cs;
        for (int j = 0; j <= 5; ++j) cs.push_back(fx::rand_rational(rng, 4, 4));
        auto [p, r] = relu_polynomial_net(cs, 1e-3);
        CHECK(r.within_bound());
        CHECK(r.width <= 8);
    }
}

TEST_CASE("activation approximation by relu") {
    for (auto a : {"softplus", "gaussian"}) {
        ActivationApproxPlan plan;
        auto [net, r] = relu_activation_approx_net(activation_spec(a), 1e-2, &plan);
        CHECK(r.lo <= -20);
        CHECK(r.hi >= 20);
        CHECK(r.max_abs_error <= 1e-2);
        CHECK(net.width() <= 11);
        CHECK(net.activation() == Activation::relu);
        CHECK(plan.windows >= 1);
        // far field follows l
        auto s = activation_spec(a);
        SparseEvaluator<double> ev(net);
        for (double x : {-200.0, -55.5, 48.0, 300.0}) CHECK(std::abs(ev.eval1(x) - s(x)) <= 1e-2);
    }
    for (auto a : {"logistic", "tanh"}) {
        auto [net, r] = relu_activation_approx_net(activation_spec(a), 5e-2);
        CHECK(r.within_bound());
        CHECK(net.width() <= 11);
    }
    CHECK_THROWS_AS(relu_activation_approx_net(activation_spec("tanh"), 0.5), ContractError);
}

TEST_CASE("transform relu to activation") {
    auto single = Network<Rational>({fx::layer(1, 1, {1}, {0}), fx::layer(1, 1, {1}, {0})}, Activation::relu);
    TransformDetails d;
    auto [t1, r1] = transform_relu_to_activation(single, activation_spec("logistic"), 1e-2, &d);
    CHECK(r1.max_abs_error <= 1e-2);
    CHECK(t1.net.width() <= 8);
    CHECK(r1.max_abs_error <= d.composed_bound + 1e-9);

    auto zero = Network<Rational>({fx::layer(2, 1, {0, 0}, {0, 0}), fx::layer(1, 2, {0, 0}, {0})}, Activation::relu);
    auto [t0, r0] = transform_relu_to_activation(zero, activation_spec("tanh"), 1e-2);
    CHECK(r0.max_abs_error <= 1e-2);

    // |x| = relu(x) + relu(-x), then relu(|x| - 1/2)
    auto absnet = Network<Rational>({fx::layer(2, 1, {1, -1}, {0, 0}), fx::layer(1, 2, {1, 1}, {0}),
                                     fx::layer(1, 1, {1}, {0})},
                                    Activation::relu);
    absnet = Network<Rational>({absnet.layers()[0], fx::layer(1, 2, {2, 2}, {-1}), fx::layer(1, 1, {1}, {0})},
                               Activation::relu);
    auto [t2, r2] = transform_relu_to_activation(absnet, activation_spec("gaussian"), 5e-2, &d);
    CHECK(r2.max_abs_error <= 5e-2);
    CHECK(t2.net.width() <= 16);
    CHECK(d.layers.size() == 2);
    CHECK(r2.max_abs_error <= d.composed_bound + 1e-9);
}

TEST_CASE("transform activation to relu") {
    auto tanh_net = Network<double>({dlayer(3, 1, {1, -0.5, 0.75}, {0.25, 0, -0.5}),
                                     dlayer(3, 3, {0.5, -0.25, 1, 0, 1, -1, 0.75, 0.5, 0}, {0, 0.5, -0.25}),
                                     dlayer(1, 3, {1, -1, 0.5}, {0.125})},
                                    Activation::tanh);
    TransformDetails d;
    auto [t, r] = transform_activation_to_relu(tanh_net, 1e-2, &d);
    CHECK(r.max_abs_error <= 1e-2);
    CHECK(t.width() <= 33);
    CHECK(r.max_abs_error <= d.composed_bound + 1e-9);
    CHECK(d.composed_bound <= 1e-2);

    auto zero = Network<double>({dlayer(2, 1, {0, 0}, {0, 0}), dlayer(1, 2, {0, 0}, {0})}, Activation::logistic);
    auto [tz, rz] = transform_activation_to_relu(zero, 1e-2);
    CHECK(rz.max_abs_error == 0);

    auto sp = Network<double>({dlayer(1, 1, {1}, {0}), dlayer(1, 1, {1}, {0})}, Activation::softplus);
    auto [ts, rs] = transform_activation_to_relu(sp, 1e-3, &d);
    CHECK(rs.max_abs_error <= 1e-3);
    CHECK(ts.width() <= 11);
}

TEST_CASE("certificates") {
    std::vector<double> grid;
    for (int i = 0; i <= 400; ++i) grid.push_back(-20 + 0.1 * i);
    auto g = certificate_check(activation_spec("gaussian"), 6, grid);
    CHECK(g.ok());
    CHECK(g.max_normalized <= 1);
    CHECK(activation_spec("gaussian").envelope(6) == doctest::Approx(4.0 / 3));
    auto t = certificate_check(activation_spec("tanh"), 10, grid);
    CHECK(t.ok());
    auto l = certificate_check(activation_spec("logistic"), 1, grid);
    CHECK(l.ok());
    CHECK(l.max_normalized == doctest::Approx(0.25).epsilon(1e-9));
    for (auto a : activation_catalog()) CHECK(certificate_check(activation_spec(a), 40, grid).ok());
    CHECK_THROWS_AS(certificate_check(activation_spec("tanh"), 41, grid), ContractError);
}
