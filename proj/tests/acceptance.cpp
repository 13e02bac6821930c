// Acceptance harness: one PASS/FAIL line per criterion, with the measured
// numbers next to the pinned tolerances. Exit status 1 if any line fails.

#include "fixtures.hpp"
#include "relux/analysis.hpp"
#include "relux/approx.hpp"
#include "relux/bounds.hpp"
#include "relux/compile1d.hpp"
#include "relux/compilend.hpp"
#include "relux/errors.hpp"
#include "relux/network_pwl.hpp"
#include "relux/separation.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

using namespace relux;

namespace {

Rational q(long p, long d = 1) { return make_rational(p, d); }

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            note << "[failed: " << what << "] ";
        }
    }
};

std::size_t fast_regions(const Network<Rational>& net) {
    try {
        return network_to_pwl1d(from_rational_network<FastRational>(net)).regions();
    } catch (const FastRationalOverflow&) {
        return network_to_pwl1d(net).regions();
    }
}

std::vector<Design> designs_1d() {
    std::vector<Design> out;
    std::vector<int> hidden;
    std::function<void()> rec = [&] {
        if (!hidden.empty()) {
            std::vector<int> d{1};
            d.insert(d.end(), hidden.begin(), hidden.end());
            d.push_back(1);
            out.emplace_back(d);
        }
        if (hidden.size() == 3) return;
        for (int w = 2; w <= 4; ++w) {
            hidden.push_back(w);
            rec();
            hidden.pop_back();
        }
    };
    rec();
    return out;
}

// ---------------------------------------------------------------------------

void exact_1d_formula(Outcome& o) {
    auto ds = designs_1d();
    o.require(r_exact_1d(Design::parse("1,3,3,1")).first == 16, "(1,3,3,1) != 16");
    o.require(r_exact_1d(Design::parse("1,2,2,1")).first == 7, "(1,2,2,1) != 7");
    std::mt19937_64 rng(101);
    std::size_t nets = 0;
    for (const auto& d : ds) {
        std::size_t cap = r_exact_1d(d).first.get_ui();
        o.require(network_to_pwl1d(build_max_region_network(d)).regions() == cap, "max net misses " + d.to_string());
        for (int t = 0; t < 10000; ++t, ++nets) {
            if (fast_regions(fx::random_net(rng, d.dims)) > cap) o.require(false, "random net exceeds " + d.to_string());
        }
    }
    o.note << ds.size() << " designs attained exactly; " << nets << " random nets within the formula";
}

void corrected_bound(Outcome& o) {
    std::size_t checked = 0;
    for (const auto& d : designs_1d()) {
        o.require(upper_bound_general(d).value >= r_exact_1d(d).first, "bound below exact at " + d.to_string());
        ++checked;
    }
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> w(1, 5), depth(1, 3);
    Box2 box{q(-64), q(64), q(-64), q(64)};
    std::size_t max_regions = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<int> dims{2};
        int L = depth(rng);
        for (int l = 0; l < L; ++l) dims.push_back(w(rng));
        dims.push_back(1);
        auto net = fx::random_net(rng, dims);
        std::size_t exact = cell_decomposition_2d(net, box).regions;
        max_regions = std::max(max_regions, exact);
        o.require(upper_bound_general(Design(dims)).value >= exact, "bound below 2-D count at " + Design(dims).to_string());
    }
    std::size_t designs = 0;
    for (int n0 = 1; n0 <= 3; ++n0)
        for (int a = 1; a <= 6; ++a)
            for (int b = 1; b <= 6; ++b)
                for (int c = 0; c <= 4; ++c) {
                    std::vector<int> dims{n0, a, b};
                    if (c > 0) dims.push_back(c);
                    dims.push_back(1);
                    Design d(dims);
                    o.require(upper_bound_general(d).value <= upper_bound_general(d, BoundVariant::previous).value,
                              "corrected > previous at " + d.to_string());
                    ++designs;
                }
    o.require(designs >= 200, "fewer than 200 designs");
    o.note << checked << " 1-D fixtures, 100 random 2-D nets (max " << max_regions << " regions), corrected <= previous on "
           << designs << " designs";
}

long brute_force_line(int n, int m) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    long best = 0;
    do {
        for (int mask = 0; mask < (1 << n); ++mask) {
            long good = 0;
            for (int region = 0; region <= n; ++region) {
                int active = 0;
                for (int p = 0; p < n; ++p) {
                    bool right = (mask >> perm[static_cast<std::size_t>(p)]) & 1;
                    if (right ? p < region : p >= region) ++active;
                }
                if (active >= n - m) ++good;
            }
            best = std::max(best, good);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

void fjd_oracle(Outcome& o) {
    int cases = 0;
    for (int n = 1; n <= 5; ++n)
        for (int m = 0; m <= n; ++m, ++cases) {
            BigInt s = 0;
            for (int j = 0; j <= m; ++j) s += f_jd(j, 1, n);
            long bf = brute_force_line(n, m);
            o.require(s == bf, "n=" + std::to_string(n) + " m=" + std::to_string(m));
        }
    o.note << cases << " (n, m) pairs equal the brute-force maximum";
}

void compiler_correctness(Outcome& o) {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<std::size_t> kd(1, 12);
    for (int t = 0; t < 1000; ++t) {
        std::size_t k = kd(rng);
        auto f = fx::random_pwl(rng, k);
        auto n3 = compile_width3(f);
        o.require(network_to_pwl1d(n3) == f, "width 3 mismatch");
        o.require(n3.width() == 3, "width 3 net is wider");
        o.require(n3.depth() == std::max<std::size_t>(1, k >= 2 ? k - 2 : 1), "width 3 depth");
        for (int W : {5, 6, 8}) {
            auto nw = compile_widthW(f, W);
            o.require(network_to_pwl1d(nw) == f, "width " + std::to_string(W) + " mismatch");
            o.require(static_cast<int>(nw.width()) == W, "width " + std::to_string(W));
        }
    }
    o.note << "1000 PWLs (k <= 12) reproduced by widths 3, 5, 6, 8";
}

void simplicial_compiler(Outcome& o) {
    std::mt19937_64 rng(505);
    std::uniform_int_distribution<long> val(-9, 9), coord(-512, 1536);
    std::size_t grids = 0, probes = 0;
    for (int r : {2, 4})
        for (int rep = 0; rep < 3; ++rep, ++grids) {
            auto f = kuhn_grid_interpolant(
                [&](const PointN& x) {
                    for (const auto& c : x)
                        if (c == 0 || c == 1) return q(0);
                    return make_rational(val(rng), 4);
                },
                2, r);
            auto net = compile_simplicial(f);
            o.require(net.width() == 10, "width != 10");
            for (const auto& v : f.vertices) o.require(net.eval(v)[0] == f(v), "vertex mismatch");
            for (std::size_t s = 0; s < f.simplices.size(); ++s)
                o.require(net.eval(f.barycenter(s))[0] == f(f.barycenter(s)), "barycenter mismatch");
            for (int t = 0; t < 1000; ++t, ++probes) {
                PointN x{make_rational(coord(rng), 1024), make_rational(coord(rng), 1024)};
                o.require(net.eval(x)[0] == f(x), "random point mismatch");
            }
        }
    o.note << grids << " grids, width 10, " << probes << " random rational probes exact";
}

void newman_relu(Outcome& o) {
    double worst_ratio = 0;
    for (int n : {4, 9, 16}) {
        double e = 0;
        for (double x : probe_points(-1, 1)) e = std::max(e, std::abs(newman_rational_reference(n, x) - std::max(0.0, x)));
        double bound = 1.5 * std::exp(-std::sqrt(static_cast<double>(n)));
        o.require(e <= bound, "newman n=" + std::to_string(n));
        worst_ratio = std::max(worst_ratio, e / bound);
        for (auto a : {"logistic", "gaussian"}) {
            auto [net, r] = relu_from_activation_net(activation_spec(a), n);
            double tol = 2.5 * std::exp(-std::sqrt(static_cast<double>(n))) + 1e-6;
            o.require(r.grid_size >= 10000, "grid too small");
            o.require(r.max_abs_error <= tol, std::string(a) + " n=" + std::to_string(n));
            worst_ratio = std::max(worst_ratio, r.max_abs_error / tol);
        }
    }
    o.note << "worst error/tolerance " << worst_ratio;
}

void sawtooth(Outcome& o) {
    double worst = 0;
    for (int n = 0; n <= 10; ++n) {
        auto [net, r] = sawtooth_square_net(n);
        o.require(r.max_abs_error <= std::pow(4.0, -n) + 1e-12, "error at n=" + std::to_string(n));
        worst = std::max(worst, r.max_abs_error * std::pow(4.0, n));
        o.require(net.depth() == static_cast<std::size_t>(n + 3), "depth at n=" + std::to_string(n));
        o.require(net.width() <= 3, "width at n=" + std::to_string(n));
        long K = 1L << n;
        for (long k = -K; k <= K; ++k) {
            Rational x = make_rational(k, K);
            o.require(net.eval1(x) == Rational(x * x), "dyadic point at n=" + std::to_string(n));
        }
        Pwl1D f = network_to_pwl1d(net);
        for (const auto& s : f.slopes()) o.require(abs(s) <= 2, "slope above 2 at n=" + std::to_string(n));
        o.require(f.slopes().front() == 0 && f.slopes().back() == 0, "tails not flat");
        for (Rational x : {q(-100), q(-1), q(1), q(9, 8), q(100)}) o.require(f(x) == 1, "value outside [-1,1]");
    }
    o.note << "max error * 4^n = " << worst << ", slopes exact via the PWL";
}

AffineLayer<double> dlayer(std::size_t r, std::size_t c, std::vector<double> w, std::vector<double> b) {
    AffineLayer<double> l(r, c);
    l.weights = std::move(w);
    l.bias = std::move(b);
    return l;
}

void transforms(Outcome& o) {
    auto tanh_net = Network<double>({dlayer(3, 1, {1, -0.5, 0.75}, {0.25, 0, -0.5}),
                                     dlayer(3, 3, {0.5, -0.25, 1, 0, 1, -1, 0.75, 0.5, 0}, {0, 0.5, -0.25}),
                                     dlayer(1, 3, {1, -1, 0.5}, {0.125})},
                                    Activation::tanh);
    o.require(tanh_net.depth() == 2 && tanh_net.width() == 3 && tanh_net.max_abs_coefficient() <= 1, "tanh fixture shape");
    auto [tr, rr] = transform_activation_to_relu(tanh_net, 1e-2);
    o.require(rr.max_abs_error <= 1e-2, "tanh -> relu error");
    // |x| = relu(x) + relu(-x), then relu(2|x| - 1)
    auto absnet = Network<Rational>(
        {fx::layer(2, 1, {1, -1}, {0, 0}), fx::layer(1, 2, {2, 2}, {-1}), fx::layer(1, 1, {1}, {0})}, Activation::relu);
    auto [tl, rl] = transform_relu_to_activation(absnet, activation_spec("logistic"), 5e-2);
    o.require(rl.max_abs_error <= 5e-2, "relu -> logistic error");
    o.note << "tanh->relu " << rr.max_abs_error << " (<= 1e-2), |x| relu->logistic " << rl.max_abs_error << " (<= 5e-2)";
}

void width_inefficiency(Outcome& o) {
    auto g = width_ineff_gadget(2);
    o.require(regions_in(network_to_pwl1d(g), q(0), q(1)) == 81, "gadget regions");
    o.require(g.max_abs_coefficient() <= 6, "gadget coefficients");
    auto c = separation_certificate(Pwl1D::affine(q(0), q(1, 2)), 2, BigInt(4));
    o.require(c.measured_l1 == q(1, 4), "constant 1/2 distance");
    o.require(c.lower_bound == q(75, 648), "constant 1/2 bound");
    o.require(c.lower_bound >= q(1, 9), "75/648 >= 1/9");
    std::mt19937_64 rng(909);
    std::uniform_int_distribution<std::size_t> kd(1, 20);
    std::uniform_int_distribution<long> bx(1, 999), vy(-50, 150), s(-3, 3);
    for (int t = 0; t < 200; ++t) {
        std::size_t k = kd(rng);
        std::set<long> cuts;
        while (cuts.size() + 1 < k) cuts.insert(bx(rng));
        std::vector<Rational> xs{q(0)}, ys;
        for (long x : cuts) xs.push_back(q(x, 1000));
        xs.push_back(q(1));
        for (std::size_t i = 0; i < xs.size(); ++i) ys.push_back(q(vy(rng), 100));
        Rational l = s(rng), r = s(rng);
        auto cert = separation_certificate(Pwl1D::from_knots({xs, ys, l, r}), 2);
        o.require(cert.holds() && cert.measured_l1 >= cert.lower_bound, "random candidate");
    }
    auto orc = four_region_oracle(2);
    auto oc = separation_certificate(orc.best, 2, BigInt(4));
    o.require(oc.measured_l1 >= oc.lower_bound, "oracle minimizer below bound");
    o.require(orc.best_l1 >= q(1, 9), "a 4-region candidate measures below 1/9");
    o.note << "81 regions, coef <= 6, 1/4 >= 75/648; 200 random certificates hold; oracle minimum "
           << format_rational(orc.best_l1) << " over " << orc.candidates << " candidates";
}

void sobolev(Outcome& o) {
    auto rep = sobolev_rate_experiment(smooth_target("bump2d"), {4, 8, 16});
    o.require(rep.fitted_order >= 0.8, "fitted order");
    for (double r : rep.ratios) o.require(r >= 1.6 && r <= 2.6, "ratio outside [1.6, 2.6]");
    o.note << "order " << rep.fitted_order << ", ratios";
    for (double r : rep.ratios) o.note << ' ' << r;
}

void width2(Outcome& o) {
    std::mt19937_64 rng(1111);
    std::uniform_int_distribution<int> depth(1, 5);
    int outside = 0;
    std::string first;
    for (int i = 0; i < 500; ++i) {
        std::vector<int> dims{1};
        int L = depth(rng);
        for (int l = 0; l < L; ++l) dims.push_back(2);
        dims.push_back(1);
        auto f = network_to_pwl1d(fx::random_net(rng, dims));
        if (!(is_monotone(f) || is_bounded_above(f) || is_bounded_below(f))) {
            if (outside++ == 0) {
                first = "net " + std::to_string(i) + " (depth " + std::to_string(L) + ") slopes";
                for (const auto& sl : f.slopes()) first += " " + format_rational(sl);
            }
        }
    }
    o.require(outside == 0, std::to_string(outside) + "/500 width-2 nets are neither monotone nor bounded on a side");
    auto h = network_to_pwl1d(fx::h_net());
    o.require(!is_monotone(h) && !is_bounded_above(h) && !is_bounded_below(h), "h inside the class");
    bool rejected = false;
    try {
        compile_widthW(h, 2);
    } catch (const ContractError&) {
        rejected = true;
    }
    o.require(rejected, "width-2 compile accepted");
    o.note << (500 - outside) << "/500 width-2 nets in the class";
    if (!first.empty()) o.note << "; first counterexample: " << first;
    o.note << "; h escapes all three; compile_widthW rejects W = 2";
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    void (*run)(Outcome&);
};

}  // namespace

int main() {
    const Criterion all[] = {
        {1, "exact 1-D formula", 60, exact_1d_formula},
        {2, "corrected upper bound", 300, corrected_bound},
        {3, "f_jd oracle", 60, fjd_oracle},
        {4, "1-D compiler correctness", 300, compiler_correctness},
        {5, "simplicial compiler", 300, simplicial_compiler},
        {6, "Newman ReLU approximation", 120, newman_relu},
        {7, "sawtooth square", 60, sawtooth},
        {8, "activation transforms", 300, transforms},
        {9, "width-inefficiency certificate", 600, width_inefficiency},
        {10, "Sobolev rate", 600, sobolev},
        {11, "width-2 impossibility", 60, width2},
    };
    int failed = 0;
    for (const auto& c : all) {
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(s <= c.limit_s, "time limit");
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.note.str() << " ("
                  << std::fixed;
        std::cout.precision(1);
        std::cout << s << " s, limit " << c.limit_s << " s)" << std::defaultfloat << std::endl;
        std::cout.precision(6);
    }
    std::cout << (failed ? "FAIL" : "PASS") << "  overall: " << (11 - failed) << "/11 criteria" << std::endl;
    return failed ? 1 : 0;
}
