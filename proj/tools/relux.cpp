// relux: command-line front end.
// Exit codes: 0 ok, 1 contract or verification failure, 2 usage or input error.

#include "relux/analysis.hpp"
#include "relux/approx.hpp"
#include "relux/bounds.hpp"
#include "relux/compile1d.hpp"
#include "relux/compilend.hpp"
#include "relux/errors.hpp"
#include "relux/io.hpp"
#include "relux/network_pwl.hpp"
#include "relux/separation.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

using namespace relux;

namespace {

struct Global {
    std::uint64_t seed = 1;
    std::string mode = "rational";
    unsigned jobs = 1;
    bool verify = false;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(bool ok, const std::string& what) {
    if (!ok) throw VerificationFailed("--verify: " + what);
}

// Runs fn(0..n-1) on `jobs` threads; results land by index so output order is fixed.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, unsigned jobs, F&& fn) {
    std::vector<R> out(n);
    std::vector<std::exception_ptr> errs(n);
    auto work = [&](unsigned t) {
        for (std::size_t i = t; i < n; i += jobs) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::vector<std::thread> ts;
    for (unsigned t = 1; t < jobs; ++t) ts.emplace_back(work, t);
    work(0);
    for (auto& t : ts) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

void write_out(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text_file(path, text);
}

Network<Rational> rational_network(const AnyNetwork& any) {
    if (auto p = std::get_if<Network<Rational>>(&any)) return *p;
    if (auto p = std::get_if<Network<double>>(&any))
        return convert_network<Rational>(*p, [](double v) { return rational_from_double(v); });
    throw ModeError("multiprecision networks cannot be analyzed exactly");
}

Network<Rational> load_rational_net(const std::string& path) {
    return rational_network(network_from_json(read_json_file(path)));
}

Json net_for_mode(const Network<Rational>& net, const Global& g) {
    if (g.mode == "binary64") return network_to_json(from_rational_network<double>(net));
    return network_to_json(net);
}

Box2 parse_box(const std::string& s) {
    std::vector<Rational> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(rational_from_json(Json(tok), "--box"));
    if (v.size() != 4) throw UsageError("--box needs xmin,xmax,ymin,ymax");
    return Box2{v[0], v[1], v[2], v[3]};
}

std::vector<int> parse_ints(const std::string& s, const std::string& flag) {
    std::vector<int> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            v.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw UsageError(flag + ": '" + tok + "' is not an integer");
        }
    }
    return v;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    std::string net, box = "-64,64,-64,64", report;
    int lines = 200;
};

int cmd_analyze(const AnalyzeArgs& a, const Global& g) {
    Network<Rational> net = load_rational_net(a.net);
    Json out{{"input_dim", net.input_dim()}, {"output_dim", net.output_dim()}, {"design", net.design().to_string()}};
    if (net.input_dim() == 1) {
        auto fs = network_to_pwl1d_outputs(net);
        out["method"] = method_name(RegionMethod::exact_1d);
        out["regions"] = vector_region_count(fs);
        std::cout << "regions " << vector_region_count(fs) << '\n';
        if (fs.size() == 1) {
            auto rep = pwl1d_region_report(fs[0]);
            out["monotone_regions"] = *rep.monotone_regions;
            out["nonconstant_regions"] = rep.nonconstant_regions;
            out["pwl"] = pwl_to_json(fs[0]);
            std::cout << "monotone " << *rep.monotone_regions << '\n';
        }
        if (g.verify) {
            for (std::size_t o = 0; o < fs.size(); ++o) {
                std::vector<Rational> pts;
                const auto& bp = fs[o].breakpoints();
                if (bp.empty()) pts = {Rational(-1), Rational(0), Rational(1)};
                for (std::size_t i = 0; i < bp.size(); ++i) {
                    pts.push_back(bp[i]);
                    pts.push_back(i + 1 < bp.size() ? Rational((bp[i] + bp[i + 1]) / 2) : Rational(bp[i] + 1));
                    if (i == 0) pts.push_back(bp[i] - 1);
                }
                for (const auto& x : pts) check(net.eval({x})[o] == fs[o](x), "1-D pieces disagree with the network");
            }
        }
    } else if (net.input_dim() == 2) {
        Box2 box = parse_box(a.box);
        auto rep = cell_decomposition_2d(net, box);
        out["method"] = method_name(rep.method);
        out["regions"] = rep.regions;
        out["cells"] = rep.cells.size();
        out["box"] = a.box;
        std::cout << "regions " << rep.regions << " (inside box " << a.box << ")\n";
        if (g.verify) {
            for (const auto& c : rep.cells) {
                Point2 m{Rational(0), Rational(0)};
                for (const auto& p : c.polygon) {
                    m[0] += p[0];
                    m[1] += p[1];
                }
                m[0] /= static_cast<long>(c.polygon.size());
                m[1] /= static_cast<long>(c.polygon.size());
                auto y = net.eval({m[0], m[1]});
                for (std::size_t o = 0; o < y.size(); ++o) check(y[o] == c.map[o](m), "cell map disagrees with the network");
            }
        }
    } else {
        auto rep = sampled_region_lower_bound(net, a.lines, g.seed);
        out["method"] = method_name(rep.method);
        out["regions_lower_bound"] = rep.regions;
        std::cout << "regions >= " << rep.regions << " (sampled along " << a.lines << " lines)\n";
    }
    if (!a.report.empty()) write_text_file(a.report, out.dump(2) + "\n");
    return 0;
}

struct BoundsArgs {
    std::string design, variant = "corrected", report;
};

int cmd_bounds(const BoundsArgs& a, const Global& g) {
    Design d = Design::parse(a.design);
    auto b = upper_bound_general(d, parse_variant(a.variant));
    std::cout << "design " << d.to_string() << '\n';
    std::optional<BigInt> exact;
    bool exact_ok = d.n0() == 1 && d.L() >= 1;
    for (int l = 1; l <= d.L() && exact_ok; ++l) exact_ok = d.hidden(l) >= 2;
    if (exact_ok) {
        auto [r, rt] = r_exact_1d(d);
        exact = r;
        std::cout << "R exact " << r.get_str() << '\n' << "R tilde " << rt.get_str() << '\n';
    }
    std::cout << "bound (" << variant_name(b.variant) << ") " << b.value.get_str() << '\n';
    if (b.variant != BoundVariant::previous)
        std::cout << "bound (previous) " << upper_bound_general(d, BoundVariant::previous, 0).value.get_str() << '\n';
    std::cout << "terms " << (b.terms_truncated ? std::string("truncated") : std::to_string(b.terms.size())) << '\n';
    if (!a.report.empty()) write_text_file(a.report, b.to_csv());
    if (g.verify && exact) {
        auto net = build_max_region_network(d);
        auto got = vector_region_count(network_to_pwl1d_outputs(net));
        check(BigInt(got) == *exact, "max-region network has " + std::to_string(got) + " regions");
        check(b.variant == BoundVariant::verbatim || b.value >= *exact, "bound below the exact count");
    }
    return 0;
}

struct MaxnetArgs {
    std::string design, out;
};

int cmd_maxnet(const MaxnetArgs& a, const Global& g) {
    Design d = Design::parse(a.design);
    auto net = build_max_region_network(d);
    auto regions = vector_region_count(network_to_pwl1d_outputs(net));
    std::cout << "regions " << regions << '\n';
    if (g.verify) check(BigInt(regions) == r_exact_1d(d).first, "region count differs from the exact formula");
    write_out(a.out, net_for_mode(net, g).dump(2) + "\n");
    return 0;
}

struct Compile1dArgs {
    std::string pwl, out, report;
    int width = 3;
};

int cmd_compile1d(const Compile1dArgs& a, const Global& g) {
    Pwl1D f = pwl_from_json(read_json_file(a.pwl));
    auto net = a.width == 3 ? compile_width3(f) : compile_widthW(f, a.width);
    bool exact = network_to_pwl1d(net) == f;
    Json rec{{"regions", f.regions()},
             {"width", net.width()},
             {"depth", net.depth()},
             {"exact", exact},
             {"mode", g.mode}};
    if (g.mode == "binary64") {
        auto dn = from_rational_network<double>(net);
        double err = 0;
        for (int i = -100; i <= 100; ++i) {
            Rational x = make_rational(i, 10);
            err = std::max(err, std::abs(dn.eval({x.get_d()})[0] - f(x).get_d()));
        }
        rec["binary64_max_error"] = err;
    }
    std::cout << rec.dump() << '\n';
    if (!exact) throw VerificationFailed("compiled network differs from the input");
    write_out(a.out, net_for_mode(net, g).dump(2) + "\n");
    if (!a.report.empty()) write_text_file(a.report, rec.dump(2) + "\n");
    if (g.verify && !a.out.empty() && a.out != "-" && g.mode == "rational")
        check(network_to_pwl1d(load_rational_net(a.out)) == f, "written network does not reproduce the input");
    return 0;
}

struct CompilendArgs {
    std::string complex, target, out, report;
    int r = 4, n0 = 2;
};

int cmd_compilend(const CompilendArgs& a, const Global& g) {
    PwlSimplicial f;
    if (!a.complex.empty()) {
        f = pwl_simplicial_from_json(read_json_file(a.complex));
    } else if (!a.target.empty()) {
        auto t = smooth_target(a.target);
        f = kuhn_grid_interpolant(
            [&](const PointN& x) {
                std::vector<double> xd;
                for (const auto& v : x) xd.push_back(v.get_d());
                return rational_from_double(t.f(xd));
            },
            t.n0, a.r);
    } else {
        std::mt19937_64 rng(g.seed);
        std::uniform_int_distribution<long> u(-8, 8);
        f = kuhn_grid_interpolant(
            [&](const PointN& x) {
                for (const auto& c : x)
                    if (c == 0 || c == 1) return Rational(0);
                return make_rational(u(rng), 4);
            },
            a.n0, a.r);
    }
    SimplicialStats st;
    auto net = compile_simplicial(f, &st);
    Json rec{{"vertices", f.vertices.size()},
             {"simplices", f.simplices.size()},
             {"width", st.width},
             {"depth", st.depth},
             {"layer_budget", st.layer_budget},
             {"exact", true}};
    if (g.verify) {
        std::mt19937_64 rng(g.seed ^ 0x9e3779b97f4a7c15ULL);
        std::uniform_int_distribution<long> u(-64, 1088);
        std::size_t probes = 0;
        for (int i = 0; i < 1000; ++i) {
            PointN x;
            for (int d = 0; d < f.dim; ++d) x.push_back(make_rational(u(rng), 1024));
            auto want = f.locate(x) ? f(x) : Rational(0);
            if (!f.locate(x) && !f.compact_support) continue;
            check(net.eval(x)[0] == want, "network differs from the complex at a random point");
            ++probes;
        }
        rec["random_probes"] = probes;
    }
    std::cout << rec.dump() << '\n';
    write_out(a.out, net_for_mode(net, g).dump(2) + "\n");
    if (!a.report.empty()) write_text_file(a.report, rec.dump(2) + "\n");
    return 0;
}

struct ApproxArgs {
    std::string what, act = "logistic", out, coeffs;
    int n = 9;
    double eps = 1e-2;
};

int cmd_approx(const ApproxArgs& a, const Global& g) {  // always checks measured <= bound
    ApproxReport rep;
    Json net;
    if (a.what == "sawtooth") {
        auto [nn, r] = sawtooth_square_net(a.n);
        rep = r;
        net = network_to_json(nn);
    } else if (a.what == "newman") {
        rep.target = "newman rational, n = " + std::to_string(a.n);
        for (double x : probe_points(-1, 1, 10000, 1000, g.seed))
            rep.max_abs_error = std::max(rep.max_abs_error, std::abs(std::max(0.0, x) - newman_rational_reference(a.n, x)));
        rep.grid_size = 11000;
        rep.bound = 1.5 * std::exp(-std::sqrt(static_cast<double>(a.n)));
    } else if (a.what == "relu-from") {
        auto [nn, r] = relu_from_activation_net(activation_spec(a.act), a.n);
        rep = r;
        net = network_to_json(nn.net);
    } else if (a.what == "polynomial") {
        std::vector<Rational> cs;
        std::stringstream ss(a.coeffs);
        std::string tok;
        while (std::getline(ss, tok, ',')) cs.push_back(rational_from_json(Json(tok), "--coeffs"));
        if (cs.empty()) throw UsageError("--coeffs is required for polynomial");
        auto [nn, r] = relu_polynomial_net(cs, a.eps);
        rep = r;
        net = network_to_json(nn);
    } else if (a.what == "activation") {
        auto [nn, r] = relu_activation_approx_net(activation_spec(a.act), a.eps);
        rep = r;
        net = network_to_json(nn);
    } else if (a.what == "certificate") {
        auto c = certificate_check(activation_spec(a.act), a.n, probe_points(-20, 20, 161, 0, g.seed));
        std::cout << c.to_json().dump() << '\n';
        if (!a.out.empty()) write_text_file(a.out, c.to_json().dump(2) + "\n");
        if (!c.violations.empty()) throw VerificationFailed("activation certificate violated");
        return 0;
    } else {
        throw UsageError("unknown approx target '" + a.what + "'");
    }
    Json j = rep.to_json();
    std::cout << j.dump() << '\n';
    if (!a.out.empty()) write_text_file(a.out, Json{{"report", j}, {"network", net}}.dump(2) + "\n");
    if (!rep.within_bound())
        throw VerificationFailed("measured error " + std::to_string(rep.max_abs_error) + " exceeds bound " +
                                 std::to_string(rep.bound));
    return 0;
}

struct TransformArgs {
    std::string net, to = "relu", out;
    double eps = 1e-2;
};

int cmd_transform(const TransformArgs& a, const Global&) {
    AnyNetwork any = network_from_json(read_json_file(a.net));
    TransformDetails det;
    ApproxReport rep;
    Json net;
    if (a.to == "relu") {
        Network<double> in;
        if (auto p = std::get_if<Network<double>>(&any))
            in = *p;
        else if (auto q = std::get_if<Network<Rational>>(&any))
            in = from_rational_network<double>(*q);
        else
            throw ModeError("transform expects a rational or binary64 network");
        auto [nn, r] = transform_activation_to_relu(in, a.eps, &det);
        rep = r;
        net = network_to_json(nn);
    } else {
        auto [nn, r] = transform_relu_to_activation(rational_network(any), activation_spec(a.to), a.eps, &det);
        rep = r;
        net = network_to_json(nn.net);
    }
    Json layers = Json::array();
    for (const auto& l : det.layers)
        layers.push_back({{"block_eps", l.block_eps},
                          {"block_error", l.block_error},
                          {"input_scale", l.input_scale},
                          {"amplification", l.amplification},
                          {"n", l.n}});
    Json j{{"report", rep.to_json()}, {"layers", layers}, {"composed_bound", det.composed_bound}};
    std::cout << rep.to_json().dump() << '\n';
    if (!a.out.empty()) write_text_file(a.out, Json{{"report", j}, {"network", net}}.dump(2) + "\n");
    if (rep.max_abs_error > a.eps)
        throw VerificationFailed("transform error " + std::to_string(rep.max_abs_error) + " exceeds eps");
    return 0;
}

struct SeparationArgs {
    int L = 2;
    std::string candidates = "random:200", report, budget;
    int max_regions = 20;
    bool oracle = false;
};

std::vector<Pwl1D> load_candidates(const SeparationArgs& a, const Global& g) {
    std::vector<Pwl1D> out;
    if (a.candidates.rfind("random:", 0) == 0) {
        int n = std::stoi(a.candidates.substr(7));
        std::mt19937_64 rng(g.seed);
        std::uniform_int_distribution<int> kd(1, a.max_regions);
        std::uniform_int_distribution<long> bx(1, 999), vy(-50, 150), s(-3, 3);
        for (int t = 0; t < n; ++t) {
            std::size_t k = static_cast<std::size_t>(kd(rng));
            std::set<long> cuts;
            while (cuts.size() + 1 < k) cuts.insert(bx(rng));
            std::vector<Rational> xs{Rational(0)}, ys;
            for (long c : cuts) xs.push_back(make_rational(c, 1000));
            xs.push_back(Rational(1));
            for (std::size_t i = 0; i < xs.size(); ++i) ys.push_back(make_rational(vy(rng), 100));
            Rational l = s(rng), r = s(rng);
            out.push_back(Pwl1D::from_knots({xs, ys, l, r}));
        }
        return out;
    }
    Json j = read_json_file(a.candidates);
    if (j.is_object() && j.contains("candidates")) j = j["candidates"];
    if (!j.is_array()) throw ParseError(a.candidates + ": expected an array of PWL documents");
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            out.push_back(pwl_from_json(j[i]));
        } catch (const ParseError& e) {
            throw ParseError(a.candidates + ": candidate " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

int cmd_separation(const SeparationArgs& a, const Global& g) {
    auto gadget = width_ineff_gadget(a.L);
    std::cout << "gadget regions " << regions_in(network_to_pwl1d(gadget), Rational(0), Rational(1))
              << ", max coefficient " << format_rational(gadget.max_abs_coefficient()) << '\n';
    std::vector<Pwl1D> cands = load_candidates(a, g);
    if (a.oracle) {
        auto o = four_region_oracle(a.L);
        std::cout << "oracle minimum " << format_rational(o.best_l1) << " over " << o.candidates << " candidates\n";
        cands.push_back(o.best);
    }
    std::optional<BigInt> budget;
    if (!a.budget.empty()) budget = BigInt(a.budget);
    auto certs = parallel_map<SeparationCertificate>(cands.size(), g.jobs,
                                                     [&](std::size_t i) { return separation_certificate(cands[i], a.L, budget); });
    std::ostringstream csv;
    csv << "index,L,gadget_regions,candidate_regions,candidate_pieces,good_intervals,non_good_intervals,good_pairs,"
           "crossings,lower_bound,measured_l1,holds\n";
    std::size_t held = 0;
    for (std::size_t i = 0; i < certs.size(); ++i) {
        const auto& c = certs[i];
        held += c.holds();
        csv << i << ',' << c.L << ',' << c.gadget_regions.get_str() << ',' << c.candidate_regions.get_str() << ','
            << c.candidate_pieces << ',' << c.good_intervals << ',' << c.non_good_intervals << ',' << c.good_pairs << ','
            << c.crossings << ',' << format_rational(c.lower_bound) << ',' << format_rational(c.measured_l1) << ','
            << (c.holds() ? "true" : "false") << '\n';
    }
    std::cout << "certificates " << held << "/" << certs.size() << " hold\n";
    if (!a.report.empty()) write_text_file(a.report, csv.str());
    if (held != certs.size()) throw VerificationFailed("a separation certificate failed");
    return 0;
}

struct SobolevArgs {
    std::string target = "bump2d", res = "4,8,16", report, json;
    bool no_compile = false;
};

int cmd_sobolev(const SobolevArgs& a, const Global& g) {
    auto t = smooth_target(a.target);
    auto res = parse_ints(a.res, "--res");
    SobolevOptions opt;
    opt.compile = !a.no_compile || g.verify;
    // one resolution per task, then reassembled in order
    auto parts = parallel_map<SobolevReport>(res.size(), g.jobs,
                                             [&](std::size_t i) { return sobolev_rate_experiment(t, {res[i]}, opt); });
    std::vector<SobolevRow> rows;
    for (const auto& p : parts) rows.push_back(p.rows.at(0));
    // recompute the fit over all rows
    SobolevReport rep;
    rep.target = t.name;
    rep.rows = rows;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.w11 <= 0) continue;
        double lx = std::log(static_cast<double>(r.r)), ly = std::log(r.w11);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++n;
    }
    rep.fitted_order = n >= 2 ? -(n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
        rep.ratios.push_back(rows[i + 1].w11 > 0 ? rows[i].w11 / rows[i + 1].w11 : 0.0);
    std::cout << rep.to_csv() << "fitted order " << rep.fitted_order << '\n';
    if (!a.report.empty()) write_text_file(a.report, rep.to_csv());
    if (!a.json.empty()) write_text_file(a.json, rep.to_json().dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"relux: exact region analysis, compilers and approximation networks for ReLU nets"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    Global g;
    app.add_option("--seed", g.seed, "seed for every random choice")->capture_default_str();
    app.add_option("--mode", g.mode, "scalar mode for written networks")
        ->check(CLI::IsMember({"rational", "binary64"}))
        ->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_flag("--verify", g.verify, "re-check the output and fail loudly");

    std::function<int()> run;

    AnalyzeArgs an;
    auto* s_an = app.add_subcommand("analyze", "count linear regions of a network");
    s_an->add_option("--net", an.net, "network JSON")->required();
    s_an->add_option("--box", an.box, "2-D box xmin,xmax,ymin,ymax")->capture_default_str();
    s_an->add_option("--lines", an.lines, "random lines for n0 >= 3")->capture_default_str();
    s_an->add_option("--report", an.report, "JSON report path");
    s_an->callback([&] { run = [&] { return cmd_analyze(an, g); }; });

    BoundsArgs bo;
    auto* s_bo = app.add_subcommand("bounds", "exact 1-D count and general upper bound for a design");
    s_bo->add_option("--design", bo.design, "widths n0,...,n_{L+1}")->required();
    s_bo->add_option("--variant", bo.variant, "corrected, verbatim or previous")->capture_default_str();
    s_bo->add_option("--report", bo.report, "CSV breakdown path");
    s_bo->callback([&] { run = [&] { return cmd_bounds(bo, g); }; });

    MaxnetArgs mx;
    auto* s_mx = app.add_subcommand("maxnet", "network attaining the exact 1-D region count");
    s_mx->add_option("--design", mx.design, "widths 1,n1,...,1")->required();
    s_mx->add_option("--out", mx.out, "network JSON path (default stdout)");
    s_mx->callback([&] { run = [&] { return cmd_maxnet(mx, g); }; });

    Compile1dArgs c1;
    auto* s_c1 = app.add_subcommand("compile1d", "compile a 1-D PWL into a narrow deep network");
    s_c1->add_option("--pwl", c1.pwl, "PWL JSON")->required();
    s_c1->add_option("--width", c1.width, "3, or W >= 5")->capture_default_str();
    s_c1->add_option("--out", c1.out, "network JSON path (default stdout)");
    s_c1->add_option("--report", c1.report, "verification record path");
    s_c1->callback([&] { run = [&] { return cmd_compile1d(c1, g); }; });

    CompilendArgs cn;
    auto* s_cn = app.add_subcommand("compilend", "compile a simplicial PWL into a width 2n0+6 network");
    auto* o_cx = s_cn->add_option("--complex", cn.complex, "PwlSimplicial JSON");
    s_cn->add_option("--target", cn.target, "or interpolate a named target on a Kuhn grid")->excludes(o_cx);
    s_cn->add_option("--r", cn.r, "grid resolution")->capture_default_str();
    s_cn->add_option("--n0", cn.n0, "input dimension for the random grid")->capture_default_str();
    s_cn->add_option("--out", cn.out, "network JSON path (default stdout)");
    s_cn->add_option("--report", cn.report, "record path");
    s_cn->callback([&] { run = [&] { return cmd_compilend(cn, g); }; });

    ApproxArgs ap;
    auto* s_ap = app.add_subcommand("approx", "approximation blocks and their measured errors");
    s_ap->add_option("what", ap.what, "sawtooth, newman, relu-from, polynomial, activation, certificate")->required();
    s_ap->add_option("--act", ap.act, "catalog activation")->capture_default_str();
    s_ap->add_option("--n", ap.n, "degree or steps")->capture_default_str();
    s_ap->add_option("--eps", ap.eps, "target accuracy")->capture_default_str();
    s_ap->add_option("--coeffs", ap.coeffs, "polynomial coefficients c0,c1,...");
    s_ap->add_option("--out", ap.out, "report JSON path");
    s_ap->callback([&] { run = [&] { return cmd_approx(ap, g); }; });

    TransformArgs tr;
    auto* s_tr = app.add_subcommand("transform", "rewrite a network for another activation");
    s_tr->add_option("--net", tr.net, "network JSON")->required();
    s_tr->add_option("--to", tr.to, "relu, or a catalog activation")->capture_default_str();
    s_tr->add_option("--eps", tr.eps, "end-to-end accuracy on [-1,1]^n0")->capture_default_str();
    s_tr->add_option("--out", tr.out, "report and network JSON path");
    s_tr->callback([&] { run = [&] { return cmd_transform(tr, g); }; });

    SeparationArgs se;
    auto* s_se = app.add_subcommand("separation", "width-inefficiency certificates against the deep gadget");
    s_se->add_option("--L", se.L, "gadget size (depth L^2)")->capture_default_str();
    s_se->add_option("--candidates", se.candidates, "PWL array file, or random:N")->capture_default_str();
    s_se->add_option("--max-regions", se.max_regions, "pieces of random candidates")->capture_default_str();
    s_se->add_option("--budget", se.budget, "region budget k used in the bound");
    s_se->add_flag("--oracle", se.oracle, "add the best gridded 4-region candidate");
    s_se->add_option("--report", se.report, "CSV path");
    s_se->callback([&] { run = [&] { return cmd_separation(se, g); }; });

    SobolevArgs so;
    auto* s_so = app.add_subcommand("sobolev", "W^{1,1} error of compiled Kuhn interpolants");
    s_so->add_option("--target", so.target, "bump1d, bump2d, wave2d, cone2d, zero2d")->capture_default_str();
    s_so->add_option("--res", so.res, "resolutions r")->capture_default_str();
    s_so->add_flag("--no-compile", so.no_compile, "measure the interpolant only");
    s_so->add_option("--report", so.report, "CSV path");
    s_so->add_option("--json", so.json, "JSON path");
    s_so->callback([&] { run = [&] { return cmd_sobolev(so, g); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        return run();
    } catch (const UsageError& e) {
        std::cerr << "relux: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "relux: input error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "relux: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "relux: unexpected error: " << e.what() << '\n';
        return 1;
    }
}
