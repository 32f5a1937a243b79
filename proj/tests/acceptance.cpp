// End-to-end acceptance checks. Each criterion prints a single PASS/FAIL
// line; the process exits nonzero if any criterion fails.

#include <dce/catalog.hpp>
#include <dce/numlab.hpp>
#include <dce/parser.hpp>
#include <dce/transforms.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

using namespace dce;

namespace {

Expr t = var('t');
Expr x = var('x');
Expr y = var('y');
Expr u = u_jet(0);
Expr ux = u_jet(1);

struct Criterion {
    std::string label;
    std::function<bool(std::string&)> run;
};

bool verify_all(const CatalogCase& c, std::string& why) {
    for (std::size_t i = 0; i < c.vectors.size(); ++i) {
        VerificationReport rep = verify(c.eq, c.vectors[i]);
        if (!rep.verified) {
            why += c.id + " vector " + std::to_string(i + 1) +
                   " has residual " +
                   format_expr(rep.residual, c.eq.space) + "; ";
            return false;
        }
    }
    return true;
}

bool verify_inst(const Instantiation& inst, std::string& why,
                 const std::string& tag) {
    for (std::size_t i = 0; i < inst.vectors.size(); ++i) {
        VerificationReport rep = verify(inst.eq, inst.vectors[i]);
        if (!rep.verified) {
            why += tag + " vector " + std::to_string(i + 1) + " refuted; ";
            return false;
        }
    }
    return true;
}

// A cubic with A >= 1 on the sampling box.
FnBinding cubic_a() {
    return FnBinding{{x}, num(2) + x + frac(1, 6) * pow(x, 3)};
}
FnBinding cubic_b() { return FnBinding{{x}, x - frac(1, 4) * pow(x, 2)}; }

// --- criterion 1: the small catalog verifies symbolically -----------------

bool criterion1(std::string& why) {
    bool ok = true;
    for (const auto& c : small_catalog()) ok = verify_all(c, why) && ok;
    return ok;
}

// --- criterion 2: the wide catalog verifies, including the mu branches ----

bool criterion2(std::string& why) {
    bool ok = true;
    for (const auto& c : wide_catalog()) ok = verify_all(c, why) && ok;
    // the rational-exponent family at its two admissible parameter values
    for (long m : {0L, 1L}) {
        Bindings b;
        b.atoms[sym("mu")] = num(m);
        Instantiation inst = instantiate(find_case("W3"), b);
        ok = verify_inst(inst, why, "W3 mu=" + std::to_string(m)) && ok;
    }
    return ok;
}

// --- criterion 3: reductions of the convection cases to pure diffusion ----

struct Reduction {
    std::string tag;
    DCEquation source;
    std::vector<ConservedVector> source_vectors;
    PointTransformation tr;
    Expr target_f;  // the pure-diffusion weight after the change of variables
};

bool check_reduction(const Reduction& r, std::string& why) {
    if (!verify_inverse(r.tr)) {
        why += r.tag + ": inverse pair does not check out; ";
        return false;
    }
    DCEquation target;
    target.f = r.target_f;
    target.A = fn("A", {u});
    Expr got = apply_point_to_evolution(r.tr, evolution_form(r.source));
    Expr want = evolution_form(target);
    if (!simplify(got - want).is_zero()) {
        why += r.tag + ": evolution forms differ by " +
               format_expr(simplify(got - want)) + "; ";
        return false;
    }
    std::vector<ConservedVector> span = {
        {target.f * u, -fn("A", {u}) * ux},
        {x * target.f * u, -x * fn("A", {u}) * ux + antideriv("A", u)}};
    for (std::size_t i = 0; i < r.source_vectors.size(); ++i) {
        ConservedVector pushed = push_conserved_vector(r.tr, r.source_vectors[i]);
        if (!verify(target, pushed).verified) {
            why += r.tag + ": pushed vector " + std::to_string(i + 1) +
                   " is not conserved; ";
            return false;
        }
        if (!match_in_span(target, pushed, span)) {
            why += r.tag + ": pushed vector " + std::to_string(i + 1) +
                   " lies outside the diffusion span; ";
            return false;
        }
    }
    return true;
}

bool criterion3(std::string& why) {
    bool ok = true;

    {
        // B = 1, f = h = 1: shear (t, x + t, u)
        Reduction r;
        r.tag = "2b->2a";
        const CatalogCase& c = find_case("W2b");
        r.source = c.eq;
        r.source_vectors = c.vectors;
        r.tr.T = t;
        r.tr.X = x + t;
        r.tr.U = u;
        r.tr.Tinv = t;
        r.tr.Xinv = x - t;
        r.tr.Uinv = u;
        r.target_f = one();
        ok = check_reduction(r, why) && ok;
    }
    {
        // B = 1, f = h = e^x: (e^t, x + t, u)
        Reduction r;
        r.tag = "2c->2a";
        const CatalogCase& c = find_case("W2c");
        r.source = c.eq;
        r.source_vectors = c.vectors;
        r.tr.T = exp(t);
        r.tr.X = x + t;
        r.tr.U = u;
        r.tr.Tinv = ln(t);
        r.tr.Xinv = x - ln(t);
        r.tr.Uinv = u;
        r.target_f = exp(x);
        ok = check_reduction(r, why) && ok;
    }
    {
        // B = 1, f = x^(mu-1), h = x^mu at mu = 1 (mu + 1 != 0 branch):
        // ((e^(2t) - 1)/2, e^t x, u)
        Reduction r;
        r.tag = "2d->2a (mu=1)";
        Bindings b;
        b.atoms[sym("mu")] = one();
        Instantiation inst = instantiate(find_case("W2d"), b);
        r.source = inst.eq;
        r.source_vectors = inst.vectors;
        r.tr.T = (exp(2 * t) - one()) / 2;
        r.tr.X = exp(t) * x;
        r.tr.U = u;
        r.tr.Tinv = ln(2 * t + one()) / 2;
        r.tr.Xinv = x * pow(2 * t + one(), -frac(1, 2));
        r.tr.Uinv = u;
        r.target_f = one();
        ok = check_reduction(r, why) && ok;
    }
    {
        // mu = -1 (mu + 1 = 0 branch): (t, e^t x, u)
        Reduction r;
        r.tag = "2d->2a (mu=-1)";
        Bindings b;
        b.atoms[sym("mu")] = num(-1);
        Instantiation inst = instantiate(find_case("W2d"), b);
        r.source = inst.eq;
        r.source_vectors = inst.vectors;
        r.tr.T = t;
        r.tr.X = exp(t) * x;
        r.tr.U = u;
        r.tr.Tinv = t;
        r.tr.Xinv = exp(-t) * x;
        r.tr.Uinv = u;
        r.target_f = pow(x, -2);
        ok = check_reduction(r, why) && ok;
    }
    return ok;
}

// --- criterion 4: gauge elements fix the equation ------------------------

bool criterion4(std::string& why) {
    struct Fixture {
        Expr g, h, Phi;
    };
    std::vector<Fixture> fixtures = {
        {one(), one(), x},
        {one(), x, x * x / 2},
        {one(), 2 * x, x * x},
        {one(), 3 * pow(x, 2), pow(x, 3)},
        {exp(x), exp(x), x},
    };
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<long> numer(-6, 6);
    std::uniform_int_distribution<long> denom(1, 4);
    auto rnd_rat = [&](bool nonzero) {
        long n = numer(rng);
        while (nonzero && n == 0) n = numer(rng);
        return frac(n, denom(rng));
    };

    bool ok = true;
    int count = 0;
    while (count < 25) {
        const Fixture& fx = fixtures[count % fixtures.size()];
        DCEquation eq;
        eq.f = fn("f", {x});
        eq.g = fx.g;
        eq.h = fx.h;
        eq.A = fn("A", {u});
        eq.B = fn("B", {u});
        GaugeElement ge;
        ge.e1 = rnd_rat(true);
        ge.e2 = rnd_rat(true);
        ge.e3 = rnd_rat(true);
        ge.e4 = rnd_rat(false);
        ge.Phi = fx.Phi;
        DCEquation image = apply_to_equation(ge, eq);
        if (!same_equation(eq, image)) {
            why += "gauge element " + std::to_string(count) +
                   " changed the equation; ";
            ok = false;
        }
        ++count;
    }

    // with e4 = 0 a gauge element acts on the tuple exactly like a scaling
    // from the usual group with identity point part
    DCEquation eq;
    eq.f = fn("f", {x});
    eq.h = one();
    eq.A = fn("A", {u});
    eq.B = fn("B", {u});
    GaugeElement ge;
    ge.e1 = frac(5, 3);
    ge.e2 = frac(2, 7);
    ge.e3 = num(4);
    ge.e4 = zero();
    ge.Phi = x;
    UsualElement ue;
    ue.d1 = one();
    ue.d2 = zero();
    ue.d3 = one();
    ue.d4 = zero();
    ue.e1 = ge.e1;
    ue.e2 = ge.e2;
    ue.e3 = ge.e3;
    ue.X = x;
    ue.Xinv = x;
    DCEquation a = apply_to_equation(ge, eq);
    DCEquation b = apply_to_equation(ue, eq);
    std::vector<std::pair<Expr, Expr>> tuple = {
        {a.f, b.f}, {a.g, b.g}, {a.h, b.h}, {a.A, b.A}, {a.B, b.B}};
    for (const auto& [lhs, rhs] : tuple) {
        if (!simplify(lhs - rhs).is_zero()) {
            why += "e4 = 0 gauge disagrees with the usual-group action; ";
            ok = false;
            break;
        }
    }
    return ok;
}

// --- criteria 5 and 6: the numerical laboratory --------------------------

struct NumFixture {
    std::string tag;
    Instantiation inst;
    std::size_t vec = 0;
    Grid grid;
    SolveConfig cfg;
    std::function<double(double)> u0;
    SampleBox box;  // for the jet-point oracle
};

std::vector<NumFixture> numeric_fixtures() {
    constexpr double kTwoPi = 6.283185307179586;
    std::vector<NumFixture> out;

    auto periodic = [&] {
        Grid g;
        g.x_lo = 0;
        g.x_hi = kTwoPi;
        g.n = 256;
        return g;
    };
    auto dirichlet = [&](double lo, double hi) {
        Grid g;
        g.x_lo = lo;
        g.x_hi = hi;
        g.n = 256;
        g.boundary = Boundary::Dirichlet;
        return g;
    };
    auto sine = [](double amp, double lo, double hi) {
        double span = hi - lo;
        return [amp, lo, span](double xx) {
            return amp * std::sin(3.14159265358979324 * (xx - lo) / span);
        };
    };
    auto box_on = [](double lo, double hi) {
        SampleBox b;
        b.x_lo = lo;
        b.x_hi = hi;
        return b;
    };
    auto add = [&](const std::string& tag, const std::string& id,
                   const Bindings& b, std::size_t vec, Grid grid,
                   double t_end, std::function<double(double)> u0,
                   SampleBox box) {
        NumFixture fx;
        fx.tag = tag;
        fx.inst = instantiate(find_case(id), b);
        fx.vec = vec;
        fx.grid = grid;
        fx.cfg.t_end = t_end;
        fx.cfg.stride = 16;
        fx.u0 = std::move(u0);
        fx.box = box;
        out.push_back(std::move(fx));
    };

    Bindings base;
    base.fns["A"] = cubic_a();
    base.fns["B"] = cubic_b();
    base.fns["f"] = FnBinding{{x}, one()};

    {
        Bindings b = base;
        add("W1 (f=1)", "W1", b, 0, periodic(), 0.08,
            [](double xx) { return 0.5 * std::sin(xx); }, SampleBox{});
    }
    {
        Bindings b = base;
        b.fns["f"] = FnBinding{{x}, num(2) + cos(x)};
        add("W1 (f=2+cos x)", "W1", b, 0, periodic(), 0.05,
            [](double xx) { return 0.5 * std::sin(xx); }, SampleBox{});
    }
    {
        Bindings b;
        b.fns["A"] = cubic_a();
        b.fns["f"] = FnBinding{{x}, num(2) + cos(x)};
        add("W2a density 1", "W2a", b, 0, periodic(), 0.05,
            [](double xx) { return 0.8 * std::sin(xx); }, SampleBox{});
        b.fns["f"] = FnBinding{{x}, one()};
        add("W2a density 2", "W2a", b, 1, dirichlet(1, 2), 0.004,
            sine(1.0, 1, 2), box_on(1, 2));
    }
    {
        Bindings b;
        b.fns["A"] = cubic_a();
        add("W2b density 1", "W2b", b, 0, periodic(), 0.08,
            [](double xx) { return 0.5 * std::sin(xx); }, SampleBox{});
        add("W2b density 2", "W2b", b, 1, dirichlet(0, 1), 0.004,
            sine(1.0, 0, 1), SampleBox{});
    }
    {
        Bindings b;
        b.fns["A"] = cubic_a();
        add("W2c density 1", "W2c", b, 0, dirichlet(0, 1), 0.004,
            sine(1.0, 0, 1), SampleBox{});
    }
    {
        Bindings b;
        b.fns["A"] = cubic_a();
        b.atoms[sym("mu")] = num(2);
        add("W2d (mu=2)", "W2d", b, 0, dirichlet(1, 2), 0.004,
            sine(1.0, 1, 2), box_on(1, 2));
    }
    {
        Bindings b;
        b.fns["A"] = cubic_a();
        b.atoms[sym("mu")] = one();
        add("W3 (mu=1)", "W3", b, 0, dirichlet(1, 2), 0.002,
            sine(1.0, 1, 2), box_on(1, 2));
    }
    {
        Bindings b;
        b.fns["A"] = cubic_a();
        b.fns["h"] = FnBinding{{x}, exp(x)};
        add("W6 (h=e^x)", "W6", b, 0, dirichlet(0, 1), 0.004,
            sine(1.0, 0, 1), SampleBox{});
    }
    {
        Bindings b;
        b.fns["f"] = FnBinding{{x}, one()};
        b.fns["alpha"] = FnBinding{{t, x}, pow(x, 2) - 2 * t};
        add("W9 (alpha=x^2-2t)", "W9", b, 0, dirichlet(0, 1), 0.004,
            sine(1.0, 0, 1), SampleBox{});
    }
    return out;
}

bool criterion5(std::string& why) {
    bool ok = true;
    for (const auto& fx : numeric_fixtures()) {
        auto t0 = std::chrono::steady_clock::now();
        const ConservedVector& cv = fx.inst.vectors[fx.vec];
        Trajectory traj;
        try {
            traj = solve(fx.inst.eq, {}, fx.u0, fx.grid, fx.cfg);
        } catch (const std::exception& e) {
            why += fx.tag + ": " + e.what() + "; ";
            ok = false;
            continue;
        }
        DriftReport rep =
            flux_corrected_drift(traj, cv.F, cv.G, fx.inst.eq.space);
        DriftReport bad = flux_corrected_drift(traj, cv.F + u * u, cv.G,
                                               fx.inst.eq.space);
        double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        if (rep.drift >= 1e-5) {
            why += fx.tag + ": drift " + std::to_string(rep.drift) + "; ";
            ok = false;
        }
        if (bad.drift <= 1e-2) {
            why += fx.tag + ": corrupted density only drifts " +
                   std::to_string(bad.drift) + "; ";
            ok = false;
        }
        if (secs >= 5.0) {
            why += fx.tag + ": run took " + std::to_string(secs) + "s; ";
            ok = false;
        }
    }
    return ok;
}

// Concrete constraint-consistent bindings for every catalog case, used for
// the jet-point oracle and the classifier round trip.
std::vector<std::pair<std::string, Bindings>> oracle_bindings() {
    std::vector<std::pair<std::string, Bindings>> out;
    auto with = [&](const std::string& id,
                    std::function<void(Bindings&)> fill) {
        Bindings b;
        b.fns["A"] = cubic_a();
        fill(b);
        out.emplace_back(id, std::move(b));
    };
    with("W1", [](Bindings& b) {
        b.fns["B"] = cubic_b();
        b.fns["f"] = FnBinding{{x}, num(3) + x};
    });
    with("W2a", [](Bindings& b) {
        b.fns["f"] = FnBinding{{x}, num(3) + x + pow(x, 2)};
    });
    with("W2b", [](Bindings&) {});
    with("W2c", [](Bindings&) {});
    with("W2d", [](Bindings& b) { b.atoms[sym("mu")] = num(2); });
    with("W3", [](Bindings& b) { b.atoms[sym("mu")] = one(); });
    with("W4", [](Bindings& b) { b.atoms[sym("mu")] = frac(1, 4); });
    with("W5", [](Bindings& b) { b.atoms[sym("mu")] = one(); });
    with("W6", [](Bindings& b) {
        b.fns["h"] = FnBinding{{x}, frac(1, 3) * pow(x, 3) + 3 * x};
    });
    with("W7", [](Bindings& b) {
        b.fns["h"] = FnBinding{{x}, pow(x, 3)};
    });
    with("W8", [](Bindings& b) {
        b.fns["B"] = cubic_b();
        b.fns["h"] = FnBinding{{x}, exp(x)};
    });
    with("W9", [](Bindings& b) {
        b.fns["f"] = FnBinding{{x}, one()};
        b.fns["alpha"] = FnBinding{{t, x}, pow(x, 2) - 2 * t};
    });
    with("S2", [](Bindings& b) {
        b.fns["B"] = cubic_b();
        b.fns["f"] = FnBinding{{x}, num(3) + x};
    });
    with("S3", [](Bindings& b) {
        b.atoms[sym("eps")] = one();
        b.fns["f"] = FnBinding{{x}, num(3) + x};
        b.fns["h"] = FnBinding{{x}, one()};
        b.fns["X"] = FnBinding{{x}, one() - exp(-x)};
    });
    with("S4", [](Bindings& b) {
        b.atoms[sym("eps")] = one();
        b.atoms[sym("a00")] = one();
        b.atoms[sym("a01")] = zero();
        b.atoms[sym("a10")] = one();
        b.atoms[sym("a11")] = zero();
        b.fns["h"] = FnBinding{{x}, one()};
        b.fns["X"] = FnBinding{{x}, one() - exp(-x)};
        b.fns["sigma0"] = FnBinding{{x}, exp(x) - one()};
        b.fns["sigma1"] = FnBinding{{x}, one()};
    });
    with("S5", [](Bindings& b) {
        b.atoms[sym("eps")] = one();
        b.fns["h"] = FnBinding{{x}, num(2)};
    });
    with("S6", [](Bindings& b) {
        b.atoms[sym("eps")] = one();
        b.fns["h"] = FnBinding{{x}, one()};
        b.fns["X"] = FnBinding{{x}, one() - exp(-x)};
    });
    return out;
}

SampleBox oracle_box(const std::string& id) {
    SampleBox box;
    // keep x away from coefficient singularities / inside domain restrictions
    if (id == "W2d" || id == "W3" || id == "W7" || id == "S2") {
        box.x_lo = 1;
        box.x_hi = 2;
    } else if (id == "W4") {
        box.x_lo = 1.25;
        box.x_hi = 2.25;
    } else if (id == "S3" || id == "S4" || id == "S6") {
        box.x_lo = 0.5;  // X(y) = 1 - e^-y must stay away from 0
        box.x_hi = 1.5;
    }
    return box;
}

bool criterion6(std::string& why) {
    bool ok = true;
    for (const auto& [id, b] : oracle_bindings()) {
        Instantiation inst = instantiate(find_case(id), b);
        SampleBox box = oracle_box(id);
        for (std::size_t i = 0; i < inst.vectors.size(); ++i) {
            std::string tag = id + " vector " + std::to_string(i + 1);
            if (!verify(inst.eq, inst.vectors[i]).verified) {
                why += tag + " no longer verifies after instantiation; ";
                ok = false;
                continue;
            }
            double res;
            try {
                res = random_point_residual(inst.eq, inst.vectors[i], 200,
                                            90210, box);
            } catch (const std::exception& e) {
                why += tag + ": " + e.what() + "; ";
                ok = false;
                continue;
            }
            if (!(res < 1e-9)) {
                why += tag + ": point residual " + std::to_string(res) + "; ";
                ok = false;
            }
        }
    }

    // refuted fixtures must light up the oracle
    DCEquation burgers;
    burgers.h = one();
    burgers.B = u;
    std::vector<std::pair<DCEquation, ConservedVector>> refuted = {
        {burgers, {u, -fn("A", {u}) * ux}},
        {burgers, {u * u, -2 * u * fn("A", {u}) * ux}},
    };
    {
        Bindings b;
        b.fns["A"] = cubic_a();
        b.fns["B"] = cubic_b();
        b.fns["f"] = FnBinding{{x}, num(3) + x};
        Instantiation inst = instantiate(find_case("W1"), b);
        // flux that forgets the convective part Int[B]
        ConservedVector missing_flux{inst.eq.f * u, -inst.eq.A * ux};
        refuted.push_back({inst.eq, missing_flux});
    }
    for (std::size_t i = 0; i < refuted.size(); ++i) {
        auto& [eq, cv] = refuted[i];
        Bindings b;
        b.fns["A"] = cubic_a();
        ConservedVector concrete{substitute(cv.F, b), substitute(cv.G, b)};
        DCEquation eqc = eq;
        eqc.A = substitute(eq.A, b);
        eqc.B = substitute(eq.B, b);
        if (verify(eqc, concrete).verified) {
            why += "refuted fixture " + std::to_string(i + 1) +
                   " unexpectedly verifies; ";
            ok = false;
            continue;
        }
        double res = random_point_residual(eqc, concrete, 200, 90210);
        if (!(res > 1e-3)) {
            why += "refuted fixture " + std::to_string(i + 1) +
                   " only reaches " + std::to_string(res) + "; ";
            ok = false;
        }
    }
    return ok;
}

// --- criterion 7: the scheme really is second order -----------------------

bool criterion7(std::string& why) {
    DCEquation heat;
    heat.A = one();
    SolveConfig cfg;
    cfg.t_end = 0.05;
    std::vector<double> errs;
    for (int n : {64, 128, 256}) {
        Grid g;
        g.x_lo = 0;
        g.x_hi = 1;
        g.n = n;
        auto tr = solve(heat, {},
                        [](double xx) {
                            return std::sin(2 * 3.14159265358979324 * xx);
                        },
                        g, cfg);
        const auto& uu = tr.states.back();
        double T = tr.times.back();
        double e2 = 0;
        for (int i = 0; i < n; ++i) {
            double w = 2 * 3.14159265358979324;
            double exact = std::exp(-w * w * T) * std::sin(w * g.node(i));
            e2 += (uu[i] - exact) * (uu[i] - exact);
        }
        errs.push_back(std::sqrt(e2 / n));
    }
    for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
        double ratio = errs[k] / errs[k + 1];
        if (!(ratio > 3.2 && ratio < 4.8)) {
            why += "error ratio " + std::to_string(ratio) +
                   " outside [3.2, 4.8]; ";
            return false;
        }
    }
    return true;
}

// --- criterion 8: classifier round trip -----------------------------------

bool criterion8(std::string& why) {
    std::vector<std::pair<std::string, Bindings>> fixtures;
    for (const auto& [id, b] : oracle_bindings()) fixtures.emplace_back(id, b);
    {
        // a second convection-free instance with different coefficients
        Bindings b;
        b.fns["A"] = FnBinding{{x}, num(1) + pow(x, 2)};
        b.fns["f"] = FnBinding{{x}, exp(x)};
        fixtures.emplace_back("W2a", b);
    }
    {
        Bindings b;
        b.fns["A"] = cubic_a();
        b.atoms[sym("mu")] = zero();
        fixtures.emplace_back("W3", b);
    }
    if (fixtures.size() < 17) {
        why += "only " + std::to_string(fixtures.size()) + " fixtures; ";
        return false;
    }
    bool ok = true;
    for (const auto& [id, b] : fixtures) {
        Instantiation inst = instantiate(find_case(id), b);
        std::vector<Match> ms;
        try {
            ms = classify(inst.eq);
        } catch (const std::exception& e) {
            why += id + ": classify threw (" + e.what() + "); ";
            ok = false;
            continue;
        }
        bool found = false;
        for (const auto& m : ms) found = found || m.id == id;
        if (!found) {
            why += id + ": not recovered (got";
            for (const auto& m : ms) why += " " + m.id;
            why += "); ";
            ok = false;
        }
    }
    return ok;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"criterion 1 (small catalog verifies symbolically, < 10 s)",
         [](std::string& w) {
             auto t0 = std::chrono::steady_clock::now();
             bool ok = criterion1(w);
             double s = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
             if (s >= 10) {
                 w += "took " + std::to_string(s) + "s; ";
                 ok = false;
             }
             return ok;
         }},
        {"criterion 2 (wide catalog verifies symbolically, < 20 s)",
         [](std::string& w) {
             auto t0 = std::chrono::steady_clock::now();
             bool ok = criterion2(w);
             double s = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
             if (s >= 20) {
                 w += "took " + std::to_string(s) + "s; ";
                 ok = false;
             }
             return ok;
         }},
        {"criterion 3 (reductions to pure diffusion push vectors onto the "
         "known span)",
         criterion3},
        {"criterion 4 (25 gauge elements fix the equation; e4 = 0 matches "
         "the usual action)",
         criterion4},
        {"criterion 5 (flux-corrected drift < 1e-5 at n = 256; corrupted "
         "densities > 1e-2)",
         criterion5},
        {"criterion 6 (jet-point oracle < 1e-9 on verified, > 1e-3 on "
         "refuted)",
         criterion6},
        {"criterion 7 (L2 error ratio per mesh doubling in [3.2, 4.8])",
         criterion7},
        {"criterion 8 (instantiate->classify round trip for every case)",
         criterion8},
    };

    int failures = 0;
    for (auto& c : criteria) {
        std::string why;
        bool ok = false;
        try {
            ok = c.run(why);
        } catch (const std::exception& e) {
            why += std::string("exception: ") + e.what();
        }
        std::cout << c.label << ": " << (ok ? "PASS" : "FAIL");
        if (!ok && !why.empty()) std::cout << "  [" << why << "]";
        std::cout << "\n";
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
