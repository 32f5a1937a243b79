#include <catch2/catch_amalgamated.hpp>

#include <dce/catalog.hpp>

using namespace dce;

TEST_CASE("every catalog vector verifies symbolically", "[catalog]") {
    auto run = [](const std::vector<CatalogCase>& cases) {
        for (const auto& c : cases) {
            REQUIRE_NOTHROW(check_equation(c.eq));
            for (std::size_t i = 0; i < c.vectors.size(); ++i) {
                INFO(c.id << " vector " << i + 1);
                VerificationReport rep = verify(c.eq, c.vectors[i]);
                INFO("residual: " << format_expr(rep.residual, c.eq.space));
                REQUIRE(rep.verified);
            }
        }
    };
    run(wide_catalog());
    run(small_catalog());
}

TEST_CASE("catalog lookups", "[catalog]") {
    REQUIRE(find_case("W3").parameters ==
            std::vector<std::string>{"mu"});
    REQUIRE_THROWS(find_case("nope"));
}

TEST_CASE("instantiation produces concrete verified equations", "[catalog]") {
    Expr x = var('x'), u = u_jet(0);

    SECTION("power-law diffusivity with mass flux") {
        Bindings b;
        b.fns["A"] = FnBinding{{x}, x * x + one()};
        b.fns["B"] = FnBinding{{x}, x};
        b.fns["f"] = FnBinding{{x}, exp(x)};
        Instantiation inst = instantiate(find_case("W1"), b);
        REQUIRE_NOTHROW(check_equation(inst.eq));
        for (const auto& cv : inst.vectors)
            REQUIRE(verify(inst.eq, cv).verified);
    }
    SECTION("parameters substitute into vectors") {
        Bindings b;
        b.fns["A"] = FnBinding{{x}, one() + x * x};
        b.atoms[sym("mu")] = one();
        Instantiation inst = instantiate(find_case("W3"), b);
        for (const auto& cv : inst.vectors)
            REQUIRE(verify(inst.eq, cv).verified);
    }
}

TEST_CASE("classifier recovers catalog membership", "[catalog]") {
    Expr x = var('x'), u = u_jet(0);

    auto ids_of = [](const std::vector<Match>& ms) {
        std::vector<std::string> ids;
        for (const auto& m : ms) ids.push_back(m.id);
        return ids;
    };

    SECTION("diffusion-convection with h = 1") {
        DCEquation eq;
        eq.h = one();
        eq.B = fn("B", {u});
        auto ids = ids_of(classify(eq));
        REQUIRE(std::count(ids.begin(), ids.end(), "W1") == 1);
        REQUIRE(std::count(ids.begin(), ids.end(), "S1") == 1);
    }
    SECTION("pure diffusion") {
        DCEquation eq;
        eq.f = exp(x);
        auto ids = ids_of(classify(eq));
        REQUIRE(std::count(ids.begin(), ids.end(), "W2a") == 1);
    }
    SECTION("exponential coefficients detected with parameter") {
        DCEquation eq;
        eq.f = exp(2 * x);
        eq.h = exp(2 * x);
        eq.B = one();
        auto ms = classify(eq);
        bool found = false;
        for (const auto& m : ms) found = found || m.id == "W2c";
        REQUIRE(found);
    }
    SECTION("classification requires normalized g") {
        DCEquation eq;
        eq.g = exp(x);
        REQUIRE_THROWS(classify(eq));
    }
}

TEST_CASE("convection profile detectors", "[catalog]") {
    Expr u = u_jet(0);

    SECTION("proportional B = eps A") {
        auto e = detect_proportional(num(3) * pow(u, 2), pow(u, 2));
        REQUIRE(e);
        REQUIRE(simplify(*e - num(3)).is_zero());
        REQUIRE_FALSE(detect_proportional(u + one(), u));
        REQUIRE_FALSE(detect_proportional(zero(), u));
    }
    SECTION("affine B = eps A + c") {
        auto ec = detect_affine(num(2) * pow(u, 2) + num(5), pow(u, 2));
        REQUIRE(ec);
        REQUIRE(simplify(ec->first - num(2)).is_zero());
        REQUIRE(simplify(ec->second - num(5)).is_zero());
        // c = 0 is proportional, not affine
        REQUIRE_FALSE(detect_affine(num(2) * u, u));
        // constant diffusivity leaves eps undetermined
        REQUIRE_FALSE(detect_affine(u + one(), one()));
    }
}

TEST_CASE("classifier recovers constrained convection cases", "[catalog]") {
    Expr y = var('y'), u = u_jet(0);

    auto has = [](const std::vector<Match>& ms, const std::string& id) {
        for (const auto& m : ms)
            if (m.id == id) return true;
        return false;
    };

    SECTION("quadratic-profile density family") {
        // f = 1, h = 1, B = A + 1: the remainder -h/(W f) is quadratic in
        // the primitive of 1/W, so the sigma-weighted densities apply.
        DCEquation eq;
        eq.space = 'y';
        eq.f = one();
        eq.h = one();
        eq.A = u;
        eq.B = u + one();
        auto ms = classify(eq);
        REQUIRE(has(ms, "S4"));
        REQUIRE(has(ms, "S5"));
    }
    SECTION("shifted-primitive family") {
        // f = 1/(1 - e^-y) satisfies f = h_y + eps h^2 + h/(W X) with
        // h = 1, eps = 1, X = 1 - e^-y.
        DCEquation eq;
        eq.space = 'y';
        eq.f = pow(one() - exp(-y), -1);
        eq.h = one();
        eq.A = u;
        eq.B = u + one();
        auto ms = classify(eq);
        REQUIRE(has(ms, "S6"));
        REQUIRE_FALSE(has(ms, "S5"));
    }
    SECTION("growth-balanced family with nonconstant h") {
        DCEquation eq;
        eq.space = 'y';
        eq.f = num(2) * exp(num(2) * y) + exp(y);
        eq.h = exp(y);
        eq.A = pow(u, 2);
        eq.B = num(2) * pow(u, 2) + one();
        auto ms = classify(eq);
        REQUIRE(has(ms, "S5"));
    }
}
