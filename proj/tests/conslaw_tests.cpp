#include <catch2/catch_amalgamated.hpp>

#include <dce/conslaw.hpp>

using namespace dce;

namespace {

Expr t = var('t');
Expr x = var('x');
Expr u = u_jet(0);
Expr ux = u_jet(1);

}  // namespace

TEST_CASE("equation text form round trips", "[equations]") {
    std::string text =
        "f = exp(mu/x)*x^(-3)\n"
        "g = 1\n"
        "h = exp(mu/x)*x^(-1)\n"
        "A = A(u)\n"
        "B = 1\n"
        "assume: x > 0\n";
    DCEquation eq = parse_equation(text);
    DCEquation eq2 = parse_equation(format_equation(eq));
    REQUIRE(simplify(eq.f - eq2.f).is_zero());
    REQUIRE(simplify(eq.h - eq2.h).is_zero());
    REQUIRE(simplify(eq.B - eq2.B).is_zero());
    REQUIRE(eq2.assumptions.size() == 1);

    REQUIRE_THROWS(parse_equation("f = 0\n"));
    REQUIRE_THROWS(parse_equation("A = A(x)\n"));
    REQUIRE_THROWS(parse_equation("f = u\n"));
}

TEST_CASE("evolution form", "[equations]") {
    DCEquation eq;
    eq.h = one();
    eq.B = u;
    Expr rhs = evolution_form(eq);
    Expr want = fn("A", {u}, {1}) * ux * ux + fn("A", {u}) * u_jet(2) + u * ux;
    REQUIRE((rhs - want).is_zero());
}

TEST_CASE("g can be normalized away", "[equations]") {
    DCEquation eq;
    eq.g = exp(-x);
    // X with X_x = 1/g = e^x
    Expr X = exp(x);
    Expr Xinv = ln(x);
    DCEquation out = normalize_g(eq, X, Xinv);
    REQUIRE(simplify(out.g - one()).is_zero());
    REQUIRE_NOTHROW(check_equation(out));
}

TEST_CASE("symbolic verification", "[conslaw]") {
    Expr A = fn("A", {u});
    DCEquation diffusion;  // u_t = (A u_x)_x with weight f
    diffusion.f = fn("f", {x});

    SECTION("verified densities") {
        REQUIRE(verify(diffusion, {diffusion.f * u, -A * ux}).verified);
        REQUIRE(verify(diffusion,
                       {x * diffusion.f * u, -x * A * ux + antideriv("A", u)})
                    .verified);
    }
    SECTION("refuted density reports its residual") {
        DCEquation burgers;
        burgers.h = one();
        burgers.A = one();
        burgers.B = u;
        auto rep = verify(burgers, {u, -ux});
        REQUIRE_FALSE(rep.verified);
        REQUIRE((rep.residual - u * ux).is_zero());
    }
    SECTION("flux may depend on u_x but density may not") {
        REQUIRE_THROWS(verify(diffusion, {ux, -A * ux}));
        REQUIRE_THROWS(verify(diffusion, {u, -u_jet(2)}));
    }
    SECTION("constrained solutions enter through rules") {
        // alpha(t, x) with f alpha_t = -alpha_xx gives density f alpha u
        DCEquation eq;
        eq.f = fn("f", {x});
        eq.A = one();
        Expr alpha = fn("alpha", {t, x});
        eq.rules.push_back(ConstraintRule{
            "alpha", 0, -fn("alpha", {t, x}, {0, 2}) / eq.f});
        ConservedVector cv{eq.f * alpha * u,
                           fn("alpha", {t, x}, {0, 1}) * u - alpha * ux};
        REQUIRE(verify(eq, cv).verified);
    }
}

TEST_CASE("trivial parts and equivalence", "[conslaw]") {
    DCEquation heat;
    heat.A = one();
    ConservedVector cv{u, -ux};
    Expr H = t * x * x + sin(x);
    ConservedVector shifted = add_trivial_part(cv, H);
    REQUIRE(verify(heat, shifted).verified);
    REQUIRE(is_equivalent(heat, cv, shifted));
    ConservedVector other{2 * u, -2 * ux};
    REQUIRE_FALSE(is_equivalent(heat, cv, other));

    SECTION("span matching sees through trivial parts") {
        auto m = match_in_span(heat, shifted, {{2 * u, -2 * ux}});
        REQUIRE(m);
        REQUIRE((*m)[0] == Rational(1, 2));
    }
    SECTION("vectors outside the span are rejected") {
        ConservedVector indep{x * u, -x * ux + u};
        REQUIRE(verify(heat, indep).verified);
        auto m = match_in_span(heat, indep, {cv});
        REQUIRE_FALSE(m);
    }
}

TEST_CASE("conserved vector text form", "[conslaw]") {
    ConservedVector cv = parse_conserved_vector(
        "# mass density\nF = f(x)*u\nG = -A(u)*u_x - Int[B](u)\n");
    ConservedVector back = parse_conserved_vector(format_conserved_vector(cv));
    REQUIRE((cv.F - back.F).is_zero());
    REQUIRE((cv.G - back.G).is_zero());
    REQUIRE_THROWS(parse_conserved_vector("F = u\n"));
    REQUIRE_THROWS(parse_conserved_vector("F = u\nQ = 1\nG = 1\n"));
}
