#include <catch2/catch_amalgamated.hpp>

#include <dce/parser.hpp>

#include "random_exprs.hpp"

using namespace dce;

namespace {

void roundtrip(const std::string& s, char space = 'x') {
    Expr e = parse_expr(s);
    std::string printed = format_expr(e, space);
    INFO(s << "  ->  " << printed);
    Expr e2 = parse_expr(printed);
    REQUIRE(e == e2);
}

}  // namespace

TEST_CASE("grammar constructs", "[parser]") {
    REQUIRE((parse_expr("u_xx + u_t") - (u_jet(2) + mixed_jet(1, 0))).is_zero());
    REQUIRE((parse_expr("f(x)*u") - fn("f", {var('x')}) * u_jet(0)).is_zero());
    REQUIRE((parse_expr("Int[B](u)") - antideriv("B", u_jet(0))).is_zero());
    REQUIRE((parse_expr("h'(x)") - fn("h", {var('x')}, {1})).is_zero());
    REQUIRE((parse_expr("D[alpha,1,2](t,x)") -
             fn("alpha", {var('t'), var('x')}, {1, 2}))
                .is_zero());
    REQUIRE((parse_expr("sqrt(x)") - pow(var('x'), frac(1, 2))).is_zero());
    REQUIRE((parse_expr("0.25*x + 1.5") - (frac(1, 4) * var('x') + frac(3, 2)))
                .is_zero());
    // unary minus binds looser than the power
    REQUIRE((parse_expr("-x^2") + pow(var('x'), 2)).is_zero());
    // right-associative powers
    REQUIRE((parse_expr("2^3^2") - num(512)).is_zero());
    // bare identifiers that are not t, x, y are named constants
    REQUIRE(parse_expr("mu").kind() == Kind::Constant);
}

TEST_CASE("print and reparse round trips", "[parser]") {
    roundtrip("f(x)*u");
    roundtrip("A(u)*u_x - Int[B](u)");
    roundtrip("-x^2 + 3/4*u_xx - h'(x)/h(x)^2");
    roundtrip("exp(-eps*Int[h](y))*u_y", 'y');
    roundtrip("(x+1)^(-mu-1/2)");
    roundtrip("u_txx + u_t");
    roundtrip("sqrt(x^2+1)*atan(x) - sin(t)*cos(t)");
    roundtrip("abs(x-1)^mu");
    roundtrip("D[alpha,1,1](t,x) + sigma1'(t)*x");
    roundtrip("exp(mu/x)*x^(-3)*u - 1/2");
}

TEST_CASE("round trips on random trees", "[parser][property]") {
    std::mt19937_64 rng(424242);
    for (int k = 0; k < 80; ++k) {
        Expr e = simplify(testutil::random_expr(rng, 3));
        std::string printed = format_expr(e);
        INFO(printed);
        Expr back = parse_expr(printed);
        REQUIRE(back == e);
    }
}

TEST_CASE("errors carry positions", "[parser]") {
    auto pos_of = [](const std::string& s) -> std::size_t {
        try {
            parse_expr(s);
        } catch (const ParseError& pe) {
            return pe.position;
        }
        FAIL("expected a parse error for: " << s);
        return 0;
    };
    REQUIRE(pos_of("x + * y") == 4);
    REQUIRE(pos_of("f(x") == 3);
    REQUIRE(pos_of("") == 0);
    REQUIRE(pos_of("1 + (2*3") == 8);
    REQUIRE(pos_of("u_q") == 0);  // only t and the space letter form jets
    REQUIRE(parse_expr("u_xt") == parse_expr("u_tx"));  // order-insensitive
    REQUIRE_THROWS_AS(parse_expr("x + "), ParseError);
    REQUIRE_THROWS_AS(parse_expr("Int[](u)"), ParseError);
}
