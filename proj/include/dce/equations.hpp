#pragma once

// The equation class f(x) u_t = (g(x) A(u) u_x)_x + h(x) B(u) u_x together
// with its evolution form, domain assumptions, and comparison of equations.

#include "parser.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace dce {

// A one-sided bound on a base variable, e.g. x > 1. Used to resolve signs of
// abs() of affine arguments.
struct Assumption {
    char variable = 'x';
    Rational bound;
    bool lower = true;  // true: variable > bound, false: variable < bound
};

namespace detail {

// sign of a*v + b under the assumption, +1 / -1 / 0 for unknown
inline int affine_sign(const Rational& a, const Rational& b,
                       const Assumption& as) {
    if (a == 0) return b > 0 ? 1 : (b < 0 ? -1 : 0);
    // v > bound: a*v + b > a*bound + b if a > 0; < if a < 0
    Rational edge = a * as.bound + b;
    if (as.lower) {
        if (a > 0 && edge >= 0) return 1;
        if (a < 0 && edge <= 0) return -1;
    } else {
        if (a > 0 && edge <= 0) return -1;
        if (a < 0 && edge >= 0) return 1;
    }
    return 0;
}

}  // namespace detail

// Replace abs(arg) by +-arg wherever an assumption fixes the sign of an
// affine argument a*v + b.
inline Expr apply_assumptions(const Expr& e,
                              const std::vector<Assumption>& asms) {
    if (asms.empty()) return e;
    const Node& n = e.node();
    std::vector<Expr> kids;
    for (const auto& k : n.kids) kids.push_back(apply_assumptions(k, asms));
    if (n.kind == Kind::Abs) {
        const Expr& arg = kids[0];
        for (const auto& as : asms) {
            Expr v = var(as.variable);
            Expr a = diff(arg, v);
            if (!a.is_rational()) continue;
            Expr b = simplify(arg - a * v);
            if (!b.is_rational()) continue;
            int s = detail::affine_sign(a.rat(), b.rat(), as);
            if (s > 0) return arg;
            if (s < 0) return -arg;
        }
    }
    Node m = n;
    m.kids = std::move(kids);
    return simplify(detail::mk(std::move(m)));
}

// ---------------------------------------------------------------------------

struct DCEquation {
    Expr f = one();
    Expr g = one();
    Expr h = zero();
    Expr A = fn("A", {u_jet(0)});
    Expr B = zero();
    char space = 'x';                     // letter of the space variable
    RuleSet rules;                        // constraints on abstract functions
    std::vector<Assumption> assumptions;  // domain restrictions
};

// Validate that the pieces live in the right variables and that no jet or
// mixed jet sneaks into the coefficients.
inline void check_equation(const DCEquation& eq) {
    auto coeff_ok = [&](const Expr& e, const char* which) {
        if (max_jet_order(e) >= 0 || has_mixed_jet(e))
            throw std::invalid_argument(std::string("coefficient ") + which +
                                        " must not involve u");
        if (contains(e, var('t')))
            throw std::invalid_argument(std::string("coefficient ") + which +
                                        " must not involve t");
    };
    coeff_ok(eq.f, "f");
    coeff_ok(eq.g, "g");
    coeff_ok(eq.h, "h");
    auto u_only = [&](const Expr& e, const char* which) {
        if (contains(e, var('t')) || contains(e, var('x')) ||
            contains(e, var('y')) || max_jet_order(e) > 0 || has_mixed_jet(e))
            throw std::invalid_argument(std::string("coefficient ") + which +
                                        " must be a function of u alone");
    };
    u_only(eq.A, "A");
    u_only(eq.B, "B");
    if (eq.f.is_zero())
        throw std::invalid_argument("f must not vanish identically");
    if (eq.g.is_zero())
        throw std::invalid_argument("g must not vanish identically");
}

// Right-hand side of u_t = Lambda(t,x,u,u_x,u_xx).
inline Expr evolution_form(const DCEquation& eq) {
    check_equation(eq);
    // resolve abs() signs first: total derivatives of abs are undefined
    Expr f = apply_assumptions(eq.f, eq.assumptions);
    Expr g = apply_assumptions(eq.g, eq.assumptions);
    Expr h = apply_assumptions(eq.h, eq.assumptions);
    Expr ux = u_jet(1);
    Expr flux_part = total_diff_space(g * eq.A * ux, eq.space);
    Expr rhs = (flux_part + h * eq.B * ux) / f;
    rhs = apply_rules(rhs, eq.rules);
    return apply_assumptions(rhs, eq.assumptions);
}

// Two members of the class define the same equation iff their evolution
// forms agree identically (this absorbs the gauge freedom in (f,g,h,A,B)).
inline bool same_equation(const DCEquation& a, const DCEquation& b) {
    if (a.space != b.space) return false;
    RuleSet rules = a.rules;
    rules.insert(rules.end(), b.rules.begin(), b.rules.end());
    std::vector<Assumption> asms = a.assumptions;
    asms.insert(asms.end(), b.assumptions.begin(), b.assumptions.end());
    Expr d = evolution_form(a) - evolution_form(b);
    d = apply_rules(d, rules);
    d = apply_assumptions(d, asms);
    return simplify(d).is_zero();
}

// Change the space variable so that g becomes 1: xi = integral dx/g. The
// caller supplies X (the new coordinate as a function of x) together with
// its inverse, and both contracts are checked symbolically.
inline DCEquation normalize_g(const DCEquation& eq, const Expr& X,
                              const Expr& Xinv) {
    check_equation(eq);
    Expr xv = var(eq.space);
    Expr contract = simplify(diff(X, xv) * eq.g - one());
    contract = apply_rules(contract, eq.rules);
    if (!contract.is_zero())
        throw std::invalid_argument(
            "normalize_g: X does not satisfy dX/dx = 1/g");
    Expr round = apply_assumptions(
        apply_rules(simplify(substitute(Xinv, {{{xv, X}}, {}, {}}) - xv),
                    eq.rules),
        eq.assumptions);
    if (!round.is_zero())
        throw std::invalid_argument("normalize_g: Xinv does not invert X");
    Bindings back;
    back.atoms[xv] = Xinv;
    DCEquation out = eq;
    out.f = simplify(substitute(eq.g * eq.f, back));
    out.g = one();
    out.h = simplify(substitute(eq.h, back));
    return out;
}

// ---------------------------------------------------------------------------
// Text form: "f = ...", "g = ...", "h = ...", "A = ...", "B = ...",
// optional "space = y", "assume: x > 1", "rule: X'(y) = ...".

namespace detail {

template <class Fail>
inline Assumption parse_assumption_line(const std::string& body, Fail fail) {
    std::istringstream ls(body);
    std::string v, op, bound;
    ls >> v >> op >> bound;
    if (v.size() != 1 || (op != ">" && op != "<"))
        fail("expected 'assume: <var> <|> <number>'");
    Expr be = parse_expr(bound.empty() ? "?" : bound);
    if (!be.is_rational()) fail("assumption bound must be rational");
    return Assumption{v[0], be.rat(), op == ">"};
}

template <class Fail>
inline ConstraintRule parse_rule_line(const std::string& body, Fail fail) {
    std::size_t eqpos = body.find('=');
    if (eqpos == std::string::npos) fail("rule needs '='");
    Expr lhs = parse_expr(body.substr(0, eqpos));
    Expr rhs = parse_expr(body.substr(eqpos + 1));
    if (lhs.kind() != Kind::Fn) fail("rule left side must be f'(...)");
    int idx = -1;
    for (std::size_t k = 0; k < lhs.node().ords.size(); ++k) {
        if (lhs.node().ords[k] == 1 && idx < 0)
            idx = static_cast<int>(k);
        else if (lhs.node().ords[k] != 0)
            idx = -2;
    }
    if (idx < 0) fail("rule left side must be a first derivative");
    return ConstraintRule{lhs.node().name, idx, simplify(rhs)};
}

}  // namespace detail

inline DCEquation parse_equation(const std::string& text) {
    DCEquation eq;
    bool have_A = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t i = line.find_first_not_of(" \t\r");
        if (i == std::string::npos || line[i] == '#') continue;
        auto fail = [&](const std::string& msg) {
            throw std::invalid_argument("equation line " +
                                        std::to_string(lineno) + ": " + msg);
        };
        if (line.compare(i, 7, "assume:") == 0) {
            eq.assumptions.push_back(
                detail::parse_assumption_line(line.substr(i + 7), fail));
            continue;
        }
        if (line.compare(i, 5, "rule:") == 0) {
            eq.rules.push_back(
                detail::parse_rule_line(line.substr(i + 5), fail));
            continue;
        }
        std::size_t eqpos = line.find('=', i);
        if (eqpos == std::string::npos) fail("expected '='");
        std::string key = line.substr(i, eqpos - i);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::string val = line.substr(eqpos + 1);
        if (key == "space") {
            std::size_t j = val.find_first_not_of(" \t\r");
            if (j == std::string::npos || (val[j] != 'x' && val[j] != 'y'))
                fail("space must be x or y");
            eq.space = val[j];
        } else if (key == "f") {
            eq.f = parse_expr(val);
        } else if (key == "g") {
            eq.g = parse_expr(val);
        } else if (key == "h") {
            eq.h = parse_expr(val);
        } else if (key == "A") {
            eq.A = parse_expr(val);
            have_A = true;
        } else if (key == "B") {
            eq.B = parse_expr(val);
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    (void)have_A;
    check_equation(eq);
    return eq;
}

inline std::string format_equation(const DCEquation& eq) {
    std::ostringstream os;
    os << "f = " << format_expr(eq.f, eq.space) << "\n";
    os << "g = " << format_expr(eq.g, eq.space) << "\n";
    os << "h = " << format_expr(eq.h, eq.space) << "\n";
    os << "A = " << format_expr(eq.A, eq.space) << "\n";
    os << "B = " << format_expr(eq.B, eq.space) << "\n";
    if (eq.space != 'x') os << "space = " << eq.space << "\n";
    for (const auto& as : eq.assumptions)
        os << "assume: " << as.variable << (as.lower ? " > " : " < ")
           << to_string(as.bound) << "\n";
    return os.str();
}

}  // namespace dce
