#pragma once

// Point transformations of the (t, x, u) space, their action on equations of
// the class and on conserved vectors, and the equivalence-group elements:
// the usual group, the gauge subgroup, the factor group and the extended
// group preserving g = 1.

#include "conslaw.hpp"

#include <variant>

namespace dce {

// Forward maps give the new variables in terms of the old ones; inverse maps
// are written in the same symbols t, x, u which then denote the new
// variables. T must depend on t only; X on t and x only (the shape realized
// by the whole equivalence group).
struct PointTransformation {
    Expr T, X, U;
    Expr Tinv, Xinv, Uinv;
    RuleSet rules;
    std::vector<Assumption> assumptions;
    char space = 'x';
};

namespace detail {

inline void check_transform_shape(const PointTransformation& tr) {
    Expr u0 = u_jet(0);
    if (contains(tr.T, var(tr.space)) || contains(tr.T, u0) ||
        max_jet_order(tr.T) >= 0)
        throw std::invalid_argument("T must be a function of t alone");
    if (contains(tr.X, u0) || max_jet_order(tr.X) >= 0)
        throw std::invalid_argument("X must be a function of t and x");
    if (max_jet_order(tr.U) > 0 || has_mixed_jet(tr.U))
        throw std::invalid_argument("U may depend on t, x, u only");
}

inline Expr simp(const Expr& e, const PointTransformation& tr) {
    return apply_assumptions(apply_rules(simplify(e), tr.rules),
                             tr.assumptions);
}

}  // namespace detail

inline bool verify_inverse(const PointTransformation& tr) {
    detail::check_transform_shape(tr);
    Bindings fwd;
    fwd.atoms[var('t')] = tr.T;
    fwd.atoms[var(tr.space)] = tr.X;
    fwd.atoms[u_jet(0)] = tr.U;
    Expr rt = detail::simp(substitute(tr.Tinv, fwd) - var('t'), tr);
    Expr rx = detail::simp(substitute(tr.Xinv, fwd) - var(tr.space), tr);
    Expr ru = detail::simp(substitute(tr.Uinv, fwd) - u_jet(0), tr);
    return rt.is_zero() && rx.is_zero() && ru.is_zero();
}

inline PointTransformation invert(const PointTransformation& tr) {
    PointTransformation out = tr;
    std::swap(out.T, out.Tinv);
    std::swap(out.X, out.Xinv);
    std::swap(out.U, out.Uinv);
    return out;
}

// first applies a, then b
inline PointTransformation compose(const PointTransformation& a,
                                   const PointTransformation& b) {
    if (a.space != b.space)
        throw std::invalid_argument("space variable mismatch");
    Bindings fa;
    fa.atoms[var('t')] = a.T;
    fa.atoms[var(a.space)] = a.X;
    fa.atoms[u_jet(0)] = a.U;
    Bindings ib;
    ib.atoms[var('t')] = b.Tinv;
    ib.atoms[var(a.space)] = b.Xinv;
    ib.atoms[u_jet(0)] = b.Uinv;
    PointTransformation out;
    out.space = a.space;
    out.rules = a.rules;
    out.rules.insert(out.rules.end(), b.rules.begin(), b.rules.end());
    out.assumptions = a.assumptions;
    out.assumptions.insert(out.assumptions.end(), b.assumptions.begin(),
                           b.assumptions.end());
    out.T = simplify(substitute(b.T, fa));
    out.X = simplify(substitute(b.X, fa));
    out.U = simplify(substitute(b.U, fa));
    out.Tinv = simplify(substitute(a.Tinv, ib));
    out.Xinv = simplify(substitute(a.Xinv, ib));
    out.Uinv = simplify(substitute(a.Uinv, ib));
    return out;
}

namespace detail {

// Bindings sending old (t, x, u, u_x, u_xx) to their expressions in the new
// variables, via the inverse maps and their prolongation.
inline Bindings inverse_prolongation(const PointTransformation& tr) {
    Expr xv = var(tr.space);
    Expr dxX = total_diff_space(tr.Xinv, tr.space);
    Expr ux_old = simp(total_diff_space(tr.Uinv, tr.space) / dxX, tr);
    Expr uxx_old = simp(total_diff_space(ux_old, tr.space) / dxX, tr);
    Bindings b;
    b.atoms[var('t')] = tr.Tinv;
    b.atoms[xv] = tr.Xinv;
    b.atoms[u_jet(0)] = tr.Uinv;
    b.atoms[u_jet(1)] = ux_old;
    b.atoms[u_jet(2)] = uxx_old;
    return b;
}

}  // namespace detail

// Rewrite the evolution equation u_t = rhs in the new variables; the result
// is the right-hand side of the transformed equation, written again in the
// symbols (t, x, u, u_x, u_xx).
inline Expr apply_point_to_evolution(const PointTransformation& tr,
                                     const Expr& rhs) {
    detail::check_transform_shape(tr);
    Expr xv = var(tr.space);
    Expr ux = u_jet(1);
    Expr DtU = diff(tr.U, var('t')) + diff(tr.U, u_jet(0)) * rhs;
    Expr DxU = diff(tr.U, xv) + diff(tr.U, u_jet(0)) * ux;
    Expr Xx = diff(tr.X, xv);
    Expr Xt = diff(tr.X, var('t'));
    Expr Tt = diff(tr.T, var('t'));
    Expr new_ux = detail::simp(DxU / Xx, tr);
    Expr new_ut = detail::simp((DtU - new_ux * Xt) / Tt, tr);
    Bindings back = detail::inverse_prolongation(tr);
    return detail::simp(substitute(new_ut, back), tr);
}

// Push a conserved vector of u_t = rhs forward along the transformation:
// the 1-form F dx - G dt equals F~ dx~ - G~ dt~, giving
//   F~ = F / X_x,   G~ = (G X_x + F X_t) / (T_t X_x),
// after which everything is rewritten in the new variables.
inline ConservedVector push_conserved_vector(const PointTransformation& tr,
                                             const ConservedVector& cv) {
    detail::check_transform_shape(tr);
    check_shape(cv);
    Expr xv = var(tr.space);
    Expr Xx = diff(tr.X, xv);
    Expr Xt = diff(tr.X, var('t'));
    Expr Tt = diff(tr.T, var('t'));
    Expr Fn = cv.F / Xx;
    Expr Gn = (cv.G * Xx + cv.F * Xt) / (Tt * Xx);
    Bindings back = detail::inverse_prolongation(tr);
    return ConservedVector{detail::simp(substitute(Fn, back), tr),
                           detail::simp(substitute(Gn, back), tr)};
}

// ---------------------------------------------------------------------------
// Equivalence-group elements. Parameters are expressions (usually rational
// constants); nondegeneracy products must not vanish.

namespace detail {

inline void require_nonzero(std::initializer_list<Expr> params,
                            const char* who) {
    for (const Expr& p : params) {
        auto c = is_constant(p);
        if (!c)
            throw std::invalid_argument(std::string(who) +
                                        ": parameters must be constants");
        if (c->is_zero())
            throw std::invalid_argument(std::string(who) +
                                        ": degenerate parameter (zero)");
    }
}

inline Expr subst_x(const Expr& e, char space, const Expr& value) {
    Bindings b;
    b.atoms[var(space)] = value;
    return simplify(substitute(e, b));
}

}  // namespace detail

// Usual equivalence group: t~ = d1 t + d2, x~ = X(x), u~ = d3 u + d4,
// f~ = e1 d1 f / X_x, g~ = e1/e2 X_x g, h~ = e1/e3 h, A~ = e2 A, B~ = e3 B.
struct UsualElement {
    Expr d1 = one(), d2 = zero(), d3 = one(), d4 = zero();
    Expr e1 = one(), e2 = one(), e3 = one();
    Expr X = var('x');     // strictly monotone reparametrization of x
    Expr Xinv = var('x');  // its inverse, written in the new variable
};

// Gauge subgroup acting trivially on the equation: the point map is the
// identity and only the arbitrary elements change. Phi must satisfy
// Phi_x = h/g (checked), so that phi = exp(-e4 Phi).
struct GaugeElement {
    Expr e1 = one(), e2 = one(), e3 = one(), e4 = zero();
    Expr Phi = zero();
};

// Factor group of the usual group by the gauge subgroup.
struct FactorElement {
    Expr d1 = one(), d2 = zero(), d3 = one(), d4 = zero();
    Expr X = var('x');
    Expr Xinv = var('x');
};

// Extended group preserving g = 1:
// t~ = d1 t + d2, x~ = d5 Y(x) + d6, u~ = d3 u + d4 with Y = int exp(d8 H),
// H = int h dx; f~ = d1 d9 / d5 f exp(-2 d8 H), h~ = d9/d7 h exp(-d8 H),
// A~ = d5 d9 A, B~ = d7 (B + d8 A).
struct ExtendedElement {
    Expr d1 = one(), d2 = zero(), d3 = one(), d4 = zero();
    Expr d5 = one(), d6 = zero(), d7 = one(), d8 = zero(), d9 = one();
    Expr H = zero();       // an antiderivative of h
    Expr Y = var('x');     // an antiderivative of exp(d8 * H)
    Expr Yinv = var('x');  // inverse of x -> d5 Y(x) + d6, in the new variable
};

using EquivalenceElement =
    std::variant<UsualElement, GaugeElement, FactorElement, ExtendedElement>;

inline PointTransformation to_point(const UsualElement& el, char space = 'x') {
    detail::require_nonzero({el.d1, el.d3, el.e1, el.e2, el.e3},
                            "usual element");
    PointTransformation tr;
    tr.space = space;
    tr.T = el.d1 * var('t') + el.d2;
    tr.X = el.X;
    tr.U = el.d3 * u_jet(0) + el.d4;
    tr.Tinv = (var('t') - el.d2) / el.d1;
    tr.Xinv = el.Xinv;
    tr.Uinv = (u_jet(0) - el.d4) / el.d3;
    return tr;
}

inline PointTransformation to_point(const GaugeElement&, char space = 'x') {
    PointTransformation tr;
    tr.space = space;
    tr.T = tr.Tinv = var('t');
    tr.X = tr.Xinv = var(space);
    tr.U = tr.Uinv = u_jet(0);
    return tr;
}

inline PointTransformation to_point(const FactorElement& el,
                                    char space = 'x') {
    UsualElement u;
    u.d1 = el.d1;
    u.d2 = el.d2;
    u.d3 = el.d3;
    u.d4 = el.d4;
    u.X = el.X;
    u.Xinv = el.Xinv;
    return to_point(u, space);
}

inline PointTransformation to_point(const ExtendedElement& el,
                                    char space = 'x') {
    detail::require_nonzero({el.d1, el.d3, el.d5, el.d7, el.d9},
                            "extended element");
    PointTransformation tr;
    tr.space = space;
    tr.T = el.d1 * var('t') + el.d2;
    tr.X = el.d5 * el.Y + el.d6;
    tr.U = el.d3 * u_jet(0) + el.d4;
    tr.Tinv = (var('t') - el.d2) / el.d1;
    tr.Xinv = el.Yinv;
    tr.Uinv = (u_jet(0) - el.d4) / el.d3;
    return tr;
}

inline PointTransformation to_point(const EquivalenceElement& el,
                                    char space = 'x') {
    return std::visit([&](const auto& e) { return to_point(e, space); }, el);
}

inline DCEquation apply_to_equation(const UsualElement& el,
                                    const DCEquation& eq) {
    detail::require_nonzero({el.d1, el.d3, el.e1, el.e2, el.e3},
                            "usual element");
    check_equation(eq);
    Expr xv = var(eq.space);
    Expr Xx = diff(el.X, xv);
    if (simplify(Xx).is_zero())
        throw std::invalid_argument("usual element: X must depend on x");
    DCEquation out = eq;
    out.f = detail::subst_x(el.e1 * el.d1 * eq.f / Xx, eq.space, el.Xinv);
    out.g = detail::subst_x(el.e1 / el.e2 * Xx * eq.g, eq.space, el.Xinv);
    out.h = detail::subst_x(el.e1 / el.e3 * eq.h, eq.space, el.Xinv);
    Bindings ub;
    ub.atoms[u_jet(0)] = (u_jet(0) - el.d4) / el.d3;
    out.A = simplify(el.e2 * substitute(eq.A, ub));
    out.B = simplify(el.e3 * substitute(eq.B, ub));
    return out;
}

inline DCEquation apply_to_equation(const GaugeElement& el,
                                    const DCEquation& eq) {
    detail::require_nonzero({el.e1, el.e2, el.e3}, "gauge element");
    check_equation(eq);
    Expr xv = var(eq.space);
    Expr contract =
        apply_rules(simplify(diff(el.Phi, xv) * eq.g - eq.h), eq.rules);
    if (!contract.is_zero())
        throw std::invalid_argument("gauge element: Phi_x must equal h/g");
    Expr phi = exp(-el.e4 * el.Phi);
    DCEquation out = eq;
    out.f = simplify(el.e1 * phi * eq.f);
    out.g = simplify(el.e1 / el.e2 * phi * eq.g);
    out.h = simplify(el.e1 / el.e3 * phi * eq.h);
    out.A = simplify(el.e2 * eq.A);
    out.B = simplify(el.e3 * (eq.B + el.e4 * eq.A));
    return out;
}

inline DCEquation apply_to_equation(const FactorElement& el,
                                    const DCEquation& eq) {
    detail::require_nonzero({el.d1, el.d3}, "factor element");
    check_equation(eq);
    Expr xv = var(eq.space);
    Expr Xx = diff(el.X, xv);
    if (simplify(Xx).is_zero())
        throw std::invalid_argument("factor element: X must depend on x");
    DCEquation out = eq;
    out.f = detail::subst_x(el.d1 * eq.f / Xx, eq.space, el.Xinv);
    out.g = detail::subst_x(Xx * eq.g, eq.space, el.Xinv);
    out.h = detail::subst_x(eq.h, eq.space, el.Xinv);
    Bindings ub;
    ub.atoms[u_jet(0)] = (u_jet(0) - el.d4) / el.d3;
    out.A = simplify(substitute(eq.A, ub));
    out.B = simplify(substitute(eq.B, ub));
    return out;
}

inline DCEquation apply_to_equation(const ExtendedElement& el,
                                    const DCEquation& eq) {
    detail::require_nonzero({el.d1, el.d3, el.d5, el.d7, el.d9},
                            "extended element");
    check_equation(eq);
    if (!simplify(eq.g - one()).is_zero())
        throw std::invalid_argument("extended element requires g = 1");
    Expr xv = var(eq.space);
    Expr c1 = apply_rules(simplify(diff(el.H, xv) - eq.h), eq.rules);
    if (!c1.is_zero())
        throw std::invalid_argument("extended element: H_x must equal h");
    Expr c2 = apply_rules(simplify(diff(el.Y, xv) - exp(el.d8 * el.H)),
                          eq.rules);
    if (!c2.is_zero())
        throw std::invalid_argument(
            "extended element: Y_x must equal exp(d8 * H)");
    DCEquation out = eq;
    out.f = detail::subst_x(
        el.d1 * el.d9 / el.d5 * eq.f * exp(num(-2) * el.d8 * el.H), eq.space,
        el.Yinv);
    out.g = one();
    out.h = detail::subst_x(el.d9 / el.d7 * eq.h * exp(-el.d8 * el.H),
                            eq.space, el.Yinv);
    Bindings ub;
    ub.atoms[u_jet(0)] = (u_jet(0) - el.d4) / el.d3;
    out.A = simplify(el.d5 * el.d9 * substitute(eq.A, ub));
    out.B = simplify(el.d7 * (substitute(eq.B, ub) +
                              el.d8 * substitute(eq.A, ub)));
    return out;
}

inline DCEquation apply_to_equation(const EquivalenceElement& el,
                                    const DCEquation& eq) {
    return std::visit([&](const auto& e) { return apply_to_equation(e, eq); },
                      el);
}

// Inverses within each family.
inline UsualElement invert(const UsualElement& el) {
    detail::require_nonzero({el.d1, el.d3, el.e1, el.e2, el.e3},
                            "usual element");
    UsualElement out;
    out.d1 = one() / el.d1;
    out.d2 = -el.d2 / el.d1;
    out.d3 = one() / el.d3;
    out.d4 = -el.d4 / el.d3;
    out.e1 = one() / el.e1;
    out.e2 = one() / el.e2;
    out.e3 = one() / el.e3;
    out.X = el.Xinv;
    out.Xinv = el.X;
    return out;
}

inline GaugeElement invert(const GaugeElement& el) {
    detail::require_nonzero({el.e1, el.e2, el.e3}, "gauge element");
    GaugeElement out;
    out.e1 = one() / el.e1;
    out.e2 = one() / el.e2;
    out.e3 = one() / el.e3;
    out.e4 = -el.e4 * el.e3 / el.e2;
    // Phi of the inverse acts on the transformed h/g = (e2/e3)(h/g)
    out.Phi = simplify(el.e2 / el.e3 * el.Phi);
    return out;
}

inline FactorElement invert(const FactorElement& el) {
    detail::require_nonzero({el.d1, el.d3}, "factor element");
    FactorElement out;
    out.d1 = one() / el.d1;
    out.d2 = -el.d2 / el.d1;
    out.d3 = one() / el.d3;
    out.d4 = -el.d4 / el.d3;
    out.X = el.Xinv;
    out.Xinv = el.X;
    return out;
}

// Compositions within each family (b after a).
inline GaugeElement compose(const GaugeElement& a, const GaugeElement& b) {
    GaugeElement out;
    out.e1 = simplify(a.e1 * b.e1);
    out.e2 = simplify(a.e2 * b.e2);
    out.e3 = simplify(a.e3 * b.e3);
    // b sees h~/g~ = (e2/e3)(h/g), so its Phi contributes scaled
    out.e4 = simplify(a.e4 + b.e4 * a.e2 / a.e3);
    out.Phi = a.Phi;
    return out;
}

inline UsualElement compose(const UsualElement& a, const UsualElement& b) {
    UsualElement out;
    out.d1 = simplify(a.d1 * b.d1);
    out.d2 = simplify(b.d1 * a.d2 + b.d2);
    out.d3 = simplify(a.d3 * b.d3);
    out.d4 = simplify(b.d3 * a.d4 + b.d4);
    out.e1 = simplify(a.e1 * b.e1);
    out.e2 = simplify(a.e2 * b.e2);
    out.e3 = simplify(a.e3 * b.e3);
    Bindings fa;
    fa.atoms[var('x')] = a.X;
    out.X = simplify(substitute(b.X, fa));
    Bindings ib;
    ib.atoms[var('x')] = b.Xinv;
    out.Xinv = simplify(substitute(a.Xinv, ib));
    return out;
}

inline FactorElement compose(const FactorElement& a, const FactorElement& b) {
    FactorElement out;
    out.d1 = simplify(a.d1 * b.d1);
    out.d2 = simplify(b.d1 * a.d2 + b.d2);
    out.d3 = simplify(a.d3 * b.d3);
    out.d4 = simplify(b.d3 * a.d4 + b.d4);
    Bindings fa;
    fa.atoms[var('x')] = a.X;
    out.X = simplify(substitute(b.X, fa));
    Bindings ib;
    ib.atoms[var('x')] = b.Xinv;
    out.Xinv = simplify(substitute(a.Xinv, ib));
    return out;
}

// ---------------------------------------------------------------------------
// Text form: "T = ...", "X = ...", "U = ...", "Tinv = ...", "Xinv = ...",
// "Uinv = ...", optional "space = y", "rule: ...", "assume: ...".

inline PointTransformation parse_transformation(const std::string& text) {
    PointTransformation tr;
    tr.T = var('t');
    tr.X = var('x');
    tr.U = u_jet(0);
    tr.Tinv = var('t');
    tr.Xinv = var('x');
    tr.Uinv = u_jet(0);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t i = line.find_first_not_of(" \t\r");
        if (i == std::string::npos || line[i] == '#') continue;
        auto fail = [&](const std::string& msg) {
            throw std::invalid_argument("transformation line " +
                                        std::to_string(lineno) + ": " + msg);
        };
        if (line.compare(i, 7, "assume:") == 0) {
            tr.assumptions.push_back(
                detail::parse_assumption_line(line.substr(i + 7), fail));
            continue;
        }
        if (line.compare(i, 5, "rule:") == 0) {
            tr.rules.push_back(
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
            tr.space = val[j];
        } else if (key == "T") {
            tr.T = parse_expr(val);
        } else if (key == "X") {
            tr.X = parse_expr(val);
        } else if (key == "U") {
            tr.U = parse_expr(val);
        } else if (key == "Tinv") {
            tr.Tinv = parse_expr(val);
        } else if (key == "Xinv") {
            tr.Xinv = parse_expr(val);
        } else if (key == "Uinv") {
            tr.Uinv = parse_expr(val);
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    detail::check_transform_shape(tr);
    return tr;
}

inline std::string format_transformation(const PointTransformation& tr) {
    std::ostringstream os;
    os << "T = " << format_expr(tr.T, tr.space) << "\n";
    os << "X = " << format_expr(tr.X, tr.space) << "\n";
    os << "U = " << format_expr(tr.U, tr.space) << "\n";
    os << "Tinv = " << format_expr(tr.Tinv, tr.space) << "\n";
    os << "Xinv = " << format_expr(tr.Xinv, tr.space) << "\n";
    os << "Uinv = " << format_expr(tr.Uinv, tr.space) << "\n";
    if (tr.space != 'x') os << "space = " << tr.space << "\n";
    return os.str();
}

}  // namespace dce
