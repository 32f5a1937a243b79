#pragma once

// Conserved vectors (F, G) with D_t F + D_x G = 0 on solutions: shape checks,
// verification, the trivial part F -> F + D_x H, G -> G - D_t H, and
// equivalence of conserved vectors modulo trivial ones.

#include "equations.hpp"
#include "linsolve.hpp"

namespace dce {

struct ConservedVector {
    Expr F;  // density, a function of (t, x, u)
    Expr G;  // flux, a function of (t, x, u, u_x)
};

// Throws unless F = F(t,x,u) and G = G(t,x,u,u_x).
inline void check_shape(const ConservedVector& cv) {
    if (has_mixed_jet(cv.F) || has_mixed_jet(cv.G))
        throw std::invalid_argument(
            "conserved vector must not contain t-derivatives of u");
    if (max_jet_order(cv.F) > 0)
        throw std::invalid_argument(
            "density may depend on t, x, u only (no derivatives of u)");
    if (max_jet_order(cv.G) > 1)
        throw std::invalid_argument(
            "flux may depend on t, x, u, u_x only");
}

struct VerificationReport {
    bool verified = false;
    Expr residual;  // canonical form of D_t F + D_x G on solutions
};

inline VerificationReport verify(const DCEquation& eq,
                                 const ConservedVector& cv) {
    check_shape(cv);
    Expr rhs = evolution_form(eq);
    Expr F = apply_assumptions(cv.F, eq.assumptions);
    Expr G = apply_assumptions(cv.G, eq.assumptions);
    Expr r = total_diff_t_on_solutions(F, rhs, eq.rules, eq.space) +
             total_diff_space(G, eq.space);
    r = apply_rules(r, eq.rules);
    r = apply_assumptions(r, eq.assumptions);
    r = simplify(r);
    return VerificationReport{r.is_zero(), r};
}

// Add the trivial conserved vector (D_x H, -D_t H) for H = H(t, x). H must
// not involve u so the density keeps its shape.
inline ConservedVector add_trivial_part(const ConservedVector& cv,
                                        const Expr& H, char space_var = 'x') {
    if (max_jet_order(H) >= 0 || has_mixed_jet(H))
        throw std::invalid_argument("gauge function H may depend on t, x only");
    return ConservedVector{cv.F + diff(H, var(space_var)),
                           cv.G - diff(H, var('t'))};
}

namespace detail {

// Conditions for (dF, dG) to be a trivial conserved vector (D_x H, -D_t H)
// with H = H(t,x): no dependence on u or u_x, and closedness.
inline std::vector<Expr> triviality_conditions(const Expr& dF, const Expr& dG,
                                               char space_var) {
    std::vector<Expr> conds;
    conds.push_back(diff(dF, u_jet(0)));
    conds.push_back(diff(dG, u_jet(0)));
    conds.push_back(diff(dG, u_jet(1)));
    conds.push_back(diff(dF, var('t')) + diff(dG, var(space_var)));
    return conds;
}

}  // namespace detail

// cv1 ~ cv2 iff their difference is a trivial conserved vector.
inline bool is_equivalent(const DCEquation& eq, const ConservedVector& cv1,
                          const ConservedVector& cv2) {
    Expr dF = simplify(cv1.F - cv2.F);
    Expr dG = simplify(cv1.G - cv2.G);
    for (Expr c : detail::triviality_conditions(dF, dG, eq.space)) {
        c = apply_rules(c, eq.rules);
        c = apply_assumptions(c, eq.assumptions);
        if (!simplify(c).is_zero()) return false;
    }
    return true;
}

// Decide whether cv lies in the span of the given vectors modulo trivial
// conserved vectors; returns the rational span coefficients if so.
inline std::optional<std::vector<Rational>> match_in_span(
    const DCEquation& eq, const ConservedVector& cv,
    const std::vector<ConservedVector>& span) {
    std::vector<Expr> unknowns;
    Expr dF = cv.F;
    Expr dG = cv.G;
    for (std::size_t i = 0; i < span.size(); ++i) {
        Expr c = sym("_span_c" + std::to_string(i));
        unknowns.push_back(c);
        dF = dF - c * span[i].F;
        dG = dG - c * span[i].G;
    }
    LinearSystem sys;
    for (Expr cond : detail::triviality_conditions(simplify(dF), simplify(dG),
                                                   eq.space)) {
        cond = apply_rules(cond, eq.rules);
        cond = apply_assumptions(cond, eq.assumptions);
        LinearSystem part = extract_linear_system(cond, unknowns);
        sys.A.insert(sys.A.end(), part.A.begin(), part.A.end());
        sys.b.insert(sys.b.end(), part.b.begin(), part.b.end());
    }
    if (sys.A.empty()) return std::vector<Rational>(span.size(), Rational(0));
    return solve_linear(sys.A, sys.b);
}

// ---------------------------------------------------------------------------
// Text form: "F = ...", "G = ...".

inline ConservedVector parse_conserved_vector(const std::string& text) {
    ConservedVector cv{zero(), zero()};
    bool have_f = false, have_g = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t i = line.find_first_not_of(" \t\r");
        if (i == std::string::npos || line[i] == '#') continue;
        std::size_t eqpos = line.find('=', i);
        if (eqpos == std::string::npos)
            throw std::invalid_argument("conserved vector line " +
                                        std::to_string(lineno) +
                                        ": expected '='");
        std::string key = line.substr(i, eqpos - i);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::string val = line.substr(eqpos + 1);
        if (key == "F") {
            cv.F = parse_expr(val);
            have_f = true;
        } else if (key == "G") {
            cv.G = parse_expr(val);
            have_g = true;
        } else {
            throw std::invalid_argument("conserved vector line " +
                                        std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
        }
    }
    if (!have_f || !have_g)
        throw std::invalid_argument("conserved vector needs both F and G");
    return cv;
}

inline std::string format_conserved_vector(const ConservedVector& cv,
                                           char space = 'x') {
    std::ostringstream os;
    os << "F = " << format_expr(cv.F, space) << "\n";
    os << "G = " << format_expr(cv.G, space) << "\n";
    return os.str();
}

}  // namespace dce
