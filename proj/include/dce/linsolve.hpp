#pragma once

// Exact rational linear algebra: Gaussian elimination over Q, plus extraction
// of a linear system in chosen unknown constants from a symbolic expression.

#include "expr.hpp"

#include <map>
#include <optional>
#include <vector>

namespace dce {

// Solve A x = b over the rationals. Returns any particular solution (free
// unknowns set to zero) or nullopt if the system is inconsistent.
inline std::optional<std::vector<Rational>> solve_linear(
    std::vector<std::vector<Rational>> A, std::vector<Rational> b) {
    const std::size_t rows = A.size();
    const std::size_t cols = rows ? A[0].size() : 0;
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && A[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(A[p], A[r]);
        std::swap(b[p], b[r]);
        Rational inv = A[r][c];
        for (std::size_t j = c; j < cols; ++j) A[r][j] /= inv;
        b[r] /= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || A[i][c] == 0) continue;
            Rational f = A[i][c];
            for (std::size_t j = c; j < cols; ++j) A[i][j] -= f * A[r][j];
            b[i] -= f * b[r];
        }
        pivot_col.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < rows; ++i)
        if (b[i] != 0) return std::nullopt;
    std::vector<Rational> x(cols, Rational(0));
    for (std::size_t i = 0; i < pivot_col.size(); ++i) x[pivot_col[i]] = b[i];
    return x;
}

// Interpret e == 0 as a linear system in the given unknown constants: every
// monomial must contain at most one unknown, to the first power; monomials
// are grouped by their unknown-free part, each group contributing one
// equation. Throws if e is not linear in the unknowns.
struct LinearSystem {
    std::vector<std::vector<Rational>> A;
    std::vector<Rational> b;
};

inline LinearSystem extract_linear_system(const Expr& e,
                                          const std::vector<Expr>& unknowns) {
    detail::Poly p = detail::to_monos(simplify(e));
    // key -> row
    std::map<Expr, std::pair<std::vector<Rational>, Rational>> rows;
    for (const auto& m : p) {
        int which = -1;
        detail::Mono keym;
        keym.c = 1;
        for (const auto& [base, expo] : m.pw) {
            int u = -1;
            for (std::size_t i = 0; i < unknowns.size(); ++i)
                if (cmp(base, unknowns[i]) == 0) u = static_cast<int>(i);
            if (u >= 0) {
                if (which >= 0 || !expo.is_one())
                    throw std::invalid_argument(
                        "expression is not linear in the unknowns");
                which = u;
            } else {
                for (const auto& un : unknowns)
                    if (contains(base, un) || contains(expo, un))
                        throw std::invalid_argument(
                            "expression is not linear in the unknowns");
                keym.pw.emplace_back(base, expo);
            }
        }
        Expr key = detail::emit({keym});
        auto it = rows.find(key);
        if (it == rows.end()) {
            it = rows.emplace(key,
                              std::make_pair(std::vector<Rational>(
                                                 unknowns.size(), Rational(0)),
                                             Rational(0)))
                     .first;
        }
        if (which >= 0) {
            it->second.first[static_cast<std::size_t>(which)] += m.c;
        } else {
            it->second.second -= m.c;  // move constant to the rhs
        }
    }
    LinearSystem sys;
    for (auto& [key, row] : rows) {
        sys.A.push_back(std::move(row.first));
        sys.b.push_back(std::move(row.second));
    }
    return sys;
}

}  // namespace dce
