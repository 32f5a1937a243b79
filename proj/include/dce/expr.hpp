#pragma once

// Exact symbolic expression kernel over jet variables, abstract functions and
// antiderivative symbols. All expressions are immutable and kept in a unique
// canonical form: sums of monomials with exact rational coefficients, products
// flattened and sorted, integer powers of sums expanded, and negative/symbolic
// powers of sums carried as opaque denominator atoms brought to a common
// denominator per sum. Zero therefore always simplifies to the literal 0.

#include "rational.hpp"

#include <algorithm>
#include <map>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dce {

class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct Limits {
    int max_pow_expand = 24;      // largest integer power of a sum we expand
    std::size_t max_terms = 200000;  // monomial count budget per normalization
    int max_rule_depth = 32;      // constrained-function rewrite depth
};

namespace detail {
inline Limits& limits() {
    thread_local Limits l;
    return l;
}
}  // namespace detail

inline void set_limits(const Limits& l) { detail::limits() = l; }
inline const Limits& limits() { return detail::limits(); }

enum class Kind {
    Rational,
    Constant,
    Var,       // t, x or y
    Jet,       // d^n u / dx^n (order 0 = u); x stands for the space variable
    MixedJet,  // d^{i+j} u / dt^i dx^j, i >= 1
    Fn,        // abstract function with derivative multi-order
    Antideriv, // unexpanded antiderivative of a named function
    Exp,
    Ln,
    Abs,
    Sin,
    Cos,
    Atan,
    Power,
    Product,
    Sum,
};

class Expr;
struct Node;
using NodePtr = std::shared_ptr<const Node>;

class Expr {
public:
    Expr() = default;
    explicit Expr(NodePtr p) : p_(std::move(p)) {}

    bool valid() const { return static_cast<bool>(p_); }
    const Node& node() const;
    Kind kind() const;

    bool is_zero() const;
    bool is_one() const;
    bool is_rational() const;
    bool is_integer() const;
    const Rational& rat() const;

    friend int cmp(const Expr& a, const Expr& b);
    bool operator==(const Expr& o) const { return cmp(*this, o) == 0; }
    bool operator!=(const Expr& o) const { return cmp(*this, o) != 0; }
    bool operator<(const Expr& o) const { return cmp(*this, o) < 0; }

private:
    NodePtr p_;
};

struct Node {
    Kind kind;
    Rational rat;           // Rational
    std::string name;       // Constant / Fn / Antideriv
    char var = 0;           // Var
    int jt = 0;             // MixedJet t-order
    int jx = 0;             // Jet / MixedJet x-order
    std::vector<int> ords;  // Fn derivative orders (one per argument)
    std::vector<Expr> kids; // children
};

inline const Node& Expr::node() const {
    if (!p_) throw std::logic_error("empty expression");
    return *p_;
}
inline Kind Expr::kind() const { return node().kind; }
inline bool Expr::is_rational() const { return kind() == Kind::Rational; }
inline bool Expr::is_integer() const {
    return is_rational() && dce::is_integer(node().rat);
}
inline bool Expr::is_zero() const { return is_rational() && node().rat == 0; }
inline bool Expr::is_one() const { return is_rational() && node().rat == 1; }
inline const Rational& Expr::rat() const {
    if (!is_rational()) throw std::logic_error("not a rational node");
    return node().rat;
}

// ---------------------------------------------------------------------------
// Total order on expressions (used for sorting factors and terms).

inline int kind_rank(Kind k) {
    switch (k) {
        case Kind::Rational: return 0;
        case Kind::Constant: return 1;
        case Kind::Abs: return 2;
        case Kind::Exp: return 3;
        case Kind::Ln: return 4;
        case Kind::Sin: return 5;
        case Kind::Cos: return 6;
        case Kind::Atan: return 7;
        case Kind::Fn: return 8;
        case Kind::Antideriv: return 9;
        case Kind::Power: return 10;
        case Kind::Var: return 11;
        case Kind::Jet: return 12;
        case Kind::MixedJet: return 13;
        case Kind::Product: return 14;
        case Kind::Sum: return 15;
    }
    return 99;
}

inline int cmp(const Expr& a, const Expr& b) {
    if (&a.node() == &b.node()) return 0;
    const Node& na = a.node();
    const Node& nb = b.node();
    if (na.kind != nb.kind) {
        return kind_rank(na.kind) < kind_rank(nb.kind) ? -1 : 1;
    }
    auto cmp_kids = [&]() -> int {
        std::size_t n = std::min(na.kids.size(), nb.kids.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (int c = cmp(na.kids[i], nb.kids[i])) return c;
        }
        if (na.kids.size() != nb.kids.size())
            return na.kids.size() < nb.kids.size() ? -1 : 1;
        return 0;
    };
    switch (na.kind) {
        case Kind::Rational:
            return na.rat == nb.rat ? 0 : (na.rat < nb.rat ? -1 : 1);
        case Kind::Constant:
            return na.name.compare(nb.name) < 0 ? -1
                 : (na.name == nb.name ? 0 : 1);
        case Kind::Var:
            return na.var == nb.var ? 0 : (na.var < nb.var ? -1 : 1);
        case Kind::Jet:
            return na.jx == nb.jx ? 0 : (na.jx < nb.jx ? -1 : 1);
        case Kind::MixedJet:
            if (na.jt != nb.jt) return na.jt < nb.jt ? -1 : 1;
            return na.jx == nb.jx ? 0 : (na.jx < nb.jx ? -1 : 1);
        case Kind::Fn: {
            if (int c = na.name.compare(nb.name))
                return c < 0 ? -1 : 1;
            if (na.ords != nb.ords) return na.ords < nb.ords ? -1 : 1;
            return cmp_kids();
        }
        case Kind::Antideriv: {
            if (int c = na.name.compare(nb.name))
                return c < 0 ? -1 : 1;
            return cmp_kids();
        }
        default:
            return cmp_kids();
    }
}

// ---------------------------------------------------------------------------
// Raw node builders (no canonicalization; internal use only).

namespace detail {

inline Expr mk(Node n) { return Expr(std::make_shared<Node>(std::move(n))); }

inline Expr raw_rational(Rational r) {
    Node n;
    n.kind = Kind::Rational;
    n.rat = std::move(r);
    return mk(std::move(n));
}

inline Expr raw_unary(Kind k, Expr arg) {
    Node n;
    n.kind = k;
    n.kids = {std::move(arg)};
    return mk(std::move(n));
}

inline Expr raw_power(Expr base, Expr expo) {
    Node n;
    n.kind = Kind::Power;
    n.kids = {std::move(base), std::move(expo)};
    return mk(std::move(n));
}

inline Expr raw_nary(Kind k, std::vector<Expr> kids) {
    Node n;
    n.kind = k;
    n.kids = std::move(kids);
    return mk(std::move(n));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Leaf factories.

inline Expr num(Rational r) { return detail::raw_rational(std::move(r)); }
inline Expr num(long long v) { return num(Rational(v)); }
inline Expr frac(long long a, long long b) { return num(make_rational(a, b)); }
inline Expr zero() { return num(0); }
inline Expr one() { return num(1); }

inline Expr sym(std::string name) {
    Node n;
    n.kind = Kind::Constant;
    n.name = std::move(name);
    return detail::mk(std::move(n));
}

inline Expr var(char c) {
    if (c != 't' && c != 'x' && c != 'y')
        throw std::invalid_argument("base variable must be t, x or y");
    Node n;
    n.kind = Kind::Var;
    n.var = c;
    return detail::mk(std::move(n));
}

inline Expr u_jet(int order) {
    if (order < 0) throw std::invalid_argument("negative jet order");
    Node n;
    n.kind = Kind::Jet;
    n.jx = order;
    return detail::mk(std::move(n));
}

inline Expr mixed_jet(int t_order, int x_order) {
    if (t_order <= 0 || x_order < 0)
        throw std::invalid_argument("mixed jet needs t order >= 1");
    Node n;
    n.kind = Kind::MixedJet;
    n.jt = t_order;
    n.jx = x_order;
    return detail::mk(std::move(n));
}

inline Expr fn(std::string name, std::vector<Expr> args,
               std::vector<int> ords = {}) {
    if (args.empty()) throw std::invalid_argument("function needs arguments");
    if (ords.empty()) ords.assign(args.size(), 0);
    if (ords.size() != args.size())
        throw std::invalid_argument("derivative orders mismatch arity");
    Node n;
    n.kind = Kind::Fn;
    n.name = std::move(name);
    n.ords = std::move(ords);
    n.kids = std::move(args);
    return detail::mk(std::move(n));
}

inline Expr antideriv(std::string fname, Expr arg) {
    Node n;
    n.kind = Kind::Antideriv;
    n.name = std::move(fname);
    n.kids = {std::move(arg)};
    return detail::mk(std::move(n));
}

// ---------------------------------------------------------------------------
// Canonicalizing constructors. A canonical expression is one of
//   Rational | atom | Power(atom-or-sum, expo) | Product(coeff?, factors...)
//   | Sum(terms...)
// where factors are atoms or Powers with distinct bases sorted by cmp, terms
// are monomials with distinct factor keys sorted by cmp, and every integer
// power >= 1 of a Sum is expanded.

Expr make_sum(std::vector<Expr> kids);
Expr make_product(std::vector<Expr> kids);
Expr make_power(const Expr& base, const Expr& expo);
Expr make_exp(const Expr& a);
Expr make_ln(const Expr& a);

namespace detail {

struct Mono {
    Rational c;
    // (base, exponent), sorted by base; base is never Rational/Product/Power.
    std::vector<std::pair<Expr, Expr>> pw;
};

using Poly = std::vector<Mono>;

inline int cmp_key(const Mono& a, const Mono& b) {
    std::size_t n = std::min(a.pw.size(), b.pw.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (int c = cmp(a.pw[i].first, b.pw[i].first)) return c;
        if (int c = cmp(a.pw[i].second, b.pw[i].second)) return c;
    }
    if (a.pw.size() != b.pw.size()) return a.pw.size() < b.pw.size() ? -1 : 1;
    return 0;
}

inline void check_budget(std::size_t nterms) {
    if (nterms > limits().max_terms)
        throw BudgetError("expression exceeded the monomial budget (max_terms="
                          + std::to_string(limits().max_terms) + ")");
}

Poly to_monos(const Expr& e);
Poly poly_mul(const Poly& a, const Poly& b);
Expr emit(Poly p);

inline Poly collect(Poly p) {
    std::sort(p.begin(), p.end(),
              [](const Mono& a, const Mono& b) { return cmp_key(a, b) < 0; });
    Poly out;
    for (auto& m : p) {
        if (m.c == 0) continue;
        if (!out.empty() && cmp_key(out.back(), m) == 0) {
            out.back().c += m.c;
            if (out.back().c == 0) out.pop_back();
        } else {
            out.push_back(std::move(m));
        }
    }
    return out;
}

inline Poly poly_pow_int(const Poly& base, long long n) {
    if (n < 0) throw std::logic_error("poly_pow_int: negative exponent");
    Poly acc{Mono{Rational(1), {}}};
    Poly sq = base;
    while (n > 0) {
        if (n & 1) acc = poly_mul(acc, sq);
        n >>= 1;
        if (n) sq = poly_mul(sq, sq);
    }
    return acc;
}

// Multiply two monomials. Returns a polynomial because merged exponents can
// turn a symbolic power of a sum into an integer one that must be expanded.
inline Poly mono_mul(const Mono& a, const Mono& b) {
    Mono r;
    r.c = a.c * b.c;
    if (r.c == 0) return {};
    std::vector<std::pair<Expr, Expr>> merged;
    merged.reserve(a.pw.size() + b.pw.size());
    std::size_t i = 0, j = 0;
    while (i < a.pw.size() || j < b.pw.size()) {
        int c;
        if (i == a.pw.size()) c = 1;
        else if (j == b.pw.size()) c = -1;
        else c = cmp(a.pw[i].first, b.pw[j].first);
        if (c < 0) merged.push_back(a.pw[i++]);
        else if (c > 0) merged.push_back(b.pw[j++]);
        else {
            Expr e = make_sum({a.pw[i].second, b.pw[j].second});
            if (!e.is_zero()) merged.emplace_back(a.pw[i].first, e);
            ++i;
            ++j;
        }
    }
    // Post-merge fixups: fold rational powers, merge exponentials, expand
    // integral powers of sums.
    Expr exp_arg = zero();
    std::vector<std::pair<Expr, long long>> expansions;
    for (auto& [base, expo] : merged) {
        if (base.kind() == Kind::Exp) {
            exp_arg = make_sum(
                {exp_arg, make_product({base.node().kids[0], expo})});
            base = Expr();  // mark dead
            continue;
        }
        if (base.is_rational() && expo.is_integer()) {
            long long n = to_long(expo.rat());
            if (n > 512 || n < -512)
                throw BudgetError("rational power exponent budget exceeded");
            Rational p = 1;
            Rational b0 = base.rat();
            bool inv = n < 0;
            for (long long k = 0; k < (inv ? -n : n); ++k) p *= b0;
            r.c *= inv ? Rational(1) / p : p;
            base = Expr();
            continue;
        }
        if (base.kind() == Kind::Sum && expo.is_integer()) {
            long long n = to_long(expo.rat());
            if (n >= 1) {
                if (n > limits().max_pow_expand)
                    throw BudgetError("sum power expansion budget exceeded "
                                      "(max_pow_expand)");
                expansions.emplace_back(base, n);
                base = Expr();
                continue;
            }
        }
    }
    for (auto& [base, expo] : merged)
        if (base.valid()) r.pw.emplace_back(base, expo);
    // Fold the combined exponential argument: terms c*ln(s) with rational c
    // become factors s^c, the remainder stays under a single Exp node.
    Poly extracted{Mono{Rational(1), {}}};
    bool have_extracted = false;
    if (!exp_arg.is_zero()) {
        Poly ap = to_monos(exp_arg);
        Poly rest;
        for (const auto& m : ap) {
            if (m.pw.size() == 1 && m.pw[0].first.kind() == Kind::Ln &&
                m.pw[0].second.is_one()) {
                extracted = poly_mul(
                    extracted,
                    to_monos(make_power(m.pw[0].first.node().kids[0],
                                        raw_rational(m.c))));
                have_extracted = true;
            } else {
                rest.push_back(m);
            }
        }
        if (!rest.empty()) {
            Expr en = raw_unary(Kind::Exp, emit(std::move(rest)));
            auto pos = std::lower_bound(
                r.pw.begin(), r.pw.end(), en,
                [](const auto& pr, const Expr& key) {
                    return cmp(pr.first, key) < 0;
                });
            r.pw.insert(pos, {en, raw_rational(Rational(1))});
        }
    }
    Poly out{std::move(r)};
    if (have_extracted) out = poly_mul(out, extracted);
    for (auto& [base, n] : expansions) {
        out = poly_mul(out, poly_pow_int(to_monos(base), n));
    }
    return out;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& ma : a) {
        for (const auto& mb : b) {
            Poly p = mono_mul(ma, mb);
            out.insert(out.end(), p.begin(), p.end());
            check_budget(out.size());
        }
    }
    return collect(std::move(out));
}

inline Mono term_to_mono(const Expr& e) {
    Mono m;
    m.c = 1;
    auto add_factor = [&m](const Expr& f) {
        if (f.is_rational()) {
            m.c *= f.rat();
        } else if (f.kind() == Kind::Power) {
            m.pw.emplace_back(f.node().kids[0], f.node().kids[1]);
        } else {
            m.pw.emplace_back(f, one());
        }
    };
    if (e.kind() == Kind::Product) {
        for (const auto& k : e.node().kids) add_factor(k);
    } else {
        add_factor(e);
    }
    std::sort(m.pw.begin(), m.pw.end(),
              [](const auto& a, const auto& b) { return cmp(a.first, b.first) < 0; });
    return m;
}

inline Poly to_monos(const Expr& e) {
    if (e.is_zero()) return {};
    if (e.kind() == Kind::Sum) {
        Poly p;
        p.reserve(e.node().kids.size());
        for (const auto& k : e.node().kids) p.push_back(term_to_mono(k));
        return p;
    }
    return {term_to_mono(e)};
}

inline Poly poly_sub(const Poly& a, const Poly& b) {
    Poly out = a;
    for (const auto& m : b) {
        Mono n = m;
        n.c = -n.c;
        out.push_back(std::move(n));
    }
    return collect(std::move(out));
}

inline Mono mono_inv(const Mono& m) {
    Mono r;
    r.c = Rational(1) / m.c;
    for (const auto& [b, e] : m.pw)
        r.pw.emplace_back(b, make_product({raw_rational(Rational(-1)), e}));
    return r;
}

// Exact multivariate division of P by S (best effort). Picks a pivot base of
// S whose exponents are integers in both polynomials and whose leading
// coefficient in S is a single monomial; performs leading-term elimination.
// Returns the quotient iff the division leaves no remainder.
inline std::optional<Poly> try_divide(const Poly& P, const Poly& S) {
    if (P.empty() || S.empty()) return std::nullopt;
    auto int_exponent = [](const Mono& m, const Expr& v,
                           long long& out) -> bool {
        out = 0;
        for (const auto& [b, e] : m.pw) {
            if (cmp(b, v) == 0) {
                if (!e.is_integer()) return false;
                out = to_long(e.rat());
                return true;
            }
        }
        return true;
    };
    // candidate pivots: bases occurring in S
    std::vector<Expr> pivots;
    for (const auto& m : S)
        for (const auto& [b, e] : m.pw) {
            bool seen = false;
            for (const auto& pvt : pivots) seen = seen || cmp(pvt, b) == 0;
            if (!seen) pivots.push_back(b);
        }
    for (const Expr& v : pivots) {
        bool ok = true;
        long long degS = 0, tmp = 0;
        for (const auto& m : S) {
            if (!int_exponent(m, v, tmp)) { ok = false; break; }
            degS = std::max(degS, tmp);
        }
        if (!ok || degS < 1) continue;
        for (const auto& m : P) {
            if (!int_exponent(m, v, tmp)) { ok = false; break; }
        }
        if (!ok) continue;
        // leading coefficient of S in v must be one monomial
        const Mono* lead_s = nullptr;
        bool multi = false;
        for (const auto& m : S) {
            int_exponent(m, v, tmp);
            if (tmp == degS) {
                if (lead_s) multi = true;
                lead_s = &m;
            }
        }
        if (multi || !lead_s) continue;
        Mono inv_lead = mono_inv(*lead_s);
        Poly rem = P;
        Poly quot;
        int guard = 0;
        while (!rem.empty()) {
            if (++guard > 4096) return std::nullopt;
            long long degP = std::numeric_limits<long long>::min();
            for (const auto& m : rem) {
                int_exponent(m, v, tmp);
                degP = std::max(degP, tmp);
            }
            if (degP < degS) return std::nullopt;
            Poly qstep;
            for (const auto& m : rem) {
                int_exponent(m, v, tmp);
                if (tmp == degP) {
                    Poly q = mono_mul(m, inv_lead);
                    qstep.insert(qstep.end(), q.begin(), q.end());
                }
            }
            qstep = collect(std::move(qstep));
            if (qstep.empty()) return std::nullopt;
            rem = poly_sub(rem, poly_mul(qstep, S));
            quot.insert(quot.end(), qstep.begin(), qstep.end());
        }
        return collect(std::move(quot));
    }
    return std::nullopt;
}

// Bring monomials sharing a sum-base to the least exponent in each
// integer-offset class, expanding the nonnegative-integer difference, then
// cancel whole powers of the base out of each aligned group by exact
// division. This is what lets e.g. (x+1)*(x+1)^(-1) - 1 or
// h*(x+1)^(mu) - h*(x+1)*(x+1)^(mu-1) cancel to zero.
inline Poly rationalize(Poly p) {
    // Gather sum bases.
    std::set<Expr> bases;
    for (const auto& m : p)
        for (const auto& [b, e] : m.pw)
            if (b.kind() == Kind::Sum) bases.insert(b);
    for (const Expr& b : bases) {
        // Exponent of b in each monomial (zero() when absent).
        std::vector<Expr> expos(p.size(), zero());
        for (std::size_t i = 0; i < p.size(); ++i)
            for (const auto& [bb, e] : p[i].pw)
                if (bb == b) expos[i] = e;
        // Classes keyed by representative exponent; members know their
        // integer offset from the class minimum.
        struct Cls {
            Expr rep;
            Rational min_off = 0;
            std::vector<std::pair<std::size_t, Rational>> members;
        };
        std::vector<Cls> classes;
        for (std::size_t i = 0; i < p.size(); ++i) {
            bool placed = false;
            for (auto& cl : classes) {
                Expr d = make_sum({expos[i], make_product({num(-1), cl.rep})});
                if (d.is_integer()) {
                    Rational off = d.rat();
                    cl.members.emplace_back(i, off);
                    cl.min_off = std::min(cl.min_off, off);
                    placed = true;
                    break;
                }
            }
            if (!placed) {
                // Absent factors only join the class of integer exponents.
                if (!expos[i].valid() || expos[i].is_zero()) {
                    // exponent literally zero: representative 0
                }
                Cls cl;
                cl.rep = expos[i];
                cl.members.emplace_back(i, Rational(0));
                classes.push_back(std::move(cl));
            }
        }
        Poly out;
        for (const auto& cl : classes) {
            bool all_zero_off = true;
            for (auto& [idx, off] : cl.members)
                if (off != cl.min_off) all_zero_off = false;
            for (auto& [idx, off] : cl.members) {
                Mono m = p[idx];
                Rational k = off - cl.min_off;  // nonnegative integer
                if (!all_zero_off && k > 0) {
                    // replace b^e by b^(e-k) and multiply out b^k
                    Expr new_e = make_sum({expos[idx], num(-k)});
                    Mono base_m;
                    base_m.c = m.c;
                    bool found = false;
                    for (auto& [bb, ee] : m.pw) {
                        if (bb == b) {
                            found = true;
                            if (!new_e.is_zero())
                                base_m.pw.emplace_back(bb, new_e);
                        } else {
                            base_m.pw.emplace_back(bb, ee);
                        }
                    }
                    if (!found && !new_e.is_zero()) {
                        auto pos = std::lower_bound(
                            base_m.pw.begin(), base_m.pw.end(), b,
                            [](const auto& pr, const Expr& key) {
                                return cmp(pr.first, key) < 0;
                            });
                        base_m.pw.insert(pos, {b, new_e});
                    }
                    Poly expd = poly_mul({base_m},
                                         poly_pow_int(to_monos(b), to_long(k)));
                    out.insert(out.end(), expd.begin(), expd.end());
                } else {
                    out.push_back(std::move(m));
                }
                check_budget(out.size());
            }
        }
        p = collect(std::move(out));

        // Division pass: factor b^e out of each equal-exponent group and
        // divide the cofactor by b while the division stays exact.
        std::vector<std::pair<Expr, Poly>> groups;  // exponent -> cofactors
        Poly rest;
        for (const auto& m : p) {
            Expr e;
            Mono cof;
            cof.c = m.c;
            for (const auto& [bb, ee] : m.pw) {
                if (bb == b) e = ee;
                else cof.pw.emplace_back(bb, ee);
            }
            if (!e.valid()) {
                rest.push_back(m);
                continue;
            }
            bool placed = false;
            for (auto& [ge, gp] : groups)
                if (cmp(ge, e) == 0) {
                    gp.push_back(cof);
                    placed = true;
                    break;
                }
            if (!placed) groups.emplace_back(e, Poly{cof});
        }
        if (!groups.empty()) {
            Poly bs = to_monos(b);
            Poly out2 = std::move(rest);
            for (auto& [e, gp] : groups) {
                gp = collect(std::move(gp));
                Expr cur = e;
                while (!cur.is_zero()) {
                    auto q = try_divide(gp, bs);
                    if (!q) break;
                    gp = std::move(*q);
                    cur = make_sum({cur, raw_rational(Rational(1))});
                }
                if (cur.is_zero()) {
                    out2.insert(out2.end(), gp.begin(), gp.end());
                } else {
                    Mono bm;
                    bm.c = 1;
                    bm.pw.emplace_back(b, cur);
                    Poly withb = poly_mul(gp, {bm});
                    out2.insert(out2.end(), withb.begin(), withb.end());
                }
                check_budget(out2.size());
            }
            p = collect(std::move(out2));
        }
    }
    return p;
}

inline Expr emit_mono(const Mono& m) {
    std::vector<Expr> factors;
    for (const auto& [b, e] : m.pw) {
        factors.push_back(e.is_one() ? b : raw_power(b, e));
    }
    if (factors.empty()) return num(m.c);
    if (m.c == 1 && factors.size() == 1) return factors[0];
    std::vector<Expr> kids;
    if (m.c != 1) kids.push_back(num(m.c));
    for (auto& f : factors) kids.push_back(std::move(f));
    if (kids.size() == 1) return kids[0];
    return raw_nary(Kind::Product, std::move(kids));
}

inline Expr emit(Poly p) {
    if (p.empty()) return zero();
    std::sort(p.begin(), p.end(),
              [](const Mono& a, const Mono& b) { return cmp_key(a, b) < 0; });
    if (p.size() == 1) return emit_mono(p[0]);
    std::vector<Expr> terms;
    terms.reserve(p.size());
    for (const auto& m : p) terms.push_back(emit_mono(m));
    return raw_nary(Kind::Sum, std::move(terms));
}

// Divide a canonical sum by the rational coefficient of its first term,
// returning (content, reduced sum). Used to keep power bases normalized.
inline std::pair<Rational, Expr> sum_content(const Expr& s) {
    Poly p = to_monos(s);
    if (p.empty()) return {Rational(1), s};
    Rational c = p.front().c;
    if (c == 1) return {c, s};
    for (auto& m : p) m.c /= c;
    return {c, emit(std::move(p))};
}

}  // namespace detail

inline Expr make_sum(std::vector<Expr> kids) {
    detail::Poly p;
    for (const auto& k : kids) {
        detail::Poly q = detail::to_monos(k);
        p.insert(p.end(), q.begin(), q.end());
        detail::check_budget(p.size());
    }
    p = detail::collect(std::move(p));
    p = detail::rationalize(std::move(p));
    return detail::emit(std::move(p));
}

inline Expr make_product(std::vector<Expr> kids) {
    detail::Poly p{detail::Mono{Rational(1), {}}};
    for (const auto& k : kids) {
        if (k.is_zero()) return zero();
        p = detail::poly_mul(p, detail::to_monos(k));
    }
    p = detail::rationalize(std::move(p));
    return detail::emit(std::move(p));
}

inline Expr make_exp(const Expr& a) {
    if (a.is_zero()) return one();
    if (a.kind() == Kind::Ln) return a.node().kids[0];
    // Pull out terms c*ln(s) with rational c into factors s^c.
    detail::Poly p = detail::to_monos(a);
    std::vector<Expr> factors;
    detail::Poly rest;
    for (const auto& m : p) {
        if (m.pw.size() == 1 && m.pw[0].first.kind() == Kind::Ln &&
            m.pw[0].second.is_one()) {
            factors.push_back(make_power(m.pw[0].first.node().kids[0],
                                         num(m.c)));
        } else {
            rest.push_back(m);
        }
    }
    Expr rest_e = detail::emit(std::move(rest));
    if (!rest_e.is_zero())
        factors.push_back(detail::raw_unary(Kind::Exp, rest_e));
    if (factors.empty()) return one();
    return make_product(std::move(factors));
}

inline Expr make_ln(const Expr& a) {
    if (a.is_one()) return zero();
    if (a.kind() == Kind::Exp) return a.node().kids[0];
    if (a.kind() == Kind::Power)
        return make_product({a.node().kids[1], make_ln(a.node().kids[0])});
    if (a.kind() == Kind::Product) {
        std::vector<Expr> terms;
        for (const auto& k : a.node().kids) terms.push_back(make_ln(k));
        return make_sum(std::move(terms));
    }
    return detail::raw_unary(Kind::Ln, a);
}

inline Expr make_power(const Expr& base, const Expr& expo) {
    if (expo.is_zero()) return one();
    if (expo.is_one()) return base;
    if (base.is_rational()) {
        if (base.rat() == 0) {
            if (expo.is_rational() && expo.rat() > 0) return zero();
            throw DomainError("zero base with nonpositive exponent");
        }
        if (base.rat() == 1) return one();
        if (expo.is_integer()) {
            detail::Poly p = detail::mono_mul(
                detail::Mono{Rational(1), {{base, expo}}},
                detail::Mono{Rational(1), {}});
            return detail::emit(std::move(p));
        }
        return detail::raw_power(base, expo);
    }
    switch (base.kind()) {
        case Kind::Product: {
            std::vector<Expr> factors;
            for (const auto& k : base.node().kids)
                factors.push_back(make_power(k, expo));
            return make_product(std::move(factors));
        }
        case Kind::Power:
            return make_power(base.node().kids[0],
                              make_product({base.node().kids[1], expo}));
        case Kind::Exp:
            return make_exp(make_product({base.node().kids[0], expo}));
        case Kind::Sum: {
            if (expo.is_integer()) {
                long long n = to_long(expo.rat());
                if (n >= 1) {
                    if (n > limits().max_pow_expand)
                        throw BudgetError(
                            "sum power expansion budget exceeded "
                            "(max_pow_expand)");
                    return detail::emit(
                        detail::poly_pow_int(detail::to_monos(base), n));
                }
                auto [c, b2] = detail::sum_content(base);
                if (c != 1) {
                    return make_product({make_power(num(c), expo),
                                         detail::raw_power(b2, expo)});
                }
                return detail::raw_power(base, expo);
            }
            auto [c, b2] = detail::sum_content(base);
            Rational ac = c < 0 ? -c : c;
            if (ac != 1) {
                // hoist only the positive content for symbolic exponents
                detail::Poly p = detail::to_monos(base);
                for (auto& m : p) m.c /= ac;
                Expr b3 = detail::emit(std::move(p));
                return make_product({make_power(num(ac), expo),
                                     detail::raw_power(b3, expo)});
            }
            return detail::raw_power(base, expo);
        }
        default:
            return detail::raw_power(base, expo);
    }
}

inline Expr make_abs(const Expr& a) {
    if (a.is_rational()) {
        Rational r = a.rat();
        return num(r < 0 ? -r : r);
    }
    if (a.kind() == Kind::Abs) return a;
    if (a.kind() == Kind::Product || a.kind() == Kind::Exp) {
        // |c*X| = |c|*|X|, |e^s| = e^s
        if (a.kind() == Kind::Exp) return a;
        std::vector<Expr> factors;
        for (const auto& k : a.node().kids) factors.push_back(make_abs(k));
        return make_product(std::move(factors));
    }
    return detail::raw_unary(Kind::Abs, a);
}

inline Expr make_sin(const Expr& a) {
    if (a.is_zero()) return zero();
    return detail::raw_unary(Kind::Sin, a);
}
inline Expr make_cos(const Expr& a) {
    if (a.is_zero()) return one();
    return detail::raw_unary(Kind::Cos, a);
}
inline Expr make_atan(const Expr& a) {
    if (a.is_zero()) return zero();
    return detail::raw_unary(Kind::Atan, a);
}

// Operator sugar.
inline Expr operator+(const Expr& a, const Expr& b) { return make_sum({a, b}); }
inline Expr operator-(const Expr& a) { return make_product({num(-1), a}); }
inline Expr operator-(const Expr& a, const Expr& b) { return make_sum({a, -b}); }
inline Expr operator*(const Expr& a, const Expr& b) {
    return make_product({a, b});
}
inline Expr operator/(const Expr& a, const Expr& b) {
    return make_product({a, make_power(b, num(-1))});
}
inline Expr operator+(long long a, const Expr& b) { return num(a) + b; }
inline Expr operator+(const Expr& a, long long b) { return a + num(b); }
inline Expr operator-(long long a, const Expr& b) { return num(a) - b; }
inline Expr operator-(const Expr& a, long long b) { return a - num(b); }
inline Expr operator*(long long a, const Expr& b) { return num(a) * b; }
inline Expr operator*(const Expr& a, long long b) { return a * num(b); }
inline Expr operator/(long long a, const Expr& b) { return num(a) / b; }
inline Expr operator/(const Expr& a, long long b) { return a / num(b); }
inline Expr pow(const Expr& b, const Expr& e) { return make_power(b, e); }
inline Expr pow(const Expr& b, long long e) { return make_power(b, num(e)); }
inline Expr exp(const Expr& a) { return make_exp(a); }
inline Expr ln(const Expr& a) { return make_ln(a); }
inline Expr abs(const Expr& a) { return make_abs(a); }
inline Expr sin(const Expr& a) { return make_sin(a); }
inline Expr cos(const Expr& a) { return make_cos(a); }
inline Expr atan(const Expr& a) { return make_atan(a); }

// Rebuild an expression bottom-up through the canonicalizing constructors.
// Idempotent; canonical inputs come out unchanged.
inline Expr simplify(const Expr& e) {
    const Node& n = e.node();
    std::vector<Expr> kids;
    kids.reserve(n.kids.size());
    for (const auto& k : n.kids) kids.push_back(simplify(k));
    switch (n.kind) {
        case Kind::Rational:
        case Kind::Constant:
        case Kind::Var:
        case Kind::Jet:
        case Kind::MixedJet:
            return e;
        case Kind::Fn: {
            Node m = n;
            m.kids = std::move(kids);
            return detail::mk(std::move(m));
        }
        case Kind::Antideriv:
            return antideriv(n.name, kids[0]);
        case Kind::Exp: return make_exp(kids[0]);
        case Kind::Ln: return make_ln(kids[0]);
        case Kind::Abs: return make_abs(kids[0]);
        case Kind::Sin: return make_sin(kids[0]);
        case Kind::Cos: return make_cos(kids[0]);
        case Kind::Atan: return make_atan(kids[0]);
        case Kind::Power: return make_power(kids[0], kids[1]);
        case Kind::Product: return make_product(std::move(kids));
        case Kind::Sum: return make_sum(std::move(kids));
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Differentiation.

// Partial derivative treating all other symbols as independent. v must be a
// base variable, jet variable, mixed jet or named constant.
inline Expr diff(const Expr& e, const Expr& v) {
    if (cmp(e, v) == 0) return one();
    const Node& n = e.node();
    switch (n.kind) {
        case Kind::Rational:
        case Kind::Constant:
        case Kind::Var:
        case Kind::Jet:
        case Kind::MixedJet:
            return zero();
        case Kind::Fn: {
            std::vector<Expr> terms;
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                Expr da = diff(n.kids[i], v);
                if (da.is_zero()) continue;
                std::vector<int> ords = n.ords;
                ords[i] += 1;
                terms.push_back(make_product(
                    {fn(n.name, n.kids, std::move(ords)), da}));
            }
            return make_sum(std::move(terms));
        }
        case Kind::Antideriv: {
            Expr da = diff(n.kids[0], v);
            if (da.is_zero()) return zero();
            return make_product({fn(n.name, {n.kids[0]}), da});
        }
        case Kind::Exp:
            return make_product({e, diff(n.kids[0], v)});
        case Kind::Ln:
            return diff(n.kids[0], v) / n.kids[0];
        case Kind::Abs: {
            Expr da = diff(n.kids[0], v);
            if (da.is_zero()) return zero();
            throw DomainError(
                "derivative of abs(); fix the sign via domain assumptions "
                "before differentiating");
        }
        case Kind::Sin:
            return make_product({make_cos(n.kids[0]), diff(n.kids[0], v)});
        case Kind::Cos:
            return make_product(
                {num(-1), make_sin(n.kids[0]), diff(n.kids[0], v)});
        case Kind::Atan:
            return diff(n.kids[0], v) /
                   (one() + make_power(n.kids[0], num(2)));
        case Kind::Power: {
            const Expr& b = n.kids[0];
            const Expr& ex = n.kids[1];
            Expr db = diff(b, v);
            Expr dex = diff(ex, v);
            std::vector<Expr> terms;
            if (!db.is_zero())
                terms.push_back(make_product(
                    {ex, make_power(b, ex - one()), db}));
            if (!dex.is_zero())
                terms.push_back(make_product({e, make_ln(b), dex}));
            return make_sum(std::move(terms));
        }
        case Kind::Product: {
            std::vector<Expr> terms;
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                Expr dk = diff(n.kids[i], v);
                if (dk.is_zero()) continue;
                std::vector<Expr> factors;
                for (std::size_t j = 0; j < n.kids.size(); ++j)
                    factors.push_back(j == i ? dk : n.kids[j]);
                terms.push_back(make_product(std::move(factors)));
            }
            return make_sum(std::move(terms));
        }
        case Kind::Sum: {
            std::vector<Expr> terms;
            for (const auto& k : n.kids) terms.push_back(diff(k, v));
            return make_sum(std::move(terms));
        }
    }
    throw std::logic_error("unreachable");
}

// Collect atoms of the given kinds occurring anywhere in e.
inline void collect_atoms(const Expr& e, const std::set<Kind>& kinds,
                          std::set<Expr>& out) {
    const Node& n = e.node();
    if (kinds.count(n.kind)) out.insert(e);
    for (const auto& k : n.kids) collect_atoms(k, kinds, out);
}

inline std::set<Expr> variables_of(const Expr& e) {
    std::set<Expr> out;
    collect_atoms(e, {Kind::Var, Kind::Jet, Kind::MixedJet}, out);
    return out;
}

inline int max_jet_order(const Expr& e) {
    std::set<Expr> js;
    collect_atoms(e, {Kind::Jet}, js);
    int m = -1;
    for (const auto& j : js) m = std::max(m, j.node().jx);
    return m;
}

inline bool has_mixed_jet(const Expr& e) {
    std::set<Expr> js;
    collect_atoms(e, {Kind::MixedJet}, js);
    return !js.empty();
}

inline bool contains(const Expr& e, const Expr& atom) {
    if (cmp(e, atom) == 0) return true;
    for (const auto& k : e.node().kids)
        if (contains(k, atom)) return true;
    return false;
}

// Total derivative with respect to the space variable:
//   D_x e = de/dx + sum_k u_(k+1) de/du_(k)  (+ mixed-jet prolongation).
inline Expr total_diff_space(const Expr& e, char space_var = 'x') {
    std::vector<Expr> terms{diff(e, var(space_var))};
    std::set<Expr> js;
    collect_atoms(e, {Kind::Jet, Kind::MixedJet}, js);
    for (const auto& j : js) {
        const Node& n = j.node();
        Expr up = n.kind == Kind::Jet ? u_jet(n.jx + 1)
                                      : mixed_jet(n.jt, n.jx + 1);
        Expr d = diff(e, j);
        if (!d.is_zero()) terms.push_back(make_product({up, d}));
    }
    return make_sum(std::move(terms));
}

// Unconstrained total t-derivative; introduces mixed jets.
inline Expr total_diff_t(const Expr& e) {
    std::vector<Expr> terms{diff(e, var('t'))};
    std::set<Expr> js;
    collect_atoms(e, {Kind::Jet, Kind::MixedJet}, js);
    for (const auto& j : js) {
        const Node& n = j.node();
        Expr up = n.kind == Kind::Jet ? mixed_jet(1, n.jx)
                                      : mixed_jet(n.jt + 1, n.jx);
        Expr d = diff(e, j);
        if (!d.is_zero()) terms.push_back(make_product({up, d}));
    }
    return make_sum(std::move(terms));
}

// ---------------------------------------------------------------------------
// Constrained-function rewrite rules (alpha_t = -alpha_xx/f and friends).

struct ConstraintRule {
    std::string fn_name;
    int arg_index = 0;  // the argument whose derivative is constrained
    Expr rhs;           // expression for the first derivative
};

using RuleSet = std::vector<ConstraintRule>;

namespace detail {
Expr apply_rules_impl(const Expr& e, const RuleSet& rules, int depth);

inline Expr rewrite_fn(const Node& n, const RuleSet& rules, int depth) {
    for (const auto& r : rules) {
        if (r.fn_name != n.name) continue;
        if (n.ords[static_cast<std::size_t>(r.arg_index)] < 1) continue;
        if (depth > limits().max_rule_depth)
            throw BudgetError("constraint rule rewrite exceeded depth budget "
                              "(max_rule_depth="
                              + std::to_string(limits().max_rule_depth) + ")");
        // d^o f = d^(o - e_c) applied to the constrained first derivative.
        Expr res = r.rhs;
        for (std::size_t j = 0; j < n.ords.size(); ++j) {
            int times = n.ords[j] - (static_cast<int>(j) == r.arg_index ? 1 : 0);
            for (int k = 0; k < times; ++k) {
                res = diff(res, n.kids[j]);
                res = apply_rules_impl(res, rules, depth + 1);
            }
        }
        return apply_rules_impl(res, rules, depth + 1);
    }
    Node m = n;
    return mk(std::move(m));
}

inline Expr apply_rules_impl(const Expr& e, const RuleSet& rules, int depth) {
    const Node& n = e.node();
    if (n.kids.empty()) return e;
    std::vector<Expr> kids;
    kids.reserve(n.kids.size());
    bool changed = false;
    for (const auto& k : n.kids) {
        Expr k2 = apply_rules_impl(k, rules, depth);
        changed = changed || cmp(k, k2) != 0;
        kids.push_back(std::move(k2));
    }
    if (n.kind == Kind::Fn) {
        Node m = n;
        m.kids = kids;
        return rewrite_fn(m, rules, depth);
    }
    if (!changed) return e;
    Node m = n;
    m.kids = std::move(kids);
    return simplify(mk(std::move(m)));
}
}  // namespace detail

inline Expr apply_rules(const Expr& e, const RuleSet& rules) {
    if (rules.empty()) return e;
    return simplify(detail::apply_rules_impl(e, rules, 0));
}

// Total t-derivative on solutions of u_t = rhs, with every u_(k),t replaced
// by D_x^k(rhs). rhs must involve only (t, x, u, u_x, u_xx).
inline Expr total_diff_t_on_solutions(const Expr& e, const Expr& rhs,
                                      const RuleSet& rules = {},
                                      char space_var = 'x') {
    if (has_mixed_jet(rhs))
        throw DomainError("malformed equation: rhs contains a t-derivative");
    if (has_mixed_jet(e))
        throw DomainError("expression contains mixed jets");
    std::vector<Expr> terms{diff(e, var('t'))};
    std::set<Expr> js;
    collect_atoms(e, {Kind::Jet}, js);
    std::map<int, Expr> dxk;  // cache of D_x^k rhs
    auto dx_rhs = [&](int k) {
        auto it = dxk.find(k);
        if (it != dxk.end()) return it->second;
        Expr r = rhs;
        for (int i = 0; i < k; ++i) r = total_diff_space(r, space_var);
        dxk.emplace(k, r);
        return r;
    };
    for (const auto& j : js) {
        Expr d = diff(e, j);
        if (d.is_zero()) continue;
        terms.push_back(make_product({dx_rhs(j.node().jx), d}));
    }
    return apply_rules(make_sum(std::move(terms)), rules);
}

// ---------------------------------------------------------------------------
// Substitution.

struct FnBinding {
    std::vector<Expr> formals;  // base variables
    Expr body;
};

struct Bindings {
    std::map<Expr, Expr> atoms;               // var/jet/constant -> value
    std::map<std::string, FnBinding> fns;     // function name -> closed form
    std::map<std::string, FnBinding> antiderivs;  // explicit antiderivatives
};

namespace detail {

// Try to integrate `body` (a polynomial/exp expression) in `formal`.
inline std::optional<Expr> auto_antideriv(const Expr& body,
                                          const Expr& formal) {
    Poly p = to_monos(body);
    std::vector<Expr> terms;
    for (const auto& m : p) {
        // split into formal-dependent part and the rest
        Expr dep = one();
        std::vector<Expr> indep{num(m.c)};
        for (const auto& [b, e] : m.pw) {
            Expr f = e.is_one() ? b : raw_power(b, e);
            if (contains(f, formal)) {
                if (!dep.is_one()) return std::nullopt;  // one factor only
                dep = f;
            } else {
                indep.push_back(f);
            }
        }
        Expr anti;
        if (dep.is_one()) {
            anti = formal;
        } else if (cmp(dep, formal) == 0) {
            anti = make_product({frac(1, 2), make_power(formal, num(2))});
        } else if (dep.kind() == Kind::Power &&
                   cmp(dep.node().kids[0], formal) == 0 &&
                   !contains(dep.node().kids[1], formal)) {
            Expr e1 = dep.node().kids[1] + one();
            if (e1.is_zero()) {
                anti = make_ln(formal);
            } else {
                anti = make_power(formal, e1) / e1;
            }
        } else if (dep.kind() == Kind::Fn && dep.node().ords.size() == 1 &&
                   dep.node().ords[0] == 0 &&
                   cmp(dep.node().kids[0], formal) == 0) {
            anti = antideriv(dep.node().name, formal);
        } else if (dep.kind() == Kind::Exp) {
            Expr arg = dep.node().kids[0];
            Expr k = diff(arg, formal);
            if (!k.is_zero() && !contains(k, formal)) {
                anti = dep / k;  // integral of exp(k*s+c)
            } else {
                return std::nullopt;
            }
        } else {
            return std::nullopt;
        }
        indep.push_back(anti);
        terms.push_back(make_product(std::move(indep)));
    }
    return make_sum(std::move(terms));
}

inline Expr substitute_impl(const Expr& e, const Bindings& b,
                            std::set<std::string>& active) {
    auto it = b.atoms.find(e);
    // Atom values are taken literally (simultaneous substitution).
    if (it != b.atoms.end()) return it->second;
    const Node& n = e.node();
    if (n.kind == Kind::Fn) {
        auto f = b.fns.find(n.name);
        if (f != b.fns.end()) {
            if (active.count(n.name))
                throw std::invalid_argument("cyclic bindings through " +
                                            n.name);
            if (f->second.formals.size() != n.kids.size())
                throw std::invalid_argument("arity mismatch in binding of " +
                                            n.name);
            Expr body = f->second.body;
            for (std::size_t i = 0; i < n.kids.size(); ++i)
                for (int k = 0; k < n.ords[i]; ++k)
                    body = diff(body, f->second.formals[i]);
            Bindings argsub;
            for (std::size_t i = 0; i < n.kids.size(); ++i)
                argsub.atoms[f->second.formals[i]] =
                    substitute_impl(n.kids[i], b, active);
            std::set<std::string> none;
            Expr expanded = substitute_impl(body, argsub, none);
            active.insert(n.name);
            Expr out = substitute_impl(expanded, b, active);
            active.erase(n.name);
            return out;
        }
    }
    if (n.kind == Kind::Antideriv) {
        Expr arg = substitute_impl(n.kids[0], b, active);
        const FnBinding* fb = nullptr;
        Expr anti;
        auto a = b.antiderivs.find(n.name);
        if (a != b.antiderivs.end()) {
            fb = &a->second;
            anti = fb->body;
        } else {
            auto f = b.fns.find(n.name);
            if (f == b.fns.end()) return antideriv(n.name, arg);
            fb = &f->second;
            auto integ = auto_antideriv(fb->body, fb->formals[0]);
            if (!integ)
                throw std::invalid_argument(
                    "binding of " + n.name +
                    " needs an explicit antiderivative (Int[" + n.name +
                    "]): cannot integrate the bound form");
            anti = *integ;
        }
        if (active.count(n.name))
            throw std::invalid_argument("cyclic bindings through " + n.name);
        Bindings argsub;
        argsub.atoms[fb->formals[0]] = arg;
        std::set<std::string> none;
        Expr expanded = substitute_impl(anti, argsub, none);
        active.insert(n.name);
        Expr out = substitute_impl(expanded, b, active);
        active.erase(n.name);
        return out;
    }
    if (n.kids.empty()) return e;
    Node m = n;
    m.kids.clear();
    for (const auto& k : n.kids)
        m.kids.push_back(substitute_impl(k, b, active));
    return simplify(mk(std::move(m)));
}

}  // namespace detail

// Substitution followed by simplification. Atom bindings are simultaneous:
// their values are inserted literally. Function bodies are expanded
// recursively (so a binding of B may refer to a bound A); genuine cycles
// among function bindings raise invalid_argument.
inline Expr substitute(const Expr& e, const Bindings& b) {
    std::set<std::string> active;
    return simplify(detail::substitute_impl(e, b, active));
}

// ---------------------------------------------------------------------------

// Returns the constant value if e does not depend on any base/jet variable.
inline std::optional<Expr> is_constant(const Expr& e) {
    Expr s = simplify(e);
    for (const auto& v : variables_of(s)) {
        if (!diff(s, v).is_zero()) return std::nullopt;
    }
    return s;
}

}  // namespace dce
