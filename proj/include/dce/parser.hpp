#pragma once

// Text syntax for expressions: a recursive-descent parser and a formatter
// that round-trip through the canonical form. See docs/grammar.ebnf.

#include "expr.hpp"

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

namespace dce {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos + 1) +
                             ")"),
          position(pos) {}
    std::size_t position;  // 0-based offset into the input
};

namespace detail {

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    Expr parse() {
        Expr e = parse_sum();
        skip_ws();
        if (pos_ != s_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    bool eat(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c))
            throw ParseError(std::string("expected '") + c + "'", pos_);
    }

    Expr parse_sum() {
        Expr e = parse_term();
        while (true) {
            char c = peek();
            if (c == '+') {
                ++pos_;
                e = e + parse_term();
            } else if (c == '-') {
                ++pos_;
                e = e - parse_term();
            } else {
                return e;
            }
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        while (true) {
            char c = peek();
            if (c == '*') {
                ++pos_;
                e = e * parse_unary();
            } else if (c == '/') {
                ++pos_;
                e = e / parse_unary();
            } else {
                return e;
            }
        }
    }

    // Unary minus binds looser than '^': -x^2 is -(x^2).
    Expr parse_unary() {
        if (peek() == '-') {
            ++pos_;
            return -parse_unary();
        }
        if (peek() == '+') {
            ++pos_;
            return parse_unary();
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_postfix();
        if (peek() == '^') {
            ++pos_;
            // right-associative; allow a signed exponent
            Expr e = parse_unary();
            return make_power(base, e);
        }
        return base;
    }

    Expr parse_postfix() {
        Expr e = parse_primary();
        while (peek() == '\'') {
            if (e.kind() != Kind::Fn || e.node().kids.size() != 1)
                throw ParseError(
                    "' applies to a one-argument function only", pos_);
            ++pos_;
            std::vector<int> ords = e.node().ords;
            ords[0] += 1;
            e = fn(e.node().name, e.node().kids, ords);
        }
        return e;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= s_.size())
            throw ParseError("unexpected end of input", pos_);
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_ident();
        throw ParseError("unexpected character", pos_);
    }

    Expr parse_number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        Integer ip(s_.substr(start, pos_ - start));
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            std::size_t fs = pos_;
            while (pos_ < s_.size() &&
                   std::isdigit(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            if (pos_ == fs)
                throw ParseError("digits expected after decimal point", pos_);
            std::string frac = s_.substr(fs, pos_ - fs);
            Integer den = 1;
            for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
            return num(Rational(ip * den + Integer(frac), den));
        }
        return num(Rational(ip));
    }

    std::string read_name() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                s_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) throw ParseError("identifier expected", pos_);
        return s_.substr(start, pos_ - start);
    }

    Expr parse_ident() {
        std::size_t start = pos_;
        std::string name = read_name();

        if (name == "Int") {
            expect('[');
            std::string fname = read_name();
            expect(']');
            expect('(');
            Expr arg = parse_sum();
            expect(')');
            return antideriv(fname, arg);
        }
        if (name == "D") {
            expect('[');
            std::string fname = read_name();
            std::vector<int> ords;
            while (eat(',')) {
                skip_ws();
                std::size_t np = pos_;
                while (pos_ < s_.size() &&
                       std::isdigit(static_cast<unsigned char>(s_[pos_])))
                    ++pos_;
                if (pos_ == np)
                    throw ParseError("derivative order expected", pos_);
                ords.push_back(std::stoi(s_.substr(np, pos_ - np)));
            }
            expect(']');
            expect('(');
            std::vector<Expr> args{parse_sum()};
            while (eat(',')) args.push_back(parse_sum());
            expect(')');
            if (args.size() != ords.size())
                throw ParseError("derivative orders do not match arguments",
                                 start);
            return fn(fname, std::move(args), std::move(ords));
        }

        // jet variables: u, u_x, u_xx, ..., u_t, u_tx, ...
        if (name == "u") return u_jet(0);
        if (name.size() > 2 && name[0] == 'u' && name[1] == '_') {
            int nt = 0, nx = 0;
            char space = 0;
            for (std::size_t i = 2; i < name.size(); ++i) {
                char ch = name[i];
                if (ch == 't') {
                    ++nt;
                } else if (ch == 'x' || ch == 'y') {
                    if (space && space != ch)
                        throw ParseError("mixed space letters in jet token",
                                         start);
                    space = ch;
                    ++nx;
                } else {
                    throw ParseError("bad jet token", start);
                }
            }
            return nt == 0 ? u_jet(nx) : mixed_jet(nt, nx);
        }

        // name'(arg): derivative order given by apostrophes before the
        // argument list
        int primes = 0;
        while (peek() == '\'') {
            ++pos_;
            ++primes;
        }
        if (primes > 0) {
            if (peek() != '(')
                throw ParseError("expected argument list after '", pos_);
            ++pos_;
            Expr arg = parse_sum();
            expect(')');
            return fn(name, {arg}, {primes});
        }

        // builtin functions
        if (peek() == '(') {
            ++pos_;
            Expr arg = parse_sum();
            if (name == "exp" || name == "ln" || name == "abs" ||
                name == "sin" || name == "cos" || name == "atan" ||
                name == "sqrt") {
                expect(')');
                if (name == "exp") return make_exp(arg);
                if (name == "ln") return make_ln(arg);
                if (name == "abs") return make_abs(arg);
                if (name == "sin") return make_sin(arg);
                if (name == "cos") return make_cos(arg);
                if (name == "atan") return make_atan(arg);
                return make_power(arg, frac(1, 2));
            }
            std::vector<Expr> args{arg};
            while (eat(',')) args.push_back(parse_sum());
            expect(')');
            return fn(name, std::move(args));
        }

        if (name == "t" || name == "x" || name == "y") return var(name[0]);
        return sym(name);
    }
};

}  // namespace detail

inline Expr parse_expr(const std::string& s) {
    return detail::Parser(s).parse();
}

// ---------------------------------------------------------------------------
// Formatting. space_var controls the letter used for jet tokens (u_x vs u_y).

namespace detail {

// precedence levels: 0 sum, 1 product, 2 unary minus, 3 power, 4 atom
std::string fmt(const Expr& e, int parent_prec, char space_var);

inline std::string paren_if(bool cond, const std::string& s) {
    return cond ? "(" + s + ")" : s;
}

inline bool mono_is_negative(const Expr& e) {
    if (e.is_rational()) return e.rat() < 0;
    if (e.kind() == Kind::Product && e.node().kids[0].is_rational())
        return e.node().kids[0].rat() < 0;
    return false;
}

inline std::string fmt_fn(const Node& n, char space_var) {
    std::ostringstream os;
    bool total = 0;
    int tot = 0;
    for (int o : n.ords) tot += o;
    (void)total;
    if (tot == 0 || (n.ords.size() == 1 && n.ords[0] <= 3)) {
        os << n.name;
        for (int k = 0; k < (n.ords.size() == 1 ? n.ords[0] : 0); ++k)
            os << '\'';
    } else {
        os << "D[" << n.name;
        for (int o : n.ords) os << ',' << o;
        os << ']';
    }
    os << '(';
    for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) os << ',';
        os << fmt(n.kids[i], 0, space_var);
    }
    os << ')';
    return os.str();
}

inline std::string fmt(const Expr& e, int parent_prec, char space_var) {
    const Node& n = e.node();
    switch (n.kind) {
        case Kind::Rational: {
            std::string s = to_string(n.rat);
            bool needs = (n.rat < 0 && parent_prec >= 1) ||
                         (!dce::is_integer(n.rat) && parent_prec >= 3);
            return paren_if(needs, s);
        }
        case Kind::Constant:
            return n.name;
        case Kind::Var:
            return std::string(1, n.var);
        case Kind::Jet: {
            if (n.jx == 0) return "u";
            return "u_" + std::string(static_cast<std::size_t>(n.jx),
                                      space_var);
        }
        case Kind::MixedJet:
            return "u_" + std::string(static_cast<std::size_t>(n.jt), 't') +
                   std::string(static_cast<std::size_t>(n.jx), space_var);
        case Kind::Fn:
            return fmt_fn(n, space_var);
        case Kind::Antideriv:
            return "Int[" + n.name + "](" + fmt(n.kids[0], 0, space_var) + ")";
        case Kind::Exp:
            return "exp(" + fmt(n.kids[0], 0, space_var) + ")";
        case Kind::Ln:
            return "ln(" + fmt(n.kids[0], 0, space_var) + ")";
        case Kind::Abs:
            return "abs(" + fmt(n.kids[0], 0, space_var) + ")";
        case Kind::Sin:
            return "sin(" + fmt(n.kids[0], 0, space_var) + ")";
        case Kind::Cos:
            return "cos(" + fmt(n.kids[0], 0, space_var) + ")";
        case Kind::Atan:
            return "atan(" + fmt(n.kids[0], 0, space_var) + ")";
        case Kind::Power: {
            std::string b = fmt(n.kids[0], 3, space_var);
            std::string x = fmt(n.kids[1], 3, space_var);
            if (mono_is_negative(n.kids[1]) && x[0] != '(') x = "(" + x + ")";
            return paren_if(parent_prec > 3, b + "^" + x);
        }
        case Kind::Product: {
            std::ostringstream os;
            std::size_t i = 0;
            bool neg = false;
            if (n.kids[0].is_rational()) {
                Rational c = n.kids[0].rat();
                if (c < 0) {
                    neg = true;
                    c = -c;
                }
                if (c != 1) {
                    os << to_string(c);
                    i = 1;
                } else {
                    i = 1;
                    if (n.kids.size() == 2 && !neg) {
                        // shouldn't happen in canonical form
                    }
                }
                if (c == 1 && n.kids.size() >= 2) {
                    // skip the unit coefficient entirely
                }
            }
            bool first = os.str().empty();
            for (; i < n.kids.size(); ++i) {
                if (!first) os << "*";
                os << fmt(n.kids[i], 1, space_var);
                first = false;
            }
            std::string body = os.str();
            if (neg) {
                return paren_if(parent_prec >= 1, "-" + body);
            }
            return paren_if(parent_prec > 1, body);
        }
        case Kind::Sum: {
            std::ostringstream os;
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                const Expr& k = n.kids[i];
                if (i == 0) {
                    os << fmt(k, 0, space_var);
                } else if (mono_is_negative(k)) {
                    os << " - " << fmt(-k, 1, space_var);
                } else {
                    os << " + " << fmt(k, 1, space_var);
                }
            }
            return paren_if(parent_prec >= 1, os.str());
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace detail

inline std::string format_expr(const Expr& e, char space_var = 'x') {
    return detail::fmt(e, 0, space_var);
}

}  // namespace dce
