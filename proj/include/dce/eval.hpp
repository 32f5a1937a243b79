#pragma once

// Floating-point evaluation of symbolic expressions against concrete values
// for variables, jets, named constants and abstract functions.

#include "expr.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace dce {

struct NumBindings {
    std::map<Expr, double> atoms;  // vars / jets / mixed jets / constants
    // name -> value of the derivative D[ords] at the given argument values
    std::map<std::string,
             std::function<double(const std::vector<double>&,
                                  const std::vector<int>&)>>
        fns;
    // name -> antiderivative value at a point
    std::map<std::string, std::function<double(double)>> antiderivs;
};

inline double eval_num(const Expr& e, const NumBindings& b) {
    auto it = b.atoms.find(e);
    if (it != b.atoms.end()) return it->second;
    const Node& n = e.node();
    switch (n.kind) {
        case Kind::Rational:
            return static_cast<double>(
                static_cast<long double>(numerator(n.rat).convert_to<double>()) /
                static_cast<long double>(denominator(n.rat).convert_to<double>()));
        case Kind::Constant:
        case Kind::Var:
        case Kind::Jet:
        case Kind::MixedJet:
            throw std::invalid_argument("no numeric value bound for " +
                                        std::string(n.kind == Kind::Constant
                                                        ? n.name
                                                        : "a variable"));
        case Kind::Fn: {
            auto f = b.fns.find(n.name);
            if (f == b.fns.end())
                throw std::invalid_argument("no numeric binding for function " +
                                            n.name);
            std::vector<double> args;
            for (const auto& k : n.kids) args.push_back(eval_num(k, b));
            return f->second(args, n.ords);
        }
        case Kind::Antideriv: {
            auto a = b.antiderivs.find(n.name);
            if (a == b.antiderivs.end())
                throw std::invalid_argument(
                    "no numeric binding for antiderivative of " + n.name);
            return a->second(eval_num(n.kids[0], b));
        }
        case Kind::Exp: return std::exp(eval_num(n.kids[0], b));
        case Kind::Ln: return std::log(eval_num(n.kids[0], b));
        case Kind::Abs: return std::fabs(eval_num(n.kids[0], b));
        case Kind::Sin: return std::sin(eval_num(n.kids[0], b));
        case Kind::Cos: return std::cos(eval_num(n.kids[0], b));
        case Kind::Atan: return std::atan(eval_num(n.kids[0], b));
        case Kind::Power: {
            double base = eval_num(n.kids[0], b);
            const Expr& ex = n.kids[1];
            if (ex.is_integer()) {
                return std::pow(base, static_cast<double>(to_long(ex.rat())));
            }
            return std::pow(base, eval_num(ex, b));
        }
        case Kind::Product: {
            double p = 1.0;
            for (const auto& k : n.kids) p *= eval_num(k, b);
            return p;
        }
        case Kind::Sum: {
            double s = 0.0;
            for (const auto& k : n.kids) s += eval_num(k, b);
            return s;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace dce
