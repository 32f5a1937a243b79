#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace dce {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(long long num, long long den = 1) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    return Rational(Integer(num)) / Integer(den);
}

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

inline long long to_long(const Rational& r) {
    if (!is_integer(r)) throw std::domain_error("rational is not an integer");
    return static_cast<long long>(numerator(r));
}

inline std::string to_string(const Rational& r) {
    if (is_integer(r)) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace dce
