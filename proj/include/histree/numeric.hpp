#pragma once

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace histree {

using BigInt = boost::multiprecision::cpp_int;
using Ratio = boost::multiprecision::cpp_rational;

inline std::string to_string(const BigInt& x) { return x.str(); }

inline std::string to_string(const Ratio& r) {
  if (boost::multiprecision::denominator(r) == 1) return boost::multiprecision::numerator(r).str();
  return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

// Parses "p", "-p", "p/q" or a finite decimal like "2.5". Returns false on anything else.
bool parse_ratio(const std::string& text, Ratio& out);

}  // namespace histree
