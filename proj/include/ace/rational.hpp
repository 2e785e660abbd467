#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <charconv>
#include <stdexcept>
#include <string>

namespace ace {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// cpp_int division truncates toward zero; lattice math needs floor semantics
// so that negative cumulative costs land on the correct grid point.
inline Int floor_div(const Int& a, const Int& b) {
  if (b == 0) throw std::domain_error("floor_div by zero");
  Int q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

inline Int rat_floor(const Rat& r) {
  return floor_div(numerator(r), denominator(r));
}

inline Int rat_ceil(const Rat& r) {
  return -rat_floor(-r);
}

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

// cpp_int's string constructor honours C-style base prefixes, so a leading
// zero flips it into octal ("025" -> 21). Force base 10: validate the digits
// and drop redundant leading zeros before handing the string over.
inline Int parse_decimal_int(const std::string& t) {
  size_t i = 0;
  bool neg = false;
  if (i < t.size() && (t[i] == '+' || t[i] == '-')) neg = (t[i++] == '-');
  if (i >= t.size()) throw std::invalid_argument("empty integer: '" + t + "'");
  for (size_t j = i; j < t.size(); ++j)
    if (!std::isdigit(static_cast<unsigned char>(t[j])))
      throw std::invalid_argument("not an integer: '" + t + "'");
  while (i + 1 < t.size() && t[i] == '0') ++i;
  Int v(t.substr(i));
  return neg ? -v : v;
}

// Parses "p/q", integer, or decimal strings (optional exponent) exactly.
inline Rat parse_rational(const std::string& text) {
  auto fail = [&]() -> Rat {
    throw std::invalid_argument("not a rational: '" + text + "'");
  };
  std::string s = text;
  // trim ascii whitespace
  size_t b = s.find_first_not_of(" \t\r\n");
  size_t e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return fail();
  s = s.substr(b, e - b + 1);

  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string ps = s.substr(0, slash), qs = s.substr(slash + 1);
    if (ps.empty() || qs.empty()) return fail();
    try {
      Int p = parse_decimal_int(ps), q = parse_decimal_int(qs);
      if (q == 0) return fail();
      return Rat(p, q);
    } catch (const std::exception&) {
      return fail();
    }
  }

  // decimal: [+-] digits [. digits] [ (e|E) [+-] digits ]
  size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = (s[i++] == '-');
  std::string digits;
  long long frac_len = 0, exp10 = 0;
  bool any = false;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    digits += s[i++];
    any = true;
  }
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits += s[i++];
      ++frac_len;
      any = true;
    }
  }
  if (!any) return fail();
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) eneg = (s[i++] == '-');
    if (i >= s.size()) return fail();
    long long ev = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      ev = ev * 10 + (s[i++] - '0');
      if (ev > 1000000) return fail();
    }
    exp10 = eneg ? -ev : ev;
  }
  if (i != s.size()) return fail();

  Int mant = digits.empty() ? Int(0) : parse_decimal_int(digits);
  if (neg) mant = -mant;
  long long net = exp10 - frac_len;
  Int num = mant, den = 1;
  if (net >= 0)
    num *= pow(Int(10), static_cast<unsigned>(net));
  else
    den = pow(Int(10), static_cast<unsigned>(-net));
  return Rat(num, den);
}

// Exact decimal image of a double via shortest round-trip formatting, so raw
// JSON floats keep the value their author typed.
inline Rat rational_from_double(double d) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  if (ec != std::errc())
    throw std::invalid_argument("unrepresentable double");
  return parse_rational(std::string(buf, ptr));
}

inline std::string rat_to_string(const Rat& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

inline Int lcm_int(const Int& a, const Int& b) {
  using boost::multiprecision::gcd;
  if (a == 0 || b == 0) return 0;
  return abs(a / gcd(a, b) * b);
}

}  // namespace ace
