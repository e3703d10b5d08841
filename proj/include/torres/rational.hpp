#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace torres {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(const Int& num, const Int& den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  Rat q(num, den);
  q.canonicalize();
  return q;
}

// Accepts "p" or "p/q" with optional leading '-'.
inline Rat parse_rat(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rat(Int(s));
    Int num(s.substr(0, slash));
    Int den(s.substr(slash + 1));
    return make_rat(num, den);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("bad rational literal: " + s);
  }
}

inline std::string rat_str(const Rat& q) {
  std::string s = q.get_num().get_str();
  if (q.get_den() != 1) s += "/" + q.get_den().get_str();
  return s;
}

inline double to_double(const Rat& q) { return q.get_d(); }

// Exact lift of the binary double value.
inline Rat rat_of_double(double x) {
  Rat q(x);
  q.canonicalize();
  return q;
}

inline int rat_sign(const Rat& q) { return sgn(q); }

inline Rat rat_abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

inline Int binomial(unsigned long n, unsigned long k) {
  Int b;
  mpz_bin_uiui(b.get_mpz_t(), n, k);
  return b;
}

inline Int int_pow(const Int& b, unsigned long e) {
  Int p;
  mpz_pow_ui(p.get_mpz_t(), b.get_mpz_t(), e);
  return p;
}

inline Rat rat_pow(const Rat& b, long e) {
  if (e == 0) return Rat(1);
  unsigned long a = e < 0 ? -(unsigned long)e : (unsigned long)e;
  Rat p = make_rat(int_pow(b.get_num(), a), int_pow(b.get_den(), a));
  if (e < 0) {
    if (p == 0) throw std::domain_error("zero to negative power");
    p = 1 / p;
  }
  return p;
}

}  // namespace torres
