#pragma once

#include <gmpxx.h>

#include <string>

#include "qmn/errors.hpp"

namespace qmn {

using Rat = mpq_class;

/// q^e for integer e (negative allowed; q != 0 required when e < 0).
inline Rat rat_pow(const Rat& q, long e) {
  Rat r;
  if (e >= 0) {
    mpz_pow_ui(r.get_num().get_mpz_t(), q.get_num().get_mpz_t(),
               static_cast<unsigned long>(e));
    mpz_pow_ui(r.get_den().get_mpz_t(), q.get_den().get_mpz_t(),
               static_cast<unsigned long>(e));
  } else {
    if (q == 0) throw DomainError("rat_pow: 0 to negative power");
    mpz_pow_ui(r.get_num().get_mpz_t(), q.get_den().get_mpz_t(),
               static_cast<unsigned long>(-e));
    mpz_pow_ui(r.get_den().get_mpz_t(), q.get_num().get_mpz_t(),
               static_cast<unsigned long>(-e));
  }
  r.canonicalize();
  return r;
}

inline double to_double(const Rat& r) { return r.get_d(); }

/// Parse "3/7", "0.25", "2" into an exact rational.
inline Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rat r(s);
    r.canonicalize();
    return r;
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) {
    Rat r(s);
    r.canonicalize();
    return r;
  }
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  bool neg = false;
  if (!digits.empty() && (digits[0] == '+' || digits[0] == '-')) {
    neg = digits[0] == '-';
    digits = digits.substr(1);
  }
  if (digits.empty()) throw DomainError("parse_rat: malformed number '" + s + "'");
  mpz_class num(digits, 10);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, s.size() - dot - 1);
  Rat r(neg ? -num : num, den);
  r.canonicalize();
  return r;
}

}  // namespace qmn
