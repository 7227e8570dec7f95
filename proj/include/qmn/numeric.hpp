#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qmn/errors.hpp"

namespace qmn {

using Cplx = std::complex<double>;

/// Integer power by repeated squaring; e may be negative.
template <class T>
T ipow(T base, long e) {
  if (e < 0) return T(1) / ipow(base, -e);
  T r(1);
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

/// det(A) for a dense complex matrix, in-place LU with partial pivoting.
/// A is row-major n x n and is destroyed.
inline Cplx lu_det(std::vector<Cplx>& a, int n) {
  Cplx det(1.0, 0.0);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    double best = std::abs(a[c * n + c]);
    for (int r = c + 1; r < n; ++r) {
      double v = std::abs(a[r * n + c]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return Cplx(0.0, 0.0);
    if (piv != c) {
      for (int j = c; j < n; ++j) std::swap(a[piv * n + j], a[c * n + j]);
      det = -det;
    }
    det *= a[c * n + c];
    const Cplx inv = 1.0 / a[c * n + c];
    for (int r = c + 1; r < n; ++r) {
      const Cplx f = a[r * n + c] * inv;
      if (f == Cplx(0.0, 0.0)) continue;
      for (int j = c + 1; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
      a[r * n + c] = Cplx(0.0, 0.0);
    }
  }
  return det;
}

/// Regularized upper incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a).
/// Series for x < a+1, Lentz continued fraction otherwise.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw DomainError("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

/// Chi-square upper tail p-value with dof degrees of freedom.
inline double chi2_pvalue(double stat, double dof) {
  return gamma_q(0.5 * dof, 0.5 * stat);
}

inline bool finite(const Cplx& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

}  // namespace qmn
