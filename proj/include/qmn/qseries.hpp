#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qmn/errors.hpp"
#include "qmn/numeric.hpp"
#include "qmn/rational.hpp"

namespace qmn::qseries {

/// q-Pochhammer symbol (a;q)_n = prod_{i=0}^{n-1} (1 - a q^i).
/// Standard n-factor convention; (a;q)_0 = 1 exactly.
template <class T>
T qpoch(const T& a, const T& q, long n) {
  if (n < 0) throw DomainError("qpoch: n must be >= 0");
  T r(1);
  T aq = a;
  for (long i = 0; i < n; ++i) {
    r *= (T(1) - aq);
    aq *= q;
  }
  return r;
}

inline void require_q(double q) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("q must lie in [0,1)");
}

/// (a;q)_inf as a truncated product. The cutoff keeps the neglected tail's
/// relative perturbation below tol: stop at the first i with
/// |a| q^i < tol*(1-q), then take 8 more guard factors.
inline Cplx qpoch_inf(Cplx a, double q, double tol = 1e-15) {
  require_q(q);
  if (!(tol > 0.0)) throw DomainError("qpoch_inf: tol must be positive");
  Cplx r(1.0, 0.0);
  Cplx aq = a;
  const double cut = tol * (1.0 - q);
  int guard = 8;
  for (int i = 0; i < 100000; ++i) {
    if (std::abs(aq) < cut) {
      if (guard-- == 0) break;
    }
    r *= (Cplx(1.0, 0.0) - aq);
    aq *= q;
  }
  return r;
}

inline double qpoch_inf(double a, double q, double tol = 1e-15) {
  return qpoch_inf(Cplx(a, 0.0), q, tol).real();
}

/// Basic q-hypergeometric series 2phi1(a,b;c;q,z).
/// Terminates when a = q^{-n}; otherwise requires |z| < 1.
Cplx phi21(Cplx a, Cplx b, Cplx c, double q, Cplx z, double tol = 1e-14);

/// Terminating 2phi1(q^{-n}, b; c; q, z) in exact rational arithmetic.
Rat phi21_terminating(long n, const Rat& b, const Rat& c, const Rat& q,
                      const Rat& z);

/// k_q! = (q;q)_k / (1-q)^k (classical q-deformed factorial; equals 1 at q=0).
double qfactorial(long k, double q);
Rat qfactorial(long k, const Rat& q);

// ---------------------------------------------------------------------------
// Identity self-test suite: Gasper-Rahman (1.2.30)-(1.2.32), Heine's q-Gauss
// summation with its terminating degeneration, and the finite binomial-type
// expansion of (a;q)_y.
// ---------------------------------------------------------------------------

struct IdentityResult {
  std::string name;
  double max_residual = 0.0;
  long evaluations = 0;
  long domain_rejections = 0;  // tuples violating preconditions (recorded)
};

struct IdentityReport {
  std::vector<IdentityResult> results;
  double max_residual() const;
  bool within(double tol) const { return max_residual() <= tol; }
};

struct IdentityTuple {
  double a = 0.2, b = 0.3, c = 0.1;
  long n = 3, k = 1, y = 4;
};

/// Evaluates every identity at each tuple; residuals are |LHS-RHS| relative
/// to max(1,|RHS|). Tuples outside an identity's domain are counted, not fatal.
IdentityReport identity_suite(double q, const std::vector<IdentityTuple>& pts);

/// Deterministic tuple grid for the suite (seeded, reproducible).
std::vector<IdentityTuple> default_tuples(std::size_t count,
                                          std::uint64_t seed = 12345);

}  // namespace qmn::qseries
