#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "qmn/chains.hpp"
#include "qmn/qdist.hpp"
#include "qmn/rational.hpp"

namespace qmn::exact {

using chains::Occupation;
using chains::Positions;
using chains::RatSchedule;
using chains::Weyl;

/// Complete enumeration of Y^N_k = {y in Z_{>=0}^{N+1} : sum y_i = k} in
/// lexicographic order on (y_0,...,y_N), with the index map both ways.
struct StateSpace {
  int N = 0;
  long k = 0;
  std::vector<Occupation> states;
  std::map<Occupation, int> index;

  int at(const Occupation& y) const {
    auto it = index.find(y);
    if (it == index.end()) throw RangeError("StateSpace: state not enumerated");
    return it->second;
  }
};

StateSpace enumerate_states(int N, long k, long cap = 2000000);

/// Sparse row-stochastic transition matrix for one Boson step (the paper's
/// operator order [A]_1...[A]_N; under parallel semantics the product is
/// order-independent, which a test checks separately).
struct BosonMatrix {
  const StateSpace* space = nullptr;
  std::vector<std::vector<std::pair<int, Rat>>> rows;
};

BosonMatrix boson_matrix(const StateSpace& space, const RatSchedule& sched,
                         long t, bool reversed_order = false);

using ExactVector = std::vector<Rat>;

/// h(t) = P_t ... P_1 h0, exact rationals throughout.
ExactVector evolve_true(const StateSpace& space, ExactVector h0, long t,
                        const RatSchedule& sched);

/// H(x;y) = prod_{i>=1} q^{y_i (x_i + i)}, with H = 0 whenever y_0 > 0.
Rat h_functional(const Positions& x, const Occupation& y, const Rat& q);

/// E[prod_i q^{x_{n_i}(t)+n_i}] for TASEP step initial data, via the dual
/// finite Boson chain with h0 = 1_{y_0=0}. Exact rational.
Rat qmoment_oracle(const Weyl& nvec, long t, const RatSchedule& sched,
                   long cap = 2000000);

/// Boundary coefficients alpha+beta+gamma = 1.
struct BoundaryCoeffs {
  Rat alpha, beta, gamma;
};
BoundaryCoeffs boundary_coeffs(const Rat& q, const Rat& nu);

// ---------------------------------------------------------------------------
// Intertwining check: residual of (P_t^TASEP H)(x,y) - (H (P_t^Boson)^T)(x,y)
// over a truncated grid of (x, y) pairs.
// ---------------------------------------------------------------------------

struct IntertwineOptions {
  int N = 2;
  long k_max = 3;
  long window = 8;      // x_i range [-window, window]
  long t = 1;           // which transition matrix P_t
  long x_stride = 1;    // take every x_stride-th x configuration
  double tail_tol = 1e-13;  // float mode: certified tail target per factor
};

struct IntertwineReport {
  double max_residual = 0.0;
  bool exact_zero = true;  // rational mode only
  long pairs = 0;
};

/// Rational mode; the first particle's infinite sum enters in closed form
/// (Proposition-level identity), everything else is finite and exact.
IntertwineReport verify_intertwining_exact(const RatSchedule& sched,
                                           const IntertwineOptions& opt);

/// Independent float mode; the infinite sum is truncated under a certified
/// geometric tail bound (throws TailBoundError if the bound cannot be met).
IntertwineReport verify_intertwining_float(const chains::Schedule& sched,
                                           const IntertwineOptions& opt);

// ---------------------------------------------------------------------------
// Quadratic-algebra binomial expansion: with BA = alpha AA + beta AB +
// gamma BB and p = (mu-nu)/(1-nu), test whether
//   (pA + (1-p)B)^m - sum_j phi(j|m) A^j B^{m-j}
// lies in the degree-m slice of the two-sided ideal generated by the
// relation, by exact-rational rank comparison.
// ---------------------------------------------------------------------------

bool verify_binexp(int m, const RatParams& params, int m_cap = 12);

}  // namespace qmn::exact
