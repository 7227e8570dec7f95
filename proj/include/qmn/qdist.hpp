#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "qmn/errors.hpp"
#include "qmn/numeric.hpp"
#include "qmn/qseries.hpp"
#include "qmn/rational.hpp"
#include "qmn/rng.hpp"

namespace qmn {

/// The scalars (q, mu, nu) with the standing constraint 0 <= nu <= mu < 1,
/// 0 <= q < 1.
template <class T>
struct BasicParams {
  T q{}, mu{}, nu{};
  void validate() const {
    if (!(T(0) <= q && q < T(1)))
      throw DomainError("params: q must lie in [0,1)");
    if (!(T(0) <= nu && nu <= mu && mu < T(1)))
      throw DomainError("params: need 0 <= nu <= mu < 1");
  }
};

using Params = BasicParams<double>;
using RatParams = BasicParams<Rat>;

inline Params to_double(const RatParams& p) {
  return {p.q.get_d(), p.mu.get_d(), p.nu.get_d()};
}

/// Jump support bound: finite m >= 0 or the distinguished infinity.
struct JumpSupport {
  long m = 0;
  static constexpr long kInf = -1;
  bool infinite() const { return m == kInf; }
  static JumpSupport inf() { return {kInf}; }
  static JumpSupport finite(long m) {
    if (m < 0) throw DomainError("JumpSupport: finite m must be >= 0");
    return {m};
  }
};

namespace qdist {

/// phi_{q,mu,nu}(j|m), finite m. Exact when T is rational.
/// The mu^j (nu/mu;q)_j prefactor is evaluated as prod_{i<j}(mu - nu q^i),
/// which also covers mu = 0.
template <class T>
T phi_pmf(long j, long m, const BasicParams<T>& p) {
  p.validate();
  if (j < 0 || m < 0) throw RangeError("phi_pmf: negative index");
  if (j > m) throw RangeError("phi_pmf: j exceeds finite support m");
  using qseries::qpoch;
  T num(1);
  T nuq = p.nu;
  for (long i = 0; i < j; ++i) {
    num *= (p.mu - nuq);
    nuq *= p.q;
  }
  num *= qpoch(p.mu, p.q, m - j);
  const T den = qpoch(p.nu, p.q, m);
  const T qbinom = qpoch(p.q, p.q, m) /
                   (qpoch(p.q, p.q, j) * qpoch(p.q, p.q, m - j));
  return num / den * qbinom;
}

/// phi_{q,mu,nu}(j|+inf). Float only (infinite products).
double phi_pmf_inf(long j, const Params& p);

/// Dispatch on JumpSupport (float).
double phi_pmf(long j, JumpSupport m, const Params& p);

/// log phi(j|m) for large finite m, summed in log space. All factors are
/// nonnegative under the standing constraints; returns -inf at mass-0 points.
double phi_log_pmf(long j, long m, const Params& p);

/// Certified bound on the upper tail sum_{j>J} phi(j|inf) q^{j*y}:
/// the pmf ratio phi(j+1|inf)/phi(j|inf) <= mu/(1-q^{J+2}) =: r for j > J,
/// so tail <= phi(J|inf) * q^{(J+1)y} * r/(1-r) once r < 1.
double inf_tail_bound(long J, long y, const Params& p);

/// S_{m,y} = sum_{j<=m} phi(j|m) q^{j y}.
template <class T>
T duality_sum(long m, long y, const BasicParams<T>& p) {
  T s(0);
  T qy = ipow(p.q, y);
  T qjy(1);
  for (long j = 0; j <= m; ++j) {
    s += phi_pmf(j, m, p) * qjy;
    qjy *= qy;
  }
  return s;
}

/// |S_{m,y} - S_{y,m}|; exactly zero in rational mode (Proposition-level
/// symmetry).
template <class T>
T duality_residual(long m, long y, const BasicParams<T>& p) {
  T d = duality_sum(m, y, p) - duality_sum(y, m, p);
  return d < T(0) ? T(-d) : d;
}

/// Infinite variant: returns |sum_j phi(j|inf) q^{jy} - phi(0|y)| with the
/// sum truncated under a certified tail bound below tail_tol.
double duality_residual_inf(long y, const Params& p, double tail_tol = 1e-13);

/// Inverse-CDF sampler with cached tables. For m = +inf the CDF is extended
/// on demand until cumulative mass >= 1 - 1e-12 or j = 10^5; draws landing
/// past the cap are truncated there and counted.
class Sampler {
 public:
  explicit Sampler(const Params& p) : p_(p) { p.validate(); }

  long draw(JumpSupport m, RngStream& rng);

  long cap_events() const { return cap_events_; }
  const Params& params() const { return p_; }

  static constexpr long kCap = 100000;
  static constexpr double kMassTarget = 1.0 - 1e-12;

 private:
  const std::vector<double>& cdf_finite(long m);
  Params p_;
  std::vector<std::vector<double>> finite_;  // finite_[m] = CDF over 0..m
  std::vector<double> inf_cdf_;
  bool inf_complete_ = false;
  long cap_events_ = 0;
};

}  // namespace qdist
}  // namespace qmn
