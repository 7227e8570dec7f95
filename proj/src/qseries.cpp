#include "qmn/qseries.hpp"

#include <algorithm>

#include "qmn/rng.hpp"

namespace qmn::qseries {

Cplx phi21(Cplx a, Cplx b, Cplx c, double q, Cplx z, double tol) {
  require_q(q);
  // a = q^{-n} (within rational tolerance) makes the series terminate at n.
  long terminate_at = -1;
  {
    double qa = 1.0;
    for (long n = 0; n <= 512; ++n) {
      if (std::abs(a * qa - 1.0) < 1e-12) {
        terminate_at = n;
        break;
      }
      qa *= q;
      if (qa == 0.0) break;
    }
  }
  if (terminate_at < 0 && std::abs(z) >= 1.0)
    throw DivergenceError("phi21: |z| >= 1 and series does not terminate");

  Cplx sum(1.0, 0.0);
  Cplx term(1.0, 0.0);
  Cplx aq = a, bq = b, cq = c;
  double qq = 1.0;  // q^{n} feeding (q;q)_n factors
  for (long n = 0; n < 100000; ++n) {
    if (terminate_at >= 0 && n == terminate_at) break;
    const Cplx den = (Cplx(1.0, 0.0) - cq) * (1.0 - q * qq);
    if (std::abs(den) < 1e-300)
      throw PoleError("phi21: denominator Pochhammer factor vanished");
    term *= (Cplx(1.0, 0.0) - aq) * (Cplx(1.0, 0.0) - bq) * z / den;
    sum += term;
    aq *= q;
    bq *= q;
    cq *= q;
    qq *= q;
    if (terminate_at < 0 && std::abs(term) < tol * std::max(1.0, std::abs(sum)))
      break;
  }
  return sum;
}

Rat phi21_terminating(long n, const Rat& b, const Rat& c, const Rat& q,
                      const Rat& z) {
  // 2phi1(q^{-n}, b; c; q, z) = sum_{r=0}^{n} (q^{-n};q)_r (b;q)_r /
  //                                           ((q;q)_r (c;q)_r) z^r
  Rat sum = 1;
  Rat term = 1;
  Rat qinvn = rat_pow(q, -n);  // q^{-n}
  Rat aq = qinvn, bq = b, cq = c, qq = q;
  for (long r = 1; r <= n; ++r) {
    Rat den = (1 - cq) * (1 - qq);
    if (den == 0) throw PoleError("phi21_terminating: pole before termination");
    term *= (1 - aq) * (1 - bq) * z / den;
    sum += term;
    aq *= q;
    bq *= q;
    cq *= q;
    qq *= q;
  }
  return sum;
}

double qfactorial(long k, double q) {
  require_q(q);
  if (k < 0) throw DomainError("qfactorial: k must be >= 0");
  // prod_{i=1}^{k} (1-q^i)/(1-q)
  double r = 1.0, qi = q;
  for (long i = 1; i <= k; ++i) {
    r *= (1.0 - qi) / (1.0 - q);
    qi *= q;
  }
  return r;
}

Rat qfactorial(long k, const Rat& q) {
  if (k < 0) throw DomainError("qfactorial: k must be >= 0");
  Rat r = 1, qi = q;
  for (long i = 1; i <= k; ++i) {
    r *= (1 - qi) / (1 - q);
    qi *= q;
  }
  return r;
}

double IdentityReport::max_residual() const {
  double m = 0.0;
  for (const auto& r : results) m = std::max(m, r.max_residual);
  return m;
}

namespace {

double rel_resid(Cplx lhs, Cplx rhs) {
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

void record(IdentityResult& r, double resid) {
  r.max_residual = std::max(r.max_residual, resid);
  ++r.evaluations;
}

}  // namespace

IdentityReport identity_suite(double q, const std::vector<IdentityTuple>& pts) {
  require_q(q);
  IdentityReport rep;
  rep.results = {
      {"gasper_A", 0, 0, 0},      {"gasper_B", 0, 0, 0},
      {"gasper_C", 0, 0, 0},      {"q_gauss", 0, 0, 0},
      {"q_gauss_deg", 0, 0, 0},   {"poch_expansion", 0, 0, 0},
  };
  auto& A = rep.results[0];
  auto& B = rep.results[1];
  auto& C = rep.results[2];
  auto& G = rep.results[3];
  auto& D = rep.results[4];
  auto& E = rep.results[5];

  for (const auto& p : pts) {
    const Cplx a(p.a, 0.0), b(p.b, 0.0), c(p.c, 0.0);
    const long n = p.n, k = p.k, y = p.y;

    // (A)  (a;q)_n (a q^n;q)_inf = (a;q)_inf
    record(A, rel_resid(qpoch(a, Cplx(q), n) *
                            qpoch_inf(a * std::pow(q, double(n)), q),
                        qpoch_inf(a, q)));

    // (B)  (a^{-1} q^{1-n};q)_n = (a;q)_n (-a^{-1})^n q^{-n(n-1)/2}
    if (p.a != 0.0) {
      const Cplx lhs = qpoch(Cplx(std::pow(q, 1.0 - double(n)) / p.a), Cplx(q), n);
      const Cplx rhs = qpoch(a, Cplx(q), n) * ipow(Cplx(-1.0 / p.a), n) *
                       std::pow(q, -0.5 * double(n) * double(n - 1));
      record(B, rel_resid(lhs, rhs));
    } else {
      ++B.domain_rejections;
    }

    // (C)  (a;q)_{n-k} = (a;q)_n / (a^{-1}q^{1-n};q)_k * (-q a^{-1})^k
    //      * q^{k(k-1)/2 - nk}
    if (p.a != 0.0 && k <= n) {
      const Cplx den = qpoch(Cplx(std::pow(q, 1.0 - double(n)) / p.a), Cplx(q), k);
      if (std::abs(den) > 1e-250) {
        const Cplx rhs = qpoch(a, Cplx(q), n) / den * ipow(Cplx(-q / p.a), k) *
                         std::pow(q, 0.5 * double(k) * double(k - 1) -
                                         double(n) * double(k));
        record(C, rel_resid(qpoch(a, Cplx(q), n - k), rhs));
      } else {
        ++C.domain_rejections;
      }
    } else {
      ++C.domain_rejections;
    }

    // Heine's q-Gauss sum: 2phi1(a,b;c;q,c/ab) = (c/a)_inf (c/b)_inf /
    //                                            ((c)_inf (c/ab)_inf)
    if (p.a != 0.0 && p.b != 0.0 && std::abs(p.c / (p.a * p.b)) < 1.0) {
      const Cplx z = c / (a * b);
      const Cplx lhs = phi21(a, b, c, q, z);
      const Cplx rhs = qpoch_inf(c / a, q) * qpoch_inf(c / b, q) /
                       (qpoch_inf(c, q) * qpoch_inf(z, q));
      record(G, rel_resid(lhs, rhs));
    } else {
      ++G.domain_rejections;
    }

    // Terminating degeneration: 2phi1(q^{-n},b;c;q,q) = (c/b;q)_n/(c;q)_n b^n.
    // The partial sums reach magnitude ~ q^{-n(n+1)/2} before cancelling, so
    // in doubles only well-conditioned n are testable; exactness for all n
    // is covered by the rational-mode test with phi21_terminating.
    const bool conditioned =
        q > 0.0 && 0.5 * double(n) * double(n + 1) * std::log(1.0 / q) <
                       std::log(1e3);
    if (p.b != 0.0 && conditioned &&
        std::abs(qpoch(c, Cplx(q), n)) > 1e-250) {
      const Cplx lhs =
          phi21(Cplx(std::pow(q, -double(n))), b, c, q, Cplx(q, 0.0));
      const Cplx rhs = qpoch(c / b, Cplx(q), n) / qpoch(c, Cplx(q), n) *
                       ipow(b, n);
      record(D, rel_resid(lhs, rhs));
    } else {
      ++D.domain_rejections;
    }

    // (a;q)_y = sum_r (-a)^r q^{r(r-1)/2} (q;q)_y / ((q;q)_r (q;q)_{y-r})
    {
      Cplx rhs(0.0, 0.0);
      for (long r = 0; r <= y; ++r) {
        rhs += ipow(-a, r) * std::pow(q, 0.5 * double(r) * double(r - 1)) *
               qpoch(Cplx(q), Cplx(q), y) /
               (qpoch(Cplx(q), Cplx(q), r) * qpoch(Cplx(q), Cplx(q), y - r));
      }
      record(E, rel_resid(qpoch(a, Cplx(q), y), rhs));
    }
  }
  return rep;
}

std::vector<IdentityTuple> default_tuples(std::size_t count,
                                          std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<IdentityTuple> out;
  out.reserve(count);
  // First tuples pin the spec'd spot checks; the rest sweep the domain.
  out.push_back({0.2, 0.3, 0.1, 3, 1, 4});
  out.push_back({0.5, 0.3, 0.1, 2, 2, 3});
  out.push_back({0.7, 0.4, 0.2, 4, 2, 4});
  while (out.size() < count) {
    IdentityTuple t;
    t.a = 0.05 + 0.85 * rng.next_double();
    t.b = 0.05 + 0.85 * rng.next_double();
    t.c = 0.05 + 0.5 * rng.next_double();
    t.n = 1 + static_cast<long>(rng.next_u64() % 6);
    t.k = static_cast<long>(rng.next_u64() % (t.n + 1));
    t.y = static_cast<long>(rng.next_u64() % 7);
    out.push_back(t);
  }
  return out;
}

}  // namespace qmn::qseries
