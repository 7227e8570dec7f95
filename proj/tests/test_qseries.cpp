#include <doctest.h>

#include <cmath>

#include "qmn/qseries.hpp"
#include "qmn/rng.hpp"

using namespace qmn;
using namespace qmn::qseries;

TEST_CASE("qpoch basics") {
  CHECK(qpoch<double>(0.37, 0.5, 0) == 1.0);
  CHECK(qpoch(Cplx(1.2, 3.4), Cplx(0.7, 0.0), 0) == Cplx(1.0, 0.0));
  // factor i=1 is (1 - 2*0.5) = 0
  CHECK(qpoch<double>(2.0, 0.5, 2) == 0.0);
  // q = 0 collapses every factor after the first
  CHECK(qpoch<double>(0.5, 0.0, 3) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("qpoch recurrence (a;q)_{n+1} = (a;q)_n (1-a q^n)") {
  RngStream rng(7, 0);
  for (int i = 0; i < 200; ++i) {
    const double a = 2.0 * rng.next_double() - 0.5;
    const double q = 0.95 * rng.next_double();
    const long n = static_cast<long>(rng.next_u64() % 20);
    const double lhs = qpoch<double>(a, q, n + 1);
    const double rhs = qpoch<double>(a, q, n) * (1.0 - a * std::pow(q, double(n)));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
  }
}

TEST_CASE("qpoch_inf") {
  CHECK(qpoch_inf(Cplx(0.0, 0.0), 0.4, 1e-14) == Cplx(1.0, 0.0));
  CHECK(qpoch_inf(Cplx(0.37, 0.0), 0.0, 1e-14).real() ==
        doctest::Approx(1.0 - 0.37).epsilon(1e-15));
  // two truncation depths agree: direct 60-factor product
  double direct = 1.0, x = 0.3;
  for (int i = 0; i < 60; ++i) {
    direct *= (1.0 - x);
    x *= 0.5;
  }
  CHECK(std::abs(qpoch_inf(Cplx(0.3, 0.0), 0.5, 1e-14).real() - direct) <
        1e-13);
  CHECK_THROWS_AS(qpoch_inf(Cplx(0.3, 0.0), 1.0, 1e-14), DomainError);
}

TEST_CASE("phi21 basics") {
  // z = 0: only the n=0 term
  CHECK(phi21(Cplx(0.3, 0), Cplx(0.4, 0), Cplx(0.2, 0), 0.5, Cplx(0.0, 0)) ==
        Cplx(1.0, 0.0));
  // a = 1: (1;q)_n = 0 for n >= 1
  CHECK(phi21(Cplx(1.0, 0), Cplx(0.4, 0), Cplx(0.2, 0), 0.5, Cplx(0.3, 0)) ==
        Cplx(1.0, 0.0));
  // a = q^{-1}, z = q: two-term sum equals (c/b;q)_1/(c;q)_1 * b = (b-c)/(1-c)
  const double q = 0.45, b = 0.7, c = 0.2;
  const Cplx lhs = phi21(Cplx(1.0 / q, 0), Cplx(b, 0), Cplx(c, 0), q, Cplx(q, 0));
  const double brute = 1.0 + (1.0 - 1.0 / q) * (1.0 - b) * q /
                                 ((1.0 - q) * (1.0 - c));
  CHECK(lhs.real() == doctest::Approx((b - c) / (1.0 - c)).epsilon(1e-14));
  CHECK(lhs.real() == doctest::Approx(brute).epsilon(1e-14));
  CHECK_THROWS_AS(
      phi21(Cplx(0.3, 0), Cplx(0.4, 0), Cplx(0.2, 0), 0.5, Cplx(1.1, 0)),
      DivergenceError);
  // c = q^{-2}: the (c;q)_n factor 1 - c q^2 vanishes at n = 2
  CHECK_THROWS_AS(phi21(Cplx(0.3, 0), Cplx(0.4, 0), Cplx(1.0 / (0.5 * 0.5), 0),
                        0.5, Cplx(0.3, 0)),
                  PoleError);
}

TEST_CASE("qfactorial") {
  CHECK(qfactorial(0, 0.37) == 1.0);
  CHECK(qfactorial(2, 0.37) == doctest::Approx(1.37).epsilon(1e-15));
  CHECK(qfactorial(3, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(qfactorial(2, Rat(2, 5)) == Rat(7, 5));
}

TEST_CASE("identity suite residuals") {
  for (double q : {0.2, 0.4, 0.45, 0.7}) {
    const auto rep = identity_suite(q, default_tuples(110));
    for (const auto& r : rep.results) {
      INFO(r.name, " at q=", q, " -> ", r.max_residual);
      if (r.name == "q_gauss") {
        CHECK(r.max_residual < 1e-10);
      } else {
        CHECK(r.max_residual < 1e-12);
      }
      CHECK(r.evaluations > 0);
    }
  }
}

TEST_CASE("degenerate q-Gauss holds exactly in rational mode") {
  const Rat q(1, 3), b(1, 2), c(1, 5), z = q;
  for (long n = 0; n <= 6; ++n) {
    const Rat lhs = phi21_terminating(n, b, c, q, z);
    const Rat rhs = qpoch(Rat(c / b), q, n) / qpoch(c, q, n) * ipow(b, n);
    CHECK(lhs == rhs);
  }
}

// The paper prints (a;q)_n with upper limit n (n+1 factors). Under that
// literal reading the jump weights do not normalize; the n-factor convention
// used throughout restores phi(0|1) + phi(1|1) = 1.
TEST_CASE("pochhammer_paper_convention_documented") {
  const double q = 0.5, mu = 0.4, nu = 0.1;
  auto poch_plus1 = [&](double a, long n) { return qpoch<double>(a, q, n + 1); };
  // phi(j|1) with every (x;q)_n read as an (n+1)-factor product
  const double phi0 = poch_plus1(mu, 1) / poch_plus1(nu, 1) * poch_plus1(q, 1) /
                      (poch_plus1(q, 0) * poch_plus1(q, 1));
  const double phi1 = mu * poch_plus1(nu / mu, 1) * poch_plus1(mu, 0) /
                      poch_plus1(nu, 1) * poch_plus1(q, 1) /
                      (poch_plus1(q, 1) * poch_plus1(q, 0));
  CHECK(std::abs(phi0 + phi1 - 1.0) > 0.05);  // fails to normalize
  // standard convention normalizes exactly
  const double s0 = qpoch<double>(mu, q, 1) / qpoch<double>(nu, q, 1);
  const double s1 = mu * (1.0 - nu / mu) / (1.0 - nu);
  CHECK(s0 + s1 == doctest::Approx(1.0).epsilon(1e-15));
}
