#include <doctest.h>

#include <cmath>

#include "qmn/fredholm.hpp"

using namespace qmn;
using namespace qmn::fredholm;

namespace {
RatSchedule plain(Rat q, Rat mu, Rat nu) {
  RatSchedule s;
  s.base = {std::move(q), std::move(mu), std::move(nu)};
  return s;
}
}  // namespace

TEST_CASE("g_eval spot values and ratio cancellation") {
  const Params p{0.5, 0.4, 0.1};
  // n=0, t=0: 1/(nu w;q)_inf
  const Cplx w(1.1, 0.2);
  CHECK(std::abs(g_eval(w, 0, 0, p) -
                 1.0 / qseries::qpoch_inf(p.nu * w, p.q)) < 1e-12);
  const Params p0{0.5, 0.4, 0.0};
  CHECK(std::abs(g_eval(w, 0, 0, p0) - Cplx(1.0, 0.0)) < 1e-12);
  // g(w)/g(qw) equals the term-cancelled closed form
  for (Cplx ww : {Cplx(0.8, 0.3), Cplx(1.2, -0.4), Cplx(0.5, 0.0)}) {
    const Cplx direct = g_eval(ww, 3, 2, p) / g_eval(p.q * ww, 3, 2, p);
    CHECK(std::abs(direct - g_ratio(ww, 3, 2, p)) < 1e-12 * std::abs(direct));
  }
  CHECK_THROWS_AS(g_eval(Cplx(1.0, 0.0), 1, 1, p), PoleProximityError);
}

TEST_CASE("laplace series oracle basics") {
  auto rs = plain(Rat(1, 2), Rat(2, 5), Rat(1, 10));
  CHECK(laplace_series_oracle(Cplx(0, 0), 2, 2, rs) == Cplx(1.0, 0.0));
  // t = 0: all mu_k = 1, series sums to 1/(zeta;q)_inf by the q-Binomial
  // theorem
  const Cplx z(-0.25, 0.1);
  const Cplx series = laplace_series_oracle(z, 1, 0, rs);
  const Cplx direct = 1.0 / qseries::qpoch_inf(z, 0.5);
  CHECK(std::abs(series - direct) < 1e-10);
  // mu = nu: frozen dynamics, same value at any t
  auto frozen = plain(Rat(1, 2), Rat(1, 10), Rat(1, 10));
  CHECK(std::abs(laplace_series_oracle(z, 2, 3, frozen) - direct) < 1e-10);
}

TEST_CASE("det_mb matches the series oracle") {
  auto rs = plain(Rat(1, 2), Rat(2, 5), Rat(1, 10));
  const Params p{0.5, 0.4, 0.1};
  for (Cplx z : {Cplx(-0.25, 0.0), Cplx(0.1, 0.2), Cplx(-0.05, -0.15)}) {
    const Cplx ser = laplace_series_oracle(z, 2, 2, rs);
    const Cplx det = det_mb(z, 2, 2, p);
    INFO("zeta = ", z.real(), "+", z.imag(), "i: det=", det.real(), "+",
         det.imag(), "i vs series=", ser.real(), "+", ser.imag(), "i");
    CHECK(std::abs(det - ser) < 1e-8);
  }
  CHECK(det_mb(Cplx(0, 0), 2, 2, p) == Cplx(1.0, 0.0));
  CHECK_THROWS_AS(det_mb(Cplx(0.3, 0.0), 2, 2, p), ConfigError);
}

TEST_CASE("det_cauchy matches det_mb and the series") {
  auto rs = plain(Rat(1, 2), Rat(2, 5), Rat(1, 10));
  const Params p{0.5, 0.4, 0.1};
  for (Cplx z : {Cplx(-0.2, 0.0), Cplx(0.1, 0.15)}) {
    const Cplx ser = laplace_series_oracle(z, 2, 2, rs);
    const Cplx dc = det_cauchy(z, 2, 2, p);
    const Cplx dm = det_mb(z, 2, 2, p);
    CHECK(std::abs(dc - ser) < 1e-8);
    CHECK(std::abs(dc - dm) < 1e-8);
  }
  CHECK(det_cauchy(Cplx(0, 0), 2, 2, p) == Cplx(1.0, 0.0));
}

TEST_CASE("determinants with a mu schedule") {
  auto rs = plain(Rat(1, 2), Rat(2, 5), Rat(1, 10));
  rs.mu_t = {Rat(1, 2), Rat(3, 10), Rat(2, 5)};
  std::vector<double> ms = {0.5, 0.3, 0.4};
  const Params p{0.5, 0.4, 0.1};
  const Cplx z(-0.2, 0.05);
  const Cplx ser = laplace_series_oracle(z, 2, 3, rs);
  CHECK(std::abs(det_cauchy(z, 2, 3, p, {}, ms) - ser) < 1e-8);
  CHECK(std::abs(det_mb(z, 2, 3, p, {}, ms) - ser) < 1e-8);
}

TEST_CASE("laplace series matches MC of the e_q-Laplace observable") {
  auto rs = plain(Rat(1, 2), Rat(2, 5), Rat(1, 10));
  auto ds = chains::to_double(rs);
  const Cplx z(-0.25, 0.0);
  const Cplx ser = laplace_series_oracle(z, 2, 2, rs);
  auto mc = chains::mc_run(400000, 5150, 2, [&](RngStream& rng) {
    chains::StepSampler s(ds);
    auto x = chains::step_initial(2);
    for (long step = 0; step < 2; ++step) chains::tasep_step(x, s, step, rng);
    const double qx = std::pow(0.5, double(x[1] + 2));
    return 1.0 / qseries::qpoch_inf(Cplx(z.real() * qx, 0.0), 0.5).real();
  });
  CHECK(std::abs(mc.mean - ser.real()) < 4.0 * mc.stderr_);
}

TEST_CASE("invert_distribution recovers phi(.|inf) at n=1, t=1") {
  auto rs = plain(Rat(1, 2), Rat(2, 5), Rat(1, 10));
  const Params p{0.5, 0.4, 0.1};
  auto res = invert_distribution(1, 1, rs, -1, 1e-10);
  REQUIRE(res.pmf.size() >= 10);
  Rat total(0);
  for (const auto& v : res.pmf) {
    CHECK(v >= 0);
    total += v;
  }
  CHECK(total <= 1);
  CHECK(res.defect < 1e-9);
  for (std::size_t s = 0; s < res.pmf.size(); ++s) {
    const double expect = qdist::phi_pmf_inf(static_cast<long>(s), p);
    CHECK(std::abs(res.pmf[s].get_d() - expect) < 1e-9);
  }
  // t = 0: point mass at zero
  auto res0 = invert_distribution(1, 0, rs, 4, 1e-10);
  CHECK(res0.pmf[0] == 1);
  for (std::size_t s = 1; s < res0.pmf.size(); ++s) CHECK(res0.pmf[s] == 0);
}

TEST_CASE("mhadp degeneration residuals shrink linearly in eps") {
  auto rep = mhadp_checks(Cplx(0.4, 0.3), 1.0, 0.5, {1e-2, 1e-3, 1e-4});
  REQUIRE(rep.g_residual.size() == 3);
  for (std::size_t i = 0; i + 1 < rep.g_residual.size(); ++i) {
    const double ratio = rep.g_residual[i] / rep.g_residual[i + 1];
    INFO("g ratio ", ratio);
    CHECK(ratio > 7.0);
    CHECK(ratio < 13.0);
  }
  for (std::size_t j = 0; j < rep.rate_residual[0].size(); ++j) {
    const double r01 = rep.rate_residual[0][j] / rep.rate_residual[1][j];
    CHECK(r01 > 7.0);
    CHECK(r01 < 13.0);
  }
  // w = 0: both sides are 1
  auto rep0 = mhadp_checks(Cplx(0.0, 0.0), 1.0, 0.5, {1e-2});
  CHECK(rep0.g_residual[0] < 1e-12);
  // [1]_{q^{-1}} = 1: phi(1|m)/eps -> 1
  const double q = 0.5, eps = 1e-4;
  Params pm{q, q, (q - eps) / (1.0 - eps)};
  CHECK(std::abs(qdist::phi_pmf<double>(1, 6, pm) / eps - 1.0) < 1e-2);
}
