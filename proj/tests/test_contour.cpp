#include <doctest.h>

#include <cmath>

#include "qmn/contour.hpp"
#include "qmn/exact.hpp"

using namespace qmn;
using namespace qmn::contour;

TEST_CASE("plan_contours: the stated radius recursion and feasibility") {
  // k=1, nu=0.9, q=0.5: single circle radius eps fits under 1/nu - 1
  auto s1 = plan_contours(1, 0.5, 0.9, 0.01, 0.05);
  REQUIRE(s1.curves.size() == 1);
  CHECK(s1.curves[0].ax == doctest::Approx(0.05));
  // k=2, nu=0.9, q=0.5: r_1 = 0.5 + 0.5*eps + delta >= 0.5 but must be
  // < 1/0.9 - 1 - delta ~ 0.10
  CHECK_THROWS_AS(plan_contours(2, 0.5, 0.9, 0.01, 0.01), ContourInfeasible);
  // k=3, nu=0.2, q=0.5, eps=delta=0.01: radii (0.77, 0.52, 0.01)
  auto s3 = plan_contours(3, 0.5, 0.2, 0.01, 0.01);
  REQUIRE(s3.curves.size() == 3);
  CHECK(s3.curves[2].ax == doctest::Approx(0.01));
  CHECK(s3.curves[1].ax == doctest::Approx(0.5 + 0.5 * 0.01 + 0.01));
  CHECK(s3.curves[0].ax == doctest::Approx(0.5 + 0.5 * 0.515 + 0.01));
  CHECK(s3.curves[0].ax > s3.curves[1].ax);
  check_contours(s3, 0.5, 0.2);
}

TEST_CASE("auto planner passes the constraint checker") {
  for (double q : {0.3, 0.5}) {
    for (double nu : {0.0, 0.1, 0.25}) {
      for (int k = 1; k <= 3; ++k) {
        auto spec = plan_contours_auto(k, q, nu);
        REQUIRE(static_cast<int>(spec.curves.size()) == k);
        check_contours(spec, q, nu, 1e-4);
      }
    }
  }
  // infeasible when 1/nu crowds 1
  CHECK_THROWS_AS(plan_contours_auto(2, 0.5, 0.999), ContourInfeasible);
}

TEST_CASE("t=0 initial data: 1 when all n_i >= 1, 0 when n_k = 0") {
  const Params p{0.5, 0.4, 0.1};
  auto spec1 = plan_contours_auto(1, p.q, p.nu);
  ObservableSpec obs;
  obs.nvec = {1};
  obs.t = 0;
  CHECK(std::abs(qmoment_contour(obs, p, spec1) - Cplx(1.0, 0.0)) < 1e-12);
  auto spec3 = plan_contours_auto(3, p.q, p.nu);
  obs.nvec = {4, 2, 1};
  CHECK(std::abs(qmoment_contour(obs, p, spec3) - Cplx(1.0, 0.0)) < 1e-10);
  obs.nvec = {4, 2, 0};
  CHECK(std::abs(qmoment_contour(obs, p, spec3)) < 1e-12);
}

TEST_CASE("contour matches exact oracle, including mu schedules") {
  using exact::qmoment_oracle;
  chains::RatSchedule rs;
  rs.base = {Rat(1, 2), Rat(2, 5), Rat(1, 10)};
  const Params p{0.5, 0.4, 0.1};

  auto spec1 = plan_contours_auto(1, p.q, p.nu);
  ObservableSpec obs;
  obs.nvec = {1};
  obs.t = 1;
  const Cplx u1 = qmoment_contour(obs, p, spec1);
  CHECK(std::abs(u1.real() - (1.0 - p.mu) / (1.0 - p.nu)) < 1e-10);
  CHECK(std::abs(u1.imag()) < 1e-10);

  auto spec2 = plan_contours_auto(2, p.q, p.nu);
  obs.nvec = {3, 2};
  obs.t = 4;
  const double ex = qmoment_oracle({3, 2}, 4, rs).get_d();
  CHECK(std::abs(qmoment_contour(obs, p, spec2).real() - ex) < 1e-9 * ex + 1e-12);

  // time-dependent mu
  chains::RatSchedule rs2 = rs;
  rs2.mu_t = {Rat(2, 5), Rat(1, 2), Rat(3, 10)};
  ObservableSpec obs2;
  obs2.nvec = {2, 1};
  obs2.t = 3;
  obs2.mu_schedule = {0.4, 0.5, 0.3};
  const double ex2 = qmoment_oracle({2, 1}, 3, rs2).get_d();
  CHECK(std::abs(qmoment_contour(obs2, p, spec2).real() - ex2) <
        1e-9 * ex2 + 1e-12);
}

TEST_CASE("hard corner q=0.3, nu=0.25, k=3 agrees with the oracle") {
  chains::RatSchedule rs;
  rs.base = {Rat(3, 10), Rat(3, 5), Rat(1, 4)};
  const Params p{0.3, 0.6, 0.25};
  auto spec = plan_contours_auto(3, p.q, p.nu);
  ObservableSpec obs;
  obs.nvec = {3, 2, 1};
  obs.t = 3;
  const double ex = exact::qmoment_oracle({3, 2, 1}, 3, rs).get_d();
  const Cplx c = qmoment_contour(obs, p, spec, 1e-12);
  CHECK(std::abs(c.real() - ex) / ex < 1e-8);
  CHECK(std::abs(c.imag()) < 1e-10);
}

TEST_CASE("geometric trapezoid convergence on the auto plan") {
  const Params p{0.3, 0.6, 0.25};
  auto spec = plan_contours_auto(2, p.q, p.nu);
  ObservableSpec obs;
  obs.nvec = {4, 2};
  obs.t = 3;
  const Cplx ref = qmoment_contour_raw(obs, p, spec, 1024);
  const double e256 = std::abs(qmoment_contour_raw(obs, p, spec, 256) - ref);
  const double e512 = std::abs(qmoment_contour_raw(obs, p, spec, 512) - ref);
  INFO("e256 = ", e256, ", e512 = ", e512);
  CHECK((e512 < 0.1 * e256 || e512 < 1e-15));
}

TEST_CASE("free evolution residual") {
  const Params p{0.5, 0.4, 0.1};
  auto spec1 = plan_contours_auto(1, p.q, p.nu);
  ObservableSpec obs;
  obs.nvec = {2};
  obs.t = 2;
  CHECK(check_free_evolution(obs, p, spec1) < 1e-9);
  auto spec2 = plan_contours_auto(2, p.q, p.nu);
  obs.nvec = {3, 1};
  obs.t = 1;
  CHECK(check_free_evolution(obs, p, spec2) < 1e-9);
  // negative coordinates are allowed in the free extension
  obs.nvec = {1, -2};
  CHECK(check_free_evolution(obs, p, spec2) < 1e-9);
  // mu = nu: nabla is the identity
  const Params frozen{0.5, 0.2, 0.2};
  auto specf = plan_contours_auto(1, frozen.q, frozen.nu);
  ObservableSpec obsf;
  obsf.nvec = {2};
  obsf.t = 1;
  CHECK(check_free_evolution(obsf, frozen, specf) < 1e-10);
}

TEST_CASE("two-body boundary condition residual") {
  auto run = [](const Params& p, std::vector<int> nvec, long t) {
    auto spec = plan_contours_auto(2, p.q, p.nu);
    ObservableSpec obs;
    obs.nvec = std::move(nvec);
    obs.t = t;
    return check_boundary(obs, 1, p, spec);
  };
  CHECK(run({0.4, 0.5, 0.1}, {2, 2}, 1) < 1e-9);
  CHECK(run({0.4, 0.5, 0.1}, {1, 1}, 0) < 1e-9);
  // nu = 0 degeneration: alpha = 0 (two-term condition)
  CHECK(run({0.4, 0.5, 0.0}, {2, 2}, 1) < 1e-9);
  CHECK_THROWS_AS(run({0.4, 0.5, 0.1}, {2, 1}, 1), DomainError);
}
