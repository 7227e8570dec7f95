#pragma once

#include <complex>
#include <vector>

#include "qmn/chains.hpp"
#include "qmn/exact.hpp"
#include "qmn/numeric.hpp"
#include "qmn/qdist.hpp"

namespace qmn::fredholm {

using chains::RatSchedule;

/// Contours and discretization for both determinant formulas.
/// Radii <= 0 mean "choose automatically from (q, nu)".
struct KernelConfig {
  double mb_radius = -1.0;      // circle around 1: excludes 0, 1/q, 1/nu
  int mb_nodes = 96;            // w-circle nodes M (<= 512)
  double s_step = 0.08;         // trapezoid spacing on Re s = 1/2
  double s_halflen = -1.0;      // |Im s| cutoff L; <0: from csc decay
  double cauchy_center = 0.5;   // circle containing 0 and 1
  double cauchy_radius = -1.0;  // excludes 1/q and 1/nu
  int cauchy_nodes = 160;
  double tol = 1e-10;
  double pole_guard = 1e-6;
};

/// g(w) from the determinant formulas, via truncated infinite products.
Cplx g_eval(Cplx w, int n, long t, const Params& p,
            const std::vector<double>& mu_schedule = {},
            double guard = 1e-6);

/// Pole-free ratio g(w)/g(qw) in closed form:
/// ((1-nu w)/(1-w))^n prod_s ((1-mu_s w)/(1-nu w)) / (1-nu w).
Cplx g_ratio(Cplx w, int n, long t, const Params& p,
             const std::vector<double>& mu_schedule = {});

struct DetDiag {
  int w_nodes = 0;
  int s_nodes = 0;
  double last_delta = 0.0;  // |change| under the final node doubling
};

/// Mellin-Barnes type: det(I + K_zeta) on the circle around 1.
Cplx det_mb(Cplx zeta, int n, long t, const Params& p,
            const KernelConfig& cfg = {},
            const std::vector<double>& mu_schedule = {},
            DetDiag* diag = nullptr);

/// Cauchy type: det(I + zeta K~)/(zeta;q)_inf on the circle around {0,1}.
Cplx det_cauchy(Cplx zeta, int n, long t, const Params& p,
                const KernelConfig& cfg = {},
                const std::vector<double>& mu_schedule = {},
                DetDiag* diag = nullptr);

/// e_q-Laplace series sum_k mu_k zeta^k/(q;q)_k with mu_k = E[q^{k(x_n+n)}]
/// from the exact dual-chain oracle. (q;q)_k = k_q! (1-q)^k.
Cplx laplace_series_oracle(Cplx zeta, int n, long t, const RatSchedule& sched,
                           int k_max = 40, double tol = 1e-12);

struct InvertResult {
  std::vector<Rat> pmf;       // P(x_n(t)+n = s), s = 0..S
  double tail_bound = 0.0;    // certified bound on neglected mass P(X > S)
  double defect = 0.0;        // |1 - sum pmf|
};

/// Distribution of x_n(t)+n recovered from the exact moment sequence by the
/// truncated q^s-Vandermonde system, solved exactly (Lagrange form). The
/// support cap S is certified by a Chernoff bound on the first particle.
InvertResult invert_distribution(int n, long t, const RatSchedule& sched,
                                 long support_cap = -1,
                                 double tail_target = 1e-10);

/// Smallest S with the certified first-particle bound P(x_1(t)+1 > S) below
/// tail_target.
long invert_support(long t, const chains::Schedule& sched, double tail_target);

struct MhadpReport {
  std::vector<double> eps;
  std::vector<double> g_residual;              // |(ratio)^t - exponential limit|
  std::vector<std::vector<double>> rate_residual;  // per eps, per j=1..jmax
};

/// Degeneration checks under mu = q, nu = (q-eps)/(1-eps), t = tau/eps:
/// jump rates phi(j|m)/eps -> 1/[j]_{q^{-1}} and
/// ((mu w;q)_inf/(nu w;q)_inf)^t -> exp(-tau (1-q) sum_i q^i w/(1-q^{i+1}w)).
MhadpReport mhadp_checks(Cplx w, double tau, double q,
                         const std::vector<double>& eps_list, int jmax = 4,
                         int m = 6);

}  // namespace qmn::fredholm
