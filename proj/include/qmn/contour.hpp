#pragma once

#include <complex>
#include <vector>

#include "qmn/chains.hpp"
#include "qmn/numeric.hpp"
#include "qmn/qdist.hpp"

namespace qmn::contour {

/// Axis-aligned ellipse centered at (cx, 0) with semi-axes (ax, b); a circle
/// when ax == b. Positively oriented.
struct Curve {
  double cx = 1.0;
  double ax = 0.1;
  double b = 0.1;
  bool circle() const { return ax == b; }
};

struct ContourSpec {
  std::vector<Curve> curves;  // curves[0] is gamma_1 (outermost q-nesting)
  int nodes = 256;
};

/// Circle family per the radius recursion r_k = eps, r_j = (1-q) + q r_{j+1}
/// + delta; feasible iff r_1 < min(1, 1/nu - 1) - delta. Throws
/// ContourInfeasible with the violated inequality.
ContourSpec plan_contours(int k, double q, double nu, double delta = 0.01,
                          double eps = 0.01);

/// Ellipse family sized for fast trapezoid convergence (fat ellipses with
/// explicit margins); same constraint set. Used by the evaluation pipelines.
ContourSpec plan_contours_auto(int k, double q, double nu);

/// Sampled validation of the constraint set: every curve contains 1 and
/// excludes 0 and 1/nu; gamma_A contains q*gamma_B for A < B (with margin).
/// Throws ContourInfeasible naming the violated constraint.
void check_contours(const ContourSpec& spec, double q, double nu,
                    double margin = 1e-6);

struct ObservableSpec {
  std::vector<int> nvec;            // arbitrary integers (free extension)
  long t = 0;
  std::vector<double> mu_schedule;  // empty: constant mu
};

struct QuadratureDiag {
  int nodes_used = 0;
  double imag_part = 0.0;
  double last_delta = 0.0;  // |change| at the final refinement
};

/// Nested contour integral for E[prod q^{x_{n_i}+n_i}] (step initial data).
/// Tensor-product trapezoid quadrature; nodes doubled until successive
/// refinements differ by < tol (ConvergenceError after max_doublings).
Cplx qmoment_contour(const ObservableSpec& obs, const Params& p,
                     const ContourSpec& spec, double tol = 1e-10,
                     QuadratureDiag* diag = nullptr, int max_doublings = 6);

/// Single quadrature pass at a fixed node count (no refinement test).
Cplx qmoment_contour_raw(const ObservableSpec& obs, const Params& p,
                         const ContourSpec& spec, int nodes);

/// Batch evaluation of many observables over shared contours at a fixed node
/// count. Node sets and cross-factor tables are built once; for k = 3 the
/// observables are grouped by (n_1, t) so the O(M^3) contraction is shared
/// within a group. Deterministic for any thread count.
std::vector<Cplx> qmoment_contour_batch(const std::vector<ObservableSpec>& obs,
                                        const Params& p,
                                        const ContourSpec& spec, int nodes,
                                        int threads = 1);

/// Residual of the k-particle free evolution equation at nvec:
/// |u(t+1;n) - prod_i [nabla_{mu_{t+1},nu}]_i u(t;n)|.
double check_free_evolution(const ObservableSpec& obs, const Params& p,
                            const ContourSpec& spec, double tol = 1e-10);

/// Residual of the two-body boundary condition at a pair n_i = n_{i+1}
/// (i is 1-based).
double check_boundary(const ObservableSpec& obs, int i, const Params& p,
                      const ContourSpec& spec, double tol = 1e-10);

}  // namespace qmn::contour
