#include "qmn/fredholm.hpp"

#include <algorithm>
#include <cmath>

#include "qmn/qseries.hpp"

namespace qmn::fredholm {

namespace {

constexpr double kPi = 3.14159265358979323846;

void guard_pole(Cplx w, double q, double guard) {
  // zeros of (w;q)_inf sit at w = q^{-j}
  double x = 1.0;
  for (int j = 0; j < 64; ++j) {
    if (std::abs(w - x) < guard)
      throw PoleProximityError("g_eval: w within guard distance of q^{-j}");
    x /= q;
    if (x > 1e12) break;
  }
}

struct Circle {
  double c, r;
  void nodes(int M, std::vector<Cplx>& z, std::vector<Cplx>& w) const {
    z.resize(static_cast<std::size_t>(M));
    w.resize(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
      const double th = 2.0 * kPi * (i + 0.5) / M;
      z[static_cast<std::size_t>(i)] = Cplx(c + r * std::cos(th), r * std::sin(th));
      w[static_cast<std::size_t>(i)] =
          Cplx(r * std::cos(th), r * std::sin(th)) / double(M);
    }
  }
};

double mb_radius(const Params& p, const KernelConfig& cfg) {
  if (cfg.mb_radius > 0) return cfg.mb_radius;
  const double sq = std::sqrt(p.q);
  double r = 0.5 * std::min((1.0 - sq) / (1.0 + sq), 0.5);
  if (p.nu > 0) r = std::min(r, 0.5 * (1.0 / p.nu - 1.0));
  if (r < 1e-3)
    throw ConfigError("det_mb: no well-conditioned circle (q or nu too large)");
  return r;
}

Circle cauchy_circle(const Params& p, const KernelConfig& cfg) {
  const double c = cfg.cauchy_center;
  double r = cfg.cauchy_radius;
  if (r <= 0) {
    double hi = 1.5;                    // default outer cap
    hi = std::min(hi, 1.0 / p.q - c);   // exclude 1/q
    if (p.nu > 0) hi = std::min(hi, 1.0 / p.nu - c);
    r = 0.5 * (std::max(c, 1.0 - c) + hi);
    if (!(r > std::max(c, 1.0 - c) + 1e-3 && r < hi - 1e-4))
      throw ConfigError("det_cauchy: no circle fits between {0,1} and 1/q, 1/nu");
  } else {
    if (!(r > std::max(c, 1.0 - c)))
      throw ConfigError("det_cauchy: circle does not contain 0 and 1");
    if (c + r >= 1.0 / p.q || (p.nu > 0 && c + r >= 1.0 / p.nu))
      throw ConfigError("det_cauchy: circle must exclude 1/q and 1/nu");
  }
  return {c, r};
}

}  // namespace

Cplx g_eval(Cplx w, int n, long t, const Params& p,
            const std::vector<double>& mu_schedule, double guard) {
  p.validate();
  guard_pole(w, p.q, guard);
  using qseries::qpoch_inf;
  const Cplx pw = qpoch_inf(w, p.q);
  const Cplx pnuw = qpoch_inf(p.nu * w, p.q);
  Cplx g = ipow(pnuw / pw, n) / pnuw;
  if (mu_schedule.empty()) {
    g *= ipow(qpoch_inf(p.mu * w, p.q) / pnuw, t);
  } else {
    if (static_cast<long>(mu_schedule.size()) < t)
      throw ScheduleError("g_eval: mu_schedule shorter than t");
    for (long s = 0; s < t; ++s)
      g *= qpoch_inf(mu_schedule[static_cast<std::size_t>(s)] * w, p.q) / pnuw;
  }
  return g;
}

Cplx g_ratio(Cplx w, int n, long t, const Params& p,
             const std::vector<double>& mu_schedule) {
  const Cplx one(1.0, 0.0);
  Cplx f = ipow((one - p.nu * w) / (one - w), n) / (one - p.nu * w);
  if (mu_schedule.empty()) {
    f *= ipow((one - p.mu * w) / (one - p.nu * w), t);
  } else {
    if (static_cast<long>(mu_schedule.size()) < t)
      throw ScheduleError("g_ratio: mu_schedule shorter than t");
    for (long s = 0; s < t; ++s)
      f *= (one - mu_schedule[static_cast<std::size_t>(s)] * w) /
           (one - p.nu * w);
  }
  return f;
}

namespace {

Cplx det_mb_raw(Cplx zeta, int n, long t, const Params& p,
                const KernelConfig& cfg,
                const std::vector<double>& mu_schedule, int M, double h,
                int* s_nodes_out) {
  const Circle circ{1.0, mb_radius(p, cfg)};
  std::vector<Cplx> w, wt;
  circ.nodes(M, w, wt);

  // s-line truncation from the e^{-pi|Im s|} csc decay, adjusted for the
  // |(-zeta)^s| growth e^{|Im s| |arg(-zeta)|}
  const Cplx log_mz = std::log(-zeta);
  const double decay = kPi - std::abs(log_mz.imag());
  if (decay <= 1e-6)
    throw ConfigError("det_mb: zeta on the positive real axis");
  double L = cfg.s_halflen;
  if (L <= 0) L = std::max(6.0, std::log(1e5 / cfg.tol) / decay);
  const int Ns = static_cast<int>(2.0 * L / h) + 1;
  if (s_nodes_out) *s_nodes_out = Ns;

  std::vector<Cplx> gw(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i)
    gw[static_cast<std::size_t>(i)] =
        g_eval(w[static_cast<std::size_t>(i)], n, t, p, mu_schedule,
               cfg.pole_guard);

  std::vector<Cplx> K(static_cast<std::size_t>(M) * M, Cplx(0.0, 0.0));
  std::vector<Cplx> col(static_cast<std::size_t>(M));
  for (int m = 0; m < Ns; ++m) {
    const double y = -L + h * m;
    const Cplx s(0.5, y);
    const Cplx qs = std::exp(s * std::log(p.q));
    const Cplx pref = (h / (2.0 * kPi)) * (kPi / std::sin(-kPi * s)) *
                      std::exp(s * log_mz);
    for (int i = 0; i < M; ++i) {
      const Cplx gq = g_eval(qs * w[static_cast<std::size_t>(i)], n, t, p,
                             mu_schedule, cfg.pole_guard);
      col[static_cast<std::size_t>(i)] =
          pref * gw[static_cast<std::size_t>(i)] / gq;
    }
    for (int i = 0; i < M; ++i) {
      const Cplx qsw = qs * w[static_cast<std::size_t>(i)];
      const Cplx num = col[static_cast<std::size_t>(i)];
      Cplx* row = &K[static_cast<std::size_t>(i) * M];
      for (int j = 0; j < M; ++j)
        row[j] += num / (qsw - w[static_cast<std::size_t>(j)]);
    }
  }
  // Nystrom matrix I + K .* weights
  std::vector<Cplx> A(static_cast<std::size_t>(M) * M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      A[static_cast<std::size_t>(i) * M + j] =
          (i == j ? Cplx(1.0, 0.0) : Cplx(0.0, 0.0)) +
          K[static_cast<std::size_t>(i) * M + j] * wt[static_cast<std::size_t>(j)];
  return lu_det(A, M);
}

Cplx det_cauchy_raw(Cplx zeta, int n, long t, const Params& p,
                    const KernelConfig& cfg,
                    const std::vector<double>& mu_schedule, int M) {
  const Circle circ = cauchy_circle(p, cfg);
  std::vector<Cplx> w, wt;
  circ.nodes(M, w, wt);
  std::vector<Cplx> f(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i)
    f[static_cast<std::size_t>(i)] =
        g_ratio(w[static_cast<std::size_t>(i)], n, t, p, mu_schedule);
  std::vector<Cplx> A(static_cast<std::size_t>(M) * M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      A[static_cast<std::size_t>(i) * M + j] =
          (i == j ? Cplx(1.0, 0.0) : Cplx(0.0, 0.0)) +
          zeta * f[static_cast<std::size_t>(i)] /
              (p.q * w[static_cast<std::size_t>(j)] -
               w[static_cast<std::size_t>(i)]) *
              wt[static_cast<std::size_t>(j)];
  const Cplx det = lu_det(A, M);
  return det / qseries::qpoch_inf(zeta, p.q);
}

}  // namespace

Cplx det_mb(Cplx zeta, int n, long t, const Params& p, const KernelConfig& cfg,
            const std::vector<double>& mu_schedule, DetDiag* diag) {
  if (zeta == Cplx(0.0, 0.0)) return Cplx(1.0, 0.0);
  if (zeta.imag() == 0.0 && zeta.real() > 0.0)
    throw ConfigError("det_mb: zeta must avoid the positive real axis");
  int M = cfg.mb_nodes;
  int s_nodes = 0;
  Cplx prev = det_mb_raw(zeta, n, t, p, cfg, mu_schedule, M, cfg.s_step,
                         &s_nodes);
  for (int d = 0; d < 4; ++d) {
    const int M2 = 2 * M;
    if (M2 > 512) throw ConvergenceError("det_mb: node cap 512 reached");
    const Cplx cur = det_mb_raw(zeta, n, t, p, cfg, mu_schedule, M2,
                                cfg.s_step, &s_nodes);
    const double delta = std::abs(cur - prev);
    if (delta < std::max(cfg.tol, cfg.tol * std::abs(cur))) {
      if (diag) {
        diag->w_nodes = M2;
        diag->s_nodes = s_nodes;
        diag->last_delta = delta;
      }
      return cur;
    }
    prev = cur;
    M = M2;
  }
  throw ConvergenceError("det_mb: node doubling did not converge");
}

Cplx det_cauchy(Cplx zeta, int n, long t, const Params& p,
                const KernelConfig& cfg,
                const std::vector<double>& mu_schedule, DetDiag* diag) {
  if (zeta == Cplx(0.0, 0.0)) return Cplx(1.0, 0.0);
  int M = cfg.cauchy_nodes;
  Cplx prev = det_cauchy_raw(zeta, n, t, p, cfg, mu_schedule, M);
  for (int d = 0; d < 4; ++d) {
    const int M2 = 2 * M;
    if (M2 > 512) throw ConvergenceError("det_cauchy: node cap 512 reached");
    const Cplx cur = det_cauchy_raw(zeta, n, t, p, cfg, mu_schedule, M2);
    const double delta = std::abs(cur - prev);
    if (delta < std::max(cfg.tol, cfg.tol * std::abs(cur))) {
      if (diag) {
        diag->w_nodes = M2;
        diag->last_delta = delta;
      }
      return cur;
    }
    prev = cur;
    M = M2;
  }
  throw ConvergenceError("det_cauchy: node doubling did not converge");
}

Cplx laplace_series_oracle(Cplx zeta, int n, long t, const RatSchedule& sched,
                           int k_max, double tol) {
  Cplx sum(1.0, 0.0);
  Cplx zk(1.0, 0.0);
  const Rat q = sched.base.q;
  Rat qqk(1);  // (q;q)_k
  Rat qk = q;
  Cplx last(1.0, 0.0);
  for (int k = 1; k <= k_max; ++k) {
    zk *= zeta;
    qqk *= (1 - qk);
    qk *= q;
    const Rat mu_k = exact::qmoment_oracle(
        chains::Weyl(static_cast<std::size_t>(k), n), t, sched);
    last = zk * mu_k.get_d() / qqk.get_d();
    sum += last;
    if (std::abs(last) < tol * std::max(1.0, std::abs(sum))) return sum;
  }
  if (std::abs(last) > tol * std::max(1.0, std::abs(sum)))
    throw TruncationError("laplace_series_oracle: last term above tol");
  return sum;
}

long invert_support(long t, const chains::Schedule& sched,
                    double tail_target) {
  // Chernoff on X_1(t) = sum of t independent phi(.|inf) draws, which
  // dominates x_n(t)+n for every n. E[theta^J] evaluated with a certified
  // geometric remainder.
  double mu_max = 0.0;
  for (long s = 1; s <= std::max<long>(t, 1); ++s)
    mu_max = std::max(mu_max, sched.a_at(1) * sched.mu_at(s));
  if (mu_max == 0.0) return 0;
  const double theta = 0.5 * (1.0 + 1.0 / mu_max);
  double worst_mgf = 1.0;
  for (long s = 1; s <= std::max<long>(t, 1); ++s) {
    Params p{sched.base.q, sched.a_at(1) * sched.mu_at(s), sched.base.nu};
    double mgf = 0.0, thj = 1.0;
    long j = 0;
    for (; j < 2000; ++j) {
      mgf += qdist::phi_pmf_inf(j, p) * thj;
      thj *= theta;
      const double ratio = p.mu * theta / (1.0 - std::pow(p.q, double(j + 2)));
      if (ratio < 1.0 &&
          qdist::phi_pmf_inf(j, p) * thj * ratio / (1.0 - ratio) < 1e-18)
        break;
    }
    if (j >= 2000)
      throw TailBoundError("invert_support: mgf tail did not certify");
    worst_mgf = std::max(worst_mgf, mgf * 1.0000001);
  }
  for (long S = 1; S <= 4000; ++S) {
    if (double(t) * std::log(worst_mgf) - double(S) * std::log(theta) <
        std::log(tail_target))
      return S;
  }
  throw TailBoundError("invert_support: no S below cap meets tail target");
}

InvertResult invert_distribution(int n, long t, const RatSchedule& sched,
                                 long support_cap, double tail_target) {
  const chains::Schedule dsched = chains::to_double(sched);
  const long S = support_cap > 0 ? support_cap
                                 : invert_support(t, dsched, tail_target);
  if (S > 400) throw CapacityError("invert_distribution: support cap too large");

  std::vector<Rat> mu(static_cast<std::size_t>(S) + 1);
  mu[0] = 1;
  for (long k = 1; k <= S; ++k)
    mu[static_cast<std::size_t>(k)] = exact::qmoment_oracle(
        chains::Weyl(static_cast<std::size_t>(k), n), t, sched);

  // P(s) = sum_k c_{s,k} mu_k with c the coefficients of the Lagrange
  // polynomial ell_s over nodes q^0..q^S: ell_s(q^X) = delta_{X,s} on the
  // truncated support.
  const Rat q = sched.base.q;
  std::vector<Rat> node(static_cast<std::size_t>(S) + 1);
  node[0] = 1;
  for (long s = 1; s <= S; ++s)
    node[static_cast<std::size_t>(s)] = node[static_cast<std::size_t>(s - 1)] * q;

  InvertResult out;
  out.pmf.resize(static_cast<std::size_t>(S) + 1);
  for (long s = 0; s <= S; ++s) {
    // coefficients of prod_{r != s} (x - x_r) by incremental multiplication
    std::vector<Rat> coef(1, Rat(1));
    Rat den(1);
    for (long r = 0; r <= S; ++r) {
      if (r == s) continue;
      coef.push_back(Rat(0));
      for (std::size_t d = coef.size() - 1; d >= 1; --d)
        coef[d] = coef[d - 1] - node[static_cast<std::size_t>(r)] * coef[d];
      coef[0] *= -node[static_cast<std::size_t>(r)];
      den *= node[static_cast<std::size_t>(s)] - node[static_cast<std::size_t>(r)];
    }
    Rat acc(0);
    for (std::size_t d = 0; d < coef.size(); ++d) acc += coef[d] * mu[d];
    out.pmf[static_cast<std::size_t>(s)] = acc / den;
  }

  Rat total(0);
  for (const auto& v : out.pmf) total += v;
  Rat defect = 1 - total;
  if (defect < 0) defect = -defect;
  out.defect = defect.get_d();

  // certified neglected mass
  out.tail_bound = tail_target;
  if (support_cap > 0) {
    // user-supplied cap: recompute the certificate for this S
    long s_needed = invert_support(t, dsched, tail_target);
    if (s_needed > S)
      out.tail_bound = 1.0;  // not certified at this cap
  }
  return out;
}

MhadpReport mhadp_checks(Cplx w, double tau, double q,
                         const std::vector<double>& eps_list, int jmax,
                         int m) {
  qseries::require_q(q);
  MhadpReport rep;
  rep.eps = eps_list;

  // exponential limit exp(-tau (1-q) sum_i q^i w / (1 - q^{i+1} w))
  Cplx S(0.0, 0.0);
  double qi = 1.0;
  for (int i = 0; i < 2000; ++i) {
    S += qi * w / (Cplx(1.0, 0.0) - q * qi * w);
    qi *= q;
    if (qi * std::abs(w) < 1e-18) break;
  }
  const Cplx limit = std::exp(-tau * (1.0 - q) * S);

  for (double eps : eps_list) {
    const double nu = (q - eps) / (1.0 - eps);
    const long t = std::lround(tau / eps);
    const Cplx ratio = qseries::qpoch_inf(q * w, q, 1e-16) /
                       qseries::qpoch_inf(nu * w, q, 1e-16);
    rep.g_residual.push_back(std::abs(ipow(ratio, t) - limit));

    Params p{q, q, nu};
    std::vector<double> rr;
    for (int j = 1; j <= jmax && j <= m; ++j) {
      const double rate = (1.0 - 1.0 / q) / (1.0 - std::pow(q, -double(j)));
      rr.push_back(std::abs(qdist::phi_pmf<double>(j, m, p) / eps - rate));
    }
    rep.rate_residual.push_back(std::move(rr));
  }
  return rep;
}

}  // namespace qmn::fredholm
