#include "qmn/contour.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

namespace qmn::contour {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Nodes {
  std::vector<Cplx> z;
  std::vector<Cplx> w;  // dz/(2 pi i) * (2 pi / M), trapezoid weight
};

Nodes curve_nodes(const Curve& c, int M) {
  Nodes n;
  n.z.resize(static_cast<std::size_t>(M));
  n.w.resize(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    const double th = 2.0 * kPi * (i + 0.5) / M;
    n.z[static_cast<std::size_t>(i)] =
        Cplx(c.cx + c.ax * std::cos(th), c.b * std::sin(th));
    n.w[static_cast<std::size_t>(i)] =
        Cplx(c.b * std::cos(th), c.ax * std::sin(th)) / double(M);
  }
  return n;
}

bool inside(const Curve& c, Cplx p, double margin = 0.0) {
  const double dx = (p.real() - c.cx) / c.ax;
  const double dy = p.imag() / c.b;
  return dx * dx + dy * dy < (1.0 - margin) * (1.0 - margin);
}

bool outside(const Curve& c, Cplx p, double margin = 0.0) {
  const double dx = (p.real() - c.cx) / c.ax;
  const double dy = p.imag() / c.b;
  return dx * dx + dy * dy > (1.0 + margin) * (1.0 + margin);
}

}  // namespace

ContourSpec plan_contours(int k, double q, double nu, double delta,
                          double eps) {
  if (k < 1) throw DomainError("plan_contours: k >= 1 required");
  qseries::require_q(q);
  if (!(nu >= 0.0 && nu < 1.0)) throw DomainError("plan_contours: nu in [0,1)");
  std::vector<double> r(static_cast<std::size_t>(k));
  r[static_cast<std::size_t>(k) - 1] = eps;
  for (int j = k - 2; j >= 0; --j)
    r[static_cast<std::size_t>(j)] =
        (1.0 - q) + q * r[static_cast<std::size_t>(j) + 1] + delta;
  const double lim = (nu > 0.0 ? std::min(1.0, 1.0 / nu - 1.0) : 1.0) - delta;
  if (!(r[0] < lim)) {
    std::ostringstream os;
    os << "plan_contours infeasible: r_1 = " << r[0]
       << " must be < min(1, 1/nu - 1) - delta = " << lim;
    throw ContourInfeasible(os.str());
  }
  ContourSpec spec;
  for (double ri : r) spec.curves.push_back({1.0, ri, ri});
  spec.nodes = 256;
  return spec;
}

ContourSpec plan_contours_auto(int k, double q, double nu) {
  if (k < 1) throw DomainError("plan_contours_auto: k >= 1 required");
  qseries::require_q(q);
  if (!(nu >= 0.0 && nu < 1.0))
    throw DomainError("plan_contours_auto: nu in [0,1)");
  const double lim = nu > 0.0 ? 1.0 / nu : 1e9;  // right edge must stay below
  // innermost: circle around 1
  const double r0 = std::min(0.2, 0.35 * (lim - 1.0));
  if (r0 < 1e-3)
    throw ContourInfeasible("plan_contours_auto: 1/nu too close to 1");
  ContourSpec spec;
  spec.curves.assign(1, Curve{1.0, r0, r0});
  for (int j = 1; j < k; ++j) {
    const Curve& ch = spec.curves.front();  // child = previously outermost
    const double qL = q * (ch.cx - ch.ax);
    const double qR = q * (ch.cx + ch.ax);
    const double qb = q * ch.b;
    const double m = std::min({0.05, 0.3 * qL, 0.2 * (lim - 1.0)});
    if (m < 1e-4)
      throw ContourInfeasible(
          "plan_contours_auto: no room between q-image and 0");
    const double L = qL - m;
    const double R = std::max(1.0 + r0, qR + m);
    if (R >= lim - m)
      throw ContourInfeasible("plan_contours_auto: right edge reaches 1/nu");
    // fat ellipse: wide margins in the Joukowski metric for the trapezoid
    const double b = std::max(qb + m, 0.18);
    spec.curves.insert(spec.curves.begin(),
                       Curve{0.5 * (L + R), 0.5 * (R - L), b});
  }
  spec.nodes = 128;
  return spec;
}

void check_contours(const ContourSpec& spec, double q, double nu,
                    double margin) {
  const int k = static_cast<int>(spec.curves.size());
  for (int j = 0; j < k; ++j) {
    const Curve& c = spec.curves[static_cast<std::size_t>(j)];
    if (!(c.ax > 0 && c.b > 0))
      throw ContourInfeasible("check_contours: degenerate curve");
    if (!inside(c, Cplx(1.0, 0.0), margin))
      throw ContourInfeasible("check_contours: curve does not contain 1");
    if (!outside(c, Cplx(0.0, 0.0), margin))
      throw ContourInfeasible("check_contours: curve does not exclude 0");
    if (nu > 0.0 && !outside(c, Cplx(1.0 / nu, 0.0), margin))
      throw ContourInfeasible("check_contours: curve does not exclude 1/nu");
  }
  const int samples = 720;
  for (int a = 0; a < k; ++a) {
    for (int bidx = a + 1; bidx < k; ++bidx) {
      const Curve& ca = spec.curves[static_cast<std::size_t>(a)];
      const Curve& cb = spec.curves[static_cast<std::size_t>(bidx)];
      for (int i = 0; i < samples; ++i) {
        const double th = 2.0 * kPi * i / samples;
        const Cplx zb(cb.cx + cb.ax * std::cos(th), cb.b * std::sin(th));
        if (!inside(ca, q * zb, margin))
          throw ContourInfeasible(
              "check_contours: gamma_A does not contain q*gamma_B");
      }
    }
  }
}

namespace {

/// Per-variable integrand factor ((1-nu z)/(1-z))^{n_j} T(z) / (z(1-nu z))
/// times the node weight; T is the time factor.
std::vector<Cplx> variable_factor(const Nodes& nd, int n_j,
                                  const ObservableSpec& obs, const Params& p) {
  std::vector<Cplx> f(nd.z.size());
  for (std::size_t i = 0; i < nd.z.size(); ++i) {
    const Cplx z = nd.z[i];
    const Cplx one(1.0, 0.0);
    Cplx v = ipow((one - p.nu * z) / (one - z), n_j);
    if (obs.mu_schedule.empty()) {
      v *= ipow((one - p.mu * z) / (one - p.nu * z), obs.t);
    } else {
      for (long s = 1; s <= obs.t; ++s)
        v *= (one - obs.mu_schedule[static_cast<std::size_t>(s - 1)] * z) /
             (one - p.nu * z);
    }
    f[i] = v / (z * (one - p.nu * z)) * nd.w[i];
  }
  return f;
}

Cplx cross(Cplx za, Cplx zb, double q) { return (za - zb) / (za - q * zb); }

}  // namespace

Cplx qmoment_contour_raw(const ObservableSpec& obs, const Params& p,
                         const ContourSpec& spec, int M) {
  p.validate();
  const int k = static_cast<int>(obs.nvec.size());
  if (k < 1) throw DomainError("qmoment_contour: empty nvec");
  if (static_cast<int>(spec.curves.size()) != k)
    throw ConfigError("qmoment_contour: curve count != k");
  if (k > 4) throw CapacityError("qmoment_contour: k > 4 unsupported");
  if (!obs.mu_schedule.empty() &&
      static_cast<long>(obs.mu_schedule.size()) < obs.t)
    throw ScheduleError("qmoment_contour: mu_schedule shorter than t");

  std::vector<Nodes> nd;
  std::vector<std::vector<Cplx>> F;
  for (int j = 0; j < k; ++j) {
    nd.push_back(curve_nodes(spec.curves[static_cast<std::size_t>(j)], M));
    F.push_back(variable_factor(nd.back(), obs.nvec[static_cast<std::size_t>(j)],
                                obs, p));
  }

  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  const Cplx pref = sign * std::pow(p.q, 0.5 * double(k) * double(k - 1));

  if (k == 1) {
    Cplx s(0.0, 0.0);
    for (const auto& v : F[0]) s += v;
    return pref * s;
  }

  // pairwise cross-factor tables
  auto cross_table = [&](int A, int B) {
    std::vector<Cplx> tab(static_cast<std::size_t>(M) * M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        tab[static_cast<std::size_t>(i) * M + j] =
            cross(nd[static_cast<std::size_t>(A)].z[static_cast<std::size_t>(i)],
                  nd[static_cast<std::size_t>(B)].z[static_cast<std::size_t>(j)],
                  p.q);
    return tab;
  };

  if (k == 2) {
    const auto c01 = cross_table(0, 1);
    Cplx s(0.0, 0.0);
    for (int i = 0; i < M; ++i) {
      Cplx row(0.0, 0.0);
      for (int j = 0; j < M; ++j)
        row += F[1][static_cast<std::size_t>(j)] *
               c01[static_cast<std::size_t>(i) * M + j];
      s += F[0][static_cast<std::size_t>(i)] * row;
    }
    return pref * s;
  }

  if (k == 3) {
    const auto c01 = cross_table(0, 1);
    const auto c02 = cross_table(0, 2);
    const auto c12 = cross_table(1, 2);
    Cplx s(0.0, 0.0);
    std::vector<Cplx> g(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
      // g[l] = F3[l] * c02[i,l]
      for (int l = 0; l < M; ++l)
        g[static_cast<std::size_t>(l)] = F[2][static_cast<std::size_t>(l)] *
                                         c02[static_cast<std::size_t>(i) * M + l];
      Cplx si(0.0, 0.0);
      for (int j = 0; j < M; ++j) {
        Cplx inner(0.0, 0.0);
        const Cplx* c12row = &c12[static_cast<std::size_t>(j) * M];
        for (int l = 0; l < M; ++l)
          inner += g[static_cast<std::size_t>(l)] * c12row[l];
        si += F[1][static_cast<std::size_t>(j)] *
              c01[static_cast<std::size_t>(i) * M + j] * inner;
      }
      s += F[0][static_cast<std::size_t>(i)] * si;
    }
    return pref * s;
  }

  // k == 4: straightforward nested loops
  const auto c01 = cross_table(0, 1);
  const auto c02 = cross_table(0, 2);
  const auto c03 = cross_table(0, 3);
  const auto c12 = cross_table(1, 2);
  const auto c13 = cross_table(1, 3);
  const auto c23 = cross_table(2, 3);
  Cplx s(0.0, 0.0);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const Cplx pij = F[0][static_cast<std::size_t>(i)] *
                       F[1][static_cast<std::size_t>(j)] *
                       c01[static_cast<std::size_t>(i) * M + j];
      Cplx sij(0.0, 0.0);
      for (int l = 0; l < M; ++l) {
        const Cplx pl = F[2][static_cast<std::size_t>(l)] *
                        c02[static_cast<std::size_t>(i) * M + l] *
                        c12[static_cast<std::size_t>(j) * M + l];
        Cplx inner(0.0, 0.0);
        for (int mI = 0; mI < M; ++mI)
          inner += F[3][static_cast<std::size_t>(mI)] *
                   c03[static_cast<std::size_t>(i) * M + mI] *
                   c13[static_cast<std::size_t>(j) * M + mI] *
                   c23[static_cast<std::size_t>(l) * M + mI];
        sij += pl * inner;
      }
      s += pij * sij;
    }
  return pref * s;
}

std::vector<Cplx> qmoment_contour_batch(const std::vector<ObservableSpec>& obs,
                                        const Params& p,
                                        const ContourSpec& spec, int M,
                                        int threads) {
  p.validate();
  const int k = static_cast<int>(spec.curves.size());
  std::vector<Cplx> out(obs.size());
  if (obs.empty()) return out;
  for (const auto& o : obs)
    if (static_cast<int>(o.nvec.size()) != k)
      throw ConfigError("qmoment_contour_batch: mixed k");
  if (k > 3) {
    for (std::size_t i = 0; i < obs.size(); ++i)
      out[i] = qmoment_contour_raw(obs[i], p, spec, M);
    return out;
  }

  std::vector<Nodes> nd;
  for (int j = 0; j < k; ++j)
    nd.push_back(curve_nodes(spec.curves[static_cast<std::size_t>(j)], M));

  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  const Cplx pref = sign * std::pow(p.q, 0.5 * double(k) * double(k - 1));

  if (k == 1) {
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const auto F = variable_factor(nd[0], obs[i].nvec[0], obs[i], p);
      Cplx s(0, 0);
      for (const auto& v : F) s += v;
      out[i] = pref * s;
    }
    return out;
  }

  auto cross_table = [&](int A, int B) {
    std::vector<Cplx> tab(static_cast<std::size_t>(M) * M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        tab[static_cast<std::size_t>(i) * M + j] =
            cross(nd[static_cast<std::size_t>(A)].z[static_cast<std::size_t>(i)],
                  nd[static_cast<std::size_t>(B)].z[static_cast<std::size_t>(j)],
                  p.q);
    return tab;
  };

  if (k == 2) {
    const auto c01 = cross_table(0, 1);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const auto F0 = variable_factor(nd[0], obs[i].nvec[0], obs[i], p);
      const auto F1 = variable_factor(nd[1], obs[i].nvec[1], obs[i], p);
      Cplx s(0, 0);
      for (int a = 0; a < M; ++a) {
        Cplx row(0, 0);
        const Cplx* cr = &c01[static_cast<std::size_t>(a) * M];
        for (int b = 0; b < M; ++b) row += F1[static_cast<std::size_t>(b)] * cr[b];
        s += F0[static_cast<std::size_t>(a)] * row;
      }
      out[i] = pref * s;
    }
    return out;
  }

  // k == 3: group by (n_1, t); the G[j,l] contraction is shared per group
  const auto c01 = cross_table(0, 1);
  const auto c02 = cross_table(0, 2);
  const auto c12 = cross_table(1, 2);
  std::map<std::pair<int, long>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < obs.size(); ++i)
    groups[{obs[i].nvec[0], obs[i].t}].push_back(i);
  std::vector<std::vector<std::size_t>> glist;
  for (auto& [key, idx] : groups) glist.push_back(std::move(idx));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::vector<Cplx> G(static_cast<std::size_t>(M) * M);
    for (;;) {
      const std::size_t gi = next.fetch_add(1);
      if (gi >= glist.size()) break;
      const auto& members = glist[gi];
      const auto& first = obs[members.front()];
      const auto F0 = variable_factor(nd[0], first.nvec[0], first, p);
      for (int j = 0; j < M; ++j)
        for (int l = 0; l < M; ++l) G[static_cast<std::size_t>(j) * M + l] = Cplx(0, 0);
      for (int i = 0; i < M; ++i) {
        const Cplx f0 = F0[static_cast<std::size_t>(i)];
        const Cplx* r01 = &c01[static_cast<std::size_t>(i) * M];
        const Cplx* r02 = &c02[static_cast<std::size_t>(i) * M];
        for (int j = 0; j < M; ++j) {
          const Cplx fj = f0 * r01[j];
          Cplx* grow = &G[static_cast<std::size_t>(j) * M];
          for (int l = 0; l < M; ++l) grow[l] += fj * r02[l];
        }
      }
      for (std::size_t mi : members) {
        const auto& o = obs[mi];
        const auto F1 = variable_factor(nd[1], o.nvec[1], o, p);
        const auto F2 = variable_factor(nd[2], o.nvec[2], o, p);
        Cplx s(0, 0);
        for (int j = 0; j < M; ++j) {
          const Cplx* grow = &G[static_cast<std::size_t>(j) * M];
          const Cplx* crow = &c12[static_cast<std::size_t>(j) * M];
          Cplx inner(0, 0);
          for (int l = 0; l < M; ++l)
            inner += F2[static_cast<std::size_t>(l)] * grow[l] * crow[l];
          s += F1[static_cast<std::size_t>(j)] * inner;
        }
        out[mi] = pref * s;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

Cplx qmoment_contour(const ObservableSpec& obs, const Params& p,
                     const ContourSpec& spec, double tol, QuadratureDiag* diag,
                     int max_doublings) {
  int M = spec.nodes;
  Cplx prev = qmoment_contour_raw(obs, p, spec, M);
  for (int d = 0; d < max_doublings; ++d) {
    const int M2 = 2 * M;
    const Cplx cur = qmoment_contour_raw(obs, p, spec, M2);
    const double delta = std::abs(cur - prev);
    if (delta < std::max(tol, tol * std::abs(cur))) {
      if (diag) {
        diag->nodes_used = M2;
        diag->imag_part = cur.imag();
        diag->last_delta = delta;
      }
      return cur;
    }
    prev = cur;
    M = M2;
  }
  throw ConvergenceError("qmoment_contour: node doubling did not converge");
}

double check_free_evolution(const ObservableSpec& obs, const Params& p,
                            const ContourSpec& spec, double tol) {
  const int k = static_cast<int>(obs.nvec.size());
  const double mu_next =
      obs.mu_schedule.empty()
          ? p.mu
          : obs.mu_schedule[static_cast<std::size_t>(obs.t)];
  const double a = (mu_next - p.nu) / (1.0 - p.nu);
  const double b = (1.0 - mu_next) / (1.0 - p.nu);

  ObservableSpec next = obs;
  next.t = obs.t + 1;
  const Cplx lhs = qmoment_contour(next, p, spec, tol);

  Cplx rhs(0.0, 0.0);
  for (int mask = 0; mask < (1 << k); ++mask) {
    ObservableSpec shifted = obs;
    double coef = 1.0;
    for (int i = 0; i < k; ++i) {
      if (mask & (1 << i)) {
        shifted.nvec[static_cast<std::size_t>(i)] -= 1;
        coef *= a;
      } else {
        coef *= b;
      }
    }
    rhs += coef * qmoment_contour(shifted, p, spec, tol);
  }
  return std::abs(lhs - rhs);
}

double check_boundary(const ObservableSpec& obs, int i, const Params& p,
                      const ContourSpec& spec, double tol) {
  const int k = static_cast<int>(obs.nvec.size());
  if (i < 1 || i >= k) throw DomainError("check_boundary: pair index");
  if (obs.nvec[static_cast<std::size_t>(i - 1)] !=
      obs.nvec[static_cast<std::size_t>(i)])
    throw DomainError("check_boundary: requires n_i = n_{i+1}");
  const auto u = [&](const std::vector<int>& n) {
    ObservableSpec o = obs;
    o.nvec = n;
    return qmoment_contour(o, p, spec, tol);
  };
  const double alpha = p.nu * (1.0 - p.q) / (1.0 - p.q * p.nu);
  const double beta = (p.q - p.nu) / (1.0 - p.q * p.nu);
  const double gamma = (1.0 - p.q) / (1.0 - p.q * p.nu);

  auto n_both = obs.nvec, n_ip1 = obs.nvec, n_i = obs.nvec;
  n_both[static_cast<std::size_t>(i - 1)] -= 1;
  n_both[static_cast<std::size_t>(i)] -= 1;
  n_ip1[static_cast<std::size_t>(i)] -= 1;
  n_i[static_cast<std::size_t>(i - 1)] -= 1;

  const Cplx comb = alpha * u(n_both) + beta * u(n_ip1) + gamma * u(obs.nvec) -
                    u(n_i);
  return std::abs(comb);
}

}  // namespace qmn::contour
