#include "qmn/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmn::exact {

namespace {

long binom(long n, long r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  long v = 1;
  for (long i = 1; i <= r; ++i) v = v * (n - r + i) / i;
  return v;
}

void enum_rec(int slots, long rem, Occupation& cur,
              std::vector<Occupation>& out) {
  if (slots == 1) {
    cur.push_back(rem);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (long v = 0; v <= rem; ++v) {
    cur.push_back(v);
    enum_rec(slots - 1, rem - v, cur, out);
    cur.pop_back();
  }
}

/// phi(j|m) rows cached per distinct mu value.
class PhiCache {
 public:
  PhiCache(const Rat& q, const Rat& nu) : q_(q), nu_(nu) {}

  const Rat& at(const Rat& mu, long j, long m) {
    auto& rows = table_[mu];
    if (m >= static_cast<long>(rows.size())) rows.resize(m + 1);
    auto& row = rows[static_cast<std::size_t>(m)];
    if (row.empty()) {
      row.reserve(m + 1);
      RatParams p{q_, mu, nu_};
      for (long jj = 0; jj <= m; ++jj)
        row.push_back(qdist::phi_pmf<Rat>(jj, m, p));
    }
    return row[static_cast<std::size_t>(j)];
  }

 private:
  Rat q_, nu_;
  std::map<Rat, std::vector<std::vector<Rat>>> table_;
};

}  // namespace

StateSpace enumerate_states(int N, long k, long cap) {
  if (N < 1 || k < 0) throw DomainError("enumerate_states: need N>=1, k>=0");
  if (binom(N + k, k) > cap)
    throw CapacityError("enumerate_states: |Y^N_k| over cap");
  StateSpace s;
  s.N = N;
  s.k = k;
  Occupation cur;
  enum_rec(N + 1, k, cur, s.states);
  for (std::size_t i = 0; i < s.states.size(); ++i)
    s.index[s.states[i]] = static_cast<int>(i);
  return s;
}

BosonMatrix boson_matrix(const StateSpace& space, const RatSchedule& sched,
                         long t, bool reversed_order) {
  BosonMatrix m;
  m.space = &space;
  m.rows.resize(space.states.size());
  PhiCache phi(sched.base.q, sched.base.nu);

  const int N = space.N;
  std::vector<Rat> site_mu(static_cast<std::size_t>(N) + 1);
  for (int i = 1; i <= N; ++i) {
    site_mu[static_cast<std::size_t>(i)] =
        sched.site_params(static_cast<std::size_t>(i), t).mu;
  }

  for (std::size_t r = 0; r < space.states.size(); ++r) {
    const Occupation& y = space.states[r];
    std::map<int, Rat> row;
    // enumerate s-tuples (s_1..s_N), s_i <= y_i, with an odometer; the
    // per-site operator order only changes the multiplication order below
    std::vector<long> sv(static_cast<std::size_t>(N), 0);
    for (;;) {
      Rat p(1);
      if (reversed_order) {
        for (int i = N; i >= 1; --i)
          p *= phi.at(site_mu[static_cast<std::size_t>(i)],
                      sv[static_cast<std::size_t>(i - 1)],
                      y[static_cast<std::size_t>(i)]);
      } else {
        for (int i = 1; i <= N; ++i)
          p *= phi.at(site_mu[static_cast<std::size_t>(i)],
                      sv[static_cast<std::size_t>(i - 1)],
                      y[static_cast<std::size_t>(i)]);
      }
      if (p != 0) {
        Occupation dst(y);
        for (int i = 1; i <= N; ++i) {
          dst[static_cast<std::size_t>(i)] -= sv[static_cast<std::size_t>(i - 1)];
          dst[static_cast<std::size_t>(i - 1)] += sv[static_cast<std::size_t>(i - 1)];
        }
        row[space.at(dst)] += p;
      }
      int pos = 0;
      while (pos < N) {
        if (sv[static_cast<std::size_t>(pos)] <
            y[static_cast<std::size_t>(pos) + 1]) {
          ++sv[static_cast<std::size_t>(pos)];
          break;
        }
        sv[static_cast<std::size_t>(pos)] = 0;
        ++pos;
      }
      if (pos == N) break;
    }
    auto& out = m.rows[r];
    out.assign(row.begin(), row.end());
  }
  return m;
}

ExactVector evolve_true(const StateSpace& space, ExactVector h, long t,
                        const RatSchedule& sched) {
  if (h.size() != space.states.size())
    throw DomainError("evolve_true: h0 not defined on the enumerated space");
  if (sched.is_constant()) {
    const BosonMatrix m = boson_matrix(space, sched, 1);
    for (long step = 0; step < t; ++step) {
      ExactVector nh(h.size());
      for (std::size_t r = 0; r < m.rows.size(); ++r) {
        Rat acc(0);
        for (const auto& [j, c] : m.rows[r]) acc += c * h[static_cast<std::size_t>(j)];
        nh[r] = acc;
      }
      h.swap(nh);
    }
    return h;
  }
  for (long step = 1; step <= t; ++step) {
    const BosonMatrix m = boson_matrix(space, sched, step);
    ExactVector nh(h.size());
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      Rat acc(0);
      for (const auto& [j, c] : m.rows[r]) acc += c * h[static_cast<std::size_t>(j)];
      nh[r] = acc;
    }
    h.swap(nh);
  }
  return h;
}

Rat h_functional(const Positions& x, const Occupation& y, const Rat& q) {
  if (y.size() != x.size() + 1)
    throw DomainError("h_functional: inconsistent N");
  if (y[0] > 0) return Rat(0);
  long e = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    e += y[i] * (x[i - 1] + static_cast<long>(i));
  return rat_pow(q, e);
}

Rat qmoment_oracle(const Weyl& nvec, long t, const RatSchedule& sched,
                   long cap) {
  if (nvec.empty()) return Rat(1);
  for (std::size_t i = 0; i + 1 < nvec.size(); ++i)
    if (nvec[i] < nvec[i + 1])
      throw DomainError("qmoment_oracle: nvec not weakly decreasing");
  if (nvec.back() < 0) throw DomainError("qmoment_oracle: negative n_i");
  if (nvec.back() == 0) return Rat(0);  // y_0 > 0 forces H = 0
  const int N = nvec.front();
  const long k = static_cast<long>(nvec.size());
  const StateSpace space = enumerate_states(N, k, cap);
  ExactVector h0(space.states.size());
  for (std::size_t i = 0; i < space.states.size(); ++i)
    h0[i] = space.states[i][0] == 0 ? Rat(1) : Rat(0);
  const ExactVector h = evolve_true(space, std::move(h0), t, sched);
  return h[static_cast<std::size_t>(
      space.at(chains::weyl_to_occupation(nvec, N)))];
}

BoundaryCoeffs boundary_coeffs(const Rat& q, const Rat& nu) {
  const Rat den = 1 - q * nu;
  if (den == 0) throw DomainError("boundary_coeffs: 1 - q nu = 0");
  return {nu * (1 - q) / den, (q - nu) / den, (1 - q) / den};
}

// ---------------------------------------------------------------------------
// Intertwining
// ---------------------------------------------------------------------------

namespace {

/// Strictly decreasing x-configurations reachable from step initial data
/// (x_i >= -i, so H <= 1 on the grid) with x_1 <= w, at stride.
std::vector<Positions> x_grid(int N, long w, long stride) {
  std::vector<Positions> out;
  Positions cur;
  long count = 0;
  std::function<void(long)> rec = [&](long next_max) {
    if (static_cast<int>(cur.size()) == N) {
      if (count++ % stride == 0) out.push_back(cur);
      return;
    }
    const long floor = -(static_cast<long>(cur.size()) + 1);
    for (long v = next_max; v >= floor; --v) {
      cur.push_back(v);
      rec(v - 1);
      cur.pop_back();
    }
  };
  rec(w);
  return out;
}

std::vector<Occupation> all_states_up_to(int N, long k_max) {
  std::vector<Occupation> out;
  for (long k = 0; k <= k_max; ++k) {
    auto s = enumerate_states(N, k);
    out.insert(out.end(), s.states.begin(), s.states.end());
  }
  return out;
}

}  // namespace

IntertwineReport verify_intertwining_exact(const RatSchedule& sched,
                                           const IntertwineOptions& opt) {
  IntertwineReport rep;
  const int N = opt.N;
  const Rat q = sched.base.q;
  PhiCache phi(q, sched.base.nu);
  std::vector<Rat> site_mu(static_cast<std::size_t>(N) + 1);
  for (int i = 1; i <= N; ++i)
    site_mu[static_cast<std::size_t>(i)] =
        sched.site_params(static_cast<std::size_t>(i), opt.t).mu;

  auto qpow = [&](long e) { return rat_pow(q, e); };

  const auto ys = all_states_up_to(N, opt.k_max);
  const auto xs = x_grid(N, opt.window, opt.x_stride);

  // Precompute per-y Boson one-step successor lists.
  struct Succ {
    Occupation y2;
    Rat p;
  };
  std::vector<std::vector<Succ>> succs(ys.size());
  for (std::size_t yi = 0; yi < ys.size(); ++yi) {
    const Occupation& y = ys[yi];
    std::vector<long> sv(static_cast<std::size_t>(N), 0);
    for (;;) {
      Rat p(1);
      for (int i = 1; i <= N; ++i)
        p *= phi.at(site_mu[static_cast<std::size_t>(i)],
                    sv[static_cast<std::size_t>(i - 1)],
                    y[static_cast<std::size_t>(i)]);
      if (p != 0) {
        Occupation dst(y);
        for (int i = 1; i <= N; ++i) {
          dst[static_cast<std::size_t>(i)] -= sv[static_cast<std::size_t>(i - 1)];
          dst[static_cast<std::size_t>(i - 1)] += sv[static_cast<std::size_t>(i - 1)];
        }
        succs[yi].push_back({std::move(dst), std::move(p)});
      }
      int pos = 0;
      while (pos < N) {
        if (sv[static_cast<std::size_t>(pos)] < y[static_cast<std::size_t>(pos) + 1]) {
          ++sv[static_cast<std::size_t>(pos)];
          break;
        }
        sv[static_cast<std::size_t>(pos)] = 0;
        ++pos;
      }
      if (pos == N) break;
    }
  }

  Rat max_res(0);
  for (const auto& x : xs) {
    for (std::size_t yi = 0; yi < ys.size(); ++yi) {
      const Occupation& y = ys[yi];
      // LHS = E_x[H(x(1), y)] = H(x,y) * prod_i S-factor(i); the first
      // particle's infinite sum is phi_{a_1 mu_t}(0|y_1) in closed form.
      Rat lhs(0);
      const Rat hxy = h_functional(x, y, q);
      if (hxy != 0) {
        Rat factor = qseries::qpoch(site_mu[1], q, y[1]) /
                     qseries::qpoch(sched.base.nu, q, y[1]);
        for (int i = 2; i <= N; ++i) {
          const long gap = x[static_cast<std::size_t>(i) - 2] -
                           x[static_cast<std::size_t>(i) - 1] - 1;
          Rat s(0);
          const Rat qy = qpow(y[static_cast<std::size_t>(i)]);
          Rat qjy(1);
          for (long j = 0; j <= gap; ++j) {
            s += phi.at(site_mu[static_cast<std::size_t>(i)], j, gap) * qjy;
            qjy *= qy;
          }
          factor *= s;
        }
        lhs = hxy * factor;
      }
      // RHS = sum_{y'} P(y -> y') H(x, y')
      Rat rhs(0);
      for (const auto& sc : succs[yi]) {
        const Rat h = h_functional(x, sc.y2, q);
        if (h != 0) rhs += sc.p * h;
      }
      Rat d = lhs - rhs;
      if (d < 0) d = -d;
      if (d != 0) rep.exact_zero = false;
      if (d > max_res) max_res = d;
      ++rep.pairs;
    }
  }
  rep.max_residual = max_res.get_d();
  return rep;
}

IntertwineReport verify_intertwining_float(const chains::Schedule& sched,
                                           const IntertwineOptions& opt) {
  IntertwineReport rep;
  rep.exact_zero = false;
  const int N = opt.N;
  const double q = sched.base.q;
  const double nu = sched.base.nu;

  std::vector<Params> site(static_cast<std::size_t>(N) + 1);
  for (int i = 1; i <= N; ++i)
    site[static_cast<std::size_t>(i)] =
        sched.site_params(static_cast<std::size_t>(i), opt.t);

  // cache phi rows (float)
  std::vector<std::vector<std::vector<double>>> rows(
      static_cast<std::size_t>(N) + 1);
  auto phi_at = [&](int i, long j, long m) -> double {
    auto& tab = rows[static_cast<std::size_t>(i)];
    if (m >= static_cast<long>(tab.size())) tab.resize(m + 1);
    auto& row = tab[static_cast<std::size_t>(m)];
    if (row.empty()) {
      row.reserve(m + 1);
      for (long jj = 0; jj <= m; ++jj)
        row.push_back(qdist::phi_pmf<double>(jj, m, site[static_cast<std::size_t>(i)]));
    }
    return row[static_cast<std::size_t>(j)];
  };

  const auto ys = all_states_up_to(N, opt.k_max);
  const auto xs = x_grid(N, opt.window, opt.x_stride);

  auto h_fun = [&](const Positions& x, const Occupation& y) -> double {
    if (y[0] > 0) return 0.0;
    long e = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
      e += y[i] * (x[i - 1] + static_cast<long>(i));
    return std::pow(q, double(e));
  };

  double max_res = 0.0;
  for (const auto& x : xs) {
    for (const auto& y : ys) {
      double lhs = 0.0;
      const double hxy = h_fun(x, y);
      if (hxy != 0.0) {
        // first particle: truncated infinite sum with certified tail
        double s1 = 0.0;
        {
          const double qy = std::pow(q, double(y[1]));
          double qjy = 1.0;
          long J = 0;
          for (;; ++J) {
            s1 += qdist::phi_pmf_inf(J, site[1]) * qjy;
            qjy *= qy;
            if (J > 4 &&
                qdist::inf_tail_bound(J, y[1], site[1]) < opt.tail_tol)
              break;
            if (J > qdist::Sampler::kCap)
              throw TailBoundError(
                  "verify_intertwining_float: tail bound not met");
          }
        }
        double factor = s1;
        for (int i = 2; i <= N; ++i) {
          const long gap = x[static_cast<std::size_t>(i) - 2] -
                           x[static_cast<std::size_t>(i) - 1] - 1;
          double s = 0.0;
          const double qy = std::pow(q, double(y[static_cast<std::size_t>(i)]));
          double qjy = 1.0;
          for (long j = 0; j <= gap; ++j) {
            s += phi_at(i, j, gap) * qjy;
            qjy *= qy;
          }
          factor *= s;
        }
        lhs = hxy * factor;
      }
      double rhs = 0.0;
      std::vector<long> sv(static_cast<std::size_t>(N), 0);
      for (;;) {
        double p = 1.0;
        for (int i = 1; i <= N; ++i)
          p *= phi_at(i, sv[static_cast<std::size_t>(i - 1)],
                      y[static_cast<std::size_t>(i)]);
        if (p != 0.0) {
          Occupation dst(y);
          for (int i = 1; i <= N; ++i) {
            dst[static_cast<std::size_t>(i)] -= sv[static_cast<std::size_t>(i - 1)];
            dst[static_cast<std::size_t>(i - 1)] += sv[static_cast<std::size_t>(i - 1)];
          }
          const double h = h_fun(x, dst);
          if (h != 0.0) rhs += p * h;
        }
        int pos = 0;
        while (pos < N) {
          if (sv[static_cast<std::size_t>(pos)] <
              y[static_cast<std::size_t>(pos) + 1]) {
            ++sv[static_cast<std::size_t>(pos)];
            break;
          }
          sv[static_cast<std::size_t>(pos)] = 0;
          ++pos;
        }
        if (pos == N) break;
      }
      max_res = std::max(max_res, std::abs(lhs - rhs));
      ++rep.pairs;
    }
  }
  rep.max_residual = max_res;
  return rep;
}

// ---------------------------------------------------------------------------
// Binomial expansion in the quadratic algebra
// ---------------------------------------------------------------------------

namespace {

/// Sparse exact row reducer: rows over columns 0..2^m-1.
class RowEchelon {
 public:
  using Row = std::vector<std::pair<int, Rat>>;  // sorted by column

  /// Reduce r against the basis; returns the remainder.
  Row reduce(Row r) const {
    for (;;) {
      if (r.empty()) return r;
      const int lead = r.front().first;
      auto it = pivots_.find(lead);
      if (it == pivots_.end()) return r;
      r = axpy(r, basis_[static_cast<std::size_t>(it->second)],
               -r.front().second);
    }
  }

  /// Reduce and, if nonzero remains, normalize and insert as a new pivot row.
  void insert(Row r) {
    r = reduce(std::move(r));
    if (r.empty()) return;
    const Rat inv = 1 / r.front().second;
    for (auto& [c, v] : r) v *= inv;
    pivots_[r.front().first] = static_cast<int>(basis_.size());
    basis_.push_back(std::move(r));
  }

  bool member(Row r) const { return reduce(std::move(r)).empty(); }

 private:
  // r + coeff * b, with b normalized to lead coefficient 1
  static Row axpy(const Row& r, const Row& b, const Rat& coeff) {
    Row out;
    out.reserve(r.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < r.size() || j < b.size()) {
      if (j == b.size() || (i < r.size() && r[i].first < b[j].first)) {
        out.push_back(r[i++]);
      } else if (i == r.size() || b[j].first < r[i].first) {
        Rat v = coeff * b[j].second;
        if (v != 0) out.emplace_back(b[j].first, std::move(v));
        ++j;
      } else {
        Rat v = r[i].second + coeff * b[j].second;
        if (v != 0) out.emplace_back(r[i].first, std::move(v));
        ++i;
        ++j;
      }
    }
    return out;
  }

  std::vector<Row> basis_;
  std::map<int, int> pivots_;
};

}  // namespace

bool verify_binexp(int m, const RatParams& params, int m_cap) {
  params.validate();
  if (m < 1) throw DomainError("verify_binexp: m >= 1 required");
  if (m > m_cap) throw CapacityError("verify_binexp: word space over cap");
  const Rat q = params.q, mu = params.mu, nu = params.nu;
  const auto bc = boundary_coeffs(q, nu);
  const Rat p = (mu - nu) / (1 - nu);

  // words of length m encoded as bitmasks, bit i = 1 means letter B at
  // position i (position 0 leftmost)
  const int W = 1 << m;
  auto bit = [&](int w, int pos) { return (w >> pos) & 1; };

  // D = LHS - RHS
  std::vector<Rat> D(static_cast<std::size_t>(W), Rat(0));
  for (int w = 0; w < W; ++w) {
    Rat c(1);
    for (int pos = 0; pos < m; ++pos) c *= bit(w, pos) ? (1 - p) : p;
    D[static_cast<std::size_t>(w)] = c;
  }
  for (int j = 0; j <= m; ++j) {
    // A^j B^{m-j}: first j positions A (bit 0), rest B (bit 1)
    int w = 0;
    for (int pos = j; pos < m; ++pos) w |= (1 << pos);
    D[static_cast<std::size_t>(w)] -=
        qdist::phi_pmf<Rat>(j, m, params);
  }

  if (m == 1) {
    for (const auto& v : D)
      if (v != 0) return false;
    return true;
  }

  // span of u * (BA - alpha AA - beta AB - gamma BB) * v over all splits
  RowEchelon ech;
  for (int lu = 0; lu + 2 <= m; ++lu) {
    const int lv = m - 2 - lu;
    for (int u = 0; u < (1 << lu); ++u) {
      for (int v = 0; v < (1 << lv); ++v) {
        auto word = [&](int c0, int c1) {
          // u at positions [0,lu), pair at lu,lu+1, v at [lu+2,m)
          int w = u;
          w |= (c0 << lu) | (c1 << (lu + 1));
          w |= v << (lu + 2);
          return w;
        };
        std::map<int, Rat> entries;
        entries[word(1, 0)] += 1;           // BA
        entries[word(0, 0)] -= bc.alpha;    // AA
        entries[word(0, 1)] -= bc.beta;     // AB
        entries[word(1, 1)] -= bc.gamma;    // BB
        RowEchelon::Row row;
        for (auto& [c, val] : entries)
          if (val != 0) row.emplace_back(c, std::move(val));
        ech.insert(std::move(row));
      }
    }
  }

  RowEchelon::Row d;
  for (int w = 0; w < W; ++w)
    if (D[static_cast<std::size_t>(w)] != 0)
      d.emplace_back(w, D[static_cast<std::size_t>(w)]);
  return ech.member(std::move(d));
}

}  // namespace qmn::exact
