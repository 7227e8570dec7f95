#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qmn/qdist.hpp"

namespace qmn::chains {

/// Occupation state y_0..y_N (length N+1), all entries >= 0.
using Occupation = std::vector<long>;
/// Particle locations x_1 > x_2 > ... > x_N (x_0 = +inf is virtual).
using Positions = std::vector<long>;
/// Weakly decreasing location list N >= n_1 >= ... >= n_k >= 0.
using Weyl = std::vector<int>;

/// Site/particle weights a_i and time weights mu_t over a base (q,mu,nu).
/// Defaults: a_i = 1, mu_t = base.mu. Indexing is 1-based as in the update
/// rules; a_at(i) for site/particle i, mu_at(t) for the step into time t.
template <class T>
struct BasicSchedule {
  BasicParams<T> base;
  std::vector<T> a;     // a[i-1] is a_i
  std::vector<T> mu_t;  // mu_t[t-1] is mu_t

  T a_at(std::size_t i) const {
    return (i >= 1 && i <= a.size()) ? a[i - 1] : T(1);
  }
  T mu_at(long t) const {
    if (t >= 1 && t <= static_cast<long>(mu_t.size()))
      return mu_t[static_cast<std::size_t>(t) - 1];
    return base.mu;
  }
  BasicParams<T> site_params(std::size_t i, long t) const {
    BasicParams<T> p{base.q, a_at(i) * mu_at(t), base.nu};
    if (!(base.nu <= p.mu && p.mu < T(1)))
      throw ScheduleError("schedule: a_i * mu_t left [nu, 1)");
    return p;
  }
  bool is_constant() const { return a.empty() && mu_t.empty(); }
};

using Schedule = BasicSchedule<double>;
using RatSchedule = BasicSchedule<Rat>;

inline Schedule to_double(const RatSchedule& s) {
  Schedule d;
  d.base = to_double(s.base);
  for (const auto& v : s.a) d.a.push_back(v.get_d());
  for (const auto& v : s.mu_t) d.mu_t.push_back(v.get_d());
  return d;
}

/// State-encoding bijections between Weyl indices and occupations.
Occupation weyl_to_occupation(const Weyl& n, int N);
Weyl occupation_to_weyl(const Occupation& y);

/// Per-run sampler caches, one per distinct site parameter set.
class StepSampler {
 public:
  explicit StepSampler(const Schedule& sched) : sched_(sched) {}
  long draw(std::size_t site, long t, JumpSupport m, RngStream& rng);
  long cap_events() const;

 private:
  Schedule sched_;
  struct Keyed {
    double mu;
    qdist::Sampler sampler;
  };
  std::vector<Keyed> cache_;
};

/// One parallel step of the N-site Boson process (sites 0..N; site i sends
/// s_i ~ phi(.|y_i) to i-1, all draws against the time-t state).
void boson_step(Occupation& y, StepSampler& s, long t, RngStream& rng);

/// One parallel step of the N-particle TASEP; particle 1 uses m = +inf.
void tasep_step(Positions& x, StepSampler& s, long t, RngStream& rng);

/// Step initial data x_n = -n.
Positions step_initial(int N);

/// Gap vector g_i = x_{i-1} - x_i for i >= 2; g_1 is conceptually infinite
/// and reported as the marker kInfiniteGap in slot 0 of the result.
constexpr long kInfiniteGap = -1;
std::vector<long> gaps(const Positions& x);

/// C_s = #{n : x_n + n >= s}.
long current_count(const Positions& x, long s);

/// One parallel step of the cyclic L-site Boson process (site i sends to
/// i-1 mod L).
void ring_boson_step(Occupation& y, qdist::Sampler& s, RngStream& rng);

/// Product-measure marginal P(y_i = n) = rho^n (nu;q)_n/(q;q)_n
/// (rho;q)_inf/(rho nu;q)_inf.
double stationary_pmf(double rho, long n, const Params& p);
/// Sample from the marginal, truncated where the tail is below 1e-15.
long stationary_sample(double rho, const Params& p, RngStream& rng);

// ---------------------------------------------------------------------------
// Monte Carlo engine: replicas are independent work items; replica r draws
// from RngStream(master_seed, r). Reduction is chunked in replica order, so
// results are bitwise identical for any worker count.
// ---------------------------------------------------------------------------

struct McResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  long replicas = 0;
};

/// Low-level chunked scheduler: calls fn(chunk_index, lo, hi) over replica
/// ranges [lo,hi). The chunk grid is fixed by kMcChunk, so per-chunk outputs
/// combine deterministically regardless of worker count. Callers that need
/// per-worker caches (samplers etc.) build them per chunk.
constexpr long kMcChunk = 4096;
void for_each_chunk(long replicas, int threads,
                    const std::function<void(long, long, long)>& fn);

/// fn(replica_rng) -> observable value for one replica.
McResult mc_run(long replicas, std::uint64_t master_seed, int threads,
                const std::function<double(RngStream&)>& fn);

/// Vector-valued variant (e.g. real+imag parts); component-wise stats.
std::vector<McResult> mc_run_vec(
    long replicas, std::uint64_t master_seed, int threads, std::size_t dim,
    const std::function<void(RngStream&, double*)>& fn);

/// Integer observable -> counts over {0,..,support-1}; values beyond are
/// clamped into the last bin.
std::vector<long> mc_histogram(long replicas, std::uint64_t master_seed,
                               int threads, std::size_t support,
                               const std::function<long(RngStream&)>& fn);

/// E[prod_i q^{x_{n_i}(t)+n_i}] under TASEP step initial data, one replica.
double tasep_qmoment_replica(const Weyl& nvec, long t, const Schedule& sched,
                             RngStream& rng);

/// mean/stderr of the q-moment over many replicas.
McResult mc_qmoment(const Weyl& nvec, long t, const Schedule& sched,
                    long replicas, std::uint64_t seed, int threads);

}  // namespace qmn::chains
