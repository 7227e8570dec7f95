#include "qmn/chains.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace qmn::chains {

Occupation weyl_to_occupation(const Weyl& n, int N) {
  Occupation y(static_cast<std::size_t>(N) + 1, 0);
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 0 || n[i] > N) throw RangeError("weyl_to_occupation: n_i outside [0,N]");
    if (i + 1 < n.size() && n[i] < n[i + 1])
      throw DomainError("weyl_to_occupation: not weakly decreasing");
    ++y[static_cast<std::size_t>(n[i])];
  }
  return y;
}

Weyl occupation_to_weyl(const Occupation& y) {
  Weyl n;
  for (std::size_t i = y.size(); i-- > 0;) {
    if (y[i] < 0) throw DomainError("occupation_to_weyl: negative count");
    for (long c = 0; c < y[i]; ++c) n.push_back(static_cast<int>(i));
  }
  return n;
}

long StepSampler::draw(std::size_t site, long t, JumpSupport m,
                       RngStream& rng) {
  const double mu = sched_.a_at(site) * sched_.mu_at(t);
  for (auto& k : cache_)
    if (k.mu == mu) return k.sampler.draw(m, rng);
  Params p{sched_.base.q, mu, sched_.base.nu};
  if (!(sched_.base.nu <= mu && mu < 1.0))
    throw ScheduleError("StepSampler: a_i * mu_t left [nu, 1)");
  cache_.push_back({mu, qdist::Sampler(p)});
  return cache_.back().sampler.draw(m, rng);
}

long StepSampler::cap_events() const {
  long n = 0;
  for (const auto& k : cache_) n += k.sampler.cap_events();
  return n;
}

void boson_step(Occupation& y, StepSampler& s, long t, RngStream& rng) {
  const std::size_t N = y.size() - 1;
  // all draws against the time-t state, applied atomically afterwards
  std::vector<long> moved(N + 1, 0);
  for (std::size_t i = 1; i <= N; ++i)
    moved[i] = s.draw(i, t + 1, JumpSupport::finite(y[i]), rng);
  for (std::size_t i = 1; i <= N; ++i) {
    y[i] -= moved[i];
    y[i - 1] += moved[i];
  }
}

void tasep_step(Positions& x, StepSampler& s, long t, RngStream& rng) {
  const std::size_t N = x.size();
  std::vector<long> jump(N, 0);
  for (std::size_t n = 1; n <= N; ++n) {
    const JumpSupport m = (n == 1)
                              ? JumpSupport::inf()
                              : JumpSupport::finite(x[n - 2] - x[n - 1] - 1);
    jump[n - 1] = s.draw(n, t + 1, m, rng);
  }
  for (std::size_t n = 0; n < N; ++n) x[n] += jump[n];
}

Positions step_initial(int N) {
  Positions x(static_cast<std::size_t>(N));
  for (int n = 1; n <= N; ++n) x[static_cast<std::size_t>(n) - 1] = -n;
  return x;
}

std::vector<long> gaps(const Positions& x) {
  std::vector<long> g(x.size());
  if (x.empty()) return g;
  g[0] = kInfiniteGap;
  for (std::size_t i = 1; i < x.size(); ++i) g[i] = x[i - 1] - x[i];
  return g;
}

long current_count(const Positions& x, long s) {
  long c = 0;
  for (std::size_t n = 0; n < x.size(); ++n)
    if (x[n] + static_cast<long>(n) + 1 >= s) ++c;
  return c;
}

void ring_boson_step(Occupation& y, qdist::Sampler& s, RngStream& rng) {
  const std::size_t L = y.size();
  std::vector<long> moved(L, 0);
  for (std::size_t i = 0; i < L; ++i)
    moved[i] = s.draw(JumpSupport::finite(y[i]), rng);
  for (std::size_t i = 0; i < L; ++i) {
    y[i] -= moved[i];
    y[(i + L - 1) % L] += moved[i];
  }
}

double stationary_pmf(double rho, long n, const Params& p) {
  p.validate();
  if (!(rho >= 0.0 && rho < 1.0))
    throw DomainError("stationary_pmf: rho must lie in [0,1)");
  if (n < 0) throw RangeError("stationary_pmf: n < 0");
  using qseries::qpoch;
  using qseries::qpoch_inf;
  const double head = qpoch_inf(rho, p.q) / qpoch_inf(rho * p.nu, p.q);
  return std::pow(rho, double(n)) * qpoch<double>(p.nu, p.q, n) /
         qpoch<double>(p.q, p.q, n) * head;
}

long stationary_sample(double rho, const Params& p, RngStream& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (long n = 0; n < 100000; ++n) {
    acc += stationary_pmf(rho, n, p);
    if (u < acc || 1.0 - acc < 1e-15) return n;
  }
  throw TailBoundError("stationary_sample: cdf did not close");
}

void for_each_chunk(long replicas, int threads,
                    const std::function<void(long, long, long)>& fn) {
  const long nchunks = (replicas + kMcChunk - 1) / kMcChunk;
  std::atomic<long> next{0};
  auto worker = [&] {
    for (;;) {
      const long c = next.fetch_add(1);
      if (c >= nchunks) break;
      fn(c, c * kMcChunk, std::min(replicas, (c + 1) * kMcChunk));
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
}

namespace {

struct ChunkStats {
  double sum = 0.0, sumsq = 0.0;
};

template <class PerChunk>
void run_chunks(long replicas, int threads, PerChunk per_chunk) {
  for_each_chunk(replicas, threads, per_chunk);
}

McResult finalize(const std::vector<ChunkStats>& chunks, long replicas) {
  double sum = 0.0, sumsq = 0.0;
  for (const auto& c : chunks) {  // fixed order: deterministic
    sum += c.sum;
    sumsq += c.sumsq;
  }
  McResult r;
  r.replicas = replicas;
  r.mean = sum / double(replicas);
  if (replicas > 1) {
    const double var =
        std::max(0.0, (sumsq - sum * sum / double(replicas)) / double(replicas - 1));
    r.stderr_ = std::sqrt(var / double(replicas));
  }
  return r;
}

}  // namespace

McResult mc_run(long replicas, std::uint64_t master_seed, int threads,
                const std::function<double(RngStream&)>& fn) {
  if (replicas < 2) throw DomainError("mc_run: need replicas >= 2");
  const long nchunks = (replicas + kMcChunk - 1) / kMcChunk;
  std::vector<ChunkStats> chunks(static_cast<std::size_t>(nchunks));
  run_chunks(replicas, threads, [&](long c, long lo, long hi) {
    ChunkStats st;
    for (long r = lo; r < hi; ++r) {
      RngStream rng(master_seed, static_cast<std::uint64_t>(r));
      const double v = fn(rng);
      st.sum += v;
      st.sumsq += v * v;
    }
    chunks[static_cast<std::size_t>(c)] = st;
  });
  return finalize(chunks, replicas);
}

std::vector<McResult> mc_run_vec(
    long replicas, std::uint64_t master_seed, int threads, std::size_t dim,
    const std::function<void(RngStream&, double*)>& fn) {
  if (replicas < 2) throw DomainError("mc_run_vec: need replicas >= 2");
  const long nchunks = (replicas + kMcChunk - 1) / kMcChunk;
  std::vector<std::vector<ChunkStats>> chunks(
      static_cast<std::size_t>(nchunks), std::vector<ChunkStats>(dim));
  run_chunks(replicas, threads, [&](long c, long lo, long hi) {
    std::vector<ChunkStats> st(dim);
    std::vector<double> buf(dim);
    for (long r = lo; r < hi; ++r) {
      RngStream rng(master_seed, static_cast<std::uint64_t>(r));
      fn(rng, buf.data());
      for (std::size_t d = 0; d < dim; ++d) {
        st[d].sum += buf[d];
        st[d].sumsq += buf[d] * buf[d];
      }
    }
    chunks[static_cast<std::size_t>(c)] = st;
  });
  std::vector<McResult> out;
  for (std::size_t d = 0; d < dim; ++d) {
    std::vector<ChunkStats> col;
    col.reserve(chunks.size());
    for (const auto& ch : chunks) col.push_back(ch[d]);
    out.push_back(finalize(col, replicas));
  }
  return out;
}

std::vector<long> mc_histogram(long replicas, std::uint64_t master_seed,
                               int threads, std::size_t support,
                               const std::function<long(RngStream&)>& fn) {
  const long nchunks = (replicas + kMcChunk - 1) / kMcChunk;
  std::vector<std::vector<long>> chunks(static_cast<std::size_t>(nchunks));
  run_chunks(replicas, threads, [&](long c, long lo, long hi) {
    std::vector<long> h(support, 0);
    for (long r = lo; r < hi; ++r) {
      RngStream rng(master_seed, static_cast<std::uint64_t>(r));
      long v = fn(rng);
      if (v < 0) v = 0;
      if (v >= static_cast<long>(support)) v = static_cast<long>(support) - 1;
      ++h[static_cast<std::size_t>(v)];
    }
    chunks[static_cast<std::size_t>(c)] = std::move(h);
  });
  std::vector<long> out(support, 0);
  for (const auto& h : chunks)
    for (std::size_t i = 0; i < support; ++i) out[i] += h[i];
  return out;
}

namespace {

double qmoment_replica_with(const Weyl& nvec, long t, const Schedule& sched,
                            StepSampler& s, RngStream& rng) {
  int N = 1;
  for (int n : nvec) N = std::max(N, n);
  Positions x = step_initial(N);
  for (long step = 0; step < t; ++step) tasep_step(x, s, step, rng);
  double v = 1.0;
  for (int n : nvec) {
    if (n == 0) return 0.0;  // virtual particle at +inf: q^{x_0+0} -> 0 weight
    v *= std::pow(sched.base.q,
                  double(x[static_cast<std::size_t>(n) - 1] + n));
  }
  return v;
}

}  // namespace

double tasep_qmoment_replica(const Weyl& nvec, long t, const Schedule& sched,
                             RngStream& rng) {
  StepSampler s(sched);
  return qmoment_replica_with(nvec, t, sched, s, rng);
}

McResult mc_qmoment(const Weyl& nvec, long t, const Schedule& sched,
                    long replicas, std::uint64_t seed, int threads) {
  if (replicas < 2) throw DomainError("mc_qmoment: need replicas >= 2");
  const long nchunks = (replicas + kMcChunk - 1) / kMcChunk;
  std::vector<ChunkStats> chunks(static_cast<std::size_t>(nchunks));
  for_each_chunk(replicas, threads, [&](long c, long lo, long hi) {
    StepSampler s(sched);  // sampler caches shared within the chunk
    ChunkStats st;
    for (long r = lo; r < hi; ++r) {
      RngStream rng(seed, static_cast<std::uint64_t>(r));
      const double v = qmoment_replica_with(nvec, t, sched, s, rng);
      st.sum += v;
      st.sumsq += v * v;
    }
    chunks[static_cast<std::size_t>(c)] = st;
  });
  return finalize(chunks, replicas);
}

}  // namespace qmn::chains
