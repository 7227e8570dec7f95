#include "qmn/qdist.hpp"

#include <algorithm>

namespace qmn::qdist {

double phi_pmf_inf(long j, const Params& p) {
  p.validate();
  if (j < 0) throw RangeError("phi_pmf_inf: negative index");
  using qseries::qpoch_inf;
  double num = 1.0, nuq = p.nu;
  for (long i = 0; i < j; ++i) {
    num *= (p.mu - nuq);
    nuq *= p.q;
  }
  const double head = qpoch_inf(p.mu, p.q) / qpoch_inf(p.nu, p.q);
  return num * head / qseries::qpoch<double>(p.q, p.q, j);
}

double phi_pmf(long j, JumpSupport m, const Params& p) {
  if (m.infinite()) return phi_pmf_inf(j, p);
  return phi_pmf<double>(j, m.m, p);
}

double phi_log_pmf(long j, long m, const Params& p) {
  p.validate();
  if (j < 0 || j > m) throw RangeError("phi_log_pmf: j outside [0,m]");
  double lg = 0.0, nuq = p.nu, f;
  for (long i = 0; i < j; ++i) {
    f = p.mu - nuq;
    if (f <= 0.0) return -std::numeric_limits<double>::infinity();
    lg += std::log(f);
    nuq *= p.q;
  }
  double x = p.mu;
  for (long i = 0; i < m - j; ++i) {
    lg += std::log1p(-x);
    x *= p.q;
  }
  x = p.nu;
  for (long i = 0; i < m; ++i) {
    lg -= std::log1p(-x);
    x *= p.q;
  }
  // log q-binomial [m j]_q
  x = p.q;
  for (long i = 1; i <= m; ++i) {
    lg += std::log1p(-x);
    x *= p.q;
  }
  x = p.q;
  for (long i = 1; i <= j; ++i) {
    lg -= std::log1p(-x);
    x *= p.q;
  }
  x = p.q;
  for (long i = 1; i <= m - j; ++i) {
    lg -= std::log1p(-x);
    x *= p.q;
  }
  return lg;
}

double inf_tail_bound(long J, long y, const Params& p) {
  const double r = p.mu / (1.0 - std::pow(p.q, double(J + 2)));
  if (r >= 1.0) return std::numeric_limits<double>::infinity();
  return phi_pmf_inf(J, p) * std::pow(p.q, double(J + 1) * double(y)) * r /
         (1.0 - r);
}

double duality_residual_inf(long y, const Params& p, double tail_tol) {
  double sum = 0.0;
  long J = 0;
  const double qy = std::pow(p.q, double(y));
  double qjy = 1.0;
  for (;; ++J) {
    sum += phi_pmf_inf(J, p) * qjy;
    qjy *= qy;
    if (J > 4 && inf_tail_bound(J, y, p) < tail_tol) break;
    if (J > 100000)
      throw TailBoundError("duality_residual_inf: tail bound not met");
  }
  const double rhs = phi_pmf<double>(0, y, p);
  return std::abs(sum - rhs);
}

const std::vector<double>& Sampler::cdf_finite(long m) {
  if (m >= static_cast<long>(finite_.size()))
    finite_.resize(static_cast<std::size_t>(m) + 1);
  auto& tab = finite_[static_cast<std::size_t>(m)];
  if (tab.empty()) {
    tab.resize(static_cast<std::size_t>(m) + 1);
    double acc = 0.0;
    for (long j = 0; j <= m; ++j) {
      acc += phi_pmf<double>(j, m, p_);
      tab[static_cast<std::size_t>(j)] = acc;
    }
  }
  return tab;
}

long Sampler::draw(JumpSupport m, RngStream& rng) {
  const double u = rng.next_double();
  if (!m.infinite()) {
    if (m.m == 0) return 0;
    const auto& tab = cdf_finite(m.m);
    const auto it = std::lower_bound(tab.begin(), tab.end(), u);
    return std::min<long>(static_cast<long>(it - tab.begin()), m.m);
  }
  // infinite support: extend the cached CDF on demand
  if (!inf_complete_ || (!inf_cdf_.empty() && u > inf_cdf_.back())) {
    while ((inf_cdf_.empty() || inf_cdf_.back() < std::max(u, kMassTarget)) &&
           static_cast<long>(inf_cdf_.size()) <= kCap) {
      const long j = static_cast<long>(inf_cdf_.size());
      const double prev = inf_cdf_.empty() ? 0.0 : inf_cdf_.back();
      inf_cdf_.push_back(prev + phi_pmf_inf(j, p_));
    }
    inf_complete_ = !inf_cdf_.empty() && inf_cdf_.back() >= kMassTarget;
  }
  const auto it = std::lower_bound(inf_cdf_.begin(), inf_cdf_.end(), u);
  if (it == inf_cdf_.end()) {
    ++cap_events_;  // TailTruncationWarning: enumerated mass below target
    return static_cast<long>(inf_cdf_.size()) - 1;
  }
  return static_cast<long>(it - inf_cdf_.begin());
}

}  // namespace qmn::qdist
