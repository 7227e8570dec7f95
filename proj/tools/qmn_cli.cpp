// Command-line surface for the (q,mu,nu)-Boson / (q,mu,nu)-TASEP toolkit:
// identity verification suites, simulators, exact computations, contour
// moments, Fredholm determinants, and distribution inversion.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "qmn/chains.hpp"
#include "qmn/contour.hpp"
#include "qmn/exact.hpp"
#include "qmn/fredholm.hpp"
#include "qmn/qdist.hpp"
#include "qmn/qseries.hpp"
#include "qmn/report.hpp"

using json = nlohmann::ordered_json;
using namespace qmn;

namespace {

struct Common {
  std::string q = "0.5", mu = "0.4", nu = "0.1";
  std::vector<std::string> a;
  std::vector<std::string> mu_schedule;
  std::uint64_t seed = 1;
  long replicas = 100000;
  double tol = 1e-10;
  std::string format = "json";
  std::string out;
  std::string plot;
  int threads = 0;

  int effective_threads() const {
    if (threads > 0) return threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
  }

  chains::RatSchedule rat_schedule() const {
    chains::RatSchedule s;
    s.base = {parse_rat(q), parse_rat(mu), parse_rat(nu)};
    s.base.validate();
    for (const auto& v : a) s.a.push_back(parse_rat(v));
    for (const auto& v : mu_schedule) s.mu_t.push_back(parse_rat(v));
    return s;
  }
  chains::Schedule dbl_schedule() const {
    return chains::to_double(rat_schedule());
  }

  std::string canonical() const {
    std::ostringstream os;
    os << "q=" << q << ";mu=" << mu << ";nu=" << nu << ";seed=" << seed
       << ";replicas=" << replicas << ";tol=" << tol;
    for (const auto& v : a) os << ";a=" << v;
    for (const auto& v : mu_schedule) os << ";mu_t=" << v;
    return os.str();
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--q", c.q, "q in [0,1), decimal or p/q rational");
  cmd->add_option("--mu", c.mu, "mu in [nu,1)");
  cmd->add_option("--nu", c.nu, "nu in [0,mu]");
  cmd->add_option("--a", c.a, "site/particle weights a_1,a_2,...");
  cmd->add_option("--mu-schedule", c.mu_schedule, "time weights mu_1,mu_2,...");
  cmd->add_option("--seed", c.seed, "master RNG seed");
  cmd->add_option("--replicas", c.replicas, "Monte Carlo replicas");
  cmd->add_option("--tol", c.tol, "tolerance");
  cmd->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", c.out, "output path (default stdout)");
  cmd->add_option("--plot", c.plot, "optional SVG plot path");
  cmd->add_option("--threads", c.threads, "worker threads (0 = all)");
}

void emit(const Common& c, const json& j) {
  json out = j;
  out["config_hash"] = report::hash_hex(report::config_hash(c.canonical()));
  const std::string text = out.dump(2) + "\n";
  if (c.out.empty() || c.out == "-") {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file " + c.out);
    f << text;
  }
}

std::vector<int> parse_nvec(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw ConfigError("empty n-vec");
  return out;
}

// ---------------------------------------------------------------------------
// verify subcommands: each returns (pass, report)
// ---------------------------------------------------------------------------

std::pair<bool, json> run_verify_qseries(const Common& c) {
  const double q = parse_rat(c.q).get_d();
  const auto rep = qseries::identity_suite(q, qseries::default_tuples(120));
  json items = json::array();
  bool pass = true;
  for (const auto& r : rep.results) {
    const double tol = r.name == "q_gauss" ? 1e-10 : 1e-12;
    const bool ok = r.max_residual < tol;
    pass = pass && ok;
    items.push_back({{"identity", r.name},
                     {"max_residual", r.max_residual},
                     {"tolerance", tol},
                     {"evaluations", r.evaluations},
                     {"domain_rejections", r.domain_rejections},
                     {"pass", ok}});
  }
  return {pass, json{{"suite", "qseries"}, {"q", q}, {"identities", items}}};
}

std::pair<bool, json> run_verify_dist(const Common& c, long max_m, long max_y) {
  const auto rs = c.rat_schedule();
  RatParams rp = rs.base;
  Params dp = to_double(rp);
  Rat max_sym(0);
  Rat norm_defect(0);
  for (long m = 0; m <= max_m; ++m) {
    Rat s(0);
    for (long j = 0; j <= m; ++j) s += qdist::phi_pmf<Rat>(j, m, rp);
    Rat d = s - 1;
    if (d < 0) d = -d;
    if (d > norm_defect) norm_defect = d;
    for (long y = 0; y <= max_y; ++y) {
      const Rat r = qdist::duality_residual<Rat>(m, y, rp);
      if (r > max_sym) max_sym = r;
    }
  }
  double max_inf = 0;
  for (long y = 0; y <= max_y; ++y)
    max_inf = std::max(max_inf, qdist::duality_residual_inf(y, dp));
  const bool pass = norm_defect == 0 && max_sym == 0 && max_inf < 1e-10;
  return {pass, json{{"suite", "dist"},
                     {"max_m", max_m},
                     {"max_y", max_y},
                     {"normalization_defect_exact", norm_defect.get_d()},
                     {"duality_symmetry_residual_exact", max_sym.get_d()},
                     {"duality_infinite_residual_float", max_inf},
                     {"pass", pass}}};
}

std::pair<bool, json> run_verify_intertwine(const Common& c, int N, long k,
                                            long window, long t) {
  exact::IntertwineOptions opt;
  opt.N = N;
  opt.k_max = k;
  opt.window = window;
  opt.t = t;
  const auto rs = c.rat_schedule();
  const auto ex = exact::verify_intertwining_exact(rs, opt);
  const auto fl = exact::verify_intertwining_float(c.dbl_schedule(), opt);
  const bool pass = ex.exact_zero && fl.max_residual < 1e-10;
  return {pass, json{{"suite", "intertwine"},
                     {"N", N},
                     {"k_max", k},
                     {"window", window},
                     {"t", t},
                     {"pairs", ex.pairs},
                     {"exact_zero", ex.exact_zero},
                     {"exact_max_residual", ex.max_residual},
                     {"float_max_residual", fl.max_residual},
                     {"pass", pass}}};
}

std::pair<bool, json> run_verify_binexp(const Common& c, int max_m) {
  const auto rs = c.rat_schedule();
  RatParams rp = rs.base;
  json verdicts = json::array();
  bool pass = true;
  for (int m = 1; m <= max_m; ++m) {
    const bool ok = exact::verify_binexp(m, rp);
    pass = pass && ok;
    verdicts.push_back({{"m", m}, {"member", ok}});
  }
  return {pass,
          json{{"suite", "binexp"}, {"verdicts", verdicts}, {"pass", pass}}};
}

std::pair<bool, json> run_verify_evolution(const Common& c) {
  const auto dp = to_double(c.rat_schedule().base);
  double worst_free = 0, worst_bdry = 0;
  {
    auto spec = contour::plan_contours_auto(1, dp.q, dp.nu);
    for (int n : {0, 2, 4})
      for (long t : {0L, 2L}) {
        contour::ObservableSpec obs;
        obs.nvec = {n};
        obs.t = t;
        worst_free =
            std::max(worst_free, contour::check_free_evolution(obs, dp, spec));
      }
  }
  {
    auto spec = contour::plan_contours_auto(2, dp.q, dp.nu);
    for (auto nv : {std::vector<int>{3, 1}, {2, -1}})
      for (long t : {0L, 1L}) {
        contour::ObservableSpec obs;
        obs.nvec = nv;
        obs.t = t;
        worst_free =
            std::max(worst_free, contour::check_free_evolution(obs, dp, spec));
      }
    for (int n : {1, 2, 3})
      for (long t : {0L, 1L}) {
        contour::ObservableSpec obs;
        obs.nvec = {n, n};
        obs.t = t;
        worst_bdry =
            std::max(worst_bdry, contour::check_boundary(obs, 1, dp, spec));
      }
  }
  const bool pass = worst_free < 1e-8 && worst_bdry < 1e-8;
  return {pass, json{{"suite", "evolution"},
                     {"free_evolution_max_residual", worst_free},
                     {"boundary_max_residual", worst_bdry},
                     {"pass", pass}}};
}

std::pair<bool, json> run_verify_pipeline(const Common& c) {
  // contour vs exact oracle spot agreement
  const auto rs = c.rat_schedule();
  const auto dp = to_double(rs.base);
  double worst = 0;
  for (const auto& nv : {chains::Weyl{2}, {3, 1}, {2, 2, 1}}) {
    const int k = static_cast<int>(nv.size());
    auto spec = contour::plan_contours_auto(k, dp.q, dp.nu);
    for (long t : {1L, 4L}) {
      contour::ObservableSpec obs;
      obs.nvec = std::vector<int>(nv.begin(), nv.end());
      obs.t = t;
      const double ex = exact::qmoment_oracle(nv, t, rs).get_d();
      const double got = contour::qmoment_contour(obs, dp, spec, 1e-12).real();
      worst = std::max(worst, std::abs(got - ex) / std::max(ex, 1e-300));
    }
  }
  const bool pass = worst < 1e-8;
  return {pass, json{{"suite", "pipeline"},
                     {"contour_vs_oracle_max_rel", worst},
                     {"pass", pass}}};
}

// ---------------------------------------------------------------------------

int run_simulate(const Common& c, const std::string& process, int n, long t,
                 const std::string& observable, double rho, long ring_sites) {
  const auto sched = c.dbl_schedule();
  const int threads = c.effective_threads();
  if (process == "tasep") {
    chains::Weyl nvec = {1};
    if (observable.rfind("q-moment:", 0) == 0) {
      auto v = parse_nvec(observable.substr(9));
      nvec.assign(v.begin(), v.end());
    }
    report::Csv csv(c.out, c.canonical() + ";simulate=tasep",
                    {"process", "t", "observable", "mean", "stderr",
                     "replicas"});
    std::string oname = "q-moment:";
    for (std::size_t i = 0; i < nvec.size(); ++i)
      oname += (i ? "," : "") + std::to_string(nvec[i]);
    const auto res =
        chains::mc_qmoment(nvec, t, sched, c.replicas, c.seed, threads);
    csv.row(std::string("tasep"), t, oname, res.mean, res.stderr_,
            res.replicas);
    csv.write();
    return 0;
  }
  if (process == "boson") {
    // mean occupation of site 0 after t steps from a single particle at n
    const auto res =
        chains::mc_run(c.replicas, c.seed, threads, [&](RngStream& rng) {
          chains::StepSampler ss(sched);
          chains::Occupation y(static_cast<std::size_t>(n) + 1, 0);
          y[static_cast<std::size_t>(n)] = 1;
          for (long s = 0; s < t; ++s) chains::boson_step(y, ss, s, rng);
          return double(y[0]);
        });
    report::Csv csv(c.out, c.canonical() + ";simulate=boson",
                    {"process", "t", "observable", "mean", "stderr",
                     "replicas"});
    csv.row(std::string("boson"), t, std::string("site0_occupation"), res.mean,
            res.stderr_, res.replicas);
    csv.write();
    return 0;
  }
  if (process == "ring") {
    const Params p = to_double(c.rat_schedule().base);
    const auto res =
        chains::mc_run(c.replicas, c.seed, threads, [&](RngStream& rng) {
          qdist::Sampler sampler(p);
          chains::Occupation y(static_cast<std::size_t>(ring_sites));
          for (auto& v : y) v = chains::stationary_sample(rho, p, rng);
          for (long s = 0; s < t; ++s) chains::ring_boson_step(y, sampler, rng);
          return double(y[0]);
        });
    report::Csv csv(c.out, c.canonical() + ";simulate=ring",
                    {"process", "t", "observable", "mean", "stderr",
                     "replicas"});
    csv.row(std::string("ring"), t, std::string("site0_occupation"), res.mean,
            res.stderr_, res.replicas);
    csv.write();
    return 0;
  }
  throw ConfigError("unknown process '" + process + "'");
}

int run_stationarity(const Common& c, long L, long T, double rho, int bins) {
  const Params p = to_double(c.rat_schedule().base);
  const int threads = c.effective_threads();
  const std::size_t nb = static_cast<std::size_t>(bins);
  const auto counts = chains::mc_histogram(
      c.replicas, c.seed, threads, nb, [&](RngStream& rng) {
        qdist::Sampler sampler(p);
        chains::Occupation y(static_cast<std::size_t>(L));
        for (auto& v : y) v = chains::stationary_sample(rho, p, rng);
        for (long s = 0; s < T; ++s) chains::ring_boson_step(y, sampler, rng);
        return y[0];
      });
  json rows = json::array();
  bool within = true;
  double worst_z = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    double pb;
    if (b + 1 < nb) {
      pb = chains::stationary_pmf(rho, static_cast<long>(b), p);
    } else {
      pb = 1.0;
      for (std::size_t bb = 0; bb + 1 < nb; ++bb)
        pb -= chains::stationary_pmf(rho, static_cast<long>(bb), p);
    }
    const double e = pb * double(c.replicas);
    const double sd =
        std::sqrt(std::max(pb * (1 - pb) * double(c.replicas), 1e-12));
    const double z = (double(counts[b]) - e) / sd;
    worst_z = std::max(worst_z, std::abs(z));
    within = within && std::abs(z) <= 3.0;
    rows.push_back(
        {{"bin", b}, {"observed", counts[b]}, {"expected", e}, {"z", z}});
  }
  emit(c, json{{"experiment", "ring_stationarity"},
               {"L", L},
               {"T", T},
               {"rho", rho},
               {"replicas", c.replicas},
               {"bins", rows},
               {"worst_abs_z", worst_z},
               {"within_3_sigma", within}});
  if (!c.plot.empty()) {
    std::vector<double> xs, ys;
    for (std::size_t b = 0; b < nb; ++b) {
      xs.push_back(double(b));
      ys.push_back(double(counts[b]) / double(c.replicas));
    }
    report::write_svg(c.plot, xs, ys, "ring one-site marginal");
  }
  // exploratory: reported, not gating
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"(q,mu,nu)-Boson / TASEP numerical toolkit"};
  app.set_config("--config", "", "flat key=value config file; flags override");
  app.require_subcommand(1);

  Common c;

  // verify
  auto* verify = app.add_subcommand("verify", "identity and theorem suites");
  verify->require_subcommand(1);
  struct {
    long max_m = 32, max_y = 12;
    int N = 2;
    long k = 3, window = 6, t = 1;
    int binexp_m = 6;
  } vopt;
  auto* v_qseries = verify->add_subcommand("qseries", "q-series identities");
  add_common(v_qseries, c);
  auto* v_dist = verify->add_subcommand("dist", "jump distribution identities");
  add_common(v_dist, c);
  v_dist->add_option("--max-m", vopt.max_m);
  v_dist->add_option("--max-y", vopt.max_y);
  auto* v_int = verify->add_subcommand("intertwine", "intertwining residuals");
  add_common(v_int, c);
  v_int->add_option("--n", vopt.N);
  v_int->add_option("--k", vopt.k);
  v_int->add_option("--window", vopt.window);
  v_int->add_option("--t", vopt.t);
  auto* v_bin = verify->add_subcommand("binexp", "quadratic binomial expansion");
  add_common(v_bin, c);
  v_bin->add_option("--max-m", vopt.binexp_m);
  auto* v_evo =
      verify->add_subcommand("evolution", "free evolution + boundary conditions");
  add_common(v_evo, c);
  auto* v_all = verify->add_subcommand("all", "every suite");
  add_common(v_all, c);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo simulators");
  std::string process = "tasep", observable = "q-moment:1";
  int sim_n = 5;
  long sim_t = 4, ring_sites = 8;
  double rho = 0.3;
  add_common(sim, c);
  sim->add_option("--process", process)
      ->check(CLI::IsMember({"boson", "tasep", "ring"}));
  sim->add_option("--n", sim_n, "particles / sites");
  sim->add_option("--t", sim_t, "time horizon");
  sim->add_option("--observable", observable, "e.g. q-moment:2,1");
  sim->add_option("--rho", rho, "ring density");
  sim->add_option("--l", ring_sites, "ring size");

  // exact
  auto* ex = app.add_subcommand("exact", "exact rational computations");
  long ex_t = 2;
  std::string ex_obs = "1";
  add_common(ex, c);
  ex->add_option("--t", ex_t, "time");
  ex->add_option("--observable", ex_obs, "weakly decreasing n1,n2,...");

  // moments
  auto* mom = app.add_subcommand("moments", "nested contour integral moments");
  std::string nvec_str = "1";
  long mom_t = 1;
  std::vector<double> radii;
  add_common(mom, c);
  mom->add_option("--n-vec", nvec_str, "n1,n2,... (weakly decreasing)");
  mom->add_option("--t", mom_t);
  mom->add_option("--radii", radii, "override circle radii (escape hatch)");

  // fredholm
  auto* fred = app.add_subcommand("fredholm", "Fredholm determinant formulas");
  std::string ftype = "mb";
  double zre = -0.2, zim = 0.0;
  int f_n = 1;
  long f_t = 1;
  add_common(fred, c);
  fred->add_option("--type", ftype)->check(CLI::IsMember({"mb", "cauchy"}));
  fred->add_option("--zeta-re", zre);
  fred->add_option("--zeta-im", zim);
  fred->add_option("--n", f_n);
  fred->add_option("--t", f_t);

  // invert
  auto* inv = app.add_subcommand("invert", "distribution of x_n(t)+n");
  int inv_n = 1;
  long inv_t = 1, support_cap = -1;
  add_common(inv, c);
  inv->add_option("--n", inv_n);
  inv->add_option("--t", inv_t);
  inv->add_option("--support-cap", support_cap);

  // stationarity
  auto* stat =
      app.add_subcommand("stationarity", "ring product-measure experiment");
  long st_L = 8, st_T = 100;
  double st_rho = 0.3;
  int st_bins = 9;
  add_common(stat, c);
  stat->add_option("--l", st_L);
  stat->add_option("--t", st_T);
  stat->add_option("--rho", st_rho);
  stat->add_option("--bins", st_bins);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (verify->parsed()) {
      json combined = json::array();
      bool pass = true;
      auto add = [&](std::pair<bool, json> r) {
        pass = pass && r.first;
        combined.push_back(std::move(r.second));
      };
      if (v_qseries->parsed()) add(run_verify_qseries(c));
      if (v_dist->parsed()) add(run_verify_dist(c, vopt.max_m, vopt.max_y));
      if (v_int->parsed())
        add(run_verify_intertwine(c, vopt.N, vopt.k, vopt.window, vopt.t));
      if (v_bin->parsed()) add(run_verify_binexp(c, vopt.binexp_m));
      if (v_evo->parsed()) add(run_verify_evolution(c));
      if (v_all->parsed()) {
        add(run_verify_qseries(c));
        add(run_verify_dist(c, 24, 10));
        add(run_verify_intertwine(c, 2, 3, 5, 1));
        add(run_verify_binexp(c, 6));
        add(run_verify_evolution(c));
        add(run_verify_pipeline(c));
      }
      emit(c, json{{"report", "verify"}, {"pass", pass}, {"suites", combined}});
      return pass ? 0 : 1;
    }
    if (sim->parsed())
      return run_simulate(c, process, sim_n, sim_t, observable, rho,
                          ring_sites);
    if (ex->parsed()) {
      auto rs = c.rat_schedule();
      auto nv = parse_nvec(ex_obs);
      chains::Weyl w(nv.begin(), nv.end());
      const Rat v = exact::qmoment_oracle(w, ex_t, rs);
      emit(c, json{{"op", "exact_qmoment"},
                   {"n_vec", nv},
                   {"t", ex_t},
                   {"value_rational", v.get_str()},
                   {"value", v.get_d()}});
      return 0;
    }
    if (mom->parsed()) {
      const auto nv = parse_nvec(nvec_str);
      const Params p = to_double(c.rat_schedule().base);
      contour::ContourSpec spec;
      if (!radii.empty()) {
        for (double r : radii) spec.curves.push_back({1.0, r, r});
        contour::check_contours(spec, p.q, p.nu);
      } else {
        spec =
            contour::plan_contours_auto(static_cast<int>(nv.size()), p.q, p.nu);
      }
      contour::ObservableSpec obs;
      obs.nvec = nv;
      obs.t = mom_t;
      for (const auto& m : c.mu_schedule)
        obs.mu_schedule.push_back(parse_rat(m).get_d());
      contour::QuadratureDiag diag;
      const Cplx val = contour::qmoment_contour(obs, p, spec, c.tol, &diag);
      report::Csv csv(c.out, c.canonical() + ";moments=" + nvec_str,
                      {"n_vec", "t", "value", "imag_residual", "nodes"});
      csv.row(nvec_str, mom_t, val.real(), val.imag(), diag.nodes_used);
      csv.write();
      return std::abs(val.imag()) < 1e-8 ? 0 : 1;
    }
    if (fred->parsed()) {
      const Params p = to_double(c.rat_schedule().base);
      std::vector<double> ms;
      for (const auto& m : c.mu_schedule) ms.push_back(parse_rat(m).get_d());
      fredholm::KernelConfig cfg;
      cfg.tol = c.tol;
      fredholm::DetDiag diag;
      const Cplx z(zre, zim);
      const Cplx val = ftype == "mb"
                           ? fredholm::det_mb(z, f_n, f_t, p, cfg, ms, &diag)
                           : fredholm::det_cauchy(z, f_n, f_t, p, cfg, ms,
                                                  &diag);
      report::Csv csv(c.out, c.canonical() + ";fredholm=" + ftype,
                      {"type", "zeta_re", "zeta_im", "value_re", "value_im",
                       "w_nodes", "s_nodes", "last_delta"});
      csv.row(ftype, zre, zim, val.real(), val.imag(), diag.w_nodes,
              diag.s_nodes, diag.last_delta);
      csv.write();
      return 0;
    }
    if (inv->parsed()) {
      auto rs = c.rat_schedule();
      const auto res =
          fredholm::invert_distribution(inv_n, inv_t, rs, support_cap, 1e-10);
      report::Csv csv(c.out, c.canonical() + ";invert",
                      {"s", "probability", "tail_bound", "defect"});
      std::vector<double> xs, ys;
      for (std::size_t s = 0; s < res.pmf.size(); ++s) {
        csv.row(static_cast<long>(s), res.pmf[s].get_d(), res.tail_bound,
                res.defect);
        xs.push_back(double(s));
        ys.push_back(res.pmf[s].get_d());
      }
      csv.write();
      if (!c.plot.empty()) report::write_svg(c.plot, xs, ys, "pmf of x_n(t)+n");
      return res.defect < 1e-9 ? 0 : 1;
    }
    if (stat->parsed()) return run_stationarity(c, st_L, st_T, st_rho, st_bins);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
