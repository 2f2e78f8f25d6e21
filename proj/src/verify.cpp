#include "hoproc/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "hoproc/jump_engine.hpp"
#include "hoproc/limit_lab.hpp"
#include "hoproc/parallel.hpp"
#include "hoproc/rng.hpp"
#include "hoproc/sde_engine.hpp"
#include "hoproc/stats.hpp"

namespace hop {

using nlohmann::json;

const std::vector<RegistryEntry>& verification_registry() {
  static const std::vector<RegistryEntry> registry{
      {"LLN", "radial part grows linearly: X^W_T / T tends to rho",
       "HO radial from 0, T=200, dt=1e-3, 200 paths; |mean - rho| <= 0.05 |rho|"},
      {"CLT", "(X^W_T - rho T) / sqrt(T) is asymptotically standard Gaussian",
       "HO radial from 0, T=200, dt=1e-3, 500 paths; |cov - I| <= 0.1, KS p > 0.01 per coordinate"},
      {"W-UNIFORM", "started at the origin, the eventual chamber is uniform on W",
       "full HO from 0, T=40, dt=1e-3, 1200 paths; chi-square p > 0.01, late-jump fraction < 0.05"},
      {"DUNKL-LIMIT", "sqrt(T) X_{t/T} converges in law to the Dunkl process",
       "full HO vs full Dunkl from 0, T in {1, 1e2, 1e4}, 500 samples, 1000 steps; p > 0.05 at the "
       "largest T and a strictly decreasing energy statistic"},
      {"GIRSANOV",
       "the HO radial law at time t has density exp(L_t - <L>_t / 2) against the Dunkl radial law",
       "radial from min pairing 1, t=1, dt=1e-3, 4000 paths; f=|x|^2 agrees within 3 pooled SE, "
       "mean weight within 3 SE of 1"},
      {"JUMP-AMPL", "the summed jump sizes over a bounded time interval have finite mean",
       "full HO from min pairing 1, t=1, 2000 paths at dt=1e-3 and 5e-4; ratio in [0.8, 1.25]"},
      {"MARTINGALE",
       "each M^a is a purely discontinuous martingale; distinct roots never jump together",
       "full HO from min pairing 1, t=1, dt=1e-3, 2000 paths; |mean M^a| <= 3 SE, squared jumps vs "
       "bracket within 10%, no simultaneous jumps"},
      {"UNIQUENESS", "two radial solutions driven by one Brownian motion never move apart",
       "HO radial pairs from x0 and 2 x0 (min pairing 1), t=1, dt=1e-4, 100 noise streams; >= 99% "
       "non-increasing steps per pair, terminal < initial distance in all pairs"},
      {"F0-LIMIT",
       "the rescaled F0-process converges to intrinsic Brownian motion in a uniform random chamber",
       "complex case, from 0, dt=1e-2, 500 paths; energy p > 0.05 vs I*_1 at T=100, chamber "
       "chi-square p > 0.01, mean |Y_T|/T decreasing over T in {25, 100, 400}"},
      {"BESQ-SLOPE",
       "in the complex case |Y^W_t|^2 is a squared Bessel process of dimension n + 2|R+|",
       "intrinsic radial from 0, T=10, dt=1e-3, 2000 paths; regression slope within 5%"},
  };
  return registry;
}

const RegistryEntry* find_entry(std::string_view id) {
  for (const RegistryEntry& e : verification_registry())
    if (e.id == id) return &e;
  return nullptr;
}

json to_json(const VerificationEntry& e) {
  json j;
  j["id"] = e.id;
  j["anchor"] = e.anchor;
  j["statistics"] = e.statistics;
  j["tolerance"] = e.tolerance;
  j["pass"] = e.pass;
  j["skipped"] = e.skipped;
  if (e.skipped) j["reason"] = e.reason;
  j["seeds"] = e.seeds;
  j["seconds"] = e.seconds;
  return j;
}

bool audit_anchors(const json& entries) {
  for (const json& e : entries) {
    const RegistryEntry* r = find_entry(e.at("id").get<std::string>());
    if (!r || e.at("anchor").get<std::string>() != r->anchor) return false;
  }
  return true;
}

namespace {

std::vector<double> to_vec(const Vector& v) { return {v.begin(), v.end()}; }

json test_json(const TestResult& t) {
  return {{"statistic", t.statistic}, {"p_value", t.p_value}, {"method", t.method},
          {"n_a", t.n_a}, {"n_b", t.n_b}};
}

std::size_t scaled(std::size_t n, const VerifyOptions& o) {
  return std::max<std::size_t>(10, std::size_t(std::llround(double(n) * o.budget_scale)));
}

// x0 on the ray of rho with min over positive roots of (a, x0) = 1.
Vector unit_pairing_start(const RootSystem& m) {
  double mn = 1e300;
  for (std::size_t a = 0; a < m.positive_count(); ++a) mn = std::min(mn, m.pairing(a, m.rho()));
  return m.rho() / mn;
}

SimConfig radial_config(const RootSystem& m, ProcessKind kind, Vector start, double dt, double T,
                        std::size_t paths, std::uint64_t seed, const VerifyOptions& o) {
  SimConfig c;
  c.model = &m;
  c.kind = kind;
  c.start = std::move(start);
  c.dt = dt;
  c.horizon = T;
  c.path_count = paths;
  c.master_seed = seed;
  c.record_stride = 0;
  c.workers = o.workers;
  return c;
}

JumpConfig jump_config(const RootSystem& m, JumpProcess p, Vector start, double dt, double T,
                       std::size_t paths, std::uint64_t seed, const VerifyOptions& o) {
  JumpConfig c;
  c.process = p;
  c.radial = radial_config(m, ProcessKind::HoRadial, std::move(start), dt, T, paths, seed, o);
  c.radial.accumulate = false;
  return c;
}

bool complex_case(const RootSystem& m) {
  if (!m.reduced()) return false;
  for (const Root& r : m.positive())
    if (r.multiplicity != 1.0) return false;
  return true;
}

void run_lln(VerificationEntry& e, const RootSystem& m, std::uint64_t seed,
             const VerifyOptions& o) {
  const double T = 200.0, tol = 0.05;
  auto c = radial_config(m, ProcessKind::HoRadial, Vector(m.rank()), 1e-3, T, scaled(200, o),
                         seed, o);
  auto paths = simulate_radial(c);
  auto est = lln_estimate(paths, m, T);
  e.statistics = {{"mean", to_vec(est.mean)},         {"se", to_vec(est.se)},
                  {"rho", to_vec(m.rho())},           {"relative_error", est.relative_error},
                  {"contamination", est.contamination}, {"paths", paths.size()}};
  e.tolerance = {{"relative_error_max", tol}};
  e.pass = est.relative_error <= tol;
}

void run_clt(VerificationEntry& e, const RootSystem& m, std::uint64_t seed,
             const VerifyOptions& o) {
  const double T = 200.0;
  auto c = radial_config(m, ProcessKind::HoRadial, Vector(m.rank()), 1e-3, T, scaled(500, o),
                         seed, o);
  c.accumulate = false;
  auto paths = simulate_radial(c);
  auto g = gaussianity(clt_sample(paths, m, T));
  json ks = json::array();
  bool ks_ok = true;
  for (const TestResult& t : g.ks) {
    ks.push_back(test_json(t));
    ks_ok = ks_ok && t.p_value > 0.01;
  }
  json cov = json::array();
  for (std::size_t i = 0; i < m.rank(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.rank(); ++j) row.push_back(g.moments.cov(i, j));
    cov.push_back(row);
  }
  e.statistics = {{"covariance", cov},
                  {"cov_deviation", g.cov_deviation},
                  {"mean", to_vec(g.moments.mean)},
                  {"mean_se", to_vec(g.moments.mean_se)},
                  {"ks", ks},
                  {"paths", paths.size()}};
  e.tolerance = {{"cov_deviation_max", 0.1}, {"ks_p_min", 0.01}};
  e.pass = g.cov_deviation <= 0.1 && ks_ok;
}

void run_w_uniform(VerificationEntry& e, const RootSystem& m, std::uint64_t seed,
                   const VerifyOptions& o) {
  if (min_merged_multiplicity(m) < 0.5) {
    e.skipped = true;
    e.reason = "some k_a + k_2a < 1/2: finitely many jumps are not guaranteed";
    return;
  }
  const double T = 40.0;
  auto c = jump_config(m, JumpProcess::Ho, Vector(m.rank()), 1e-3, T, scaled(1200, o), seed, o);
  auto paths = simulate_skew_product(c);
  auto js = jump_statistics(paths, m, T);
  auto chi = chi_square_uniform(js.w_infinity_counts);
  e.statistics = {{"counts", js.w_infinity_counts},
                  {"chi_square", test_json(chi)},
                  {"late_fraction", js.late_fraction},
                  {"mean_jumps", js.count.mean},
                  {"paths", paths.size()}};
  e.tolerance = {{"p_min", 0.01}, {"late_fraction_max", 0.05}};
  e.pass = chi.p_value > 0.01 && js.late_fraction < 0.05;
}

void run_dunkl_limit(VerificationEntry& e, const RootSystem& m, std::uint64_t seed,
                     const VerifyOptions& o) {
  RootSystem d = rescale_to_dunkl(m);
  std::vector<double> Ts{1.0, 1e2, 1e4};
  DunklLimitSetup s;
  s.samples = scaled(500, o);
  s.seed = seed;
  s.workers = o.workers;
  auto r = dunkl_convergence_test(m, d, Ts, s);
  json rows = json::array();
  for (const auto& en : r.entries) rows.push_back({{"T", en.T}, {"test", test_json(en.test)}});
  e.statistics = {{"per_T", rows}, {"strictly_decreasing", r.strictly_decreasing},
                  {"samples", s.samples}};
  e.tolerance = {{"p_min_at_largest_T", 0.05}, {"trend", "strictly decreasing statistic"}};
  e.seeds.push_back(r.ho_seed);
  e.seeds.push_back(r.dunkl_seed);
  e.pass = r.entries.back().test.p_value > 0.05 && r.strictly_decreasing;
}

void run_girsanov(VerificationEntry& e, const RootSystem& m, std::uint64_t seed,
                  const VerifyOptions& o) {
  auto c = radial_config(m, ProcessKind::HoRadial, unit_pairing_start(m), 1e-3, 1.0,
                         scaled(4000, o), seed, o);
  auto fs = default_girsanov_functionals(m.rank());
  auto rep = girsanov_check(m, c, fs);
  json rows = json::array();
  bool ok = true;
  for (const auto& r : rep.rows) {
    rows.push_back({{"f", r.name},
                    {"direct", r.direct},
                    {"direct_se", r.direct_se},
                    {"reweighted", r.reweighted},
                    {"reweighted_se", r.reweighted_se},
                    {"pooled_se", r.pooled_se}});
    if (r.name == "sq_norm") ok = ok && std::abs(r.direct - r.reweighted) <= 3.0 * r.pooled_se;
  }
  bool weight_ok = std::abs(rep.weight.mean - 1.0) <= 3.0 * rep.weight.se;
  e.statistics = {{"rows", rows},
                  {"weight_mean", rep.weight.mean},
                  {"weight_se", rep.weight.se},
                  {"all_weights_positive", rep.all_weights_positive},
                  {"paths", c.path_count}};
  e.tolerance = {{"sq_norm_pooled_se", 3.0}, {"weight_se", 3.0}};
  e.seeds.push_back(rep.ho_seed);
  e.seeds.push_back(rep.dunkl_seed);
  e.pass = ok && weight_ok && rep.all_weights_positive;
}

void run_jump_ampl(VerificationEntry& e, const RootSystem& m, std::uint64_t seed,
                   const VerifyOptions& o) {
  json rows = json::array();
  double means[2];
  int i = 0;
  for (double dt : {1e-3, 5e-4}) {
    auto c = jump_config(m, JumpProcess::Ho, unit_pairing_start(m), dt, 1.0, scaled(2000, o),
                         seed, o);
    auto paths = simulate_skew_product(c);
    auto js = jump_statistics(paths, m, 1.0);
    means[i++] = js.amplitude.mean;
    rows.push_back({{"dt", dt},
                    {"mean_amplitude_sum", js.amplitude.mean},
                    {"se", js.amplitude.se},
                    {"mean_jumps", js.count.mean}});
  }
  double ratio = means[1] / means[0];
  e.statistics = {{"per_dt", rows}, {"ratio", ratio}};
  e.tolerance = {{"ratio_min", 0.8}, {"ratio_max", 1.25}};
  e.pass = ratio >= 0.8 && ratio <= 1.25;
}

void run_martingale(VerificationEntry& e, const RootSystem& m, std::uint64_t seed,
                    const VerifyOptions& o) {
  auto c = jump_config(m, JumpProcess::Ho, unit_pairing_start(m), 1e-3, 1.0, scaled(2000, o),
                       seed, o);
  c.radial.record_stride = 1;
  c.radial.record_noise = true;
  const std::size_t n = c.radial.path_count, P = m.positive_count();
  std::vector<double> mT(n * P), sq(n * P), br(n * P), brf(n * P);
  std::vector<std::size_t> simultaneous(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        auto p = simulate_skew_path(c, i);
        auto md = compute_malpha(p, m, c);
        for (std::size_t a = 0; a < P; ++a) {
          mT[a * n + i] = md.m[a].back();
          sq[a * n + i] = p.squared_jumps[a];
          br[a * n + i] = md.bracket[a].back();
          brf[a * n + i] = md.bracket_formula[a].back();
        }
        simultaneous[i] = md.simultaneous_jumps;
      },
      o.workers);
  json roots = json::array();
  bool ok = true;
  for (std::size_t a = 0; a < P; ++a) {
    auto sm = summarize(std::span<const double>(mT.data() + a * n, n));
    auto ssq = summarize(std::span<const double>(sq.data() + a * n, n));
    auto sbr = summarize(std::span<const double>(br.data() + a * n, n));
    auto sbf = summarize(std::span<const double>(brf.data() + a * n, n));
    double ratio = ssq.mean / sbr.mean;
    ok = ok && std::abs(sm.mean) <= 3.0 * sm.se && std::abs(ratio - 1.0) <= 0.1;
    roots.push_back({{"root", a},
                     {"mean_m", sm.mean},
                     {"se_m", sm.se},
                     {"mean_squared_jumps", ssq.mean},
                     {"mean_bracket_kernel", sbr.mean},
                     {"mean_bracket_printed_formula", sbf.mean},
                     {"squared_jumps_over_bracket", ratio}});
  }
  std::size_t simult = 0;
  for (auto s : simultaneous) simult += s;
  e.statistics = {{"roots", roots}, {"simultaneous_jump_steps", simult}, {"paths", n}};
  e.tolerance = {{"mean_m_se", 3.0}, {"bracket_relative", 0.1}, {"simultaneous_max", 0}};
  e.pass = ok && simult == 0;
}

void run_uniqueness(VerificationEntry& e, const RootSystem& m, std::uint64_t seed,
                    const VerifyOptions& o) {
  Vector x0 = unit_pairing_start(m);
  const std::size_t runs = scaled(100, o);
  auto c = radial_config(m, ProcessKind::HoRadial, x0, 1e-4, 1.0, 1, seed, o);
  c.record_stride = 1;
  c.accumulate = false;
  std::vector<double> frac(runs);
  std::vector<int> shrunk(runs);
  double d0 = distance(x0, 2.0 * x0);
  parallel_for(
      runs,
      [&](std::size_t i) {
        auto [p, q] = simulate_coupled_pair(c, x0, 2.0 * x0, i);
        std::size_t ok = 0;
        double prev = d0;
        for (std::size_t s = 1; s < p.grid_size(); ++s) {
          double d = distance(p.state(s), q.state(s));
          ok += d <= prev;
          prev = d;
        }
        frac[i] = double(ok) / double(p.grid_size() - 1);
        shrunk[i] = distance(p.terminal, q.terminal) < d0;
      },
      o.workers);
  double min_frac = *std::min_element(frac.begin(), frac.end());
  int count = 0;
  for (int s : shrunk) count += s;
  e.statistics = {{"min_nonincreasing_fraction", min_frac},
                  {"terminal_below_initial", count},
                  {"runs", runs}};
  e.tolerance = {{"nonincreasing_fraction_min", 0.99}, {"terminal_below_initial", runs}};
  e.pass = min_frac >= 0.99 && std::size_t(count) == runs;
}

void run_f0_limit(VerificationEntry& e, const RootSystem& m, std::uint64_t seed,
                  const VerifyOptions& o) {
  if (!complex_case(m)) {
    e.skipped = true;
    e.reason = "F0-process has a closed form only in the complex case (reduced, k = 1)";
    return;
  }
  F0LimitSetup s;
  s.paths = scaled(500, o);
  s.seed = seed;
  s.workers = o.workers;
  auto r = f0_limit_check(m, s);
  e.statistics = {{"energy", test_json(r.energy)},
                  {"chamber", test_json(r.chamber)},
                  {"T_grid", s.T_grid},
                  {"mean_norm_over_T", r.mean_norm_over_T},
                  {"decreasing", r.decreasing},
                  {"late_fraction", r.late_fraction},
                  {"paths", s.paths}};
  e.tolerance = {{"energy_p_min", 0.05}, {"chamber_p_min", 0.01}, {"trend", "decreasing"}};
  e.pass = r.energy.p_value > 0.05 && r.chamber.p_value > 0.01 && r.decreasing;
}

void run_besq(VerificationEntry& e, const RootSystem& m, std::uint64_t seed,
              const VerifyOptions& o) {
  if (!complex_case(m)) {
    e.skipped = true;
    e.reason = "the squared-Bessel identity is exact only in the complex case (reduced, k = 1)";
    return;
  }
  auto r = besq_slope(m, 10.0, scaled(2000, o), 1e-3, seed, 11, o.workers);
  double rel = std::abs(r.fit.slope - r.expected) / r.expected;
  e.statistics = {{"times", r.times},        {"mean_sq_norm", r.mean_sq_norm},
                  {"slope", r.fit.slope},    {"slope_se", r.fit.slope_se},
                  {"expected", r.expected},  {"relative_error", rel}};
  e.tolerance = {{"relative_error_max", 0.05}};
  e.pass = rel <= 0.05;
}

}  // namespace

VerificationEntry run_entry(std::string_view id, const RootSystem& model,
                            const VerifyOptions& options) {
  const RegistryEntry* r = find_entry(id);
  if (!r) throw std::invalid_argument("unknown verification id '" + std::string(id) + "'");
  const auto& reg = verification_registry();
  std::uint64_t seed =
      derive_seed(options.seed, StreamModule::Test, 100 + std::size_t(r - reg.data()));
  VerificationEntry e;
  e.id = r->id;
  e.anchor = r->anchor;
  e.seeds = {seed};
  auto t0 = std::chrono::steady_clock::now();
  if (id == "LLN") run_lln(e, model, seed, options);
  else if (id == "CLT") run_clt(e, model, seed, options);
  else if (id == "W-UNIFORM") run_w_uniform(e, model, seed, options);
  else if (id == "DUNKL-LIMIT") run_dunkl_limit(e, model, seed, options);
  else if (id == "GIRSANOV") run_girsanov(e, model, seed, options);
  else if (id == "JUMP-AMPL") run_jump_ampl(e, model, seed, options);
  else if (id == "MARTINGALE") run_martingale(e, model, seed, options);
  else if (id == "UNIQUENESS") run_uniqueness(e, model, seed, options);
  else if (id == "F0-LIMIT") run_f0_limit(e, model, seed, options);
  else if (id == "BESQ-SLOPE") run_besq(e, model, seed, options);
  e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (e.skipped) e.pass = false;
  return e;
}

}  // namespace hop
