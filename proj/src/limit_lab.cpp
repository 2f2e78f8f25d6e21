#include "hoproc/limit_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hoproc/parallel.hpp"
#include "hoproc/rng.hpp"

namespace hop {

namespace {

void require_paths(std::size_t n, const char* who) {
  if (n < 10) throw LimitError(std::string(who) + ": at least 10 paths are required");
}

bool complex_case(const RootSystem& model) {
  if (!model.reduced()) return false;
  for (const Root& r : model.positive())
    if (r.multiplicity != 1.0) return false;
  return true;
}

std::vector<Vector> terminal_values(std::span<const RadialPath> paths) {
  std::vector<Vector> v;
  v.reserve(paths.size());
  for (const RadialPath& p : paths) v.push_back(p.terminal);
  return v;
}

}  // namespace

LlnEstimate lln_estimate(std::span<const RadialPath> paths, const RootSystem& model, double T) {
  require_paths(paths.size(), "lln_estimate");
  std::vector<Vector> scaled;
  Vector contamination(model.rank());
  for (const RadialPath& p : paths) {
    scaled.push_back(p.terminal / T);
    for (std::size_t a = 0; a < model.positive_count(); ++a) {
      const Root& r = model.positive()[a];
      contamination.axpy(0.5 * r.multiplicity * (p.coth_integral[a] - T) / T, r.vector);
    }
  }
  contamination /= double(paths.size());
  MeanCov mc = mean_cov(scaled);
  LlnEstimate e;
  e.mean = mc.mean;
  e.se = mc.mean_se;
  e.error = distance(mc.mean, model.rho());
  e.relative_error = e.error / norm(model.rho());
  e.contamination = norm(contamination);
  return e;
}

NormalizedSample clt_sample(std::span<const RadialPath> paths, const RootSystem& model, double T) {
  require_paths(paths.size(), "clt_sample");
  NormalizedSample s;
  s.T = T;
  s.provenance = "radial";
  double root_T = std::sqrt(T);
  for (const RadialPath& p : paths) s.values.push_back((p.terminal - T * model.rho()) / root_T);
  return s;
}

Gaussianity gaussianity(const NormalizedSample& sample) {
  Gaussianity g;
  g.moments = mean_cov(sample.values);
  g.cov_deviation = identity_deviation(g.moments.cov);
  std::size_t n = sample.values.empty() ? 0 : sample.values[0].size();
  auto phi = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> col;
    for (const Vector& v : sample.values) col.push_back(v[j]);
    g.ks.push_back(ks_1d(col, phi));
  }
  return g;
}

ChamberSignVector chamber_signs(const RootSystem& model, std::size_t w) {
  ChamberSignVector s;
  s.sign.assign(model.positive_count(), 0);
  for (std::size_t g = 0; g < model.positive_count(); ++g) {
    int sg = 0;
    std::size_t a = model.image(w, g, sg);
    s.sign[a] = sg;
  }
  return s;
}

Vector signed_rho(const RootSystem& model, const ChamberSignVector& s) {
  Vector v(model.rank());
  for (std::size_t a = 0; a < model.positive_count(); ++a) {
    const Root& r = model.positive()[a];
    v.axpy(0.5 * r.multiplicity * s.sign[a], r.vector);
  }
  return v;
}

NonradialClt nonradial_clt_sample(std::span<const SkewProductPath> paths, const RootSystem& model,
                                  double T) {
  if (min_merged_multiplicity(model) < 0.5)
    throw LimitError(
        "nonradial_clt_sample: needs k_a + k_2a >= 1/2 for every root (finitely many jumps)");
  require_paths(paths.size(), "nonradial_clt_sample");
  NonradialClt out;
  out.sample.T = T;
  out.sample.provenance = "full, centred at the terminal chamber";
  double root_T = std::sqrt(T);
  std::vector<Vector> images;
  for (const WeylElement& w : model.weyl()) images.push_back(w.matrix.apply(model.rho()));
  std::size_t late = 0;
  double cluster = 0.0;
  for (const SkewProductPath& p : paths) {
    Vector x = p.terminal_state(model);
    Vector centre = signed_rho(model, chamber_signs(model, p.final_chamber));
    out.sample.values.push_back((x - T * centre) / root_T);
    Vector scaled = x / T;
    out.lln_values.push_back(scaled);
    double best = std::numeric_limits<double>::infinity();
    for (const Vector& im : images) best = std::min(best, distance(scaled, im));
    cluster += best;
    bool is_late = false;
    for (const JumpEvent& e : p.events) is_late = is_late || e.t > 0.9 * T;
    late += is_late;
  }
  out.late_fraction = double(late) / double(paths.size());
  out.lln_cluster_distance = cluster / double(paths.size());
  return out;
}

namespace {

void require_matching_dunkl(const RootSystem& ho, const RootSystem& dunkl) {
  RootSystem expected = rescale_to_dunkl(ho);
  bool ok = expected.rank() == dunkl.rank() &&
            expected.positive_count() == dunkl.positive_count();
  for (std::size_t a = 0; ok && a < expected.positive_count(); ++a) {
    int i = dunkl.find_root(expected.positive()[a].vector);
    ok = i >= 0 && std::abs(dunkl.roots()[std::size_t(i)].multiplicity -
                            expected.positive()[a].multiplicity) <= 1e-12;
  }
  if (!ok) throw LimitError("the Dunkl system is not the rescaling of the HO system");
}

std::vector<Vector> skew_terminals(const JumpConfig& c, const RootSystem& model, double scale) {
  auto paths = simulate_skew_product(c);
  std::vector<Vector> out;
  out.reserve(paths.size());
  for (const SkewProductPath& p : paths) out.push_back(p.terminal_state(model) * scale);
  return out;
}

}  // namespace

DunklLimitResult dunkl_convergence_test(const RootSystem& ho, const RootSystem& dunkl,
                                        std::span<const double> T_grid,
                                        const DunklLimitSetup& setup) {
  require_matching_dunkl(ho, dunkl);
  DunklLimitResult out;
  out.ho_seed = setup.seed;
  out.dunkl_seed = derive_seed(setup.seed, StreamModule::Test, 1);

  JumpConfig dc;
  dc.process = JumpProcess::Dunkl;
  dc.radial.model = &dunkl;
  dc.radial.start = Vector(dunkl.rank());
  dc.radial.horizon = 1.0;
  dc.radial.dt = 1.0 / double(setup.steps_per_path);
  dc.radial.path_count = setup.samples;
  dc.radial.master_seed = out.dunkl_seed;
  dc.radial.record_stride = 0;
  dc.radial.accumulate = false;
  dc.radial.workers = setup.workers;
  std::vector<Vector> z = skew_terminals(dc, dunkl, 1.0);

  for (double T : T_grid) {
    JumpConfig hc;
    hc.process = JumpProcess::Ho;
    hc.radial.model = &ho;
    hc.radial.start = Vector(ho.rank());
    hc.radial.horizon = 1.0 / T;
    hc.radial.dt = 1.0 / (T * double(setup.steps_per_path));
    hc.radial.path_count = setup.samples;
    hc.radial.master_seed = out.ho_seed;
    hc.radial.record_stride = 0;
    hc.radial.accumulate = false;
    hc.radial.workers = setup.workers;
    hc.rate_cap = kDefaultRateCap * T;
    std::vector<Vector> x = skew_terminals(hc, ho, std::sqrt(T));
    DunklLimitEntry e;
    e.T = T;
    e.test = energy_distance_perm(x, z, setup.permutations,
                                  derive_seed(setup.seed, StreamModule::Permutation, 0),
                                  setup.workers);
    out.entries.push_back(e);
  }
  out.strictly_decreasing = out.entries.size() > 1;
  for (std::size_t i = 1; i < out.entries.size(); ++i)
    out.strictly_decreasing =
        out.strictly_decreasing && out.entries[i].test.statistic < out.entries[i - 1].test.statistic;
  return out;
}

std::vector<GirsanovFunctional> default_girsanov_functionals(std::size_t rank) {
  std::vector<GirsanovFunctional> f;
  f.push_back({"one", [](const Vector&) { return 1.0; }});
  f.push_back({"sq_norm", [](const Vector& x) { return norm2(x); }});
  f.push_back({"gauss", [](const Vector& x) { return std::exp(-norm2(x)); }});
  for (std::size_t j = 0; j < rank; ++j)
    f.push_back({"x_" + std::to_string(j + 1), [j](const Vector& x) { return x[j]; }});
  return f;
}

GirsanovReport girsanov_check(const RootSystem& ho, const SimConfig& base,
                              std::span<const GirsanovFunctional> functionals) {
  RootSystem dunkl = rescale_to_dunkl(ho);
  const std::size_t n = base.path_count;
  const std::size_t F = functionals.size();
  GirsanovReport rep;
  rep.ho_seed = base.master_seed;
  rep.dunkl_seed = base.master_seed + 1;

  SimConfig hc = base;
  hc.model = &ho;
  hc.kind = ProcessKind::HoRadial;
  hc.record_stride = 0;
  hc.record_noise = false;
  hc.accumulate = false;
  hc.validate();
  SimConfig dc = base;
  dc.model = &dunkl;
  dc.kind = ProcessKind::DunklRadial;
  dc.master_seed = rep.dunkl_seed;
  dc.record_stride = 1;
  dc.record_noise = true;
  dc.accumulate = false;
  dc.validate();

  std::vector<double> direct(n * F), reweighted(n * F), weight(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        RadialPath p = simulate_radial_path(hc, i);
        for (std::size_t j = 0; j < F; ++j) direct[j * n + i] = functionals[j].f(p.terminal);
        RadialPath q = simulate_radial_path(dc, i);
        double lw = path_integral(q, ho, IntegrandKind::Girsanov).girsanov.log_weight();
        weight[i] = std::exp(lw);
        for (std::size_t j = 0; j < F; ++j)
          reweighted[j * n + i] = weight[i] * functionals[j].f(q.terminal);
      },
      base.workers);

  rep.weight = summarize(weight);
  rep.all_weights_positive =
      std::all_of(weight.begin(), weight.end(), [](double w) { return w > 0.0; });
  for (std::size_t j = 0; j < F; ++j) {
    auto d = summarize(std::span<const double>(direct.data() + j * n, n));
    auto r = summarize(std::span<const double>(reweighted.data() + j * n, n));
    GirsanovRow row;
    row.name = functionals[j].name;
    row.direct = d.mean;
    row.direct_se = d.se;
    row.reweighted = r.mean;
    row.reweighted_se = r.se;
    row.pooled_se = std::hypot(d.se, r.se);
    rep.rows.push_back(row);
  }
  return rep;
}

IStarSample istar_sample(const RootSystem& dunkl, double t, std::size_t count,
                         std::uint64_t seed, double dt, std::size_t workers) {
  SimConfig c;
  c.model = &dunkl;
  c.kind = ProcessKind::Intrinsic;
  c.start = Vector(dunkl.rank());
  c.dt = dt;
  c.horizon = t;
  c.path_count = count;
  c.master_seed = seed;
  c.record_stride = 0;
  c.accumulate = false;
  c.workers = workers;
  auto paths = simulate_radial(c);
  IStarSample s;
  s.radial = terminal_values(paths);
  for (std::size_t i = 0; i < count; ++i) {
    Engine g = make_stream(seed, StreamModule::ChamberDraw, i);
    std::uniform_int_distribution<std::size_t> pick(0, dunkl.weyl_order() - 1);
    std::size_t w = pick(g);
    s.chamber.push_back(w);
    s.values.push_back(dunkl.weyl()[w].matrix.apply(s.radial[i]));
  }
  return s;
}

double istar1_log_density(const RootSystem& dunkl, const Vector& y) {
  double v = -0.5 * norm2(y);
  for (std::size_t a = 0; a < dunkl.positive_count(); ++a) {
    double p = dunkl.pairing(a, y);
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    v += 2.0 * std::log(std::abs(p));
  }
  return v;
}

Vector istar1_log_density_gradient(const RootSystem& dunkl, const Vector& y) {
  Vector g = -1.0 * y;
  for (std::size_t a = 0; a < dunkl.positive_count(); ++a)
    g.axpy(2.0 / dunkl.pairing(a, y), dunkl.positive()[a].vector);
  return g;
}

Estimate istar1_normalization(const RootSystem& dunkl, std::size_t samples, std::uint64_t seed) {
  // int e^{-|y|^2/2} prod (a,y)^2 dy = (2 pi)^{n/2} E[prod (a,Y)^2], Y ~ N(0, I)
  Engine g = make_stream(seed, StreamModule::Test, 0);
  Normal nd;
  std::vector<double> v(samples);
  Vector y(dunkl.rank());
  for (double& s : v) {
    for (double& c : y) c = nd(g);
    double prod = 1.0;
    for (std::size_t a = 0; a < dunkl.positive_count(); ++a) {
      double p = dunkl.pairing(a, y);
      prod *= p * p;
    }
    s = prod;
  }
  auto sum = summarize(v);
  double c = std::pow(2.0 * std::numbers::pi, 0.5 * double(dunkl.rank()));
  return {c * sum.mean, c * sum.se, true};
}

F0LimitResult f0_limit_check(const RootSystem& model, const F0LimitSetup& setup) {
  if (!complex_case(model))
    throw LimitError("f0_limit_check: only the complex case (reduced, k = 1) has a closed form");
  F0LimitResult out;
  auto run = [&](double T) {
    JumpConfig c;
    c.process = JumpProcess::F0Complex;
    c.radial.model = &model;
    c.radial.start = Vector(model.rank());
    c.radial.dt = setup.dt;
    c.radial.horizon = T;
    c.radial.path_count = setup.paths;
    c.radial.master_seed = setup.seed;
    c.radial.record_stride = 0;
    c.radial.accumulate = false;
    c.radial.workers = setup.workers;
    return simulate_skew_product(c);
  };
  auto mean_norm = [&](const std::vector<SkewProductPath>& paths, double T) {
    double s = 0.0;
    for (const auto& p : paths) s += norm(p.radial.terminal) / T;
    return s / double(paths.size());
  };

  for (double T : setup.T_grid) out.mean_norm_over_T.push_back(mean_norm(run(T), T));
  out.decreasing = out.mean_norm_over_T.size() > 1;
  for (std::size_t i = 1; i < out.mean_norm_over_T.size(); ++i)
    out.decreasing = out.decreasing && out.mean_norm_over_T[i] < out.mean_norm_over_T[i - 1];

  auto paths = run(setup.test_T);
  out.y1.T = setup.test_T;
  out.y1.provenance = "f0_complex from 0";
  std::vector<std::size_t> counts(model.weyl_order(), 0);
  double root_T = std::sqrt(setup.test_T);
  std::size_t late = 0;
  for (const auto& p : paths) {
    out.y1.values.push_back(p.terminal_state(model) / root_T);
    ++counts[p.final_chamber];
    bool is_late = false;
    for (const JumpEvent& e : p.events) is_late = is_late || e.t > 0.9 * setup.test_T;
    late += is_late;
  }
  out.late_fraction = double(late) / double(paths.size());
  out.chamber = chi_square_uniform(counts);
  auto istar = istar_sample(model, 1.0, setup.paths, derive_seed(setup.seed, StreamModule::Test, 2),
                            setup.dt / setup.test_T, setup.workers);
  out.energy = energy_distance_perm(out.y1.values, istar.values, setup.permutations,
                                    derive_seed(setup.seed, StreamModule::Permutation, 1),
                                    setup.workers);
  return out;
}

BesqSlope besq_slope(const RootSystem& model, double T, std::size_t paths, double dt,
                     std::uint64_t seed, std::size_t grid_points, std::size_t workers) {
  if (!complex_case(model))
    throw LimitError("besq_slope: only the complex case (reduced, k = 1) has a closed form");
  if (grid_points < 2) grid_points = 2;
  SimConfig c;
  c.model = &model;
  c.kind = ProcessKind::Intrinsic;
  c.start = Vector(model.rank());
  c.dt = dt;
  c.horizon = T;
  c.path_count = paths;
  c.master_seed = seed;
  c.accumulate = false;
  c.workers = workers;
  c.record_stride = std::max<std::size_t>(1, c.steps() / (grid_points - 1));
  auto sim = simulate_radial(c);
  BesqSlope out;
  out.times = sim.front().times;
  out.mean_sq_norm.assign(out.times.size(), 0.0);
  for (const RadialPath& p : sim)
    for (std::size_t i = 0; i < p.grid_size(); ++i) out.mean_sq_norm[i] += norm2(p.state(i));
  for (double& m : out.mean_sq_norm) m /= double(sim.size());
  out.fit = fit_line(out.times, out.mean_sq_norm);
  out.expected = double(model.rank()) + 2.0 * double(model.positive_count());
  return out;
}

}  // namespace hop
