#include "hoproc/jump_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "hoproc/parallel.hpp"

namespace hop {

std::string to_string(JumpProcess p) {
  switch (p) {
    case JumpProcess::Ho: return "ho";
    case JumpProcess::Dunkl: return "dunkl";
    case JumpProcess::F0Complex: return "f0_complex";
  }
  return "ho";
}

JumpProcess parse_jump_process(std::string_view s) {
  if (s == "ho") return JumpProcess::Ho;
  if (s == "dunkl") return JumpProcess::Dunkl;
  if (s == "f0_complex") return JumpProcess::F0Complex;
  throw std::invalid_argument("unknown jump process '" + std::string(s) + "'");
}

namespace {

ProcessKind radial_kind(JumpProcess p) {
  switch (p) {
    case JumpProcess::Ho: return ProcessKind::HoRadial;
    case JumpProcess::Dunkl: return ProcessKind::DunklRadial;
    case JumpProcess::F0Complex: return ProcessKind::Intrinsic;
  }
  return ProcessKind::HoRadial;
}

bool is_complex_case(const RootSystem& model) {
  if (!model.reduced()) return false;
  for (const Root& r : model.positive())
    if (r.multiplicity != 1.0) return false;
  return true;
}

struct RateTable {
  std::vector<double> k;          // scaled multiplicities
  std::vector<double> alpha_sq;
  bool rational = false;

  double rate(std::size_t g, double p, double eps) const {
    return rational ? dunkl_rate_from_pairing(k[g], p, eps)
                    : ho_rate_from_pairing(k[g], alpha_sq[g], p, eps);
  }
};

RateTable make_rates(const RootSystem& model, const JumpConfig& cfg) {
  RateTable t;
  t.rational = cfg.process == JumpProcess::Dunkl;
  for (const Root& r : model.positive()) {
    t.k.push_back(r.multiplicity * cfg.jump_scale);
    t.alpha_sq.push_back(norm2(r.vector));
  }
  return t;
}

}  // namespace

void JumpConfig::validate() const {
  radial.validate_start_free();
  if (!(rate_cap > 0.0)) throw std::invalid_argument("JumpConfig: rate_cap must be positive");
  if (!(wall_epsilon >= 0.0)) throw std::invalid_argument("JumpConfig: wall_epsilon must be >= 0");
  if (!(jump_scale >= 0.0)) throw std::invalid_argument("JumpConfig: jump_scale must be >= 0");
  if (process == JumpProcess::F0Complex && !is_complex_case(*radial.model))
    throw std::invalid_argument(
        "f0_complex needs a reduced root system with every multiplicity equal to 1");
}

Vector SkewProductPath::full_state(const RootSystem& model, std::size_t i) const {
  return model.weyl()[chamber[i]].matrix.apply(radial.state(i));
}

Vector SkewProductPath::terminal_state(const RootSystem& model) const {
  return model.weyl()[final_chamber].matrix.apply(radial.terminal);
}

SkewProductPath simulate_skew_path(const JumpConfig& config, std::size_t index) {
  config.validate();
  const RootSystem& model = *config.radial.model;
  const std::size_t P = model.positive_count();

  ChamberDecomposition d0 = radial_decompose(model, config.radial.start);
  SimConfig rc = config.radial;
  rc.kind = radial_kind(config.process);
  rc.start = d0.x_plus;

  RateTable rates = make_rates(model, config);
  Engine jg = make_stream(rc.master_seed, StreamModule::JumpClock, index);

  // A start on walls is fixed by its stabilizer, and the law of the process
  // is invariant under it; the chamber label is drawn uniformly from the
  // coset of labels that represent the start.
  std::vector<std::size_t> stab;
  const double tol = 1e-12 * (1.0 + norm(d0.x_plus));
  for (std::size_t s = 0; s < model.weyl_order(); ++s)
    if (distance(model.weyl()[s].matrix.apply(d0.x_plus), d0.x_plus) <= tol) stab.push_back(s);
  std::size_t w0 = d0.w;
  if (stab.size() > 1) {
    Engine cg = make_stream(rc.master_seed, StreamModule::ChamberDraw, index);
    std::uniform_int_distribution<std::size_t> pick(0, stab.size() - 1);
    w0 = model.compose(d0.w, stab[pick(cg)]);
  }

  SkewProductPath out;
  out.initial_chamber = w0;
  out.jump_sum.assign(P, 0.0);
  out.compensator.assign(P, 0.0);
  out.squared_jumps.assign(P, 0.0);
  out.bracket.assign(P, 0.0);
  out.rate_integral.assign(P, 0.0);
  out.fire_probability.assign(P, 0.0);
  std::vector<std::size_t> physical(P);

  std::size_t w = w0;
  std::vector<double> lam(P), pair(P);
  const double dt = rc.dt;
  const double cap = config.rate_cap;
  const double eps = config.wall_epsilon;

  auto on_step = [&](std::size_t n, const Vector& x_next) {
    // pairings of the positive roots with x+_{n+1}; the physical root of
    // gamma under w is s * w gamma with (a^vee, X_{n+1-}) = s (gamma^vee, x+).
    double total = 0.0;
    for (std::size_t g = 0; g < P; ++g) {
      pair[g] = model.pairing(g, x_next);
      double l = rates.rate(g, pair[g], eps);
      if (l > cap) {
        l = cap;
        ++out.capped_rates;
      }
      lam[g] = l;
      total += l;
      if (l == 0.0) continue;
      int s = 0;
      std::size_t a = model.image(w, g, s);
      physical[g] = a;
      double cv = double(s) * 2.0 * pair[g] / rates.alpha_sq[g];
      out.compensator[a] += l * cv * dt;
      out.bracket[a] += l * cv * cv * dt;
      out.rate_integral[a] += l * dt;
    }
    if (total <= 0.0) return;
    double fire = -std::expm1(-total * dt);
    for (std::size_t g = 0; g < P; ++g)
      if (lam[g] > 0.0) out.fire_probability[physical[g]] += fire * lam[g] / total;
    double u = open_uniform(jg);
    if (!(u < fire)) return;
    double v = open_uniform(jg) * total;
    std::size_t g = 0;
    for (; g + 1 < P; ++g) {
      if (v < lam[g]) break;
      v -= lam[g];
    }
    while (lam[g] == 0.0 && g > 0) --g;  // guard against round-off at the upper end
    int s = 0;
    std::size_t a = model.image(w, g, s);
    JumpEvent ev;
    ev.step = n;
    ev.t = double(n + 1) * dt;
    ev.root = a;
    ev.pre = model.weyl()[w].matrix.apply(x_next);
    ev.post = reflect(model.positive()[a].vector, ev.pre);
    double cv = double(s) * 2.0 * pair[g] / rates.alpha_sq[g];
    out.jump_sum[a] += -cv;
    out.squared_jumps[a] += cv * cv;
    out.amplitude_sum += std::abs(cv) * std::sqrt(rates.alpha_sq[g]);
    out.events.push_back(std::move(ev));
    w = model.left_reflect(a, w);
  };

  out.radial = simulate_radial_observed(rc, index, on_step,
                                        [&](std::size_t) { out.chamber.push_back(w); });
  out.final_chamber = w;
  return out;
}

std::vector<SkewProductPath> simulate_skew_product(const JumpConfig& config) {
  config.validate();
  std::vector<SkewProductPath> out(config.radial.path_count);
  parallel_for(
      out.size(), [&](std::size_t i) { out[i] = simulate_skew_path(config, i); },
      config.radial.workers);
  return out;
}

MartingaleDecomposition compute_malpha(const SkewProductPath& path, const RootSystem& model,
                                       const JumpConfig& config) {
  const RadialPath& rp = path.radial;
  if (!rp.full_record() || !rp.has_noise())
    throw std::invalid_argument("compute_malpha needs a full record with noise");
  const std::size_t P = model.positive_count();
  const std::size_t N = rp.steps;
  const std::size_t n = rp.dim;
  RateTable rates = make_rates(model, config);
  DriftField drift = make_drift_field(model, radial_kind(config.process));

  MartingaleDecomposition md;
  md.times = rp.times;
  md.m.assign(P, std::vector<double>(N + 1, 0.0));
  md.compensator = md.m;
  md.bracket = md.m;
  md.bracket_formula = md.m;
  md.drift_part.assign(N + 1, Vector(n));
  md.beta.assign(N + 1, Vector(n));

  std::vector<double> jumps(P, 0.0), comp(P, 0.0), br(P, 0.0), brf(P, 0.0);
  Vector drift_int(n), beta(n), b;
  std::vector<double> p(P);
  std::size_t w = path.initial_chamber;
  std::size_t next_event = 0;
  for (std::size_t s = 0; s < N; ++s) {
    const Matrix& wm = model.weyl()[w].matrix;
    Vector x = rp.state(s);
    for (std::size_t g = 0; g < P; ++g) p[g] = model.pairing(g, x);
    drift.evaluate(p, rp.wall_floor, b);
    drift_int.axpy(rp.dt, wm.apply(b));
    beta += wm.apply(rp.increment(s));

    Vector xn = rp.state(s + 1);
    for (std::size_t g = 0; g < P; ++g) {
      double q = model.pairing(g, xn);
      double l = std::min(rates.rate(g, q, config.wall_epsilon), config.rate_cap);
      if (l == 0.0) continue;
      int sg = 0;
      std::size_t a = model.image(w, g, sg);
      double cv = double(sg) * 2.0 * q / rates.alpha_sq[g];
      comp[a] += l * cv * rp.dt;
      br[a] += l * cv * cv * rp.dt;
      brf[a] += rates.k[g] / (4.0 * rates.alpha_sq[g]) * q * q * inv_sinh_sq(0.5 * q) * rp.dt;
    }
    std::size_t here = 0;
    while (next_event < path.events.size() && path.events[next_event].step == s) {
      const JumpEvent& ev = path.events[next_event++];
      const Vector& al = model.positive()[ev.root].vector;
      jumps[ev.root] += -2.0 * dot(al, ev.pre) / norm2(al);
      w = model.left_reflect(ev.root, w);
      ++here;
    }
    if (here > 1) ++md.simultaneous_jumps;
    for (std::size_t a = 0; a < P; ++a) {
      md.compensator[a][s + 1] = comp[a];
      md.m[a][s + 1] = jumps[a] + comp[a];
      md.bracket[a][s + 1] = br[a];
      md.bracket_formula[a][s + 1] = brf[a];
    }
    Vector A = drift_int;
    for (std::size_t a = 0; a < P; ++a) A.axpy(-comp[a], model.positive()[a].vector);
    md.drift_part[s + 1] = A;
    md.beta[s + 1] = beta;
  }
  Vector x0 = model.weyl()[path.initial_chamber].matrix.apply(rp.state(0));
  Vector xT = model.weyl()[w].matrix.apply(rp.state(N));
  md.residual = xT - x0 - md.beta[N] - md.drift_part[N];
  for (std::size_t a = 0; a < P; ++a) md.residual.axpy(-md.m[a][N], model.positive()[a].vector);
  return md;
}

double min_merged_multiplicity(const RootSystem& model) {
  double m = 1e300;
  for (std::size_t a = 0; a < model.positive_count(); ++a) {
    if (model.halved(a) >= 0) continue;
    double k = model.positive()[a].multiplicity;
    if (model.doubled(a) >= 0) k += model.positive()[model.doubled(a)].multiplicity;
    m = std::min(m, k);
  }
  return m;
}

JumpStats jump_statistics(std::span<const SkewProductPath> paths, const RootSystem& model,
                          double horizon, std::size_t grid_points) {
  if (paths.empty()) throw std::invalid_argument("jump_statistics needs at least one path");
  const std::size_t P = model.positive_count();
  JumpStats js;
  if (grid_points < 2) grid_points = 2;
  for (std::size_t i = 0; i < grid_points; ++i)
    js.grid.push_back(horizon * double(i) / double(grid_points - 1));
  js.mean_count.assign(grid_points, 0.0);
  js.per_root_events.assign(P, 0);
  js.w_infinity_counts.assign(model.weyl_order(), 0);
  std::vector<double> counts, amps;
  std::vector<std::vector<double>> root_counts(P), root_rates(P), root_fire(P);
  double late_start = 0.9 * horizon;
  for (const SkewProductPath& p : paths) {
    counts.push_back(double(p.events.size()));
    amps.push_back(p.amplitude_sum);
    std::vector<double> rc(P, 0.0);
    bool late = false;
    for (const JumpEvent& e : p.events) {
      ++js.per_root_events[e.root];
      rc[e.root] += 1.0;
      late = late || e.t > late_start;
      for (std::size_t i = 0; i < grid_points; ++i)
        if (e.t <= js.grid[i]) js.mean_count[i] += 1.0;
    }
    for (std::size_t a = 0; a < P; ++a) {
      root_counts[a].push_back(rc[a]);
      root_rates[a].push_back(p.rate_integral[a]);
      root_fire[a].push_back(p.fire_probability[a]);
    }
    js.late_jump_paths += late;
    ++js.w_infinity_counts[p.final_chamber];
  }
  for (double& c : js.mean_count) c /= double(paths.size());
  js.count = summarize(counts);
  js.amplitude = summarize(amps);
  for (std::size_t a = 0; a < P; ++a) {
    auto e = summarize(root_counts[a]);
    auto r = summarize(root_rates[a]);
    js.per_root_mean_events.push_back(e.mean);
    js.per_root_mean_events_se.push_back(e.se);
    js.per_root_rate_integral.push_back(r.mean);
    js.per_root_rate_integral_se.push_back(r.se);
    auto f = summarize(root_fire[a]);
    js.per_root_fire_probability.push_back(f.mean);
    js.per_root_fire_probability_se.push_back(f.se);
  }
  js.late_fraction = double(js.late_jump_paths) / double(paths.size());
  js.w_infinity_reported = min_merged_multiplicity(model) >= 0.5;
  if (!js.w_infinity_reported) std::fill(js.w_infinity_counts.begin(), js.w_infinity_counts.end(), 0);
  return js;
}

namespace {

std::string chamber_word(const RootSystem& model, std::size_t w) {
  std::string s;
  for (int r : model.weyl()[w].word) {
    if (!s.empty()) s += '-';
    s += std::to_string(r);
  }
  return s;
}

}  // namespace

void write_events_csv(std::ostream& out, std::span<const SkewProductPath> paths) {
  std::size_t n = paths.empty() ? 0 : paths.front().radial.dim;
  out << "path_id,t,root_index";
  for (std::size_t j = 1; j <= n; ++j) out << ",pre_" << j;
  for (std::size_t j = 1; j <= n; ++j) out << ",post_" << j;
  out << '\n' << std::setprecision(17);
  for (const SkewProductPath& p : paths)
    for (const JumpEvent& e : p.events) {
      out << p.radial.path_id << ',' << e.t << ',' << e.root;
      for (double v : e.pre) out << ',' << v;
      for (double v : e.post) out << ',' << v;
      out << '\n';
    }
}

void write_full_states_csv(std::ostream& out, std::span<const SkewProductPath> paths,
                           const RootSystem& model) {
  std::size_t n = model.rank();
  out << "path_id,t";
  for (std::size_t j = 1; j <= n; ++j) out << ",x_" << j;
  out << ",chamber_word\n" << std::setprecision(17);
  for (const SkewProductPath& p : paths)
    for (std::size_t i = 0; i < p.radial.grid_size(); ++i) {
      out << p.radial.path_id << ',' << p.radial.times[i];
      for (double v : p.full_state(model, i)) out << ',' << v;
      out << ',' << chamber_word(model, p.chamber[i]) << '\n';
    }
}

}  // namespace hop
