#include "hoproc/sde_engine.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "hoproc/parallel.hpp"

namespace hop {

std::string to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::HoRadial: return "ho_radial";
    case ProcessKind::DunklRadial: return "dunkl_radial";
    case ProcessKind::Intrinsic: return "intrinsic";
    case ProcessKind::Brownian: return "brownian";
  }
  return "ho_radial";
}

ProcessKind parse_process_kind(std::string_view s) {
  if (s == "ho_radial") return ProcessKind::HoRadial;
  if (s == "dunkl_radial") return ProcessKind::DunklRadial;
  if (s == "intrinsic") return ProcessKind::Intrinsic;
  if (s == "brownian") return ProcessKind::Brownian;
  throw std::invalid_argument("unknown radial process kind '" + std::string(s) + "'");
}

DriftField make_drift_field(const RootSystem& model, ProcessKind kind) {
  switch (kind) {
    case ProcessKind::HoRadial: return DriftField(model, DriftField::Kind::HoCoth);
    case ProcessKind::DunklRadial: return DriftField(model, DriftField::Kind::Rational);
    case ProcessKind::Intrinsic: return DriftField(model, DriftField::Kind::Rational, true);
    case ProcessKind::Brownian: return DriftField(model, DriftField::Kind::None);
  }
  return {};
}

double default_wall_floor(double dt) { return kWallFloorFactor * std::sqrt(dt); }

void SimConfig::validate() const {
  validate_start_free();
  if (!model->in_closed_chamber(start, 1e-12 * (1.0 + norm(start))))
    throw std::invalid_argument("SimConfig: start is not in the closed positive chamber");
}

void SimConfig::validate_start_free() const {
  auto bad = [](const std::string& m) { throw std::invalid_argument("SimConfig: " + m); };
  if (!model) bad("no root system");
  if (start.size() != model->rank()) bad("start has the wrong dimension");
  if (!start.all_finite()) bad("start is not finite");
  if (!(dt > 0.0)) bad("dt must be positive");
  if (!(horizon > 0.0)) bad("horizon must be positive");
  if (!(dt < horizon) && std::abs(dt - horizon) > 1e-12 * horizon) bad("dt must not exceed the horizon");
  if (path_count == 0) bad("path_count must be positive");
  if (wall_floor < 0.0) bad("wall_floor must be positive");
  if (drift_cap < 0.0) bad("drift_cap must be positive");
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

namespace {

// Shared stepping kernel. `pairings` holds (a, x) on entry.
Vector advance(const RootSystem& model, const DriftField& drift, const Vector& x,
               std::span<const double> pairings, const Vector& dW, double dt, double floor,
               double cap, StepInfo& info) {
  Vector b;
  drift.evaluate(pairings, floor, b);
  if (cap > 0.0) {
    double nb = norm(b);
    if (nb > cap) b *= cap / nb;
  }
  Vector raw = x;
  raw.axpy(dt, b);
  raw += dW;
  if (!raw.all_finite()) throw StepError("non-finite state after Euler step");
  Vector y = model.fold(raw, info.reflections);
  double tol = 1e-12 * (1.0 + norm(y));
  if (!model.in_closed_chamber(y, tol)) throw StepError("fold left the closed chamber");
  return y;
}

void compute_pairings(const RootSystem& model, const Vector& x, std::vector<double>& p) {
  const auto& pos = model.positive();
  for (std::size_t a = 0; a < pos.size(); ++a) p[a] = dot(pos[a].vector, x);
}

template <class NoiseFn>
RadialPath run_path(const SimConfig& cfg, const DriftField& drift, const Vector& start,
                    std::size_t path_id, NoiseFn&& next_noise,
                    const StepObserver* on_step = nullptr,
                    const RecordObserver* on_record = nullptr) {
  const RootSystem& model = *cfg.model;
  const std::size_t n = model.rank();
  const std::size_t P = model.positive_count();
  const std::size_t N = cfg.steps();
  const double dt = cfg.dt;
  const double eps = cfg.floor();

  RadialPath path;
  path.path_id = path_id;
  path.dim = n;
  path.dt = dt;
  path.wall_floor = eps;
  path.steps = N;
  path.stride = cfg.record_stride;
  path.coth_integral.assign(P, 0.0);
  path.rate_integral.assign(P, 0.0);
  std::size_t expected = cfg.record_stride ? N / cfg.record_stride + 2 : 2;
  path.times.reserve(expected);
  path.states.reserve(expected * n);
  if (cfg.record_noise) path.noise.reserve(N * n);

  std::vector<double> alpha_sq(P), mult(P);
  for (std::size_t a = 0; a < P; ++a) {
    alpha_sq[a] = norm2(model.positive()[a].vector);
    mult[a] = model.positive()[a].multiplicity;
  }

  auto record = [&](std::size_t i, const Vector& x) {
    path.times.push_back(double(i) * dt);
    path.states.insert(path.states.end(), x.begin(), x.end());
    if (on_record) (*on_record)(path.times.size() - 1);
  };

  Vector x = start;
  std::vector<double> p(P);
  Vector dW(n);
  record(0, x);
  for (std::size_t i = 0; i < N; ++i) {
    compute_pairings(model, x, p);
    bool floored = false;
    for (std::size_t a = 0; a < P; ++a) {
      double q = p[a] < eps ? (floored = true, eps) : p[a];
      if (!cfg.accumulate) continue;
      path.coth_integral[a] += dt * coth(0.5 * q);
      path.rate_integral[a] += dt * ho_rate_from_pairing(mult[a], alpha_sq[a], p[a],
                                                         kDefaultWallEpsilon);
    }
    if (floored) ++path.floored_steps;
    next_noise(dW);
    if (cfg.record_noise) path.noise.insert(path.noise.end(), dW.begin(), dW.end());
    StepInfo info;
    try {
      x = advance(model, drift, x, p, dW, dt, eps, cfg.drift_cap, info);
    } catch (const StepError& e) {
      throw StepError("path " + std::to_string(path_id) + ", step " + std::to_string(i) +
                      ": " + e.what());
    }
    if (info.reflections > 0) ++path.folded_steps;
    if (on_step) (*on_step)(i, x);
    bool last = i + 1 == N;
    if (last || (cfg.record_stride && (i + 1) % cfg.record_stride == 0)) record(i + 1, x);
  }
  path.terminal = x;
  return path;
}

auto gaussian_noise(Engine& g, double sd) {
  return [&g, sd, nd = Normal(0.0, 1.0)](Vector& dW) mutable {
    for (std::size_t j = 0; j < dW.size(); ++j) dW[j] = sd * nd(g);
  };
}

}  // namespace

Vector step(const RootSystem& model, const DriftField& drift, const Vector& x,
            const Vector& dW, double dt, double wall_floor, double drift_cap,
            StepInfo* info) {
  std::vector<double> p(model.positive_count());
  compute_pairings(model, x, p);
  StepInfo local;
  for (double v : p) local.floored = local.floored || v < wall_floor;
  Vector y = advance(model, drift, x, p, dW, dt, wall_floor, drift_cap, local);
  if (info) *info = local;
  return y;
}

Vector RadialPath::state(std::size_t i) const {
  return Vector(std::span<const double>(states.data() + i * dim, dim));
}

Vector RadialPath::increment(std::size_t s) const {
  if (noise.empty()) throw std::logic_error("path has no noise record");
  return Vector(std::span<const double>(noise.data() + s * dim, dim));
}

RadialPath simulate_radial_path(const SimConfig& config, std::size_t index) {
  config.validate();
  DriftField drift = make_drift_field(*config.model, config.kind);
  Engine g = make_stream(config.master_seed, StreamModule::RadialNoise, index);
  return run_path(config, drift, config.start, index, gaussian_noise(g, std::sqrt(config.dt)));
}

RadialPath simulate_radial_observed(const SimConfig& config, std::size_t index,
                                    const StepObserver& on_step,
                                    const RecordObserver& on_record) {
  config.validate();
  DriftField drift = make_drift_field(*config.model, config.kind);
  Engine g = make_stream(config.master_seed, StreamModule::RadialNoise, index);
  return run_path(config, drift, config.start, index, gaussian_noise(g, std::sqrt(config.dt)),
                  on_step ? &on_step : nullptr, on_record ? &on_record : nullptr);
}

std::vector<RadialPath> simulate_radial(const SimConfig& config) {
  config.validate();
  std::vector<RadialPath> out(config.path_count);
  parallel_for(
      config.path_count, [&](std::size_t i) { out[i] = simulate_radial_path(config, i); },
      config.workers);
  return out;
}

std::pair<RadialPath, RadialPath> simulate_coupled_pair(const SimConfig& config,
                                                        const Vector& start_a,
                                                        const Vector& start_b,
                                                        std::size_t index) {
  SimConfig a = config, b = config;
  a.start = start_a;
  b.start = start_b;
  return {simulate_radial_path(a, index), simulate_radial_path(b, index)};
}

RadialPath simulate_with_noise(const SimConfig& config, std::span<const Vector> increments,
                               std::size_t path_id) {
  config.validate();
  if (increments.size() != config.steps())
    throw std::invalid_argument("simulate_with_noise: one increment per step is required");
  DriftField drift = make_drift_field(*config.model, config.kind);
  std::size_t i = 0;
  return run_path(config, drift, config.start, path_id,
                  [&](Vector& dW) { dW = increments[i++]; });
}

std::vector<double> simulate_bessel_sq(const BesselRef& ref, double dt, double horizon,
                                       std::uint64_t seed, std::uint64_t index) {
  if (!(ref.dimension > 0.0)) throw std::invalid_argument("BESQ dimension must be > 0");
  if (!(dt > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("BESQ needs dt, T > 0");
  std::size_t N = static_cast<std::size_t>(std::llround(horizon / dt));
  Engine g = make_stream(seed, StreamModule::Bessel, index);
  Normal nd;
  std::vector<double> z(N + 1);
  z[0] = ref.start_radius * ref.start_radius;
  double sd = std::sqrt(dt);
  for (std::size_t i = 0; i < N; ++i) {
    double next = z[i] + ref.dimension * dt + 2.0 * std::sqrt(z[i]) * sd * nd(g);
    z[i + 1] = next > 0.0 ? next : 0.0;
  }
  return z;
}

ItoResult ito_integral(const RadialPath& path, const std::function<Vector(const Vector&)>& g,
                       std::size_t from, std::size_t to) {
  if (!path.has_noise()) throw std::invalid_argument("ito_integral: missing noise record");
  if (!path.full_record()) throw std::invalid_argument("ito_integral: needs every grid point");
  to = std::min(to, path.steps);
  ItoResult r;
  for (std::size_t s = from; s < to; ++s) {
    Vector gv = g(path.state(s));
    r.integral += dot(gv, path.increment(s));
    r.bracket += norm2(gv) * path.dt;
  }
  return r;
}

PathIntegral path_integral(const RadialPath& path, const RootSystem& model,
                           IntegrandKind kind) {
  PathIntegral out;
  switch (kind) {
    case IntegrandKind::CothAlpha: out.per_root = path.coth_integral; break;
    case IntegrandKind::JumpRateAlpha: out.per_root = path.rate_integral; break;
    case IntegrandKind::Girsanov: {
      double eps = path.wall_floor;
      out.girsanov = ito_integral(path, [&](const Vector& x) {
        Vector gv(x.size());
        for (const Root& r : model.positive()) {
          double p = dot(r.vector, x);
          double q = p < eps ? eps : p;
          gv.axpy(0.5 * r.multiplicity * coth_minus_inverse(0.5 * q), r.vector);
        }
        return gv;
      });
      break;
    }
  }
  return out;
}

void write_paths_csv(std::ostream& out, std::span<const RadialPath> paths,
                     std::size_t extra_stride) {
  if (paths.empty()) return;
  if (extra_stride == 0) extra_stride = 1;
  std::size_t n = paths.front().dim;
  out << "path_id,t";
  for (std::size_t j = 1; j <= n; ++j) out << ",x_" << j;
  out << '\n';
  out << std::setprecision(17);
  for (const RadialPath& p : paths) {
    for (std::size_t i = 0; i < p.grid_size(); ++i) {
      if (i % extra_stride != 0 && i + 1 != p.grid_size()) continue;
      out << p.path_id << ',' << p.times[i];
      for (std::size_t j = 0; j < n; ++j) out << ',' << p.states[i * n + j];
      out << '\n';
    }
  }
}

}  // namespace hop
