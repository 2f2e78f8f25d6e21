#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "hoproc/drift_fields.hpp"
#include "hoproc/root_algebra.hpp"
#include "hoproc/sde_engine.hpp"
#include "hoproc/stats.hpp"

using namespace hop;

namespace {

SimConfig base_config(const RootSystem& m, ProcessKind kind, Vector start, double dt, double T) {
  SimConfig c;
  c.model = &m;
  c.kind = kind;
  c.start = std::move(start);
  c.dt = dt;
  c.horizon = T;
  return c;
}

// Strong error at T = 1 of the scheme at dt against the same scheme at
// dt / 16 driven by the summed fine increments.
double strong_error(const RootSystem& m, ProcessKind kind, const Vector& start, int level,
                    int paths) {
  const std::size_t N = std::size_t(1) << level, M = 16;
  const double dt = std::ldexp(1.0, -level);
  double err = 0.0;
  for (int p = 0; p < paths; ++p) {
    Engine g = make_stream(5, StreamModule::Test, p);
    Normal nd;
    std::vector<Vector> fine(N * M, Vector(m.rank())), coarse(N, Vector(m.rank()));
    for (std::size_t i = 0; i < N * M; ++i) {
      for (std::size_t j = 0; j < m.rank(); ++j) fine[i][j] = std::sqrt(dt / M) * nd(g);
      coarse[i / M] += fine[i];
    }
    SimConfig c = base_config(m, kind, start, dt, 1.0);
    c.record_stride = 0;
    auto pc = simulate_with_noise(c, coarse);
    c.dt = dt / M;
    auto pf = simulate_with_noise(c, fine);
    err += distance(pc.terminal, pf.terminal);
  }
  return err / paths;
}

double convergence_slope(const RootSystem& m, ProcessKind kind, const Vector& start) {
  std::vector<double> ldt, lerr;
  for (int level = 5; level <= 9; ++level) {
    ldt.push_back(std::log(std::ldexp(1.0, -level)));
    lerr.push_back(std::log(strong_error(m, kind, start, level, 400)));
  }
  return fit_line(ldt, lerr).slope;
}

}  // namespace

TEST_CASE("zero noise deep in the chamber advances by dt * rho") {
  auto a2 = RootSystem::standard(Family::A, 2, {1.0});
  Vector x = 41.0 * a2.rho();
  DriftField drift = make_drift_field(a2, ProcessKind::HoRadial);
  double dt = 1e-3;
  Vector y = step(a2, drift, x, Vector(2), dt, default_wall_floor(dt));
  Vector expected = x + dt * a2.rho();
  CHECK(distance(y, expected) <= 1e-13);
}

TEST_CASE("a step that leaves the chamber equals the fold of the raw update") {
  for (auto fam : {Family::A, Family::B}) {
    auto m = RootSystem::standard(fam, 2, fam == Family::A ? std::vector<double>{1.0}
                                                           : std::vector<double>{1.0, 0.5});
    DriftField drift = make_drift_field(m, ProcessKind::HoRadial);
    Engine g = make_stream(3, StreamModule::Test, 0);
    Normal nd;
    int exits = 0;
    for (int trial = 0; trial < 500; ++trial) {
      Vector x = m.fold(Vector{nd(g), nd(g)});
      x += 0.2 * m.rho();
      Vector dW{0.8 * nd(g), 0.8 * nd(g)};
      double dt = 1e-2;
      StepInfo info;
      Vector y = step(m, drift, x, dW, dt, 1e-8, 0.0, &info);
      Vector raw = x + dt * ho_radial_drift(m, x) + dW;
      Vector oracle = radial_decompose(m, raw).x_plus;
      CHECK(distance(y, oracle) <= 1e-12 * (1.0 + norm(raw)));
      CHECK(m.in_closed_chamber(y));
      exits += info.reflections > 0;
    }
    CHECK(exits > 50);
  }
}

TEST_CASE("step rejects non-finite states") {
  auto a1 = RootSystem::standard(Family::A, 1, {1.0});
  DriftField drift = make_drift_field(a1, ProcessKind::HoRadial);
  Vector dW{std::nan("")};
  CHECK_THROWS_AS(step(a1, drift, Vector{1.0}, dW, 1e-3, 1e-2), StepError);
}

TEST_CASE("config validation") {
  auto a2 = RootSystem::standard(Family::A, 2, {1.0});
  SimConfig c = base_config(a2, ProcessKind::HoRadial, -1.0 * a2.rho(), 1e-3, 1.0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.start = a2.rho();
  CHECK_NOTHROW(c.validate());
  c.dt = 2.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.dt = 1e-3;
  c.wall_floor = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(parse_process_kind(to_string(ProcessKind::Intrinsic)) == ProcessKind::Intrinsic);
  CHECK_THROWS(parse_process_kind("bogus"));
}

TEST_CASE("self-convergence slope of folded Brownian motion in rank 1") {
  auto a1 = RootSystem::standard(Family::A, 1, {1.0});
  Vector start = 0.5 * a1.positive()[0].vector;
  double slope = convergence_slope(a1, ProcessKind::Brownian, start);
  MESSAGE("folded BM strong-error slope " << slope);
  CHECK(slope >= 0.4);
  CHECK(slope <= 0.6);
}

TEST_CASE("self-convergence slope of the HO radial scheme in rank 1") {
  auto a1 = RootSystem::standard(Family::A, 1, {1.0});
  for (double p0 : {1.0, 0.0}) {
    Vector start = (0.5 * p0) * a1.positive()[0].vector;
    double slope = convergence_slope(a1, ProcessKind::HoRadial, start);
    MESSAGE("HO radial strong-error slope from pairing " << p0 << ": " << slope);
    // the repulsive drift keeps the scheme at least at the Brownian order
    CHECK(slope >= 0.4);
  }
}

TEST_CASE("Brownian kind: determinism and chi-square norm law") {
  auto a2 = RootSystem::standard(Family::A, 2, {1.0});
  SimConfig c = base_config(a2, ProcessKind::Brownian, Vector(2), 1e-2, 1.0);
  c.path_count = 1000;
  c.master_seed = 21;
  c.record_stride = 0;
  auto first = simulate_radial(c);
  auto again = simulate_radial(c);
  std::vector<double> scaled;
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].terminal == again[i].terminal);
    scaled.push_back(norm2(first[i].terminal) / c.horizon);
  }
  boost::math::chi_squared chi(2.0);
  auto r = ks_1d(scaled, [&](double v) { return v <= 0.0 ? 0.0 : boost::math::cdf(chi, v); });
  CHECK(r.p_value > 0.01);
}

TEST_CASE("seed determinism across worker counts") {
  auto b2 = RootSystem::standard(Family::B, 2, {1.0, 2.0});
  SimConfig c = base_config(b2, ProcessKind::HoRadial, b2.rho(), 1e-2, 2.0);
  c.path_count = 12;
  c.master_seed = 99;
  c.workers = 1;
  auto serial = simulate_radial(c);
  c.workers = 4;
  auto parallel = simulate_radial(c);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].states == parallel[i].states);
    CHECK(serial[i].coth_integral == parallel[i].coth_integral);
  }
}

TEST_CASE("recorded paths stay in the closed chamber with the requested grid") {
  auto bc2 = RootSystem::standard(Family::BC, 2, {0.3, 0.6, 0.2});
  SimConfig c = base_config(bc2, ProcessKind::HoRadial, Vector(2), 1e-2, 3.0);
  c.path_count = 20;
  c.record_noise = true;
  auto paths = simulate_radial(c);
  for (const auto& p : paths) {
    REQUIRE(p.grid_size() == c.steps() + 1);
    REQUIRE(p.full_record());
    for (std::size_t i = 0; i < p.grid_size(); ++i) CHECK(bc2.in_closed_chamber(p.state(i)));
    double ss = 0.0;
    for (double v : p.noise) ss += v * v;
    // recorded increments have variance dt per coordinate
    double var = ss / double(p.noise.size());
    CHECK(var == doctest::Approx(c.dt).epsilon(0.2));
  }
  c.record_stride = 7;
  auto strided = simulate_radial_path(c, 0);
  CHECK(strided.grid_size() == c.steps() / 7 + 2);
  CHECK(strided.times.back() == doctest::Approx(c.horizon));
  CHECK(strided.terminal == paths[0].terminal);
}

TEST_CASE("coupled pair: identical starts give identical paths") {
  auto a1 = RootSystem::standard(Family::A, 1, {1.0});
  SimConfig c = base_config(a1, ProcessKind::HoRadial, Vector(1), 1e-3, 1.0);
  Vector s = 0.5 * a1.positive()[0].vector;
  auto [p, q] = simulate_coupled_pair(c, s, s, 3);
  CHECK(p.states == q.states);
}

TEST_CASE("coupled pair: distance is non-increasing in rank 1") {
  auto a1 = RootSystem::standard(Family::A, 1, {1.0});
  SimConfig c = base_config(a1, ProcessKind::HoRadial, Vector(1), 1e-4, 1.0);
  Vector x0 = 0.5 * a1.positive()[0].vector;
  for (std::size_t seed = 0; seed < 10; ++seed) {
    c.master_seed = seed;
    auto [p, q] = simulate_coupled_pair(c, x0, 2.0 * x0);
    std::size_t ok = 0;
    for (std::size_t i = 1; i < p.grid_size(); ++i) {
      double before = distance(p.state(i - 1), q.state(i - 1));
      double after = distance(p.state(i), q.state(i));
      ok += after <= before;
    }
    CHECK(double(ok) >= 0.99 * double(p.grid_size() - 1));
    CHECK(distance(p.terminal, q.terminal) < distance(x0, 2.0 * x0));
  }
}

TEST_CASE("BESQ reference: mean and chi-square law") {
  BesselRef ref{3.0, 1.0};
  std::vector<double> terminal;
  for (std::uint64_t i = 0; i < 1000; ++i)
    terminal.push_back(simulate_bessel_sq(ref, 1e-3, 1.0, 4, i).back());
  auto s = summarize(terminal);
  // E Z_t = r0^2 + d t
  CHECK(std::abs(s.mean - 4.0) <= 3.0 * s.se);

  BesselRef from0{2.0, 0.0};
  std::vector<double> z;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    auto path = simulate_bessel_sq(from0, 1e-3, 1.0, 8, i);
    for (double v : path) REQUIRE(v >= 0.0);
    z.push_back(path.back());
  }
  boost::math::chi_squared chi(2.0);
  auto r = ks_1d(z, [&](double v) { return v <= 0.0 ? 0.0 : boost::math::cdf(chi, v); });
  CHECK(r.p_value > 0.01);
  CHECK_THROWS(simulate_bessel_sq(BesselRef{0.0, 1.0}, 1e-3, 1.0, 0));
}

TEST_CASE("Ito sums: constant integrand and additivity") {
  auto a2 = RootSystem::standard(Family::A, 2, {1.0});
  SimConfig c = base_config(a2, ProcessKind::HoRadial, a2.rho(), 1e-3, 1.0);
  c.record_noise = true;
  auto p = simulate_radial_path(c, 0);
  Vector cst{0.7, -1.3};
  auto r = ito_integral(p, [&](const Vector&) { return cst; });
  Vector beta(2);
  for (std::size_t s = 0; s < p.steps; ++s) beta += p.increment(s);
  CHECK(r.integral == doctest::Approx(dot(cst, beta)).epsilon(1e-12));
  CHECK(r.bracket == doctest::Approx(norm2(cst) * c.horizon).epsilon(1e-12));

  auto g = [&](const Vector& x) { return girsanov_integrand(a2, x); };
  auto whole = ito_integral(p, g);
  auto left = ito_integral(p, g, 0, 400);
  auto right = ito_integral(p, g, 400);
  CHECK(left.bracket + right.bracket == doctest::Approx(whole.bracket).epsilon(1e-13));
  CHECK(left.integral + right.integral == doctest::Approx(whole.integral).epsilon(1e-12));

  SimConfig quiet = c;
  quiet.record_noise = false;
  auto bare = simulate_radial_path(quiet, 0);
  CHECK_THROWS_AS(ito_integral(bare, g), std::invalid_argument);
  CHECK_THROWS_AS(path_integral(bare, a2, IntegrandKind::Girsanov), std::invalid_argument);
}

TEST_CASE("Girsanov weight has mean 1 over Dunkl radial paths") {
  auto a1 = RootSystem::standard(Family::A, 1, {1.0});
  auto d1 = rescale_to_dunkl(a1);
  SimConfig c = base_config(d1, ProcessKind::DunklRadial, 0.5 * a1.positive()[0].vector, 1e-3, 1.0);
  c.record_noise = true;
  c.path_count = 2000;
  c.master_seed = 17;
  auto paths = simulate_radial(c);
  std::vector<double> weights;
  for (const auto& p : paths) {
    double lw = path_integral(p, a1, IntegrandKind::Girsanov).girsanov.log_weight();
    REQUIRE(std::isfinite(lw));
    weights.push_back(std::exp(lw));
    CHECK(weights.back() > 0.0);
  }
  auto s = summarize(weights);
  CHECK(std::abs(s.mean - 1.0) <= 3.0 * s.se);
}

TEST_CASE("coth accumulator is stable under dt halving") {
  auto a1 = RootSystem::standard(Family::A, 1, {1.0});
  double means[2];
  int idx = 0;
  for (double dt : {1e-3, 5e-4}) {
    SimConfig c = base_config(a1, ProcessKind::HoRadial, Vector(1), dt, 1.0);
    c.path_count = 500;
    c.record_stride = 0;
    c.master_seed = 31;
    auto paths = simulate_radial(c);
    std::vector<double> v;
    for (const auto& p : paths) v.push_back(path_integral(p, a1, IntegrandKind::CothAlpha).per_root[0]);
    means[idx++] = summarize(v).mean;
  }
  double ratio = means[1] / means[0];
  CHECK(ratio >= 0.8);
  CHECK(ratio <= 1.2);
}

TEST_CASE("wall-contact fraction falls as dt falls (k >= 1/2)") {
  auto a1 = RootSystem::standard(Family::A, 1, {1.0});
  double previous = 1.0;
  for (double dt : {1e-2, 1e-3, 1e-4}) {
    SimConfig c = base_config(a1, ProcessKind::HoRadial, Vector(1), dt, 1.0);
    c.path_count = 200;
    c.record_stride = 0;
    c.accumulate = false;
    auto paths = simulate_radial(c);
    double floored = 0.0, total = 0.0;
    for (const auto& p : paths) {
      floored += double(p.floored_steps);
      total += double(p.steps);
    }
    double frac = floored / total;
    MESSAGE("dt " << dt << " wall-contact fraction " << frac);
    CHECK(frac < previous);
    previous = frac;
  }
}

TEST_CASE("path CSV layout") {
  auto a2 = RootSystem::standard(Family::A, 2, {1.0});
  SimConfig c = base_config(a2, ProcessKind::HoRadial, a2.rho(), 0.1, 1.0);
  c.path_count = 3;
  auto paths = simulate_radial(c);
  std::ostringstream os;
  write_paths_csv(os, paths);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "path_id,t,x_1,x_2");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3 * 11);
}
