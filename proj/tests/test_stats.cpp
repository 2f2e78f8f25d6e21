#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "hoproc/rng.hpp"
#include "hoproc/stats.hpp"

using namespace hop;

namespace {

double normal_cdf(double x) { return boost::math::cdf(boost::math::normal(), x); }

std::vector<double> normal_by_inverse_cdf(Engine& g, std::size_t n) {
  boost::math::normal nd;
  std::vector<double> out(n);
  for (double& v : out) v = boost::math::quantile(nd, open_uniform(g));
  return out;
}

std::vector<Vector> gaussian_cloud(Engine& g, std::size_t n, std::size_t dim, double shift = 0.0) {
  Normal nd;
  std::vector<Vector> out(n, Vector(dim));
  for (Vector& v : out)
    for (std::size_t i = 0; i < dim; ++i) v[i] = nd(g) + (i == 0 ? shift : 0.0);
  return out;
}

}  // namespace

TEST_CASE("ks_1d null calibration over 100 repeats") {
  int accepted = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    Engine g = make_stream(11, StreamModule::Test, r);
    auto x = normal_by_inverse_cdf(g, 1000);
    accepted += ks_1d(x, normal_cdf).p_value > 0.01;
  }
  CHECK(accepted >= 95);
}

TEST_CASE("ks_1d rejects a 5 sd shift") {
  Engine g = make_stream(12, StreamModule::Test, 0);
  auto x = normal_by_inverse_cdf(g, 1000);
  for (double& v : x) v += 5.0;
  CHECK(ks_1d(x, normal_cdf).p_value < 1e-6);
}

TEST_CASE("ks_1d of a sample against its own empirical CDF is 0") {
  std::vector<double> x{3.0, 1.0, 2.0, 2.0, 5.0, 4.0, 7.0, 6.0, 6.0, 0.5};
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  auto ecdf = [&](double t) {
    return double(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin()) /
           double(sorted.size());
  };
  auto r = ks_1d(x, ecdf);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("ks_1d errors and reordering invariance") {
  std::vector<double> tiny(5, 1.0);
  CHECK_THROWS_AS(ks_1d(tiny, normal_cdf), StatsError);
  std::vector<double> flat(20, 1.0);
  CHECK_THROWS_AS(ks_1d(flat, normal_cdf), StatsError);

  Engine g = make_stream(13, StreamModule::Test, 0);
  auto x = normal_by_inverse_cdf(g, 200);
  auto y = x;
  std::shuffle(y.begin(), y.end(), g);
  auto a = ks_1d(x, normal_cdf), b = ks_1d(y, normal_cdf);
  CHECK(a.statistic == b.statistic);
  CHECK(a.p_value == b.p_value);
}

TEST_CASE("chi_square_uniform: equal counts and an empty cell") {
  std::vector<std::size_t> equal(6, 200);
  auto r = chi_square_uniform(equal);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);

  // 1200 draws, one empty cell, the rest equal: expected 200 per cell,
  // statistic = 200 + 5 * 40^2 / 200 = 240 on 5 degrees of freedom.
  std::vector<std::size_t> holed{0, 240, 240, 240, 240, 240};
  auto h = chi_square_uniform(holed);
  CHECK(h.statistic == doctest::Approx(240.0).epsilon(1e-14));
  CHECK(h.p_value < 1e-10);
  CHECK(h.p_value >= 0.0);
}

TEST_CASE("chi_square_uniform null p-values are uniform") {
  std::vector<double> pvals;
  for (std::uint64_t r = 0; r < 400; ++r) {
    Engine g = make_stream(14, StreamModule::Test, r);
    std::uniform_int_distribution<int> cell(0, 5);
    std::vector<std::size_t> counts(6, 0);
    for (int i = 0; i < 1200; ++i) ++counts[cell(g)];
    pvals.push_back(chi_square_uniform(counts).p_value);
  }
  auto u = ks_1d(pvals, [](double p) { return std::clamp(p, 0.0, 1.0); });
  CHECK(u.p_value > 0.01);
}

TEST_CASE("energy distance: identical samples give 0") {
  Engine g = make_stream(15, StreamModule::Test, 0);
  auto a = gaussian_cloud(g, 60, 2);
  auto r = energy_distance_perm(a, a, 99, 1);
  CHECK(r.statistic <= 1e-12);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("energy distance null calibration over 20 repeats") {
  int accepted = 0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    Engine g = make_stream(16, StreamModule::Test, rep);
    auto a = gaussian_cloud(g, 100, 2);
    auto b = gaussian_cloud(g, 100, 2);
    accepted += energy_distance_perm(a, b, 500, rep).p_value > 0.05;
  }
  CHECK(accepted >= 18);
}

TEST_CASE("energy distance detects a unit mean shift in 2-D") {
  Engine g = make_stream(17, StreamModule::Test, 0);
  auto a = gaussian_cloud(g, 500, 2);
  auto b = gaussian_cloud(g, 500, 2, 1.0);
  auto r = energy_distance_perm(a, b, 500, 3);
  CHECK(r.p_value < 0.01);
  CHECK(r.statistic > 0.0);
}

TEST_CASE("energy distance is seed-deterministic, reorder-invariant and checks dimensions") {
  Engine g = make_stream(18, StreamModule::Test, 0);
  auto a = gaussian_cloud(g, 80, 2);
  auto b = gaussian_cloud(g, 70, 2, 0.3);
  auto r1 = energy_distance_perm(a, b, 200, 9, 1);
  auto r2 = energy_distance_perm(a, b, 200, 9, 4);
  CHECK(r1.statistic == r2.statistic);
  CHECK(r1.p_value == r2.p_value);

  auto a2 = a;
  std::reverse(a2.begin(), a2.end());
  auto r3 = energy_distance_perm(a2, b, 200, 9);
  CHECK(r3.statistic == doctest::Approx(r1.statistic).epsilon(1e-12));

  std::vector<Vector> c(60, Vector(3));
  CHECK_THROWS_AS(energy_distance_perm(a, c, 10, 0), StatsError);
}

TEST_CASE("mean_cov: constant sample, normal calibration, affine audit") {
  std::vector<Vector> constant(10, Vector{1.0, -2.0});
  auto mc = mean_cov(constant);
  CHECK(mc.mean == Vector{1.0, -2.0});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(mc.cov(i, j) == 0.0);

  Engine g = make_stream(19, StreamModule::Test, 0);
  auto x = gaussian_cloud(g, 5000, 3);
  auto nc = mean_cov(x);
  CHECK(identity_deviation(nc.cov) < 0.1);

  // y = A x + b: mean -> A m + b, cov -> A C A^T
  Matrix A(3);
  const double entries[3][3] = {{2.0, 0.5, 0.0}, {-1.0, 1.0, 3.0}, {0.25, 0.0, -1.5}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) A(i, j) = entries[i][j];
  Vector b{1.0, -4.0, 0.5};
  std::vector<Vector> y;
  for (const Vector& v : x) y.push_back(A.apply(v) + b);
  auto yc = mean_cov(y);
  Vector expected_mean = A.apply(nc.mean) + b;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(yc.mean[i] == doctest::Approx(expected_mean[i]).epsilon(1e-12));
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < 3; ++q) s += A(i, p) * nc.cov(p, q) * A(j, q);
      CHECK(yc.cov(i, j) == doctest::Approx(s).epsilon(1e-10).scale(1.0));
    }
  }
  CHECK_THROWS_AS(mean_cov(std::vector<Vector>(1, Vector(2))), StatsError);
}

TEST_CASE("fit_line recovers an exact line") {
  std::vector<double> x{0.0, 1.0, 2.0, 3.0}, y{1.0, 3.0, 5.0, 7.0};
  auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_se == doctest::Approx(0.0));
}
