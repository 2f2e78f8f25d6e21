#include "hoproc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "hoproc/parallel.hpp"
#include "hoproc/rng.hpp"

namespace hop {

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // the alternating series is inaccurate here, value ~1
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    double term = std::exp(-2.0 * j * j * lambda * lambda);
    s += (j % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

TestResult ks_1d(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.size() < 8) throw StatsError("ks_1d needs at least 8 values");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  if (x.front() == x.back()) throw StatsError("ks_1d: degenerate sample");
  double n = double(x.size());
  double d = 0.0;
  // Compare both one-sided limits at every distinct sample value, so a step
  // reference equal to the empirical CDF gives exactly 0.
  for (std::size_t i = 0; i < x.size();) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    double f = cdf(x[i]);
    double f_left = cdf(std::nextafter(x[i], -HUGE_VAL));
    d = std::max({d, std::abs(double(j) / n - f), std::abs(double(i) / n - f_left)});
    i = j;
  }
  double sn = std::sqrt(n);
  TestResult r;
  r.statistic = d;
  r.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
  r.n_a = x.size();
  r.method = "ks_1d";
  return r;
}

TestResult chi_square_uniform(std::span<const std::size_t> counts) {
  if (counts.size() < 2) throw StatsError("chi_square_uniform needs at least 2 cells");
  double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  double expected = total / double(counts.size());
  if (expected <= 0.0) throw StatsError("chi_square_uniform: no observations");
  double stat = 0.0;
  for (std::size_t c : counts) stat += (double(c) - expected) * (double(c) - expected) / expected;
  TestResult r;
  r.statistic = stat;
  r.p_value = stat <= 0.0 ? 1.0 : boost::math::gamma_q(0.5 * double(counts.size() - 1), 0.5 * stat);
  r.n_a = static_cast<std::size_t>(total);
  r.method = "chi_square_uniform";
  return r;
}

namespace {

// 2 mean d(A,B) - mean d(A,A') - mean d(B,B') from the pooled distance matrix,
// where the first na labels of `order` are group A.
double energy_from_matrix(const std::vector<double>& D, std::size_t N, std::size_t na,
                          const std::vector<std::uint32_t>& order) {
  std::size_t nb = N - na;
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double* row = D.data() + std::size_t(order[i]) * N;
    bool ia = i < na;
    for (std::size_t j = i + 1; j < N; ++j) {
      double d = row[order[j]];
      bool ja = j < na;
      if (ia && ja) aa += d;
      else if (!ia && !ja) bb += d;
      else ab += d;
    }
  }
  // V-statistic: off-diagonal pairs counted twice, diagonal zeros included
  return 2.0 * ab / (double(na) * double(nb)) - 2.0 * aa / (double(na) * double(na)) -
         2.0 * bb / (double(nb) * double(nb));
}

}  // namespace

TestResult energy_distance_perm(std::span<const Vector> a, std::span<const Vector> b,
                                std::size_t permutations, std::uint64_t seed,
                                std::size_t workers) {
  if (a.empty() || b.empty()) throw StatsError("energy_distance_perm: empty sample");
  std::size_t dim = a[0].size();
  for (const Vector& v : a)
    if (v.size() != dim) throw StatsError("energy_distance_perm: dimension mismatch");
  for (const Vector& v : b)
    if (v.size() != dim) throw StatsError("energy_distance_perm: dimension mismatch");

  std::size_t na = a.size(), N = a.size() + b.size();
  std::vector<Vector> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<double> D(N * N, 0.0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) D[i * N + j] = D[j * N + i] = distance(pooled[i], pooled[j]);

  std::vector<std::uint32_t> identity(N);
  std::iota(identity.begin(), identity.end(), 0u);
  double observed = energy_from_matrix(D, N, na, identity);

  std::vector<double> perm_stats(permutations);
  parallel_for(
      permutations,
      [&](std::size_t j) {
        Engine g = make_stream(seed, StreamModule::Permutation, j);
        std::vector<std::uint32_t> order = identity;
        std::shuffle(order.begin(), order.end(), g);
        perm_stats[j] = energy_from_matrix(D, N, na, order);
      },
      workers);
  std::size_t ge = 0;
  // relative slack absorbs summation-order round-off for tied statistics
  double thresh = observed - 1e-12 * std::abs(observed);
  for (double s : perm_stats) ge += s >= thresh;

  TestResult r;
  r.statistic = std::max(observed, 0.0);
  r.p_value = double(1 + ge) / double(1 + permutations);
  r.n_a = na;
  r.n_b = b.size();
  r.method = "energy_distance_perm";
  return r;
}

MeanCov mean_cov(std::span<const Vector> sample) {
  if (sample.size() < 2) throw StatsError("mean_cov needs at least 2 values");
  std::size_t n = sample.size(), d = sample[0].size();
  MeanCov out;
  out.n = n;
  out.mean = Vector(d);
  for (const Vector& v : sample) out.mean += v;
  out.mean /= double(n);
  out.cov = Matrix(d);
  Matrix m4(d);
  for (const Vector& v : sample) {
    Vector c = v - out.mean;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        out.cov(i, j) += c[i] * c[j];
        m4(i, j) += c[i] * c[i] * c[j] * c[j];
      }
  }
  out.cov_se = Matrix(d);
  out.mean_se = Vector(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double biased = out.cov(i, j) / double(n);
      out.cov(i, j) /= double(n - 1);
      double var = m4(i, j) / double(n) - biased * biased;
      out.cov_se(i, j) = std::sqrt(std::max(var, 0.0) / double(n));
    }
  for (std::size_t i = 0; i < d; ++i) out.mean_se[i] = std::sqrt(out.cov(i, i) / double(n));
  return out;
}

double operator_norm(const Matrix& m) {
  std::size_t d = m.size();
  Eigen::MatrixXd e(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) e(i, j) = 0.5 * (m(i, j) + m(j, i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double identity_deviation(const Matrix& cov) {
  Matrix m = cov;
  for (std::size_t i = 0; i < m.size(); ++i) m(i, i) -= 1.0;
  return operator_norm(m);
}

ScalarSummary summarize(std::span<const double> values) {
  ScalarSummary s;
  s.n = values.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / double(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / double(s.n - 1));
    s.se = s.sd / std::sqrt(double(s.n));
  }
  return s;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw StatsError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  double pos = q * double(values.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - double(lo)) * (values[hi] - values[lo]);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw StatsError("fit_line: bad input");
  double n = double(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

}  // namespace hop
