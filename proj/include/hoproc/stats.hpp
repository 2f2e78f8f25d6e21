// Statistical tests and estimators for the verification suite.

#ifndef HOPROC_STATS_HPP_
#define HOPROC_STATS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hoproc/vector.hpp"

namespace hop {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::string method;
};

struct StatsError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda);

// One-sample KS test against a continuous CDF. Asymptotic p-value with the
// Stephens small-sample correction (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
TestResult ks_1d(std::span<const double> sample, const std::function<double(double)>& cdf);

// Pearson chi-square against equal cell probabilities, m - 1 dof.
TestResult chi_square_uniform(std::span<const std::size_t> counts);

// Energy statistic 2E|A-B| - E|A-A'| - E|B-B'| (V-statistic form) with a
// permutation p-value (1 + #{perm >= observed}) / (1 + permutations).
// Permutation j draws from make_stream(seed, Permutation, j).
TestResult energy_distance_perm(std::span<const Vector> a, std::span<const Vector> b,
                                std::size_t permutations = 500, std::uint64_t seed = 0,
                                std::size_t workers = 0);

struct MeanCov {
  std::size_t n = 0;
  Vector mean;
  Vector mean_se;  // sqrt(cov_ii / n)
  Matrix cov;      // unbiased
  Matrix cov_se;   // sqrt((m4_ij - cov_ij^2) / n), fourth-moment estimate
};

MeanCov mean_cov(std::span<const Vector> sample);

// Spectral norm of a symmetric matrix.
double operator_norm(const Matrix& m);
// ||cov - I||_2.
double identity_deviation(const Matrix& cov);

struct ScalarSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
};
ScalarSummary summarize(std::span<const double> values);

double quantile(std::vector<double> values, double q);

// Least-squares slope and intercept of y against x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace hop

#endif
