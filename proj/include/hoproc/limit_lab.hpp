// Normalizations and samplers for the long-time and scaling limits:
// LLN / CLT of the radial and full processes, the HO -> Dunkl scaling limit,
// the Girsanov identity between the HO and Dunkl radial laws, and the
// complex-case F0 limit towards I*.

#ifndef HOPROC_LIMIT_LAB_HPP_
#define HOPROC_LIMIT_LAB_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hoproc/jump_engine.hpp"
#include "hoproc/root_algebra.hpp"
#include "hoproc/sde_engine.hpp"
#include "hoproc/stats.hpp"

namespace hop {

struct LimitError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NormalizedSample {
  double T = 0.0;
  std::vector<Vector> values;
  std::string provenance;
};

struct LlnEstimate {
  Vector mean;  // mean of X_T / T
  Vector se;
  double error = 0.0;           // |mean - rho|
  double relative_error = 0.0;  // |mean - rho| / |rho|
  // |mean over paths of (1/T) int (drift - rho) ds|, from the coth accumulators
  double contamination = 0.0;
};

// Radial paths of the HO radial process (accumulators on). Needs >= 10 paths.
LlnEstimate lln_estimate(std::span<const RadialPath> paths, const RootSystem& model, double T);

// (X_T - rho T) / sqrt(T) per path.
NormalizedSample clt_sample(std::span<const RadialPath> paths, const RootSystem& model, double T);

struct Gaussianity {
  MeanCov moments;
  double cov_deviation = 0.0;     // operator norm of cov - I
  std::vector<TestResult> ks;     // per coordinate vs N(0, 1)
};
Gaussianity gaussianity(const NormalizedSample& sample);

// Per positive root a: sign[a] = +1 if a is in w R+, else -1.
struct ChamberSignVector {
  std::vector<int> sign;
};
ChamberSignVector chamber_signs(const RootSystem& model, std::size_t w);
// (1/2) sum k_a sign_a a, which equals w rho.
Vector signed_rho(const RootSystem& model, const ChamberSignVector& s);

struct NonradialClt {
  NormalizedSample sample;        // (X_T - w_T rho T) / sqrt(T), w_T the terminal chamber
  double late_fraction = 0.0;     // paths with an event in the final 10% of [0, T]
  std::vector<Vector> lln_values; // X_T / T
  // mean over paths of min_w |X_T / T - w rho|
  double lln_cluster_distance = 0.0;
};
// Refuses (LimitError) when some k_a + k_2a < 1/2.
NonradialClt nonradial_clt_sample(std::span<const SkewProductPath> paths, const RootSystem& model,
                                  double T);

struct DunklLimitEntry {
  double T = 0.0;
  TestResult test;
};
struct DunklLimitResult {
  std::vector<DunklLimitEntry> entries;
  bool strictly_decreasing = false;
  std::uint64_t ho_seed = 0;
  std::uint64_t dunkl_seed = 0;
};
struct DunklLimitSetup {
  std::size_t samples = 500;
  std::size_t steps_per_path = 1000;
  std::uint64_t seed = 0;
  std::size_t permutations = 500;
  std::size_t workers = 0;
};
// Full HO process from 0 on [0, 1/T] with 1/(T steps_per_path) steps, scaled by
// sqrt(T), against an independent full Dunkl sample at time 1. The HO rate
// cap is kDefaultRateCap * T so that capping is scale-consistent. Every T
// reuses the same HO master seed.
DunklLimitResult dunkl_convergence_test(const RootSystem& ho, const RootSystem& dunkl,
                                        std::span<const double> T_grid,
                                        const DunklLimitSetup& setup);

struct GirsanovFunctional {
  std::string name;
  std::function<double(const Vector&)> f;
};
std::vector<GirsanovFunctional> default_girsanov_functionals(std::size_t rank);

struct GirsanovRow {
  std::string name;
  double direct = 0.0, direct_se = 0.0;
  double reweighted = 0.0, reweighted_se = 0.0;
  double pooled_se = 0.0;
};
struct GirsanovReport {
  std::vector<GirsanovRow> rows;
  ScalarSummary weight;        // M_t over Dunkl paths
  bool all_weights_positive = false;
  std::uint64_t ho_seed = 0, dunkl_seed = 0;
};
// `base` supplies start, dt, horizon, path_count, master_seed and workers;
// model and kind are set here. HO radial paths use master_seed, Dunkl radial
// paths use master_seed + 1.
GirsanovReport girsanov_check(const RootSystem& ho, const SimConfig& base,
                              std::span<const GirsanovFunctional> functionals);

struct IStarSample {
  std::vector<Vector> values;        // w I_t
  std::vector<Vector> radial;        // I_t
  std::vector<std::size_t> chamber;  // index into weyl()
};
// Intrinsic Brownian motion from 0 (radial stream of `seed`) and an
// independent uniform chamber per sample (ChamberDraw stream).
IStarSample istar_sample(const RootSystem& dunkl, double t, std::size_t count,
                         std::uint64_t seed, double dt = 1e-3, std::size_t workers = 0);

// -|y|^2/2 + sum 2 log|(a, y)|; -infinity on a wall.
double istar1_log_density(const RootSystem& dunkl, const Vector& y);
Vector istar1_log_density_gradient(const RootSystem& dunkl, const Vector& y);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
  bool estimated = true;
};
// int exp(log density) dy by importance sampling from N(0, I).
Estimate istar1_normalization(const RootSystem& dunkl, std::size_t samples, std::uint64_t seed);

struct F0LimitSetup {
  std::vector<double> T_grid{25.0, 100.0, 400.0};
  double test_T = 100.0;
  std::size_t paths = 500;
  double dt = 1e-2;
  std::uint64_t seed = 0;
  std::size_t permutations = 500;
  std::size_t workers = 0;
};
struct F0LimitResult {
  NormalizedSample y1;            // Y_T / sqrt(T) at T = test_T
  TestResult energy;              // vs an I*_1 sample
  TestResult chamber;             // chi-square of the chamber of Y_T
  std::vector<double> mean_norm_over_T;  // mean |Y_T| / T per T_grid entry
  bool decreasing = false;
  double late_fraction = 0.0;
};
// Complex case only (reduced, k = 1); otherwise LimitError. Paths start at 0.
F0LimitResult f0_limit_check(const RootSystem& model, const F0LimitSetup& setup);

struct BesqSlope {
  std::vector<double> times;
  std::vector<double> mean_sq_norm;
  LineFit fit;
  double expected = 0.0;  // n + 2 sum k over positive roots
};
// E|Y^W_t|^2 on a grid for the complex-case radial F0 process from 0.
BesqSlope besq_slope(const RootSystem& model, double T, std::size_t paths, double dt,
                     std::uint64_t seed, std::size_t grid_points = 11, std::size_t workers = 0);

}  // namespace hop

#endif
