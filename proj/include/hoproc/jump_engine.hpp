// Full (non-radial) processes as skew products: a radial path in the closed
// chamber plus a chamber element w_t, so that X_t = w_t X^W_t.
//
// Per step n -> n+1 the radial part moves first. The pre-jump state is
// X_{n+1-} = w_n x+_{n+1}. Each positive root gets an exponential clock with
// the rate at X_{n+1-}; if the earliest clock rings within dt the state is
// reflected in that root. This draws the race as "does any clock ring"
// (probability 1 - exp(-sum rates dt)) and then picks the winner with
// probability proportional to its rate, which has the same law.

#ifndef HOPROC_JUMP_ENGINE_HPP_
#define HOPROC_JUMP_ENGINE_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hoproc/root_algebra.hpp"
#include "hoproc/sde_engine.hpp"
#include "hoproc/stats.hpp"

namespace hop {

enum class JumpProcess { Ho, Dunkl, F0Complex };

std::string to_string(JumpProcess p);
JumpProcess parse_jump_process(std::string_view s);

inline constexpr double kDefaultRateCap = 1e6;

struct JumpConfig {
  // radial.start is the full-space start point (any chamber); radial.kind is
  // overwritten from `process`.
  SimConfig radial;
  JumpProcess process = JumpProcess::Ho;
  double rate_cap = kDefaultRateCap;
  double wall_epsilon = kDefaultWallEpsilon;
  // Multiplies every multiplicity in the jump channel only; 0 disables jumps.
  double jump_scale = 1.0;

  void validate() const;
};

struct JumpEvent {
  double t = 0.0;
  std::size_t step = 0;  // the event happens at the end of this step
  std::size_t root = 0;  // index into positive()
  Vector pre;
  Vector post;
};

struct SkewProductPath {
  RadialPath radial;
  // index into weyl(); for a start on walls, uniform over the labels of the start
  std::size_t initial_chamber = 0;
  std::size_t final_chamber = 0;
  std::vector<std::size_t> chamber;    // w at each recorded grid point
  std::vector<JumpEvent> events;
  std::size_t capped_rates = 0;        // root-steps whose rate hit rate_cap

  // Online per-root functionals over [0, T].
  std::vector<double> jump_sum;        // sum -(a^vee, X_{s-}) over a-events
  std::vector<double> compensator;     // sum rate (a^vee, X) dt
  std::vector<double> squared_jumps;   // sum (a^vee, X_{s-})^2 over a-events
  std::vector<double> bracket;         // sum rate (a^vee, X)^2 dt
  std::vector<double> rate_integral;   // sum rate dt
  // sum over steps of P(this root fires in the step); the exact compensator
  // of the discrete event count
  std::vector<double> fire_probability;
  double amplitude_sum = 0.0;          // sum |Delta X|

  Vector full_state(const RootSystem& model, std::size_t grid_index) const;
  Vector terminal_state(const RootSystem& model) const;
};

SkewProductPath simulate_skew_path(const JumpConfig& config, std::size_t index);
std::vector<SkewProductPath> simulate_skew_product(const JumpConfig& config);

struct MartingaleDecomposition {
  std::vector<double> times;
  // [root][grid point]
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> compensator;
  std::vector<std::vector<double>> bracket;          // sum rate (a^vee,X)^2 dt
  std::vector<std::vector<double>> bracket_formula;  // k/(4|a|^2) int (a,X)^2/sinh^2
  std::vector<Vector> drift_part;                    // A_t
  std::vector<Vector> beta;                          // sum w_n dW_n
  Vector residual;  // X_T - X_0 - beta_T - sum M^a_T a - A_T (fold corrections)
  std::size_t simultaneous_jumps = 0;  // grid steps with two or more events
};

// Needs a full record with noise. The model is the one used for the radial
// drift and the rates (the HO system for Ho and F0Complex).
MartingaleDecomposition compute_malpha(const SkewProductPath& path, const RootSystem& model,
                                       const JumpConfig& config);

struct JumpStats {
  std::vector<double> grid;
  std::vector<double> mean_count;      // E N_t on grid
  ScalarSummary count;                 // N_T
  ScalarSummary amplitude;             // sum |Delta X| up to T
  std::vector<std::size_t> per_root_events;
  std::vector<double> per_root_rate_integral;  // mean over paths
  std::vector<double> per_root_rate_integral_se;
  std::vector<double> per_root_fire_probability;  // mean over paths
  std::vector<double> per_root_fire_probability_se;
  std::vector<double> per_root_mean_events;
  std::vector<double> per_root_mean_events_se;
  bool w_infinity_reported = false;    // false when some k_a + k_2a < 1/2
  std::vector<std::size_t> w_infinity_counts;  // histogram over weyl() of final chambers
  std::size_t late_jump_paths = 0;     // paths with an event in the final 10%
  double late_fraction = 0.0;
};

JumpStats jump_statistics(std::span<const SkewProductPath> paths, const RootSystem& model,
                          double horizon, std::size_t grid_points = 11);

// Event log: path_id,t,root_index,pre_1..pre_n,post_1..post_n
void write_events_csv(std::ostream& out, std::span<const SkewProductPath> paths);
// Full states: path_id,t,x_1..x_n,chamber_word (dash-separated reflection indices)
void write_full_states_csv(std::ostream& out, std::span<const SkewProductPath> paths,
                           const RootSystem& model);

// Smallest k_a + k_2a over the indivisible positive roots.
double min_merged_multiplicity(const RootSystem& model);

}  // namespace hop

#endif
