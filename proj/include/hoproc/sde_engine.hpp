// Euler-Maruyama integration of the radial processes in the closed chamber.
//
// One step from x:  y = fold( x + b(x~) dt + dW ),
// where b is evaluated with every pairing (a, x) replaced by max((a, x), eps)
// inside its singular factor and fold() is the reflection onto the closed
// positive chamber.

#ifndef HOPROC_SDE_ENGINE_HPP_
#define HOPROC_SDE_ENGINE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hoproc/drift_fields.hpp"
#include "hoproc/rng.hpp"
#include "hoproc/root_algebra.hpp"
#include "hoproc/vector.hpp"

namespace hop {

// HoRadial:   sum k (a/2) coth((a,x)/2)
// DunklRadial: sum k b / (b,x) over the model's roots (pass a rescaled system)
// Intrinsic:  sum b / (b,x); also the radial F0-process in the complex case
// Brownian:   no drift (folded Brownian motion)
enum class ProcessKind { HoRadial, DunklRadial, Intrinsic, Brownian };

std::string to_string(ProcessKind k);
ProcessKind parse_process_kind(std::string_view s);

DriftField make_drift_field(const RootSystem& model, ProcessKind kind);

// Default wall floor: kWallFloorFactor * sqrt(dt).
inline constexpr double kWallFloorFactor = 1.0;
double default_wall_floor(double dt);

struct SimConfig {
  const RootSystem* model = nullptr;
  ProcessKind kind = ProcessKind::HoRadial;
  Vector start;
  double dt = 1e-3;
  double horizon = 1.0;
  std::size_t path_count = 1;
  std::uint64_t master_seed = 0;
  double wall_floor = 0.0;  // 0 selects default_wall_floor(dt)
  double drift_cap = 0.0;   // 0 disables the cap
  // Grid points kept in the path record: every record_stride-th step, plus
  // the start and the terminal state. 0 keeps only start and terminal.
  std::size_t record_stride = 1;
  bool record_noise = false;
  bool accumulate = true;   // online coth / rate integrals
  std::size_t workers = 0;  // 0 = hardware concurrency

  void validate() const;  // throws std::invalid_argument
  // As validate() but the start may lie in any chamber.
  void validate_start_free() const;
  std::size_t steps() const;
  double floor() const { return wall_floor > 0.0 ? wall_floor : default_wall_floor(dt); }
};

struct StepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepInfo {
  int reflections = 0;        // fold reflections applied
  bool floored = false;       // some pairing was below the floor
};

// One Euler-Maruyama step; throws StepError on a non-finite state or a
// chamber violation beyond round-off.
Vector step(const RootSystem& model, const DriftField& drift, const Vector& x,
            const Vector& dW, double dt, double wall_floor, double drift_cap = 0.0,
            StepInfo* info = nullptr);

struct RadialPath {
  std::size_t path_id = 0;
  std::size_t dim = 0;
  double dt = 0.0;
  double wall_floor = 0.0;
  std::size_t steps = 0;
  std::size_t stride = 1;
  std::vector<double> times;
  std::vector<double> states;  // row-major, dim per grid point
  std::vector<double> noise;   // row-major, dim per step (empty if not recorded)
  Vector terminal;

  // Online functionals, left-endpoint sums per positive root:
  //   coth_integral[a] = sum coth(max((a,X),eps)/2) dt   (HoRadial models)
  //   rate_integral[a] = sum ho_jump_rate(a, X) dt
  std::vector<double> coth_integral;
  std::vector<double> rate_integral;
  std::size_t floored_steps = 0;    // steps with min pairing below the floor
  std::size_t folded_steps = 0;     // steps whose raw update left the chamber

  std::size_t grid_size() const { return times.size(); }
  Vector state(std::size_t i) const;
  Vector increment(std::size_t step) const;  // recorded dW of a step
  bool has_noise() const { return !noise.empty(); }
  bool full_record() const { return stride == 1 && grid_size() == steps + 1; }
};

// Simulates path `index` of the configuration. The radial noise stream is
// make_stream(master_seed, RadialNoise, index).
RadialPath simulate_radial_path(const SimConfig& config, std::size_t index);
std::vector<RadialPath> simulate_radial(const SimConfig& config);

// simulate_radial_path with hooks: on_step(n, x_{n+1}) runs after every step,
// on_record(i) after grid point i has been appended to the record.
using StepObserver = std::function<void(std::size_t, const Vector&)>;
using RecordObserver = std::function<void(std::size_t)>;
RadialPath simulate_radial_observed(const SimConfig& config, std::size_t index,
                                    const StepObserver& on_step,
                                    const RecordObserver& on_record);

// Two paths driven by the same noise stream (that of path `index`).
std::pair<RadialPath, RadialPath> simulate_coupled_pair(const SimConfig& config,
                                                        const Vector& start_a,
                                                        const Vector& start_b,
                                                        std::size_t index = 0);

// Runs the stepper with externally supplied increments (one per step).
RadialPath simulate_with_noise(const SimConfig& config, std::span<const Vector> increments,
                               std::size_t path_id = 0);

struct BesselRef {
  double dimension = 1.0;
  double start_radius = 0.0;
};

// Squared Bessel path Z with Z_0 = r0^2: Z <- max(Z + d dt + 2 sqrt(Z) dW, 0).
// Grid of steps+1 values.
std::vector<double> simulate_bessel_sq(const BesselRef& ref, double dt, double horizon,
                                       std::uint64_t seed, std::uint64_t index = 0);

struct ItoResult {
  double integral = 0.0;   // sum (g(X_n), dW_n)
  double bracket = 0.0;    // sum |g(X_n)|^2 dt
  double log_weight() const { return integral - 0.5 * bracket; }
};

// Left-endpoint Ito sum over steps [from, to) of a full-record path.
ItoResult ito_integral(const RadialPath& path, const std::function<Vector(const Vector&)>& g,
                       std::size_t from = 0, std::size_t to = static_cast<std::size_t>(-1));

enum class IntegrandKind { CothAlpha, JumpRateAlpha, Girsanov };

struct PathIntegral {
  std::vector<double> per_root;  // CothAlpha, JumpRateAlpha
  ItoResult girsanov;            // Girsanov
};

// CothAlpha and JumpRateAlpha read the online accumulators; Girsanov needs a
// full record with noise and evaluates k (a/2)[coth(u) - 1/u] at the floored
// pairings u = max((a,X),eps)/2 of `model` (the HO system).
PathIntegral path_integral(const RadialPath& path, const RootSystem& model,
                           IntegrandKind kind);

// CSV: header path_id,t,x_1..x_n; one row per recorded grid point.
void write_paths_csv(std::ostream& out, std::span<const RadialPath> paths,
                     std::size_t extra_stride = 1);

}  // namespace hop

#endif
