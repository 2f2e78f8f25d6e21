// Drift vector fields and jump rates of the radial and full processes.
//
// Each drift term is invariant under alpha -> -alpha, so every field below
// is W-equivariant on regular points: field(w x) = w field(x).

#ifndef HOPROC_DRIFT_FIELDS_HPP_
#define HOPROC_DRIFT_FIELDS_HPP_

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hoproc/root_algebra.hpp"
#include "hoproc/vector.hpp"

namespace hop {

struct SingularInput : std::domain_error {
  using std::domain_error::domain_error;
};

inline constexpr double kDefaultWallEpsilon = 1e-12;

// Scalar helpers.
double coth(double u);
// coth(u) - 1/u; five-term series below |u| = 1e-2.
double coth_minus_inverse(double u);
inline constexpr double kCothSeriesSwitch = 1e-2;
// 1 / sinh(u)^2, evaluated through expm1; exactly 0 once e^{-2|u|} underflows.
double inv_sinh_sq(double u);

// log(delta^{1/2}) = sum k_a log|sinh((a,x)/2)| or log(pi) = sum k'_b log|(b,x)|.
class LogDensityField {
public:
  enum class Kind { HoDeltaHalf, DunklPi };
  LogDensityField(const RootSystem& system, Kind kind) : system_(&system), kind_(kind) {}
  Kind kind() const { return kind_; }
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

private:
  const RootSystem* system_;
  Kind kind_;
};

// sum_a k_a (a/2) coth((a,x)/2).
Vector ho_radial_drift(const RootSystem& model, const Vector& x);
// sum_a k_a (a/2) [coth((a,x)/2) - 1] = ho_radial_drift - rho.
Vector ho_centered_drift(const RootSystem& model, const Vector& x);
// sum_b k'_b b / (b,x).
Vector dunkl_radial_drift(const RootSystem& dunkl_model, const Vector& x);
// Dunkl drift with every multiplicity forced to 1.
Vector intrinsic_drift(const RootSystem& dunkl_model, const Vector& x);
// grad log(delta^{1/2} / pi) = sum_a k_a (a/2) [coth(u_a) - 1/u_a], u_a = (a,x)/2.
// Bounded and finite everywhere, including on walls.
Vector girsanov_integrand(const RootSystem& model, const Vector& x);
// Sum over positive roots of k_a |a| / 2, which bounds |girsanov_integrand|.
double girsanov_bound(const RootSystem& model);

// k_a |a|^2 / 8 * sinh^-2((a,x)/2); zero when |(a,x)| < wall_epsilon.
double ho_jump_rate(const RootSystem& model, std::size_t a, const Vector& x,
                    double wall_epsilon = kDefaultWallEpsilon);
// k'_b / (b,x)^2; zero when |(b,x)| < wall_epsilon.
double dunkl_jump_rate(const RootSystem& dunkl_model, std::size_t a, const Vector& x,
                       double wall_epsilon = kDefaultWallEpsilon);

enum class RateKind { Ho, Dunkl };
// One rate per positive root at x.
std::vector<double> jump_rates(const RootSystem& model, RateKind kind, const Vector& x,
                               double wall_epsilon = kDefaultWallEpsilon);

// Rate of a single root given its pairing p = (a, x).
inline double ho_rate_from_pairing(double k, double alpha_sq, double p, double eps) {
  if (std::abs(p) < eps) return 0.0;
  return k * alpha_sq * 0.125 * inv_sinh_sq(0.5 * p);
}
inline double dunkl_rate_from_pairing(double k, double p, double eps) {
  if (std::abs(p) < eps) return 0.0;
  return k / (p * p);
}

// Drift field evaluated from pairings with a wall floor, as used by the
// time stepper. Each pairing is replaced by max(pairing, floor) inside the
// singular factor.
class DriftField {
public:
  enum class Kind { None, HoCoth, Rational };
  DriftField() = default;
  DriftField(const RootSystem& model, Kind kind, bool unit_multiplicity = false);

  Kind kind() const { return kind_; }
  std::size_t dimension() const { return dim_; }
  // Drift at x; pairings (a, x) for the positive roots must be supplied.
  void evaluate(std::span<const double> pairings, double floor, Vector& out) const;
  Vector evaluate(const Vector& x, double floor) const;
  // Singular factor of root a at pairing p (coth(p/2) or 1/p) after flooring.
  double factor(double p, double floor) const;
  const std::vector<Vector>& directions() const { return dirs_; }

private:
  Kind kind_ = Kind::None;
  std::size_t dim_ = 0;
  std::vector<Vector> dirs_;   // coefficient * root
  std::vector<Vector> roots_;  // positive roots
};

}  // namespace hop

#endif
