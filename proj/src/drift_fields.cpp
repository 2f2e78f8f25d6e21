#include "hoproc/drift_fields.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hop {

double coth(double u) {
  // 1/tanh keeps full relative precision for small |u|.
  return 1.0 / std::tanh(u);
}

double coth_minus_inverse(double u) {
  if (std::abs(u) < kCothSeriesSwitch) {
    double u2 = u * u;
    // u/3 - u^3/45 + 2u^5/945 - u^7/4725 + 2u^9/93555
    return u * (1.0 / 3.0 +
                u2 * (-1.0 / 45.0 +
                      u2 * (2.0 / 945.0 + u2 * (-1.0 / 4725.0 + u2 * (2.0 / 93555.0)))));
  }
  return coth(u) - 1.0 / u;
}

double inv_sinh_sq(double u) {
  double a = std::abs(u);
  if (a == 0.0) return std::numeric_limits<double>::infinity();
  // 1/sinh^2(a) = 4 e^{-2a} / (1 - e^{-2a})^2
  double e = std::exp(-2.0 * a);
  if (e == 0.0) return 0.0;
  // 1 - e loses digits only for small a
  double d = a < 0.5 ? -std::expm1(-2.0 * a) : 1.0 - e;
  return 4.0 * e / (d * d);
}

namespace {

void check_regular(double p, std::size_t a) {
  if (p == 0.0)
    throw SingularInput("point lies on the wall of positive root " + std::to_string(a));
}

void check_finite(const Vector& v) {
  if (!v.all_finite()) throw SingularInput("drift is not finite at this point");
}

}  // namespace

double LogDensityField::value(const Vector& x) const {
  double s = 0.0;
  const auto& pos = system_->positive();
  for (std::size_t a = 0; a < pos.size(); ++a) {
    double p = dot(pos[a].vector, x);
    if (kind_ == Kind::HoDeltaHalf)
      s += pos[a].multiplicity * std::log(std::abs(std::sinh(0.5 * p)));
    else
      s += pos[a].multiplicity * std::log(std::abs(p));
  }
  return s;
}

Vector LogDensityField::gradient(const Vector& x) const {
  return kind_ == Kind::HoDeltaHalf ? ho_radial_drift(*system_, x)
                                    : dunkl_radial_drift(*system_, x);
}

Vector ho_radial_drift(const RootSystem& model, const Vector& x) {
  Vector out(model.rank());
  const auto& pos = model.positive();
  for (std::size_t a = 0; a < pos.size(); ++a) {
    double p = dot(pos[a].vector, x);
    check_regular(p, a);
    out.axpy(0.5 * pos[a].multiplicity * coth(0.5 * p), pos[a].vector);
  }
  check_finite(out);
  return out;
}

Vector ho_centered_drift(const RootSystem& model, const Vector& x) {
  Vector out(model.rank());
  const auto& pos = model.positive();
  for (std::size_t a = 0; a < pos.size(); ++a) {
    double p = dot(pos[a].vector, x);
    check_regular(p, a);
    // coth(u) - sign(u) = sign(u) * 2 / (e^{2|u|} - 1), no cancellation for large u
    double u = 0.5 * p;
    double c = std::copysign(2.0 / std::expm1(2.0 * std::abs(u)), u);
    if (u < 0.0) c -= 2.0;
    out.axpy(0.5 * pos[a].multiplicity * c, pos[a].vector);
  }
  check_finite(out);
  return out;
}

Vector dunkl_radial_drift(const RootSystem& dunkl_model, const Vector& x) {
  Vector out(dunkl_model.rank());
  const auto& pos = dunkl_model.positive();
  for (std::size_t a = 0; a < pos.size(); ++a) {
    double p = dot(pos[a].vector, x);
    check_regular(p, a);
    out.axpy(pos[a].multiplicity / p, pos[a].vector);
  }
  check_finite(out);
  return out;
}

Vector intrinsic_drift(const RootSystem& dunkl_model, const Vector& x) {
  Vector out(dunkl_model.rank());
  for (std::size_t a = 0; a < dunkl_model.positive_count(); ++a) {
    const Vector& r = dunkl_model.positive()[a].vector;
    double p = dot(r, x);
    check_regular(p, a);
    out.axpy(1.0 / p, r);
  }
  check_finite(out);
  return out;
}

Vector girsanov_integrand(const RootSystem& model, const Vector& x) {
  Vector out(model.rank());
  for (const Root& r : model.positive())
    out.axpy(0.5 * r.multiplicity * coth_minus_inverse(0.5 * dot(r.vector, x)), r.vector);
  return out;
}

double girsanov_bound(const RootSystem& model) {
  double b = 0.0;
  for (const Root& r : model.positive()) b += 0.5 * r.multiplicity * norm(r.vector);
  return b;
}

double ho_jump_rate(const RootSystem& model, std::size_t a, const Vector& x,
                    double wall_epsilon) {
  const Root& r = model.positive().at(a);
  return ho_rate_from_pairing(r.multiplicity, norm2(r.vector), dot(r.vector, x),
                              wall_epsilon);
}

double dunkl_jump_rate(const RootSystem& dunkl_model, std::size_t a, const Vector& x,
                       double wall_epsilon) {
  const Root& r = dunkl_model.positive().at(a);
  return dunkl_rate_from_pairing(r.multiplicity, dot(r.vector, x), wall_epsilon);
}

std::vector<double> jump_rates(const RootSystem& model, RateKind kind, const Vector& x,
                               double wall_epsilon) {
  std::vector<double> out(model.positive_count());
  for (std::size_t a = 0; a < out.size(); ++a)
    out[a] = kind == RateKind::Ho ? ho_jump_rate(model, a, x, wall_epsilon)
                                  : dunkl_jump_rate(model, a, x, wall_epsilon);
  return out;
}

DriftField::DriftField(const RootSystem& model, Kind kind, bool unit_multiplicity)
    : kind_(kind), dim_(model.rank()) {
  for (const Root& r : model.positive()) {
    double k = unit_multiplicity ? 1.0 : r.multiplicity;
    double c = kind == Kind::HoCoth ? 0.5 * k : k;
    dirs_.push_back(r.vector * c);
    roots_.push_back(r.vector);
  }
}

double DriftField::factor(double p, double floor) const {
  double q = p < floor ? floor : p;
  switch (kind_) {
    case Kind::HoCoth: return coth(0.5 * q);
    case Kind::Rational: return 1.0 / q;
    case Kind::None: break;
  }
  return 0.0;
}

void DriftField::evaluate(std::span<const double> pairings, double floor,
                          Vector& out) const {
  out = Vector(dim_);
  if (kind_ == Kind::None) return;
  for (std::size_t a = 0; a < dirs_.size(); ++a)
    out.axpy(factor(pairings[a], floor), dirs_[a]);
}

Vector DriftField::evaluate(const Vector& x, double floor) const {
  std::vector<double> p(roots_.size());
  for (std::size_t a = 0; a < p.size(); ++a) p[a] = dot(roots_[a], x);
  Vector out;
  evaluate(p, floor, out);
  return out;
}

}  // namespace hop
