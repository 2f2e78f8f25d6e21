// Crystallographic root systems, their Weyl groups and chamber geometry.
//
// Conventions for the standard families (coordinates in R^n, n = rank):
//   A_n : e_i - e_j of R^{n+1}, written in an orthonormal basis of the
//         sum-zero hyperplane, so |alpha|^2 = 2.            k = {k}
//   B_n : short +-e_i (|.|^2 = 1), long +-e_i +- e_j (2).     k = {short, long}
//   C_n : short +-e_i +- e_j (2), long +-2e_i (4).            k = {short, long}
//   D_n : +-e_i +- e_j (2), n >= 3.                           k = {k}
//   BC_n: +-e_i (1), +-e_i +- e_j (2), +-2e_i (4).  k = {k_short, k_middle, k_2a}
//         (BC_1 takes {k_a, k_2a}). Doubled roots are present iff k_2a > 0.
// Multiplicities are always listed per orbit in order of increasing length.

#ifndef HOPROC_ROOT_ALGEBRA_HPP_
#define HOPROC_ROOT_ALGEBRA_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hoproc/vector.hpp"

namespace hop {

enum class Family { A, B, C, D, BC, Custom };

std::string to_string(Family f);
Family parse_family(std::string_view s);

struct RootSystemError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Root {
  Vector vector;
  double multiplicity = 0.0;
  int orbit = -1;
};

// Reflection r_alpha(x) = x - (alpha^vee, x) alpha.
Vector reflect(const Vector& alpha, const Vector& x);
Vector coroot(const Vector& alpha);

struct AxiomReport {
  bool ok = true;
  // 1..3: root-system axioms; 4: W-invariance of the multiplicity.
  int axiom = 0;
  int witness_a = -1;
  int witness_b = -1;
  std::string message;
};

// Checks finiteness/spanning, reflection closure, integrality (optional)
// and W-invariance of k. Violations are reported, never thrown.
AxiomReport validate_axioms(std::span<const Vector> roots,
                            std::span<const double> multiplicities,
                            bool require_integral = true);

struct WeylElement {
  std::vector<int> word;  // indices of simple reflections (as positive-root indices)
  Matrix matrix;          // matrix == r_{word[0]} r_{word[1]} ...
  std::vector<int> perm;  // perm[i] = index of matrix * roots[i]
};

class RootSystem;

struct ChamberDecomposition {
  Vector x_plus;
  std::size_t w = 0;  // index into RootSystem::weyl()
  WeylElement element;
};

inline constexpr std::size_t kDefaultWeylBound = 100000;

class RootSystem {
public:
  static RootSystem standard(Family family, int rank, std::span<const double> k);
  static RootSystem standard(Family family, int rank, std::initializer_list<double> k) {
    return standard(family, rank, std::span<const double>(k.begin(), k.size()));
  }
  // Builds and validates an arbitrary system; throws RootSystemError with the
  // violation report when validation fails.
  static RootSystem from_roots(std::vector<Vector> roots, std::vector<double> k,
                               bool require_integral = true,
                               Family tag = Family::Custom,
                               std::size_t weyl_bound = kDefaultWeylBound);

  std::size_t rank() const { return rank_; }
  Family family() const { return family_; }
  bool integral() const { return integral_; }
  bool reduced() const { return reduced_; }

  // All roots: positive roots first, then their negatives in the same order,
  // so roots()[i + P] == -roots()[i] with P = positive().size().
  const std::vector<Root>& roots() const { return roots_; }
  const std::vector<Root>& positive() const { return positive_; }
  std::size_t positive_count() const { return positive_.size(); }
  const std::vector<int>& simple() const { return simple_; }
  const Vector& rho() const { return rho_; }
  const Vector& regular_vector() const { return regular_; }
  std::size_t orbit_count() const { return orbit_count_; }

  // Index into roots() of v, or -1.
  int find_root(const Vector& v, double tol = 1e-9) const;
  // Index into positive() of 2 * positive()[a], or -1.
  int doubled(std::size_t a) const { return doubled_[a]; }
  // Index into positive() of positive()[a] / 2, or -1.
  int halved(std::size_t a) const { return halved_[a]; }

  const std::vector<WeylElement>& weyl() const { return weyl_; }
  std::size_t weyl_order() const { return weyl_.size(); }
  std::size_t inverse(std::size_t w) const { return inverse_[w]; }
  // Index of r_{positive[a]} * w.
  std::size_t left_reflect(std::size_t a, std::size_t w) const {
    return left_reflect_[a * weyl_.size() + w];
  }
  // w * positive[g] = sign * positive[a]; returns a, sets sign.
  std::size_t image(std::size_t w, std::size_t g, int& sign) const {
    int e = image_[w * positive_.size() + g];
    sign = e > 0 ? 1 : -1;
    return static_cast<std::size_t>(std::abs(e) - 1);
  }
  // Index of the group element acting on roots as perm, or -1.
  long find_element(const std::vector<int>& perm) const;
  std::size_t compose(std::size_t a, std::size_t b) const;  // index of a*b

  double pairing(std::size_t a, const Vector& x) const {
    return dot(positive_[a].vector, x);
  }
  bool in_closed_chamber(const Vector& x, double tol = 0.0) const;
  bool in_open_chamber(const Vector& x) const;
  // x^+: the unique W-image of x in the closed positive chamber, computed by
  // folding across simple walls.
  Vector fold(const Vector& x) const;
  // Also reports the number of reflections applied.
  Vector fold(const Vector& x, int& reflections) const;

private:
  RootSystem() = default;
  void build(std::vector<Vector> roots, std::vector<double> k, bool require_integral,
             Family tag, std::size_t weyl_bound);

  std::size_t rank_ = 0;
  Family family_ = Family::Custom;
  bool integral_ = true;
  bool reduced_ = true;
  std::vector<Root> roots_;
  std::vector<Root> positive_;
  std::vector<int> simple_;
  std::vector<int> doubled_, halved_;
  Vector rho_;
  Vector regular_;
  std::size_t orbit_count_ = 0;
  std::vector<WeylElement> weyl_;
  std::vector<std::size_t> inverse_;
  std::vector<std::size_t> left_reflect_;
  std::vector<int> image_;
  std::vector<Vector> simple_coroots_;

  friend std::vector<WeylElement> generate_weyl_group(const RootSystem&, std::size_t);
};

// Breadth-first closure over simple reflections. Elements are returned in
// (word length, lexicographic word) order, identity first. Throws
// RootSystemError once the closure exceeds max_order.
std::vector<WeylElement> generate_weyl_group(const RootSystem& model,
                                             std::size_t max_order = kDefaultWeylBound);

// x = w x_plus with x_plus in the closed chamber; among all valid w the
// shortest (then lexicographically smallest) word is chosen.
ChamberDecomposition radial_decompose(const RootSystem& model, const Vector& x);

// The reduced system R' = { sqrt(2) alpha / |alpha| } with k'_beta =
// k_alpha + k_{2 alpha}. Integrality is not required of the result.
RootSystem rescale_to_dunkl(const RootSystem& model);

}  // namespace hop

#endif
