#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "hoproc/root_algebra.hpp"

using namespace hop;

namespace {

// Oracle: close the set of reflection matrices of *all* roots under
// multiplication, comparing entries rounded to 1e-9.
std::size_t brute_force_group_order(const RootSystem& rs) {
  std::size_t n = rs.rank();
  auto key = [n](const Matrix& m) {
    std::vector<long long> k;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) k.push_back(std::llround(m(i, j) * 1e9));
    return k;
  };
  std::vector<Matrix> gens;
  for (const Root& r : rs.roots()) {
    Matrix m = Matrix::identity(n);
    double s = 2.0 / norm2(r.vector);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) -= s * r.vector[i] * r.vector[j];
    gens.push_back(m);
  }
  std::set<std::vector<long long>> seen{key(Matrix::identity(n))};
  std::vector<Matrix> frontier{Matrix::identity(n)};
  while (!frontier.empty()) {
    std::vector<Matrix> next;
    for (const Matrix& m : frontier)
      for (const Matrix& g : gens) {
        Matrix p = m * g;
        if (seen.insert(key(p)).second) next.push_back(p);
      }
    frontier = std::move(next);
  }
  return seen.size();
}

std::vector<Vector> vectors_of(const RootSystem& rs) {
  std::vector<Vector> v;
  for (const Root& r : rs.roots()) v.push_back(r.vector);
  return v;
}

Vector random_vector(std::mt19937_64& g, std::size_t n) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = nd(g);
  return v;
}

struct Case {
  Family f;
  int rank;
  std::vector<double> k;
};

std::vector<Case> families_up_to_rank4() {
  std::vector<Case> out;
  for (int r = 1; r <= 4; ++r) {
    out.push_back({Family::A, r, {1.0}});
    out.push_back({Family::BC, r, r == 1 ? std::vector<double>{1.0, 0.5}
                                         : std::vector<double>{1.0, 0.7, 0.5}});
    if (r >= 2) {
      out.push_back({Family::B, r, {0.6, 1.3}});
      out.push_back({Family::C, r, {1.0, 2.0}});
    }
    if (r >= 3) out.push_back({Family::D, r, {1.5}});
  }
  return out;
}

}  // namespace

TEST_CASE("A2 has 6 roots, 3 positive, Weyl order 6") {
  auto rs = RootSystem::standard(Family::A, 2, {1.0});
  CHECK(rs.roots().size() == 6);
  CHECK(rs.positive_count() == 3);
  CHECK(rs.weyl_order() == 6);
  CHECK(brute_force_group_order(rs) == 6);
  for (const Root& r : rs.roots()) CHECK(norm2(r.vector) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("Weyl orders agree with brute-force reflection closure") {
  for (const Case& c : families_up_to_rank4()) {
    auto rs = RootSystem::standard(c.f, c.rank, c.k);
    INFO(to_string(c.f) << c.rank);
    CHECK(rs.weyl_order() == brute_force_group_order(rs));
  }
  CHECK(RootSystem::standard(Family::B, 2, {1.0, 1.0}).weyl_order() == 8);
  CHECK(RootSystem::standard(Family::A, 1, {1.0}).weyl_order() == 2);
}

TEST_CASE("A1 group is identity and r_alpha; rho is alpha/2") {
  auto rs = RootSystem::standard(Family::A, 1, {1.0});
  REQUIRE(rs.positive_count() == 1);
  const Vector& a = rs.positive()[0].vector;
  CHECK(norm2(a) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(max_abs_diff(rs.rho(), a * 0.5) == 0.0);
  REQUIRE(rs.weyl_order() == 2);
  CHECK(rs.weyl()[0].word.empty());
  CHECK(rs.weyl()[1].word == std::vector<int>{0});
  CHECK(rs.weyl()[1].matrix(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("BC1 with k2a > 0 lists alpha and 2 alpha; rescaling merges to 1.5") {
  auto rs = RootSystem::standard(Family::BC, 1, {1.0, 0.5});
  REQUIRE(rs.positive_count() == 2);
  CHECK(!rs.reduced());
  CHECK(rs.doubled(0) == 1);
  auto d = rescale_to_dunkl(rs);
  REQUIRE(d.positive_count() == 1);
  CHECK(d.positive()[0].multiplicity == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(norm2(d.positive()[0].vector) == doctest::Approx(2.0).epsilon(1e-15));
  // 2 alpha is absent when k_2a = 0
  CHECK(RootSystem::standard(Family::BC, 1, {1.0, 0.0}).positive_count() == 1);
}

TEST_CASE("build_standard rejects bad inputs") {
  CHECK_THROWS_AS(RootSystem::standard(Family::B, 2, {1.0}), RootSystemError);
  CHECK_THROWS_AS(RootSystem::standard(Family::D, 2, {1.0}), RootSystemError);
  CHECK_THROWS_AS(RootSystem::standard(Family::B, 1, {1.0, 1.0}), RootSystemError);
  CHECK_THROWS_AS(RootSystem::standard(Family::A, 0, {1.0}), RootSystemError);
  CHECK_THROWS_AS(RootSystem::standard(Family::A, 2, {0.0}), RootSystemError);
  CHECK_THROWS_AS(parse_family("E"), RootSystemError);
}

TEST_CASE("validate_axioms examples") {
  std::vector<Vector> r1{{1.0}, {-1.0}};
  std::vector<double> k1{1.0, 1.0};
  CHECK(validate_axioms(r1, k1).ok);

  double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vector> r2{{1.0}, {-1.0}, {phi}, {-phi}};
  std::vector<double> k2(4, 1.0);
  auto rep = validate_axioms(r2, k2);
  CHECK(!rep.ok);
  CHECK(rep.axiom == 3);
  CHECK(rep.witness_a >= 0);
  CHECK(rep.witness_b >= 0);

  auto a2 = RootSystem::standard(Family::A, 2, {1.0});
  auto vecs = vectors_of(a2);
  std::vector<double> k3(vecs.size(), 1.0);
  k3[0] = 2.0;
  rep = validate_axioms(vecs, k3);
  CHECK(!rep.ok);
  CHECK(rep.axiom == 4);

  std::vector<Vector> r4{{1.0, 0.0}, {-1.0, 0.0}};
  CHECK(validate_axioms(r4, k1).axiom == 1);
  CHECK_THROWS_AS(RootSystem::from_roots(r4, k1), RootSystemError);
}

TEST_CASE("reflect basics and involution") {
  Vector a{1.0, -2.0, 0.5};
  CHECK(max_abs_diff(reflect(a, a), -a) < 1e-15);
  Vector x{2.0, 1.0, 0.0};  // (a, x) = 0
  CHECK(max_abs_diff(reflect(a, x), x) == 0.0);
  std::mt19937_64 g(11);
  for (int i = 0; i < 200; ++i) {
    Vector b = random_vector(g, 3), y = random_vector(g, 3);
    CHECK(max_abs_diff(reflect(b, reflect(b, y)), y) < 1e-12);
  }
  CHECK_THROWS_AS(reflect(Vector(3), x), RootSystemError);
}

TEST_CASE("Weyl elements: word matches matrix, orthogonal, permute R preserving k") {
  for (const Case& c : families_up_to_rank4()) {
    auto rs = RootSystem::standard(c.f, c.rank, c.k);
    std::size_t n = rs.rank();
    INFO(to_string(c.f) << c.rank);
    for (const WeylElement& w : rs.weyl()) {
      Matrix m = Matrix::identity(n);
      for (int s : w.word) {
        const Vector& a = rs.positive()[s].vector;
        Matrix r = Matrix::identity(n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) r(i, j) -= 2.0 * a[i] * a[j] / norm2(a);
        m = m * r;
      }
      CHECK(m.max_abs_diff(w.matrix) < 1e-12);
      CHECK((w.matrix * w.matrix.transpose()).max_abs_diff(Matrix::identity(n)) < 1e-12);
      std::set<int> img;
      for (std::size_t i = 0; i < rs.roots().size(); ++i) {
        Vector y = w.matrix.apply(rs.roots()[i].vector);
        int j = rs.find_root(y);
        REQUIRE(j >= 0);
        CHECK(j == w.perm[i]);
        CHECK(rs.roots()[j].multiplicity == rs.roots()[i].multiplicity);
        img.insert(j);
      }
      CHECK(img.size() == rs.roots().size());
    }
  }
}

TEST_CASE("group tables: inverse, left reflection and image are consistent") {
  auto rs = RootSystem::standard(Family::B, 3, {1.0, 2.0});
  std::size_t n = rs.rank();
  for (std::size_t w = 0; w < rs.weyl_order(); ++w) {
    const Matrix& m = rs.weyl()[w].matrix;
    CHECK((m * rs.weyl()[rs.inverse(w)].matrix).max_abs_diff(Matrix::identity(n)) < 1e-12);
    for (std::size_t a = 0; a < rs.positive_count(); ++a) {
      const Vector& al = rs.positive()[a].vector;
      Matrix r = Matrix::identity(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) -= 2.0 * al[i] * al[j] / norm2(al);
      CHECK((r * m).max_abs_diff(rs.weyl()[rs.left_reflect(a, w)].matrix) < 1e-12);
      int sign = 0;
      std::size_t b = rs.image(w, a, sign);
      Vector y = m.apply(al);
      CHECK(max_abs_diff(y, rs.positive()[b].vector * double(sign)) < 1e-12);
    }
  }
}

TEST_CASE("radial_decompose: trivial cases and tie-breaking") {
  auto a1 = RootSystem::standard(Family::A, 1, {1.0});
  auto d = radial_decompose(a1, Vector{-2.0});
  CHECK(d.x_plus[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(d.element.word == std::vector<int>{0});

  auto a2 = RootSystem::standard(Family::A, 2, {1.0});
  Vector inside = a2.rho() * 0.7;
  d = radial_decompose(a2, inside);
  CHECK(d.w == 0);
  CHECK(max_abs_diff(d.x_plus, inside) == 0.0);
  // origin: stabilizer is all of W, identity has the shortest word
  d = radial_decompose(a2, Vector(2));
  CHECK(d.element.word.empty());
  // point on a wall of the chamber: identity wins over the reflection fixing it
  const Vector& s0 = a2.positive()[a2.simple()[0]].vector;
  const Vector& s1 = a2.positive()[a2.simple()[1]].vector;
  Vector wall = s0 + s1 * 2.0;  // orthogonality to s0 is not guaranteed, so project
  wall.axpy(-dot(s0, wall) / norm2(s0), s0);
  REQUIRE(a2.in_closed_chamber(wall, 1e-12));
  d = radial_decompose(a2, wall);
  CHECK(d.element.word.empty());
  // reflected wall point: the single shortest word is chosen
  Vector refl = reflect(s1, wall);
  d = radial_decompose(a2, refl);
  CHECK(d.element.word.size() == 1);
}

TEST_CASE("radial_decompose: property over random points and all W images") {
  for (const Case& c : families_up_to_rank4()) {
    auto rs = RootSystem::standard(c.f, c.rank, c.k);
    std::mt19937_64 g(5 + c.rank);
    INFO(to_string(c.f) << c.rank);
    for (int i = 0; i < 10; ++i) {
      Vector x = random_vector(g, rs.rank());
      auto d = radial_decompose(rs, x);
      CHECK(std::abs(norm(d.x_plus) - norm(x)) < 1e-12);
      CHECK(rs.in_closed_chamber(d.x_plus, 1e-12));
      CHECK(max_abs_diff(d.element.matrix.apply(d.x_plus), x) < 1e-10);
      // exhaustive oracle: exactly one image of x lies in the closed chamber
      int in_chamber = 0;
      for (const WeylElement& w : rs.weyl()) {
        Vector y = w.matrix.apply(x);
        if (rs.in_closed_chamber(y, 1e-12)) {
          ++in_chamber;
          CHECK(max_abs_diff(y, d.x_plus) < 1e-10);
        }
        // w-independence of x_plus
        CHECK(max_abs_diff(radial_decompose(rs, y).x_plus, d.x_plus) < 1e-10);
      }
      CHECK(in_chamber == 1);
    }
  }
}

TEST_CASE("rho lies in the open chamber for every family up to rank 4") {
  for (const Case& c : families_up_to_rank4()) {
    auto rs = RootSystem::standard(c.f, c.rank, c.k);
    INFO(to_string(c.f) << c.rank);
    Vector rho(rs.rank());
    for (const Root& r : rs.positive()) rho.axpy(0.5 * r.multiplicity, r.vector);
    CHECK(max_abs_diff(rho, rs.rho()) < 1e-15);
    for (int s : rs.simple()) CHECK(dot(coroot(rs.positive()[s].vector), rs.rho()) > 0.0);
    for (const Root& r : rs.positive()) CHECK(dot(r.vector, rs.regular_vector()) > 0.0);
  }
}

TEST_CASE("rescale_to_dunkl: identity on A2, orbits kept on B2, axioms 1-2 hold") {
  auto a2 = RootSystem::standard(Family::A, 2, {1.0});
  auto d = rescale_to_dunkl(a2);
  REQUIRE(d.roots().size() == a2.roots().size());
  for (const Root& r : a2.roots()) {
    int j = d.find_root(r.vector);
    REQUIRE(j >= 0);
    CHECK(d.roots()[j].multiplicity == 1.0);
  }
  CHECK(d.family() == Family::A);

  auto b2 = RootSystem::standard(Family::B, 2, {2.0, 1.0});  // k_short = 2, k_long = 1
  auto db = rescale_to_dunkl(b2);
  CHECK(db.orbit_count() == 2);
  for (const Root& r : b2.roots()) {
    int j = db.find_root(r.vector * (std::sqrt(2.0) / norm(r.vector)));
    REQUIRE(j >= 0);
    CHECK(db.roots()[j].multiplicity == r.multiplicity);
  }

  for (const Case& c : families_up_to_rank4()) {
    auto rs = RootSystem::standard(c.f, c.rank, c.k);
    auto dd = rescale_to_dunkl(rs);
    CHECK(dd.reduced());
    std::vector<double> k;
    for (const Root& r : dd.roots()) {
      CHECK(norm2(r.vector) == doctest::Approx(2.0).epsilon(1e-14));
      k.push_back(r.multiplicity);
    }
    auto v = vectors_of(dd);
    CHECK(validate_axioms(v, k, false).ok);
    // idempotent on reduced, normalized systems
    auto d2 = rescale_to_dunkl(dd);
    CHECK(d2.roots().size() == dd.roots().size());
  }
}
