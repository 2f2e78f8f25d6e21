#include "hoproc/root_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace hop {

namespace {

constexpr double kTol = 1e-9;

bool near(const Vector& a, const Vector& b, double tol) {
  return a.size() == b.size() && max_abs_diff(a, b) <= tol;
}

int find_in(std::span<const Vector> set, const Vector& v, double tol) {
  for (std::size_t i = 0; i < set.size(); ++i)
    if (near(set[i], v, tol)) return static_cast<int>(i);
  return -1;
}

// Rank of a set of vectors by Gaussian elimination with partial pivoting.
std::size_t span_rank(std::span<const Vector> vs, std::size_t n) {
  std::vector<Vector> rows(vs.begin(), vs.end());
  std::size_t rank = 0;
  for (std::size_t col = 0; col < n && rank < rows.size(); ++col) {
    std::size_t piv = rank;
    for (std::size_t r = rank; r < rows.size(); ++r)
      if (std::abs(rows[r][col]) > std::abs(rows[piv][col])) piv = r;
    if (std::abs(rows[piv][col]) < kTol) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      double f = rows[r][col] / rows[rank][col];
      rows[r].axpy(-f, rows[rank]);
    }
    ++rank;
  }
  return rank;
}

Matrix reflection_matrix(const Vector& alpha) {
  std::size_t n = alpha.size();
  Matrix m = Matrix::identity(n);
  double s = 2.0 / norm2(alpha);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) -= s * alpha[i] * alpha[j];
  return m;
}

std::string describe(const Vector& v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::A: return "A";
    case Family::B: return "B";
    case Family::C: return "C";
    case Family::D: return "D";
    case Family::BC: return "BC";
    case Family::Custom: return "custom";
  }
  return "custom";
}

Family parse_family(std::string_view s) {
  if (s == "A") return Family::A;
  if (s == "B") return Family::B;
  if (s == "C") return Family::C;
  if (s == "D") return Family::D;
  if (s == "BC") return Family::BC;
  if (s == "custom") return Family::Custom;
  throw RootSystemError("unknown root system family '" + std::string(s) + "'");
}

Vector coroot(const Vector& alpha) {
  double n2 = norm2(alpha);
  if (n2 == 0.0) throw RootSystemError("zero root has no coroot");
  return alpha * (2.0 / n2);
}

Vector reflect(const Vector& alpha, const Vector& x) {
  double n2 = norm2(alpha);
  if (n2 == 0.0) throw RootSystemError("reflection in a zero root");
  Vector y = x;
  y.axpy(-2.0 * dot(alpha, x) / n2, alpha);
  return y;
}

AxiomReport validate_axioms(std::span<const Vector> roots,
                            std::span<const double> multiplicities,
                            bool require_integral) {
  AxiomReport rep;
  auto fail = [&rep](int axiom, int a, int b, std::string msg) {
    rep.ok = false;
    rep.axiom = axiom;
    rep.witness_a = a;
    rep.witness_b = b;
    rep.message = std::move(msg);
    return rep;
  };
  if (roots.empty()) return fail(1, -1, -1, "empty root set");
  std::size_t n = roots[0].size();
  if (n == 0) return fail(1, 0, -1, "roots have dimension 0");
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (roots[i].size() != n)
      return fail(1, int(i), -1, "root " + std::to_string(i) + " has the wrong dimension");
    if (!roots[i].all_finite() || norm2(roots[i]) < kTol * kTol)
      return fail(1, int(i), -1, "root " + std::to_string(i) + " is zero or not finite");
    for (std::size_t j = 0; j < i; ++j)
      if (near(roots[i], roots[j], kTol))
        return fail(1, int(j), int(i), "duplicate root " + describe(roots[i]));
  }
  if (span_rank(roots, n) != n)
    return fail(1, -1, -1, "roots do not span the ambient space");
  if (multiplicities.size() != roots.size())
    return fail(4, -1, -1, "expected one multiplicity per root");

  for (std::size_t a = 0; a < roots.size(); ++a)
    for (std::size_t b = 0; b < roots.size(); ++b)
      if (find_in(roots, reflect(roots[a], roots[b]), kTol) < 0)
        return fail(2, int(a), int(b),
                    "reflection of " + describe(roots[b]) + " in " + describe(roots[a]) +
                        " is not a root");
  if (require_integral)
    for (std::size_t a = 0; a < roots.size(); ++a)
      for (std::size_t b = 0; b < roots.size(); ++b) {
        double c = dot(coroot(roots[a]), roots[b]);
        if (std::abs(c - std::round(c)) > kTol)
          return fail(3, int(a), int(b),
                      "non-integral pairing " + std::to_string(c) + " of " +
                          describe(roots[a]) + " with " + describe(roots[b]));
      }
  for (std::size_t a = 0; a < roots.size(); ++a)
    for (std::size_t b = 0; b < roots.size(); ++b) {
      int img = find_in(roots, reflect(roots[a], roots[b]), kTol);
      if (std::abs(multiplicities[img] - multiplicities[b]) > 1e-12)
        return fail(4, int(b), img,
                    "multiplicity is not W-invariant: roots " + std::to_string(b) +
                        " and " + std::to_string(img) + " share an orbit");
    }
  return rep;
}

RootSystem RootSystem::standard(Family family, int rank, std::span<const double> k) {
  auto need = [&](std::size_t count) {
    if (k.size() != count)
      throw RootSystemError(to_string(family) + std::to_string(rank) + " takes " +
                            std::to_string(count) + " multiplicities, got " +
                            std::to_string(k.size()));
  };
  auto min_rank = [&](int r) {
    if (rank < r)
      throw RootSystemError("family " + to_string(family) + " needs rank >= " +
                            std::to_string(r));
  };
  if (rank > int(kMaxRank))
    throw RootSystemError("rank exceeds the supported maximum " + std::to_string(kMaxRank));

  std::vector<Vector> roots;
  std::vector<double> mult;
  auto add_pm = [&](Vector v, double m) {
    roots.push_back(v);
    mult.push_back(m);
    roots.push_back(-v);
    mult.push_back(m);
  };
  auto e = [&](int i) {
    Vector v(static_cast<std::size_t>(rank));
    v[i] = 1.0;
    return v;
  };
  auto add_long = [&](double m) {  // +-e_i +- e_j
    for (int i = 0; i < rank; ++i)
      for (int j = i + 1; j < rank; ++j) {
        add_pm(e(i) - e(j), m);
        add_pm(e(i) + e(j), m);
      }
  };

  switch (family) {
    case Family::A: {
      min_rank(1);
      need(1);
      // Orthonormal basis of the sum-zero hyperplane in R^{rank+1}.
      std::size_t n = static_cast<std::size_t>(rank);
      auto h = [n](std::size_t kk, std::size_t i) {
        double s = 1.0 / std::sqrt(double(kk) * double(kk + 1));
        if (i < kk) return s;
        if (i == kk) return -double(kk) * s;
        return 0.0;
      };
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = i + 1; j <= n; ++j) {
          Vector v(n);
          for (std::size_t kk = 1; kk <= n; ++kk) v[kk - 1] = h(kk, i) - h(kk, j);
          add_pm(v, k[0]);
        }
      break;
    }
    case Family::B:
      min_rank(2);
      need(2);
      for (int i = 0; i < rank; ++i) add_pm(e(i), k[0]);
      add_long(k[1]);
      break;
    case Family::C:
      min_rank(2);
      need(2);
      add_long(k[0]);
      for (int i = 0; i < rank; ++i) add_pm(e(i) * 2.0, k[1]);
      break;
    case Family::D:
      min_rank(3);
      need(1);
      add_long(k[0]);
      break;
    case Family::BC: {
      min_rank(1);
      need(rank == 1 ? 2 : 3);
      double k_short = k[0];
      double k_double = k[k.size() - 1];
      if (k_double < 0.0) throw RootSystemError("k_2a must be nonnegative");
      for (int i = 0; i < rank; ++i) add_pm(e(i), k_short);
      if (rank > 1) add_long(k[1]);
      if (k_double > 0.0)
        for (int i = 0; i < rank; ++i) add_pm(e(i) * 2.0, k_double);
      break;
    }
    case Family::Custom:
      throw RootSystemError("custom systems are built with RootSystem::from_roots");
  }
  return from_roots(std::move(roots), std::move(mult), true, family);
}

RootSystem RootSystem::from_roots(std::vector<Vector> roots, std::vector<double> k,
                                  bool require_integral, Family tag,
                                  std::size_t weyl_bound) {
  RootSystem rs;
  rs.build(std::move(roots), std::move(k), require_integral, tag, weyl_bound);
  return rs;
}

void RootSystem::build(std::vector<Vector> roots, std::vector<double> k,
                       bool require_integral, Family tag, std::size_t weyl_bound) {
  AxiomReport rep = validate_axioms(roots, k, require_integral);
  if (!rep.ok)
    throw RootSystemError("invalid root system (axiom " + std::to_string(rep.axiom) +
                          "): " + rep.message);
  rank_ = roots[0].size();
  family_ = tag;
  integral_ = require_integral;

  // Regular vector u = (1, eps, eps^2, ...), non-orthogonal to every root.
  // eps^(rank-1) must stay well above the orthogonality tolerance.
  double eps = 0.1;
  for (int attempt = 0;; ++attempt) {
    regular_ = Vector(rank_);
    double p = 1.0;
    for (std::size_t i = 0; i < rank_; ++i, p *= eps) regular_[i] = p;
    bool ok = std::all_of(roots.begin(), roots.end(), [&](const Vector& r) {
      return std::abs(dot(r, regular_)) > kTol * norm(r);
    });
    if (ok) break;
    if (attempt > 60) throw RootSystemError("could not find a regular vector");
    eps *= 0.83;
  }

  positive_.clear();
  std::vector<Root> negative;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (dot(roots[i], regular_) <= 0.0) continue;
    if (k[i] <= 0.0)
      throw RootSystemError("multiplicity of positive root " + describe(roots[i]) +
                            " must be > 0");
    positive_.push_back({roots[i], k[i], -1});
    int neg = find_in(roots, -roots[i], kTol);
    negative.push_back({roots[neg], k[neg], -1});
  }
  roots_ = positive_;
  roots_.insert(roots_.end(), negative.begin(), negative.end());
  std::size_t P = positive_.size();
  std::vector<Vector> vecs;
  for (const Root& r : roots_) vecs.push_back(r.vector);

  doubled_.assign(P, -1);
  halved_.assign(P, -1);
  for (std::size_t a = 0; a < P; ++a) {
    int d = find_in(std::span(vecs).first(P), positive_[a].vector * 2.0, kTol);
    if (d >= 0) {
      doubled_[a] = d;
      halved_[d] = int(a);
    }
  }
  reduced_ = std::all_of(doubled_.begin(), doubled_.end(), [](int d) { return d < 0; });

  // Orbits under the reflections (union-find).
  std::vector<int> parent(roots_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root_of = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::vector<std::vector<int>> refl_perm(P, std::vector<int>(roots_.size()));
  for (std::size_t a = 0; a < P; ++a)
    for (std::size_t b = 0; b < roots_.size(); ++b) {
      int img = find_in(vecs, reflect(positive_[a].vector, vecs[b]), kTol);
      refl_perm[a][b] = img;
      parent[root_of(img)] = root_of(int(b));
    }
  std::map<int, int> orbit_ids;
  for (std::size_t i = 0; i < roots_.size(); ++i) {
    auto [it, inserted] = orbit_ids.try_emplace(root_of(int(i)), int(orbit_ids.size()));
    roots_[i].orbit = it->second;
    if (i < P) positive_[i].orbit = it->second;
  }
  orbit_count_ = orbit_ids.size();

  // Simple roots: the indivisible positive roots whose reflection makes only
  // their own multiples negative.
  simple_.clear();
  for (std::size_t a = 0; a < P; ++a) {
    if (halved_[a] >= 0) continue;
    bool simple = true;
    for (std::size_t b = 0; b < P && simple; ++b) {
      if (b == a || int(b) == doubled_[a]) continue;
      if (refl_perm[a][b] >= int(P)) simple = false;
    }
    if (simple) simple_.push_back(int(a));
  }
  if (simple_.size() != rank_)
    throw RootSystemError("found " + std::to_string(simple_.size()) +
                          " simple roots for rank " + std::to_string(rank_));
  simple_coroots_.clear();
  for (int s : simple_) simple_coroots_.push_back(coroot(positive_[s].vector));

  rho_ = Vector(rank_);
  for (const Root& r : positive_) rho_.axpy(0.5 * r.multiplicity, r.vector);

  weyl_ = generate_weyl_group(*this, weyl_bound);
  std::size_t W = weyl_.size();
  inverse_.resize(W);
  for (std::size_t w = 0; w < W; ++w) {
    std::vector<int> inv(roots_.size());
    for (std::size_t i = 0; i < roots_.size(); ++i) inv[weyl_[w].perm[i]] = int(i);
    inverse_[w] = static_cast<std::size_t>(find_element(inv));
  }
  left_reflect_.resize(P * W);
  for (std::size_t a = 0; a < P; ++a)
    for (std::size_t w = 0; w < W; ++w) {
      std::vector<int> p(roots_.size());
      for (std::size_t i = 0; i < roots_.size(); ++i) p[i] = refl_perm[a][weyl_[w].perm[i]];
      long idx = find_element(p);
      if (idx < 0) throw RootSystemError("Weyl group is not closed under reflections");
      left_reflect_[a * W + w] = static_cast<std::size_t>(idx);
    }
  image_.resize(W * P);
  for (std::size_t w = 0; w < W; ++w)
    for (std::size_t g = 0; g < P; ++g) {
      int j = weyl_[w].perm[g];
      image_[w * P + g] = j < int(P) ? j + 1 : -(j - int(P) + 1);
    }
}

int RootSystem::find_root(const Vector& v, double tol) const {
  for (std::size_t i = 0; i < roots_.size(); ++i)
    if (near(roots_[i].vector, v, tol)) return int(i);
  return -1;
}

long RootSystem::find_element(const std::vector<int>& perm) const {
  for (std::size_t w = 0; w < weyl_.size(); ++w) {
    bool same = true;
    for (int s : simple_)
      if (weyl_[w].perm[s] != perm[s]) {
        same = false;
        break;
      }
    if (same) return long(w);
  }
  return -1;
}

std::size_t RootSystem::compose(std::size_t a, std::size_t b) const {
  std::vector<int> p(roots_.size());
  for (std::size_t i = 0; i < roots_.size(); ++i) p[i] = weyl_[a].perm[weyl_[b].perm[i]];
  return static_cast<std::size_t>(find_element(p));
}

bool RootSystem::in_closed_chamber(const Vector& x, double tol) const {
  return std::all_of(positive_.begin(), positive_.end(),
                     [&](const Root& r) { return dot(r.vector, x) >= -tol; });
}

bool RootSystem::in_open_chamber(const Vector& x) const {
  return std::all_of(positive_.begin(), positive_.end(),
                     [&](const Root& r) { return dot(r.vector, x) > 0.0; });
}

Vector RootSystem::fold(const Vector& x) const {
  int unused = 0;
  return fold(x, unused);
}

Vector RootSystem::fold(const Vector& x, int& reflections) const {
  Vector y = x;
  reflections = 0;
  // Each reflection in a simple wall with negative pairing removes one
  // positive root from the inversion set, so |R+| + slack iterations suffice.
  const int cap = 4 * int(positive_.size()) + 16;
  for (;;) {
    bool changed = false;
    for (std::size_t i = 0; i < simple_.size(); ++i) {
      const Vector& a = positive_[simple_[i]].vector;
      double p = dot(a, y);
      if (p < 0.0) {
        y.axpy(-dot(simple_coroots_[i], y), a);
        ++reflections;
        changed = true;
        break;
      }
    }
    if (!changed || reflections >= cap) break;
  }
  return y;
}

std::vector<WeylElement> generate_weyl_group(const RootSystem& model,
                                             std::size_t max_order) {
  const auto& roots = model.roots_;
  std::size_t R = roots.size();
  std::size_t n = model.rank_;
  std::vector<Vector> vecs;
  for (const Root& r : roots) vecs.push_back(r.vector);

  std::vector<std::vector<int>> sperm;
  std::vector<Matrix> smat;
  for (int s : model.simple_) {
    const Vector& a = model.positive_[s].vector;
    std::vector<int> p(R);
    for (std::size_t i = 0; i < R; ++i) {
      p[i] = find_in(vecs, reflect(a, vecs[i]), kTol);
      if (p[i] < 0) throw RootSystemError("simple reflection does not permute the roots");
    }
    sperm.push_back(std::move(p));
    smat.push_back(reflection_matrix(a));
  }

  auto key = [&](const std::vector<int>& perm) {
    std::vector<int> k;
    for (int s : model.simple_) k.push_back(perm[s]);
    return k;
  };

  std::vector<WeylElement> out;
  std::map<std::vector<int>, std::size_t> seen;
  WeylElement id;
  id.matrix = Matrix::identity(n);
  id.perm.resize(R);
  std::iota(id.perm.begin(), id.perm.end(), 0);
  seen.emplace(key(id.perm), 0);
  out.push_back(std::move(id));
  // Generators in increasing positive-root index; BFS then yields the
  // lexicographically smallest among the shortest words.
  std::vector<std::size_t> order(model.simple_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return model.simple_[a] < model.simple_[b]; });
  for (std::size_t head = 0; head < out.size(); ++head) {
    for (std::size_t gi : order) {
      std::vector<int> p(R);
      for (std::size_t i = 0; i < R; ++i) p[i] = out[head].perm[sperm[gi][i]];
      auto k = key(p);
      if (seen.count(k)) continue;
      if (out.size() >= max_order)
        throw RootSystemError("Weyl group closure exceeds the bound " +
                              std::to_string(max_order));
      WeylElement el;
      el.word = out[head].word;
      el.word.push_back(model.simple_[gi]);
      el.matrix = out[head].matrix * smat[gi];
      el.perm = std::move(p);
      seen.emplace(std::move(k), out.size());
      out.push_back(std::move(el));
    }
  }
  return out;
}

ChamberDecomposition radial_decompose(const RootSystem& model, const Vector& x) {
  ChamberDecomposition d;
  d.x_plus = model.fold(x);
  double tol = 1e-10 * (1.0 + norm(x));
  const auto& W = model.weyl();
  for (std::size_t w = 0; w < W.size(); ++w) {
    if (max_abs_diff(W[w].matrix.apply(d.x_plus), x) <= tol) {
      d.w = w;
      d.element = W[w];
      return d;
    }
  }
  throw std::logic_error("radial_decompose: no Weyl element maps x+ back to x");
}

RootSystem rescale_to_dunkl(const RootSystem& model) {
  std::vector<Vector> roots;
  std::vector<double> k;
  std::size_t P = model.positive_count();
  bool normalized = true;
  for (std::size_t i = 0; i < model.roots().size(); ++i) {
    std::size_t a = i % P;
    if (model.halved(a) >= 0) continue;
    const Root& r = model.roots()[i];
    if (std::abs(norm2(r.vector) - 2.0) > 1e-12) normalized = false;
    roots.push_back(r.vector * (std::sqrt(2.0) / norm(r.vector)));
    double kk = r.multiplicity;
    if (model.doubled(a) >= 0) kk += model.positive()[model.doubled(a)].multiplicity;
    k.push_back(kk);
  }
  Family tag = (model.reduced() && normalized) ? model.family() : Family::Custom;
  return RootSystem::from_roots(std::move(roots), std::move(k), false, tag);
}

}  // namespace hop
