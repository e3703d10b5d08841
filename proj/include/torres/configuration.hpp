#pragma once

#include <torres/feasibility.hpp>
#include <torres/linalg.hpp>

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace torres {

struct Configuration {
  int r = 0, n = 0;
  std::vector<QVector> alphas;  // n integer covectors spanning the dual space
  QVector kappa;                // sum of the alphas
};

inline Configuration make_configuration(int r, int n, std::vector<QVector> alphas) {
  Configuration a;
  a.r = r;
  a.n = n;
  a.alphas = std::move(alphas);
  a.kappa.assign(r, Rat(0));
  for (const auto& al : a.alphas) a.kappa = a.kappa + al;
  return a;
}

inline std::string index_set_str(const std::vector<int>& s) {
  std::string out = "{";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i] + 1);
  }
  return out + "}";
}

// Checks shape, projectivity, the spanning condition and lattice generation.
inline void validate(const Configuration& a) {
  if (a.r < 1) throw std::domain_error("validate: rank must be at least 1");
  if (a.n < a.r) throw std::domain_error("validate: fewer covectors than rank");
  if (int(a.alphas.size()) != a.n) throw std::domain_error("validate: covector count mismatch");
  for (int i = 0; i < a.n; ++i) {
    if (int(a.alphas[i].size()) != a.r)
      throw std::domain_error("validate: covector " + std::to_string(i + 1) + " has wrong dimension");
    if (is_zero(a.alphas[i]))
      throw std::domain_error("validate: covector " + std::to_string(i + 1) + " is zero");
    for (const auto& x : a.alphas[i])
      if (x.get_den() != 1)
        throw std::domain_error("validate: covector " + std::to_string(i + 1) + " is not integral");
  }

  // Projectivity: some functional is >= 1 on every covector.
  {
    std::vector<AffineIneq> sys;
    for (const auto& al : a.alphas) sys.push_back({al, Rat(1), false});
    if (!feasible(std::move(sys), a.r))
      throw std::domain_error("validate: configuration is not projective");
  }

  // Lattice generation: Smith invariants of the covector matrix are all 1.
  {
    IMatrix m(a.r, a.n);
    for (int j = 0; j < a.r; ++j)
      for (int i = 0; i < a.n; ++i) m.at(j, i) = a.alphas[i][j].get_num();
    auto s = smith(m);
    if (int(s.invariants.size()) != a.r)
      throw std::domain_error("validate: covectors do not span");
    for (const auto& d : s.invariants)
      if (d != 1) throw std::domain_error("validate: covectors do not generate the lattice");
  }

  // Spanning: kappa is a strictly positive combination avoiding each index.
  for (int k = 0; k < a.n; ++k) {
    std::vector<QVector> cols;
    for (int i = 0; i < a.n; ++i)
      if (i != k) cols.push_back(a.alphas[i]);
    QMatrix m = QMatrix::from_cols(cols);
    auto sol = solve_rational(m, a.kappa);
    bool ok = false;
    if (sol) {
      int nv = int(sol->nullspace.size());
      if (nv == 0) {
        ok = true;
        for (const auto& t : sol->x)
          if (t <= 0) ok = false;
      } else {
        std::vector<AffineIneq> sys;
        for (int i = 0; i < int(cols.size()); ++i) {
          AffineIneq q;
          q.a.resize(nv);
          for (int j = 0; j < nv; ++j) q.a[j] = sol->nullspace[j][i];
          q.c = -sol->x[i];
          q.strict = true;
          sys.push_back(std::move(q));
        }
        ok = feasible(std::move(sys), nv);
      }
    }
    if (!ok)
      throw std::domain_error("validate: spanning condition fails at index " +
                              std::to_string(k + 1));
  }
}

inline bool is_valid(const Configuration& a) {
  try {
    validate(a);
    return true;
  } catch (const std::domain_error&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Gale duality.

struct GalePair {
  Configuration a;
  IMatrix b;                   // (n-r) x n, rows span the saturated relation lattice
  std::vector<QVector> betas;  // column i of b, the dual vector attached to index i
};

inline IMatrix covector_matrix(const Configuration& a) {
  IMatrix m(a.r, a.n);
  for (int j = 0; j < a.r; ++j)
    for (int i = 0; i < a.n; ++i) m.at(j, i) = a.alphas[i][j].get_num();
  return m;
}

inline GalePair gale_dual(const Configuration& a) {
  IMatrix m = covector_matrix(a);
  if (hnf(m).rank != a.r) throw std::domain_error("gale_dual: covectors do not span");
  GalePair g;
  g.a = a;
  g.b = integer_kernel(m);
  int d = a.n - a.r;
  for (int i = 0; i < a.n; ++i) {
    QVector beta(d);
    for (int j = 0; j < d; ++j) beta[j] = Rat(g.b.at(j, i));
    g.betas.push_back(std::move(beta));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Bases, volumes, chambers.

inline std::vector<std::vector<int>> basis_index_sets(const Configuration& a) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(a.r);
  auto rec = [&](auto&& self, int start, int depth) -> void {
    if (depth == a.r) {
      std::vector<QVector> rows;
      for (int i : idx) rows.push_back(a.alphas[i]);
      if (det(QMatrix::from_rows(rows)) != 0) out.push_back(idx);
      return;
    }
    for (int i = start; i < a.n; ++i) {
      idx[depth] = i;
      self(self, i + 1, depth + 1);
    }
  };
  rec(rec, 0, 0);
  return out;
}

inline Rat signed_volume(const Configuration& a, const std::vector<int>& sigma) {
  std::vector<QVector> rows;
  for (int i : sigma) rows.push_back(a.alphas[i]);
  return det(QMatrix::from_rows(rows));
}

struct Chamber {
  QVector xi0;
  std::vector<std::vector<int>> bind;  // basis sets whose cone contains the chamber
};

// Coordinates of xi in the basis sigma; nullopt when dependent.
inline std::optional<QVector> coords_in_basis(const Configuration& a,
                                              const std::vector<int>& sigma, const QVector& xi) {
  std::vector<QVector> cols;
  for (int i : sigma) cols.push_back(a.alphas[i]);
  QMatrix m = QMatrix::from_cols(cols);
  if (det(m) == 0) return std::nullopt;
  auto sol = solve_rational(m, xi);
  if (!sol) return std::nullopt;
  return sol->x;
}

inline Chamber chamber_of(const Configuration& a, const QVector& xi0) {
  Chamber c;
  c.xi0 = xi0;
  for (const auto& sigma : basis_index_sets(a)) {
    auto co = coords_in_basis(a, sigma, xi0);
    if (!co) continue;
    bool inside = true;
    for (const auto& x : *co) {
      if (x == 0)
        throw std::domain_error("singular point: xi0 lies on the boundary of cone " +
                                index_set_str(sigma));
      if (x < 0) inside = false;
    }
    if (inside) c.bind.push_back(sigma);
  }
  if (c.bind.empty()) throw std::domain_error("chamber_of: xi0 is outside the cone of the configuration");
  return c;
}

// Minimum absolute coordinate of xi over all bases drawn from the set of
// nonzero subset sums; zero exactly on the excluded hyperplanes.
inline Rat sum_regularity(const Configuration& a, const QVector& xi) {
  if (a.n > 16) throw std::domain_error("sum_regularity: configuration too large");
  std::set<QVector> sums;
  for (unsigned mask = 1; mask < (1u << a.n); ++mask) {
    QVector s(a.r, Rat(0));
    for (int i = 0; i < a.n; ++i)
      if (mask & (1u << i)) s = s + a.alphas[i];
    if (!is_zero(s)) sums.insert(std::move(s));
  }
  std::vector<QVector> sv(sums.begin(), sums.end());
  int m = int(sv.size());
  Rat best = -1;
  std::vector<int> idx(a.r);
  auto rec = [&](auto&& self, int start, int depth) -> void {
    if (best == 0) return;
    if (depth == a.r) {
      std::vector<QVector> cols;
      for (int i : idx) cols.push_back(sv[i]);
      QMatrix mt = QMatrix::from_cols(cols);
      if (det(mt) == 0) return;
      auto sol = solve_rational(mt, xi);
      for (const auto& x : sol->x) {
        Rat ax = rat_abs(x);
        if (best < 0 || ax < best) best = ax;
      }
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[depth] = i;
      self(self, i + 1, depth + 1);
    }
  };
  rec(rec, 0, 0);
  if (best < 0) throw std::domain_error("sum_regularity: sums do not span");
  return best;
}

// ---------------------------------------------------------------------------
// Flags.

struct Flag {
  std::vector<QMatrix> stages;        // stages[j]: reduced echelon basis of the (j+1)-dim step
  std::vector<QVector> gamma;         // adapted basis, unit lattice volume, det +1
  std::vector<QVector> kappas;        // partial sums over the stages; last equals kappa
  int nu = 0;                         // orientation sign, 0 when improper
  Int d = 0;                          // det(kappa_1,...,kappa_{r-1}, kappa)
  std::vector<int> stage_of;          // per covector, 1-based stage of first containment
  std::vector<QVector> alpha_coords;  // covectors in gamma coordinates
  std::vector<Rat> m;                 // leading gamma coefficients, all nonzero
  std::string key;                    // canonical identifier from the echelon stages
};

namespace detail {

inline std::string qmatrix_key(const QMatrix& m) {
  std::string s;
  for (const auto& x : m.a) {
    s += rat_str(x);
    s += ',';
  }
  s += ';';
  return s;
}

// Does v lie in the row space of the reduced echelon matrix e?
inline bool in_rowspace(const Rref& e, QVector v) {
  for (int i = 0; i < e.rank; ++i) {
    Rat c = v[e.pivots[i]];
    if (c == 0) continue;
    for (int j = 0; j < int(v.size()); ++j) v[j] -= c * e.m.at(i, j);
  }
  return is_zero(v);
}

}  // namespace detail

// Builds flag data from an increasing chain of echelon stage bases.
inline Flag make_flag(const Configuration& a, std::vector<QMatrix> stages) {
  if (int(stages.size()) != a.r) throw std::invalid_argument("make_flag: need r stages");
  Flag f;
  f.stages = std::move(stages);
  std::vector<Rref> echelons;
  for (int j = 0; j < a.r; ++j) {
    Rref e = rref(f.stages[j]);
    if (e.rank != j + 1) throw std::invalid_argument("make_flag: stage dimension mismatch");
    f.stages[j] = QMatrix(j + 1, a.r);
    for (int i = 0; i <= j; ++i)
      for (int c = 0; c < a.r; ++c) f.stages[j].at(i, c) = e.m.at(i, c);
    echelons.push_back(rref(f.stages[j]));
  }

  f.stage_of.assign(a.n, 0);
  for (int i = 0; i < a.n; ++i) {
    for (int j = 0; j < a.r; ++j) {
      if (detail::in_rowspace(echelons[j], a.alphas[i])) {
        f.stage_of[i] = j + 1;
        break;
      }
    }
    if (f.stage_of[i] == 0)
      throw std::invalid_argument("make_flag: covector escapes the final stage");
  }

  std::vector<int> chosen(a.r, -1);
  for (int i = a.n - 1; i >= 0; --i) chosen[f.stage_of[i] - 1] = i;
  for (int j = 0; j < a.r; ++j)
    if (chosen[j] < 0)
      throw std::invalid_argument("make_flag: stage " + std::to_string(j + 1) +
                                  " adds no covector");

  std::vector<QVector> g;
  for (int j = 0; j < a.r; ++j) g.push_back(a.alphas[chosen[j]]);
  Rat dd = det(QMatrix::from_rows(g));
  g[a.r - 1] = (1 / dd) * g[a.r - 1];
  f.gamma = g;

  QMatrix gm = QMatrix::from_rows(f.gamma);
  QMatrix ginv = inverse(gm);
  for (int i = 0; i < a.n; ++i) {
    QVector c(a.r, Rat(0));
    for (int j = 0; j < a.r; ++j) {
      Rat s = 0;
      for (int k = 0; k < a.r; ++k) s += a.alphas[i][k] * ginv.at(k, j);
      c[j] = s;
    }
    f.alpha_coords.push_back(std::move(c));
  }
  for (int i = 0; i < a.n; ++i) f.m.push_back(f.alpha_coords[i][f.stage_of[i] - 1]);

  for (int j = 1; j <= a.r; ++j) {
    QVector k(a.r, Rat(0));
    for (int i = 0; i < a.n; ++i)
      if (f.stage_of[i] <= j) k = k + a.alphas[i];
    f.kappas.push_back(std::move(k));
  }

  f.nu = orientation_sign(f.kappas);
  std::vector<QVector> rows(f.kappas.begin(), f.kappas.end() - 1);
  rows.push_back(a.kappa);
  Rat dr = det(QMatrix::from_rows(rows));
  f.d = dr.get_num();

  for (const auto& s : f.stages) f.key += detail::qmatrix_key(s);
  return f;
}

inline std::vector<Flag> enumerate_flags(const Configuration& a) {
  // Candidate subspaces of each dimension spanned by covectors.
  std::vector<std::map<std::string, QMatrix>> cands(a.r + 1);
  std::vector<int> idx;
  auto subsets = [&](auto&& self, int start, int depth, int want) -> void {
    if (depth == want) {
      std::vector<QVector> rows;
      for (int i : idx) rows.push_back(a.alphas[i]);
      Rref e = rref(QMatrix::from_rows(rows));
      if (e.rank != want) return;
      QMatrix basis(want, a.r);
      for (int i = 0; i < want; ++i)
        for (int c = 0; c < a.r; ++c) basis.at(i, c) = e.m.at(i, c);
      cands[want].emplace(detail::qmatrix_key(basis), basis);
      return;
    }
    for (int i = start; i < a.n; ++i) {
      idx.push_back(i);
      self(self, i + 1, depth + 1, want);
      idx.pop_back();
    }
  };
  for (int j = 1; j <= a.r; ++j) {
    idx.clear();
    subsets(subsets, 0, 0, j);
  }

  std::vector<Flag> flags;
  std::vector<QMatrix> chain;
  auto extend = [&](auto&& self, int depth) -> void {
    if (depth == a.r) {
      flags.push_back(make_flag(a, chain));
      return;
    }
    for (const auto& [key, cand] : cands[depth + 1]) {
      if (depth > 0) {
        bool contains = true;
        Rref up = rref(cand);
        for (int i = 0; i < chain.back().rows && contains; ++i)
          contains = detail::in_rowspace(up, chain.back().row(i));
        if (!contains) continue;
      }
      chain.push_back(cand);
      self(self, depth + 1);
      chain.pop_back();
    }
  };
  extend(extend, 0);
  std::sort(flags.begin(), flags.end(), [](const Flag& x, const Flag& y) { return x.key < y.key; });
  return flags;
}

enum class FlagMode { plus, zero };

// Indices of flags whose cone (in the chosen mode) contains xi.
inline std::vector<int> flags_for_xi(const Configuration& a, const std::vector<Flag>& flags,
                                     const QVector& xi, FlagMode mode) {
  std::vector<int> out;
  for (int fi = 0; fi < int(flags.size()); ++fi) {
    const Flag& f = flags[fi];
    if (f.nu == 0) {
      Rref e = rref(QMatrix::from_rows(f.kappas));
      if (detail::in_rowspace(e, xi))
        throw std::domain_error("xi is not sum-regular: it lies in the span of an improper flag");
      continue;
    }
    QMatrix m = QMatrix::from_cols(f.kappas);
    auto sol = solve_rational(m, xi);
    int upto = mode == FlagMode::plus ? a.r : a.r - 1;
    bool in = true;
    for (int j = 0; j < upto; ++j) {
      if (sol->x[j] == 0)
        throw std::domain_error("xi is not sum-regular: zero coordinate against flag sums");
      if (sol->x[j] < 0) in = false;
    }
    if (in) out.push_back(fi);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dual cone of a chamber and positive bases.

struct DualConeData {
  std::vector<QVector> generators;  // primitive integer generators of the dual cone

  bool contains(const QVector& lambda) const { return in_cone(lambda, generators); }
};

inline DualConeData dual_cone_data(const Configuration& a, const Chamber& c) {
  std::set<QVector> gens;
  for (const auto& sigma : c.bind) {
    std::vector<QVector> rows;
    for (int i : sigma) rows.push_back(a.alphas[i]);
    QMatrix inv = inverse(QMatrix::from_rows(rows));
    for (int j = 0; j < a.r; ++j) gens.insert(to_qvector(primitive_direction(inv.col(j))));
  }
  std::vector<QVector> g(gens.begin(), gens.end());
  // Drop generators already expressible by the others.
  for (size_t i = 0; i < g.size();) {
    std::vector<QVector> rest;
    for (size_t j = 0; j < g.size(); ++j)
      if (j != i) rest.push_back(g[j]);
    if (in_cone(g[i], rest))
      g.erase(g.begin() + i);
    else
      ++i;
  }
  return DualConeData{std::move(g)};
}

// Unimodular basis of the lattice whose cone covers the dual cone and pairs
// nonnegatively with kappa.
inline std::vector<QVector> c_positive_basis(const Configuration& a, const Chamber& c,
                                             int max_height = 4) {
  DualConeData dual = dual_cone_data(a, c);
  std::vector<QVector> cands;
  std::set<QVector> seen;
  auto push = [&](const QVector& v) {
    if (is_zero(v) || seen.count(v)) return;
    if (dot(a.kappa, v) < 0) return;
    seen.insert(v);
    cands.push_back(v);
  };
  for (const auto& g : dual.generators) push(g);
  for (int h = 1; h <= max_height; ++h) {
    std::vector<QVector> box;
    QVector v(a.r, Rat(-h));
    while (true) {
      Rat mx = 0;
      for (const auto& x : v) mx = std::max(mx, rat_abs(x));
      if (mx == h) box.push_back(v);
      int j = a.r - 1;
      while (j >= 0 && v[j] == h) v[j--] = -h;
      if (j < 0) break;
      v[j] += 1;
    }
    std::sort(box.begin(), box.end());
    for (const auto& b : box) push(b);
  }

  int m = int(cands.size());
  std::vector<int> pick(a.r);
  std::vector<QVector> result;
  auto rec = [&](auto&& self, int start, int depth) -> bool {
    if (depth == a.r) {
      std::vector<QVector> basis;
      for (int i : pick) basis.push_back(cands[i]);
      Rat dd = det(QMatrix::from_rows(basis));
      if (dd != 1 && dd != -1) return false;
      QMatrix bm = QMatrix::from_cols(basis);
      for (const auto& g : dual.generators) {
        auto sol = solve_rational(bm, g);
        for (const auto& x : sol->x)
          if (x < 0) return false;
      }
      result = basis;
      return true;
    }
    for (int i = start; i < m; ++i) {
      pick[depth] = i;
      if (self(self, i + 1, depth + 1)) return true;
    }
    return false;
  };
  if (!rec(rec, 0, 0))
    throw std::domain_error("c_positive_basis: no unimodular positive basis within height " +
                            std::to_string(max_height));
  return result;
}

// A sum-regular point in the chamber of c, found by deterministic perturbation
// of the chamber base point.
inline QVector auto_regular_xi(const Configuration& a, const std::vector<Flag>& flags,
                               const Chamber& c) {
  auto usable = [&](const QVector& xi) {
    try {
      Chamber cc = chamber_of(a, xi);
      if (cc.bind != c.bind) return false;
      flags_for_xi(a, flags, xi, FlagMode::plus);
      flags_for_xi(a, flags, xi, FlagMode::zero);
      return true;
    } catch (const std::domain_error&) {
      return false;
    }
  };
  if (usable(c.xi0)) return c.xi0;
  for (int k = 2; k <= 60; ++k) {
    for (Int p : {Int(9973), Int(9941), Int(9929)}) {
      QVector xi = c.xi0;
      Rat eps = make_rat(1, int_pow(Int(2), k));
      Rat scale = 1;
      for (int j = 0; j < a.r; ++j) {
        xi[j] += eps * scale;
        scale /= p;
      }
      if (usable(xi)) return xi;
    }
  }
  throw std::domain_error("auto_regular_xi: no sum-regular point found near xi0");
}

}  // namespace torres
