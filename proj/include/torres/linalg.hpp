#pragma once

#include <torres/rational.hpp>

#include <algorithm>
#include <optional>
#include <vector>

namespace torres {

using QVector = std::vector<Rat>;

inline QVector operator+(const QVector& a, const QVector& b) {
  QVector s(a.size());
  for (size_t i = 0; i < a.size(); ++i) s[i] = a[i] + b[i];
  return s;
}

inline QVector operator-(const QVector& a, const QVector& b) {
  QVector s(a.size());
  for (size_t i = 0; i < a.size(); ++i) s[i] = a[i] - b[i];
  return s;
}

inline QVector operator*(const Rat& c, const QVector& a) {
  QVector s(a.size());
  for (size_t i = 0; i < a.size(); ++i) s[i] = c * a[i];
  return s;
}

inline Rat dot(const QVector& a, const QVector& b) {
  Rat s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline bool is_zero(const QVector& a) {
  for (const auto& x : a)
    if (x != 0) return false;
  return true;
}

struct QMatrix {
  int rows = 0, cols = 0;
  std::vector<Rat> a;

  QMatrix() = default;
  QMatrix(int r, int c) : rows(r), cols(c), a(size_t(r) * size_t(c)) {}

  Rat& at(int i, int j) { return a[size_t(i) * cols + j]; }
  const Rat& at(int i, int j) const { return a[size_t(i) * cols + j]; }

  static QMatrix identity(int n) {
    QMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  static QMatrix from_rows(const std::vector<QVector>& rs) {
    QMatrix m(int(rs.size()), rs.empty() ? 0 : int(rs[0].size()));
    for (int i = 0; i < m.rows; ++i)
      for (int j = 0; j < m.cols; ++j) m.at(i, j) = rs[i][j];
    return m;
  }

  static QMatrix from_cols(const std::vector<QVector>& cs) {
    QMatrix m(cs.empty() ? 0 : int(cs[0].size()), int(cs.size()));
    for (int i = 0; i < m.rows; ++i)
      for (int j = 0; j < m.cols; ++j) m.at(i, j) = cs[j][i];
    return m;
  }

  QVector row(int i) const {
    QVector v(cols);
    for (int j = 0; j < cols; ++j) v[j] = at(i, j);
    return v;
  }

  QVector col(int j) const {
    QVector v(rows);
    for (int i = 0; i < rows; ++i) v[i] = at(i, j);
    return v;
  }

  QMatrix transposed() const {
    QMatrix t(cols, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
    return t;
  }

  void swap_rows(int i, int j) {
    for (int c = 0; c < cols; ++c) std::swap(at(i, c), at(j, c));
  }

  bool operator==(const QMatrix& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }
};

inline QMatrix operator*(const QMatrix& x, const QMatrix& y) {
  if (x.cols != y.rows) throw std::invalid_argument("matrix product shape mismatch");
  QMatrix z(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      if (x.at(i, k) == 0) continue;
      for (int j = 0; j < y.cols; ++j) z.at(i, j) += x.at(i, k) * y.at(k, j);
    }
  return z;
}

inline QVector operator*(const QMatrix& m, const QVector& v) {
  if (m.cols != int(v.size())) throw std::invalid_argument("matrix-vector shape mismatch");
  QVector w(m.rows);
  for (int i = 0; i < m.rows; ++i) {
    Rat s = 0;
    for (int j = 0; j < m.cols; ++j) s += m.at(i, j) * v[j];
    w[i] = s;
  }
  return w;
}

// Fraction-free Bareiss elimination; divisions are exact at every step.
inline Rat det(QMatrix m) {
  if (m.rows != m.cols) throw std::invalid_argument("determinant of non-square matrix");
  int n = m.rows;
  if (n == 0) return 1;
  Rat sign = 1, prev = 1;
  for (int k = 0; k + 1 < n; ++k) {
    int p = k;
    while (p < n && m.at(p, k) == 0) ++p;
    if (p == n) return 0;
    if (p != k) {
      m.swap_rows(p, k);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m.at(i, j) = (m.at(k, k) * m.at(i, j) - m.at(i, k) * m.at(k, j)) / prev;
    prev = m.at(k, k);
  }
  return sign * m.at(n - 1, n - 1);
}

struct Rref {
  QMatrix m;
  std::vector<int> pivots;
  int rank = 0;
};

inline Rref rref(QMatrix m) {
  Rref r;
  int pr = 0;
  for (int c = 0; c < m.cols && pr < m.rows; ++c) {
    int p = pr;
    while (p < m.rows && m.at(p, c) == 0) ++p;
    if (p == m.rows) continue;
    if (p != pr) m.swap_rows(p, pr);
    Rat inv = 1 / m.at(pr, c);
    for (int j = c; j < m.cols; ++j) m.at(pr, j) *= inv;
    for (int i = 0; i < m.rows; ++i) {
      if (i == pr || m.at(i, c) == 0) continue;
      Rat f = m.at(i, c);
      for (int j = c; j < m.cols; ++j) m.at(i, j) -= f * m.at(pr, j);
    }
    r.pivots.push_back(c);
    ++pr;
  }
  r.rank = pr;
  r.m = std::move(m);
  return r;
}

inline int rank(const QMatrix& m) { return rref(m).rank; }

struct LinearSolution {
  QVector x;                       // distinguished solution, free coordinates zero
  std::vector<QVector> nullspace;  // basis, one vector per free column
};

// Solves M x = b over the rationals.
inline std::optional<LinearSolution> solve_rational(const QMatrix& m, const QVector& b) {
  if (int(b.size()) != m.rows) throw std::invalid_argument("solve: rhs size mismatch");
  QMatrix aug(m.rows, m.cols + 1);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, m.cols) = b[i];
  }
  Rref r = rref(std::move(aug));
  for (int c : r.pivots)
    if (c == m.cols) return std::nullopt;

  LinearSolution sol;
  sol.x.assign(m.cols, Rat(0));
  for (int i = 0; i < int(r.pivots.size()); ++i) sol.x[r.pivots[i]] = r.m.at(i, m.cols);

  std::vector<bool> is_pivot(m.cols, false);
  for (int c : r.pivots) is_pivot[c] = true;
  for (int f = 0; f < m.cols; ++f) {
    if (is_pivot[f]) continue;
    QVector v(m.cols, Rat(0));
    v[f] = 1;
    for (int i = 0; i < int(r.pivots.size()); ++i) v[r.pivots[i]] = -r.m.at(i, f);
    sol.nullspace.push_back(std::move(v));
  }
  return sol;
}

inline QMatrix inverse(const QMatrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("inverse of non-square matrix");
  int n = m.rows;
  QMatrix aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, n + i) = 1;
  }
  Rref r = rref(std::move(aug));
  if (r.rank < n || r.pivots[n - 1] >= n) throw std::domain_error("singular matrix");
  QMatrix inv(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv.at(i, j) = r.m.at(i, n + j);
  return inv;
}

// Sign of det(rows); 0 when the family is dependent.
inline int orientation_sign(const std::vector<QVector>& vecs) {
  if (vecs.empty()) return 1;
  if (vecs.size() != vecs[0].size())
    throw std::invalid_argument("orientation_sign needs dim-many vectors");
  return rat_sign(det(QMatrix::from_rows(vecs)));
}

// ---------------------------------------------------------------------------
// Integer lattice layer.

struct IMatrix {
  int rows = 0, cols = 0;
  std::vector<Int> a;

  IMatrix() = default;
  IMatrix(int r, int c) : rows(r), cols(c), a(size_t(r) * size_t(c)) {}

  Int& at(int i, int j) { return a[size_t(i) * cols + j]; }
  const Int& at(int i, int j) const { return a[size_t(i) * cols + j]; }

  static IMatrix identity(int n) {
    IMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  static IMatrix from_rows(const std::vector<std::vector<Int>>& rs) {
    IMatrix m(int(rs.size()), rs.empty() ? 0 : int(rs[0].size()));
    for (int i = 0; i < m.rows; ++i)
      for (int j = 0; j < m.cols; ++j) m.at(i, j) = rs[i][j];
    return m;
  }

  std::vector<Int> row(int i) const {
    std::vector<Int> v(cols);
    for (int j = 0; j < cols; ++j) v[j] = at(i, j);
    return v;
  }

  IMatrix transposed() const {
    IMatrix t(cols, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
    return t;
  }

  void swap_rows(int i, int j) {
    for (int c = 0; c < cols; ++c) std::swap(at(i, c), at(j, c));
  }

  void negate_row(int i) {
    for (int c = 0; c < cols; ++c) at(i, c) = -at(i, c);
  }

  // row i -= q * row j
  void submul_row(int i, int j, const Int& q) {
    if (q == 0) return;
    for (int c = 0; c < cols; ++c) at(i, c) -= q * at(j, c);
  }

  bool operator==(const IMatrix& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }
};

inline QMatrix to_qmatrix(const IMatrix& m) {
  QMatrix q(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) q.at(i, j) = Rat(m.at(i, j));
  return q;
}

struct HnfResult {
  IMatrix h;  // row Hermite form: pivots positive, entries above reduced into [0, pivot)
  IMatrix u;  // unimodular, u * m = h
  int rank = 0;
};

inline HnfResult hnf(const IMatrix& m) {
  HnfResult res;
  res.h = m;
  res.u = IMatrix::identity(m.rows);
  IMatrix& h = res.h;
  IMatrix& u = res.u;
  int r0 = 0;
  for (int c = 0; c < m.cols && r0 < m.rows; ++c) {
    while (true) {
      int p = -1;
      for (int i = r0; i < m.rows; ++i) {
        if (h.at(i, c) == 0) continue;
        if (p < 0 || cmp(abs(h.at(i, c)), abs(h.at(p, c))) < 0) p = i;
      }
      if (p < 0) break;
      if (p != r0) {
        h.swap_rows(p, r0);
        u.swap_rows(p, r0);
      }
      bool clean = true;
      for (int i = r0 + 1; i < m.rows; ++i) {
        if (h.at(i, c) == 0) continue;
        Int q = h.at(i, c) / h.at(r0, c);  // truncated; remainder shrinks strictly
        h.submul_row(i, r0, q);
        u.submul_row(i, r0, q);
        if (h.at(i, c) != 0) clean = false;
      }
      if (clean) break;
    }
    if (h.at(r0, c) == 0) continue;
    if (h.at(r0, c) < 0) {
      h.negate_row(r0);
      u.negate_row(r0);
    }
    for (int i = 0; i < r0; ++i) {
      Int q;
      mpz_fdiv_q(q.get_mpz_t(), h.at(i, c).get_mpz_t(), h.at(r0, c).get_mpz_t());
      h.submul_row(i, r0, q);
      u.submul_row(i, r0, q);
    }
    ++r0;
  }
  res.rank = r0;
  return res;
}

struct SmithResult {
  IMatrix d;  // diagonal, d = u * m * v
  IMatrix u;  // unimodular row transform
  IMatrix v;  // unimodular column transform
  std::vector<Int> invariants;  // nonzero diagonal entries, each dividing the next
};

inline SmithResult smith(const IMatrix& m) {
  SmithResult res;
  res.d = m;
  res.u = IMatrix::identity(m.rows);
  res.v = IMatrix::identity(m.cols);
  IMatrix& d = res.d;
  IMatrix& u = res.u;
  IMatrix& v = res.v;

  auto swap_cols = [&](IMatrix& x, int i, int j) {
    for (int r = 0; r < x.rows; ++r) std::swap(x.at(r, i), x.at(r, j));
  };
  auto submul_col = [&](IMatrix& x, int i, int j, const Int& q) {
    if (q == 0) return;
    for (int r = 0; r < x.rows; ++r) x.at(r, i) -= q * x.at(r, j);
  };

  int t = 0;
  int nmin = std::min(m.rows, m.cols);
  while (t < nmin) {
    int pi = -1, pj = -1;
    for (int i = t; i < m.rows; ++i)
      for (int j = t; j < m.cols; ++j) {
        if (d.at(i, j) == 0) continue;
        if (pi < 0 || cmp(abs(d.at(i, j)), abs(d.at(pi, pj))) < 0) {
          pi = i;
          pj = j;
        }
      }
    if (pi < 0) break;
    if (pi != t) {
      d.swap_rows(pi, t);
      u.swap_rows(pi, t);
    }
    if (pj != t) {
      swap_cols(d, pj, t);
      swap_cols(v, pj, t);
    }
    bool again = false;
    for (int i = t + 1; i < m.rows; ++i) {
      if (d.at(i, t) == 0) continue;
      Int q = d.at(i, t) / d.at(t, t);
      d.submul_row(i, t, q);
      u.submul_row(i, t, q);
      if (d.at(i, t) != 0) again = true;
    }
    for (int j = t + 1; j < m.cols; ++j) {
      if (d.at(t, j) == 0) continue;
      Int q = d.at(t, j) / d.at(t, t);
      submul_col(d, j, t, q);
      submul_col(v, j, t, q);
      if (d.at(t, j) != 0) again = true;
    }
    if (again) continue;
    ++t;
  }
  for (int i = 0; i < nmin; ++i) {
    if (d.at(i, i) < 0) {
      d.negate_row(i);
      u.negate_row(i);
    }
  }
  // Enforce the divisibility chain d_i | d_{i+1}.
  for (bool changed = true; changed;) {
    changed = false;
    for (int i = 0; i + 1 < nmin; ++i) {
      Int a = d.at(i, i), b = d.at(i + 1, i + 1);
      if (b == 0 || a == 0 || b % a == 0) {
        if (a == 0 && b != 0) {  // push zeros to the end
          d.swap_rows(i, i + 1);
          u.swap_rows(i, i + 1);
          swap_cols(d, i, i + 1);
          swap_cols(v, i, i + 1);
          changed = true;
        }
        continue;
      }
      Int g, s, tt;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), tt.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
      // col_i += col_{i+1}; then rows (i,i+1) <- [[s,t],[-b/g,a/g]] * rows; then clear (i,i+1).
      submul_col(d, i, i + 1, Int(-1));
      submul_col(v, i, i + 1, Int(-1));
      Int bg = b / g, ag = a / g;
      for (int c = 0; c < d.cols; ++c) {
        Int ri = d.at(i, c), rj = d.at(i + 1, c);
        d.at(i, c) = s * ri + tt * rj;
        d.at(i + 1, c) = -bg * ri + ag * rj;
      }
      for (int c = 0; c < u.cols; ++c) {
        Int ri = u.at(i, c), rj = u.at(i + 1, c);
        u.at(i, c) = s * ri + tt * rj;
        u.at(i + 1, c) = -bg * ri + ag * rj;
      }
      Int q = d.at(i, i + 1) / d.at(i, i);
      submul_col(d, i + 1, i, q);
      submul_col(v, i + 1, i, q);
      changed = true;
    }
  }
  for (int i = 0; i < nmin; ++i)
    if (d.at(i, i) != 0) res.invariants.push_back(d.at(i, i));
  return res;
}

// Basis of the saturated integer kernel {v : m v = 0}, one row per basis vector.
inline IMatrix integer_kernel(const IMatrix& m) {
  HnfResult h = hnf(m.transposed());
  int n = m.cols;
  IMatrix k(n - h.rank, n);
  for (int i = h.rank; i < n; ++i)
    for (int j = 0; j < n; ++j) k.at(i - h.rank, j) = h.u.at(i, j);
  return k;
}

// Primitive integer vector pointing in the same direction (positive rescale).
inline std::vector<Int> primitive_direction(const QVector& v) {
  if (is_zero(v)) throw std::domain_error("primitive direction of zero vector");
  Int l = 1;
  for (const auto& x : v) l = lcm(l, x.get_den());
  std::vector<Int> w(v.size());
  Int g = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    w[i] = Int(v[i] * l);
    g = gcd(g, w[i]);
  }
  for (auto& x : w) x /= g;
  return w;
}

inline QVector to_qvector(const std::vector<Int>& v) {
  QVector q(v.size());
  for (size_t i = 0; i < v.size(); ++i) q[i] = Rat(v[i]);
  return q;
}

inline std::vector<double> to_doubles(const QVector& v) {
  std::vector<double> d(v.size());
  for (size_t i = 0; i < v.size(); ++i) d[i] = to_double(v[i]);
  return d;
}

inline QVector rationalize(const std::vector<double>& v) {
  QVector q(v.size());
  for (size_t i = 0; i < v.size(); ++i) q[i] = rat_of_double(v[i]);
  return q;
}

}  // namespace torres
