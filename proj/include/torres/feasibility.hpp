#pragma once

#include <torres/linalg.hpp>

#include <optional>
#include <stdexcept>
#include <vector>

namespace torres {

// a . x >= c, or a . x > c when strict.
struct AffineIneq {
  QVector a;
  Rat c;
  bool strict = false;
};

namespace detail {

inline bool const_row_ok(const AffineIneq& q) {
  return q.strict ? (0 > q.c) : (0 >= q.c);
}

// Eliminates variable v by Fourier-Motzkin, keeping strictness flags.
inline std::vector<AffineIneq> fm_eliminate(const std::vector<AffineIneq>& sys, int v) {
  std::vector<AffineIneq> lower, upper, rest;
  for (const auto& q : sys) {
    int s = rat_sign(q.a[v]);
    if (s > 0)
      lower.push_back(q);
    else if (s < 0)
      upper.push_back(q);
    else
      rest.push_back(q);
  }
  for (const auto& lo : lower)
    for (const auto& up : upper) {
      // a_lo[v] > 0, a_up[v] < 0; combine with positive multipliers.
      Rat ml = -up.a[v], mu = lo.a[v];
      AffineIneq q;
      q.a.resize(lo.a.size());
      for (size_t i = 0; i < lo.a.size(); ++i) q.a[i] = ml * lo.a[i] + mu * up.a[i];
      q.a[v] = 0;
      q.c = ml * lo.c + mu * up.c;
      q.strict = lo.strict || up.strict;
      rest.push_back(std::move(q));
      if (rest.size() > 200000) throw std::runtime_error("feasibility system blow-up");
    }
  return rest;
}

}  // namespace detail

inline bool feasible(std::vector<AffineIneq> sys, int nvars) {
  for (int v = nvars - 1; v >= 0; --v) sys = detail::fm_eliminate(sys, v);
  for (const auto& q : sys)
    if (!detail::const_row_ok(q)) return false;
  return true;
}

// A satisfying point, when one exists, built by back-substitution through the
// elimination stack.
inline std::optional<QVector> feasible_point(const std::vector<AffineIneq>& sys, int nvars) {
  std::vector<std::vector<AffineIneq>> levels(nvars + 1);
  levels[nvars] = sys;
  for (int v = nvars - 1; v >= 0; --v) levels[v] = detail::fm_eliminate(levels[v + 1], v);
  for (const auto& q : levels[0])
    if (!detail::const_row_ok(q)) return std::nullopt;

  QVector x(nvars, Rat(0));
  for (int v = 0; v < nvars; ++v) {
    bool has_lo = false, has_up = false, lo_strict = false, up_strict = false;
    Rat lo, up;
    for (const auto& q : levels[v + 1]) {
      int s = rat_sign(q.a[v]);
      if (s == 0) continue;
      Rat bound = q.c;
      for (int i = 0; i < nvars; ++i)
        if (i != v) bound -= q.a[i] * x[i];
      bound /= q.a[v];
      if (s > 0) {  // x_v >= bound
        if (!has_lo || bound > lo) {
          lo = bound;
          lo_strict = q.strict;
        } else if (bound == lo) {
          lo_strict = lo_strict || q.strict;
        }
        has_lo = true;
      } else {  // x_v <= bound
        if (!has_up || bound < up) {
          up = bound;
          up_strict = q.strict;
        } else if (bound == up) {
          up_strict = up_strict || q.strict;
        }
        has_up = true;
      }
    }
    if (has_lo && has_up) {
      if (lo == up)
        x[v] = lo;  // only consistent choice; FM guarantees non-strictness here
      else
        x[v] = (lo + up) / 2;
    } else if (has_lo) {
      x[v] = lo_strict ? lo + 1 : lo;
    } else if (has_up) {
      x[v] = up_strict ? up - 1 : up;
    }
  }
  return x;
}

// Membership of target in the cone of nonnegative combinations of gens.
inline bool in_cone(const QVector& target, const std::vector<QVector>& gens) {
  if (gens.empty()) return is_zero(target);
  QMatrix g = QMatrix::from_cols(gens);
  auto sol = solve_rational(g, target);
  if (!sol) return false;
  int m = int(gens.size());
  int k = int(sol->nullspace.size());
  if (k == 0) {
    for (const auto& c : sol->x)
      if (c < 0) return false;
    return true;
  }
  std::vector<AffineIneq> sys;
  for (int i = 0; i < m; ++i) {
    AffineIneq q;
    q.a.resize(k);
    for (int j = 0; j < k; ++j) q.a[j] = sol->nullspace[j][i];
    q.c = -sol->x[i];
    sys.push_back(std::move(q));
  }
  return feasible(std::move(sys), k);
}

}  // namespace torres
