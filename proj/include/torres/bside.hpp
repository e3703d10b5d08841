// Numeric side: tropical solution data, monomial start systems, the flag
// deformation homotopy for the critical-point equations p_j(u) = q_j, toric
// Hessians, and the localized residue sum over the recovered points.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "torres/aside.hpp"
#include "torres/configuration.hpp"

namespace torres {

using Cplx = std::complex<double>;

namespace detail {

// In-place Gaussian elimination with partial pivoting; returns false when the
// pivot collapses. Solves a[r][r] x = b.
template <class T>
inline bool dense_solve(std::vector<std::vector<T>> a, std::vector<T>& b) {
  int n = int(a.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int row = col + 1; row < n; ++row)
      if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
    if (std::abs(a[piv][col]) == 0.0) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int row = col + 1; row < n; ++row) {
      T f = a[row][col] / a[col][col];
      for (int k = col; k < n; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  for (int row = n - 1; row >= 0; --row) {
    T s = b[row];
    for (int k = row + 1; k < n; ++k) s -= a[row][k] * b[k];
    b[row] = s / a[row][row];
  }
  return true;
}

template <class T>
inline T dense_det(std::vector<std::vector<T>> a) {
  int n = int(a.size());
  T det = T(1);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int row = col + 1; row < n; ++row)
      if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
    if (std::abs(a[piv][col]) == 0.0) return T(0);
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (int row = col + 1; row < n; ++row) {
      T f = a[row][col] / a[col][col];
      for (int k = col; k < n; ++k) a[row][k] -= f * a[col][k];
    }
  }
  return det;
}

inline std::string point_str(const std::vector<Cplx>& u) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < u.size(); ++i) {
    if (i) os << ", ";
    os << u[i].real() << (u[i].imag() < 0 ? "" : "+") << u[i].imag() << "i";
  }
  os << ")";
  return os.str();
}

}  // namespace detail

inline std::vector<double> l_map(const Configuration& a, const std::vector<Cplx>& u) {
  std::vector<double> t(a.n);
  for (int i = 0; i < a.n; ++i) {
    Cplx v{0.0, 0.0};
    for (int k = 0; k < a.r; ++k) v += to_double(a.alphas[i][k]) * u[k];
    if (v == Cplx(0.0, 0.0)) throw std::domain_error("point lies on a hyperplane of the arrangement");
    t[i] = -std::log(std::abs(v));
  }
  return t;
}

inline std::vector<double> xi_of_z(const Configuration& a, const std::vector<Cplx>& z) {
  if (int(z.size()) != a.n) throw std::invalid_argument("need one coordinate per covector");
  std::vector<double> xi(a.r, 0.0);
  for (int i = 0; i < a.n; ++i) {
    if (z[i] == Cplx(0.0, 0.0)) throw std::invalid_argument("zero coordinate");
    double t = -std::log(std::abs(z[i]));
    for (int k = 0; k < a.r; ++k) xi[k] += t * to_double(a.alphas[i][k]);
  }
  return xi;
}

// Zero-mode flag selection that tolerates xi on a stage-sum wall: the point
// set does not depend on the flag list, so ties are broken by an
// infinitesimal generic perturbation (two shrinking scales must agree).
inline std::vector<int> zero_flags_robust(const Configuration& a, const std::vector<Flag>& flags,
                                          const QVector& xi, bool* perturbed = nullptr) {
  if (perturbed) *perturbed = false;
  try {
    return flags_for_xi(a, flags, xi, FlagMode::zero);
  } catch (const std::domain_error&) {
  }
  Rat scale = 0;
  for (const Rat& x : xi) scale = std::max(scale, rat_abs(x));
  if (scale == 0) scale = 1;
  std::vector<std::vector<int>> picks;
  for (unsigned long shift : {24UL, 40UL}) {
    Rat delta = scale / Rat(Int(1) << shift);
    QVector moved = xi;
    for (int k = 0; k < a.r; ++k) moved[k] += delta * Rat(k + 1);
    picks.push_back(flags_for_xi(a, flags, moved, FlagMode::zero));
  }
  if (picks[0] != picks[1])
    throw std::domain_error("xi is not sum-regular and perturbation did not stabilize");
  if (perturbed) *perturbed = true;
  return picks[0];
}

struct TropicalSolution {
  Flag flag;
  std::vector<Rat> B;        // stage values, decreasing
  std::vector<Rat> sol;      // t_i = B_{stage(i)}
  std::vector<double> ts;    // corrected by the leading-coefficient logs
  std::vector<double> m_abs; // |m_i|
};

// Stagewise solutions of sum t_i alpha_i = xi over the zero-mode flags, plus
// the log-corrected refinement that accounts for the leading coefficients.
inline std::vector<TropicalSolution> tropical_solutions(const Configuration& a,
                                                        const std::vector<Flag>& flags,
                                                        const QVector& xi) {
  std::vector<TropicalSolution> out;
  for (int idx : zero_flags_robust(a, flags, xi)) {
    const Flag& f = flags[idx];
    TropicalSolution t;
    t.flag = f;

    std::vector<QVector> diffs;
    for (int j = 0; j < a.r; ++j) {
      QVector d = f.kappas[j];
      if (j > 0) d = d - f.kappas[j - 1];
      diffs.push_back(std::move(d));
    }
    auto sol = solve_rational(QMatrix::from_cols(diffs), xi);
    if (!sol || !sol->nullspace.empty())
      throw std::logic_error("stage system is not uniquely solvable");
    t.B = sol->x;
    bool decreasing = true;
    for (int j = 0; j + 1 < a.r; ++j)
      if (t.B[j] < t.B[j + 1]) decreasing = false;
    if (!decreasing) continue;
    for (int i = 0; i < a.n; ++i) t.sol.push_back(t.B[f.stage_of[i] - 1]);

    for (const Rat& mi : f.m) t.m_abs.push_back(std::abs(to_double(mi)));
    std::vector<std::vector<double>> m(a.r, std::vector<double>(a.r));
    std::vector<double> rhs(a.r);
    for (int k = 0; k < a.r; ++k) {
      for (int j = 0; j < a.r; ++j) m[k][j] = to_double(diffs[j][k]);
      rhs[k] = to_double(xi[k]);
      for (int i = 0; i < a.n; ++i)
        rhs[k] += std::log(t.m_abs[i]) * to_double(a.alphas[i][k]);
    }
    if (!detail::dense_solve(m, rhs)) throw std::logic_error("stage system degenerated");
    for (int i = 0; i < a.n; ++i)
      t.ts.push_back(rhs[f.stage_of[i] - 1] - std::log(t.m_abs[i]));
    out.push_back(std::move(t));
  }
  return out;
}

namespace detail {

inline IMatrix exponent_matrix(const Configuration& a, const Flag& f,
                               const std::vector<QVector>& lambda_basis) {
  IMatrix e(a.r, a.r);
  for (int l = 0; l < a.r; ++l) {
    QVector d = f.kappas[l];
    if (l > 0) d = d - f.kappas[l - 1];
    for (int j = 0; j < a.r; ++j) e.at(l, j) = Int(pairing_long(d, lambda_basis[j]));
  }
  return e;
}

}  // namespace detail

// Exact branches of the monomial limit system prod_l u_l^{E_lj} = q_j / M_j in
// flag-adapted coordinates; one point per residue class of Z^r mod E^T Z^r.
inline std::vector<std::vector<Cplx>> monomial_start_solutions(
    const Flag& f, const Configuration& a, const std::vector<QVector>& lambda_basis,
    const std::vector<Cplx>& q) {
  int r = a.r;
  IMatrix e = detail::exponent_matrix(a, f, lambda_basis);
  IMatrix et(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) et.at(i, j) = e.at(j, i);
  SmithResult sm = smith(et);
  Int total = 1;
  for (int i = 0; i < r; ++i) total *= abs(sm.d.at(i, i));
  if (total == 0) throw std::logic_error("exponent matrix is singular");

  // Branch shifts k = U^{-1} c enumerate Z^r / E^T Z^r.
  QMatrix uq(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) uq.at(i, j) = Rat(sm.u.at(i, j));
  QMatrix uinv = inverse(uq);

  std::vector<Cplx> logb(r);
  for (int j = 0; j < r; ++j) {
    Rat mj = 1;
    for (int i = 0; i < a.n; ++i)
      mj *= rat_pow(f.m[i], detail::pairing_long(a.alphas[i], lambda_basis[j]));
    Cplx b = q[j] / to_double(mj);
    logb[j] = Cplx(std::log(std::abs(b)), std::arg(b));
  }

  std::vector<std::vector<double>> etd(r, std::vector<double>(r));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) etd[i][j] = to_double(Rat(et.at(i, j)));

  std::vector<std::vector<Cplx>> starts;
  std::vector<long> c(r, 0);
  const double two_pi = 8.0 * std::atan(1.0);
  auto sweep = [&](auto&& self, int pos) -> void {
    if (pos == r) {
      std::vector<Cplx> rhs(r);
      for (int i = 0; i < r; ++i) {
        double ki = 0.0;
        for (int j = 0; j < r; ++j) ki += to_double(uinv.at(i, j)) * double(c[j]);
        rhs[i] = logb[i] + Cplx(0.0, two_pi * ki);
      }
      std::vector<std::vector<Cplx>> m(r, std::vector<Cplx>(r));
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) m[i][j] = Cplx(etd[i][j], 0.0);
      if (!detail::dense_solve(m, rhs)) throw std::logic_error("exponent matrix is singular");
      std::vector<Cplx> u(r);
      for (int l = 0; l < r; ++l) u[l] = std::exp(rhs[l]);
      starts.push_back(std::move(u));
      return;
    }
    long dl = std::labs(long(sm.d.at(pos, pos).get_si()));
    for (long v = 0; v < dl; ++v) {
      c[pos] = v;
      self(self, pos + 1);
    }
  };
  sweep(sweep, 0);
  return starts;
}

struct TrackOptions {
  double newton_tol = 1e-12;
  int max_newton = 8;
  double ds0 = 1.0 / 16;
  double ds_min = 1.0 / (1 << 20);
  double residual_tol = 1e-10;
  double dedup_tol = 1e-6;
  double margin = 1e-8;
  unsigned long seed = 0;
  int multistart_attempts = 200;
};

struct CriticalPoint {
  std::vector<Cplx> u;  // standard coordinates
  double residual = 0.0;
  std::string flag_key;
  int steps = 0;
  double min_jacobian = std::numeric_limits<double>::infinity();
  bool accepted = false;
  std::string note;
};

namespace detail {

// The deformed system in flag coordinates: every covector is evaluated as
// sum_l coords[i][l] s^(stage_i - l - 1 + 1) ... i.e. the coefficient of the
// stage-l coordinate is damped by s^(stage_i - 1 - l).
struct FlagSystem {
  const Configuration& a;
  const Flag& f;
  std::vector<std::vector<long>> expo;  // <alpha_i, lambda_j>
  std::vector<Cplx> q;

  FlagSystem(const Configuration& a_, const Flag& f_,
             const std::vector<QVector>& lambda_basis, std::vector<Cplx> q_)
      : a(a_), f(f_), q(std::move(q_)) {
    for (int i = 0; i < a.n; ++i) {
      std::vector<long> row;
      for (int j = 0; j < a.r; ++j) row.push_back(pairing_long(a.alphas[i], lambda_basis[j]));
      expo.push_back(std::move(row));
    }
  }

  // Returns false when a covector value collapses to zero.
  bool eval(double s, const std::vector<Cplx>& y, std::vector<Cplx>& g,
            std::vector<std::vector<Cplx>>& jac, std::vector<Cplx>* ds) const {
    int r = a.r, n = a.n;
    std::vector<Cplx> av(n), avs(n);
    std::vector<std::vector<Cplx>> agrad(n, std::vector<Cplx>(r, Cplx(0, 0)));
    for (int i = 0; i < n; ++i) {
      int stage = f.stage_of[i] - 1;
      Cplx v{0, 0}, vs{0, 0};
      for (int l = 0; l <= stage; ++l) {
        double c = to_double(f.alpha_coords[i][l]);
        if (c == 0.0) continue;
        double sp = std::pow(s, double(stage - l));
        v += c * sp * y[l];
        agrad[i][l] = c * sp;
        if (stage - l > 0) vs += c * double(stage - l) * std::pow(s, double(stage - l - 1)) * y[l];
      }
      if (v == Cplx(0.0, 0.0)) return false;
      av[i] = v;
      avs[i] = vs;
    }
    std::vector<Cplx> p(r, Cplx(1.0, 0.0));
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < n; ++i) p[j] *= complex_int_pow(av[i], expo[i][j]);
    g.assign(r, Cplx(0, 0));
    jac.assign(r, std::vector<Cplx>(r, Cplx(0, 0)));
    if (ds) ds->assign(r, Cplx(0, 0));
    for (int j = 0; j < r; ++j) {
      g[j] = p[j] - q[j];
      for (int l = 0; l < r; ++l) {
        Cplx acc{0, 0};
        for (int i = 0; i < n; ++i)
          if (expo[i][j] != 0 && agrad[i][l] != Cplx(0.0, 0.0))
            acc += double(expo[i][j]) * agrad[i][l] / av[i];
        jac[j][l] = p[j] * acc;
      }
      if (ds) {
        Cplx acc{0, 0};
        for (int i = 0; i < n; ++i)
          if (expo[i][j] != 0 && avs[i] != Cplx(0.0, 0.0)) acc += double(expo[i][j]) * avs[i] / av[i];
        (*ds)[j] = p[j] * acc;
      }
    }
    return true;
  }

  bool newton(double s, std::vector<Cplx>& y, int iters, double tol, double* min_jac) const {
    std::vector<Cplx> g;
    std::vector<std::vector<Cplx>> jac;
    for (int it = 0; it < iters; ++it) {
      if (!eval(s, y, g, jac, nullptr)) return false;
      bool done = true;
      for (int j = 0; j < a.r; ++j)
        if (std::abs(g[j]) > tol * std::max(std::abs(q[j]), 1e-280)) done = false;
      if (done) return true;
      if (min_jac) *min_jac = std::min(*min_jac, std::abs(dense_det(jac)));
      std::vector<Cplx> delta = g;
      if (!dense_solve(jac, delta)) return false;
      bool finite = true;
      for (int l = 0; l < a.r; ++l) {
        y[l] -= delta[l];
        if (!std::isfinite(y[l].real()) || !std::isfinite(y[l].imag())) finite = false;
      }
      if (!finite) return false;
    }
    if (!eval(s, y, g, jac, nullptr)) return false;
    for (int j = 0; j < a.r; ++j)
      if (std::abs(g[j]) > tol * std::max(std::abs(q[j]), 1e-280)) return false;
    return true;
  }
};

}  // namespace detail

// Predictor-corrector tracking of the flag deformation from the monomial
// system at s = 0 to the true system at s = 1, with adaptive step halving and
// an endpoint polish against the undeformed equations.
inline std::vector<CriticalPoint> track_homotopy(const Flag& f, const Configuration& a,
                                                 const std::vector<QVector>& lambda_basis,
                                                 const std::vector<Cplx>& q,
                                                 const std::vector<std::vector<Cplx>>& starts,
                                                 const TrackOptions& opts = {}) {
  detail::FlagSystem sys(a, f, lambda_basis, q);
  QMatrix ginv = inverse(QMatrix::from_rows(f.gamma));
  std::vector<CriticalPoint> out;

  for (const auto& start : starts) {
    CriticalPoint pt;
    pt.flag_key = f.key;
    std::vector<Cplx> y = start;
    double s = 0.0, ds = opts.ds0;
    bool ok = sys.newton(0.0, y, opts.max_newton, opts.newton_tol, &pt.min_jacobian);
    while (ok && s < 1.0) {
      double step = std::min(ds, 1.0 - s);
      std::vector<Cplx> g, dgds;
      std::vector<std::vector<Cplx>> jac;
      std::vector<Cplx> ynext = y;
      if (sys.eval(s, y, g, jac, &dgds)) {
        std::vector<Cplx> vel = dgds;
        if (detail::dense_solve(jac, vel))
          for (int l = 0; l < a.r; ++l) ynext[l] -= step * vel[l];
      }
      if (sys.newton(s + step, ynext, opts.max_newton, opts.newton_tol, &pt.min_jacobian)) {
        y = ynext;
        s += step;
        ++pt.steps;
        ds = std::min(ds * 2.0, opts.ds0);
      } else {
        ds /= 2.0;
        if (ds < opts.ds_min) {
          ok = false;
          pt.note = "step size underflow";
        }
      }
    }
    if (ok) ok = sys.newton(1.0, y, 2 * opts.max_newton, opts.newton_tol, &pt.min_jacobian);
    if (!ok) {
      if (pt.note.empty()) pt.note = "path diverged";
      pt.accepted = false;
      out.push_back(std::move(pt));
      continue;
    }

    pt.u.assign(a.r, Cplx(0, 0));
    for (int k = 0; k < a.r; ++k)
      for (int l = 0; l < a.r; ++l) pt.u[k] += to_double(ginv.at(k, l)) * y[l];
    double res = 0.0;
    for (int j = 0; j < a.r; ++j) {
      Cplx p{1.0, 0.0};
      for (int i = 0; i < a.n; ++i) {
        Cplx av{0.0, 0.0};
        for (int k = 0; k < a.r; ++k) av += to_double(a.alphas[i][k]) * pt.u[k];
        p *= detail::complex_int_pow(av, sys.expo[i][j]);
      }
      res = std::max(res, std::abs(p - q[j]));
    }
    pt.residual = res;
    pt.accepted = res < opts.residual_tol;
    if (!pt.accepted) pt.note = "endpoint residual too large";
    out.push_back(std::move(pt));
  }
  return out;
}

struct BSideResult {
  Cplx value{0.0, 0.0};
  std::vector<CriticalPoint> points;  // accepted points, canonical order
  std::vector<CriticalPoint> dropped;
  long expected_count = 0;
  long found_count = 0;
  bool verified = false;
  std::vector<std::string> diagnostics;
};

namespace detail {

inline bool same_point(const std::vector<Cplx>& u, const std::vector<Cplx>& v, double tol) {
  for (size_t l = 0; l < u.size(); ++l) {
    double scale = std::max({std::abs(u[l]), std::abs(v[l]), 1e-280});
    if (std::abs(u[l] - v[l]) > tol * scale) return false;
  }
  return true;
}

inline bool point_order(const CriticalPoint& x, const CriticalPoint& y) {
  for (size_t l = 0; l < x.u.size(); ++l) {
    if (x.u[l].real() != y.u[l].real()) return x.u[l].real() < y.u[l].real();
    if (x.u[l].imag() != y.u[l].imag()) return x.u[l].imag() < y.u[l].imag();
  }
  return false;
}

}  // namespace detail

// Recovers the full critical-point set for p_j(u) = z^{lambda_j}: homotopy
// tracking per zero-mode flag, relative-distance deduplication, and a seeded
// multistart fallback on the tropical torus when paths are lost.
inline BSideResult critical_points(const Configuration& a, const std::vector<Flag>& flags,
                                   const std::vector<QVector>& lambda_basis,
                                   const std::vector<Cplx>& z, const TrackOptions& opts = {}) {
  BSideResult out;
  std::vector<double> xid = xi_of_z(a, z);
  QVector xi = rationalize(xid);
  bool perturbed = false;
  std::vector<int> zero_flags = zero_flags_robust(a, flags, xi, &perturbed);
  if (perturbed)
    out.diagnostics.push_back("xi lies on a stage-sum wall; flags chosen by perturbation");

  std::vector<Cplx> q(a.r);
  for (int j = 0; j < a.r; ++j) {
    q[j] = Cplx(1.0, 0.0);
    for (int i = 0; i < a.n; ++i)
      q[j] *= detail::complex_int_pow(z[i], detail::pairing_long(a.alphas[i], lambda_basis[j]));
  }

  for (int idx : zero_flags) {
    const Flag& f = flags[idx];
    out.expected_count += std::labs(long(f.d.get_si()));
    auto starts = monomial_start_solutions(f, a, lambda_basis, q);
    auto tracked = track_homotopy(f, a, lambda_basis, q, starts, opts);
    long lost = 0;
    for (auto& pt : tracked) {
      if (!pt.accepted) {
        ++lost;
        out.dropped.push_back(std::move(pt));
        continue;
      }
      bool dup = false;
      for (const auto& kept : out.points)
        if (detail::same_point(kept.u, pt.u, opts.dedup_tol)) dup = true;
      if (dup) {
        pt.note = "duplicate of an earlier point";
        out.dropped.push_back(std::move(pt));
      } else {
        out.points.push_back(std::move(pt));
      }
    }
    if (lost > 0)
      out.diagnostics.push_back("flag " + f.key + ": " + std::to_string(lost) +
                                " path(s) lost before the endpoint");
  }

  if (long(out.points.size()) < out.expected_count) {
    // Multistart on the tropical torus radii with seeded phases.
    auto trops = tropical_solutions(a, flags, xi);
    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    auto unit = [&]() { return double(rng() >> 11) * 0x1.0p-53; };
    const double two_pi = 8.0 * std::atan(1.0);
    for (const auto& trop : trops) {
      if (long(out.points.size()) >= out.expected_count) break;
      const Flag* fp = nullptr;
      for (int idx : zero_flags)
        if (flags[idx].key == trop.flag.key) fp = &flags[idx];
      if (!fp) continue;
      detail::FlagSystem sys(a, *fp, lambda_basis, q);
      QMatrix ginv = inverse(QMatrix::from_rows(fp->gamma));
      std::vector<std::vector<double>> md(a.r, std::vector<double>(a.r));
      std::vector<double> xstage(a.r);
      for (int l = 0; l < a.r; ++l) {
        int i = 0;
        while (fp->stage_of[i] != l + 1) ++i;
        xstage[l] = trop.ts[i] + std::log(trop.m_abs[i]);
      }
      for (int attempt = 0; attempt < opts.multistart_attempts; ++attempt) {
        if (long(out.points.size()) >= out.expected_count) break;
        std::vector<Cplx> y(a.r);
        for (int l = 0; l < a.r; ++l) {
          double theta = two_pi * unit();
          y[l] = std::exp(-xstage[l]) * Cplx(std::cos(theta), std::sin(theta));
        }
        CriticalPoint pt;
        pt.flag_key = fp->key;
        pt.note = "multistart";
        if (!sys.newton(1.0, y, 4 * opts.max_newton, opts.newton_tol, &pt.min_jacobian)) continue;
        pt.u.assign(a.r, Cplx(0, 0));
        for (int k = 0; k < a.r; ++k)
          for (int l = 0; l < a.r; ++l) pt.u[k] += to_double(ginv.at(k, l)) * y[l];
        double res = 0.0;
        for (int j = 0; j < a.r; ++j) {
          Cplx p{1.0, 0.0};
          for (int i = 0; i < a.n; ++i) {
            Cplx av{0.0, 0.0};
            for (int k = 0; k < a.r; ++k) av += to_double(a.alphas[i][k]) * pt.u[k];
            p *= detail::complex_int_pow(av, sys.expo[i][j]);
          }
          res = std::max(res, std::abs(p - q[j]));
        }
        pt.residual = res;
        pt.accepted = res < opts.residual_tol;
        if (!pt.accepted) continue;
        bool dup = false;
        for (const auto& kept : out.points)
          if (detail::same_point(kept.u, pt.u, opts.dedup_tol)) dup = true;
        if (!dup) out.points.push_back(std::move(pt));
      }
    }
    if (long(out.points.size()) > 0 && !out.diagnostics.empty())
      out.diagnostics.push_back("multistart fallback engaged");
  }

  std::sort(out.points.begin(), out.points.end(), detail::point_order);
  out.found_count = long(out.points.size());
  out.verified = out.found_count == out.expected_count;
  if (!out.verified)
    out.diagnostics.push_back("found " + std::to_string(out.found_count) + " of " +
                              std::to_string(out.expected_count) + " expected points");
  return out;
}

// Sum over dual basis index sets of squared volumes times the complementary
// coordinate monomials.
inline SparsePoly hessian_DB(const GalePair& g) {
  int n = g.a.n, d = n - g.a.r;
  SparsePoly h(n);
  if (d == 0) return SparsePoly::constant(n, 1);
  std::vector<int> pick;
  auto rec = [&](auto&& self, int from) -> void {
    if (int(pick.size()) == d) {
      std::vector<QVector> rows;
      for (int i : pick) rows.push_back(g.betas[i]);
      Rat vol = det(QMatrix::from_rows(rows));
      if (vol == 0) return;
      Expo e(n, 0);
      for (int i : pick) e[i] = 1;
      h.add_term(e, vol * vol);
      return;
    }
    for (int i = from; i <= n - (d - int(pick.size())); ++i) {
      pick.push_back(i);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  return h;
}

// Numerator of the rational function sum_sigma vol(sigma)^2 / prod_{i in sigma} x_i
// over the common denominator prod_i x_i.
inline SparsePoly d_a_numerator(const Configuration& a) {
  SparsePoly h(a.n);
  for (const auto& sigma : basis_index_sets(a)) {
    Rat vol = signed_volume(a, sigma);
    Expo e(a.n, 1);
    for (int i : sigma) e[i] = 0;
    h.add_term(e, vol * vol);
  }
  return h;
}

template <class T>
inline T d_a(const Configuration& a, const std::vector<T>& x) {
  T acc{};
  for (const auto& sigma : basis_index_sets(a)) {
    Rat vol = signed_volume(a, sigma);
    T term = detail::field_cast<T>::from(vol * vol);
    for (int i : sigma) term /= x[i];
    acc += term;
  }
  return acc;
}

struct TorusData {
  std::vector<Cplx> x;
  Cplx f{0.0, 0.0};
  std::vector<Cplx> grad;
  Cplx hess{0.0, 0.0};
};

// Evaluates the potential 1 - sum x_i, its gradient in the chosen basis of the
// dual torus, and the Hessian determinant, at x_i = z_i * w^{<h_k, beta_i>}.
inline TorusData evaluate_torus_data(const GalePair& g, const std::vector<QVector>& h_basis,
                                     const std::vector<Cplx>& w, const std::vector<Cplx>& z) {
  int n = g.a.n, d = n - g.a.r;
  if (int(h_basis.size()) != d || int(w.size()) != d || int(z.size()) != n)
    throw std::invalid_argument("torus data dimension mismatch");
  TorusData t;
  std::vector<std::vector<long>> hb(d, std::vector<long>(n));
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < n; ++i) hb[k][i] = detail::pairing_long(g.betas[i], h_basis[k]);
  t.x.resize(n);
  for (int i = 0; i < n; ++i) {
    Cplx xi = z[i];
    for (int k = 0; k < d; ++k) xi *= detail::complex_int_pow(w[k], hb[k][i]);
    t.x[i] = xi;
  }
  t.f = Cplx(1.0, 0.0);
  for (int i = 0; i < n; ++i) t.f -= t.x[i];
  t.grad.assign(d, Cplx(0.0, 0.0));
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < n; ++i) t.grad[k] -= double(hb[k][i]) * t.x[i];
  std::vector<std::vector<Cplx>> m(d, std::vector<Cplx>(d, Cplx(0.0, 0.0)));
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < n; ++i) m[j][k] += double(hb[j][i]) * double(hb[k][i]) * t.x[i];
  t.hess = d == 0 ? Cplx(1.0, 0.0) : detail::dense_det(m);
  return t;
}

// The localized residue sum P(alpha(u)) / ((1 - kappa(u)) D^B(alpha(u))) over
// the recovered critical points, with relative margin guards on both factors.
inline BSideResult toric_residue_sum(const SparsePoly& p, const Configuration& a,
                                     const std::vector<Flag>& flags,
                                     const std::vector<QVector>& lambda_basis,
                                     const std::vector<Cplx>& z, const TrackOptions& opts = {}) {
  int deg = 0;
  if (!p.homogeneous(deg) || deg != a.n - a.r)
    throw std::invalid_argument("polynomial must be homogeneous of degree n - r");
  BSideResult out = critical_points(a, flags, lambda_basis, z, opts);

  GalePair g = gale_dual(a);
  int d = a.n - a.r;
  std::vector<std::pair<Rat, std::vector<int>>> dual_bases;
  {
    std::vector<int> pick;
    auto rec = [&](auto&& self, int from) -> void {
      if (int(pick.size()) == d) {
        std::vector<QVector> rows;
        for (int i : pick) rows.push_back(g.betas[i]);
        Rat vol = det(QMatrix::from_rows(rows));
        if (vol != 0) dual_bases.push_back({vol * vol, pick});
        return;
      }
      for (int i = from; i <= a.n - (d - int(pick.size())); ++i) {
        pick.push_back(i);
        self(self, i + 1);
        pick.pop_back();
      }
    };
    if (d > 0) rec(rec, 0);
  }

  Cplx total{0.0, 0.0};
  for (size_t pi = 0; pi < out.points.size(); ++pi) {
    const auto& u = out.points[pi].u;
    std::vector<Cplx> x(a.n);
    Cplx kap{0.0, 0.0};
    for (int i = 0; i < a.n; ++i) {
      Cplx av{0.0, 0.0};
      for (int k = 0; k < a.r; ++k) av += to_double(a.alphas[i][k]) * u[k];
      x[i] = av;
      kap += av;
    }
    Cplx one_minus = Cplx(1.0, 0.0) - kap;
    if (std::abs(one_minus) < opts.margin * std::max(1.0, std::abs(kap)))
      throw std::runtime_error("1 - kappa(u) nearly vanishes at critical point " +
                               detail::point_str(u));
    Cplx db{0.0, 0.0};
    double largest = 0.0;
    if (d == 0) {
      db = Cplx(1.0, 0.0);
      largest = 1.0;
    }
    for (const auto& [vol2, pick] : dual_bases) {
      Cplx term = detail::field_cast<Cplx>::from(vol2);
      for (int i : pick) term *= x[i];
      db += term;
      largest = std::max(largest, std::abs(term));
    }
    if (std::abs(db) < opts.margin * largest)
      throw std::runtime_error("dual Hessian nearly vanishes at critical point " +
                               detail::point_str(u));
    total += p.eval<Cplx>(x) / (one_minus * db);
  }
  out.value = total;
  return out;
}

}  // namespace torres
