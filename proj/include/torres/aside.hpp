// Intersection numbers indexed by lattice points of the dual cone, their
// generating series, and the convergence-domain check for evaluation points.
#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "torres/configuration.hpp"
#include "torres/ratfun.hpp"

namespace torres {

namespace detail {

inline long pairing_long(const QVector& alpha, const QVector& lambda) {
  Rat s = 0;
  for (size_t k = 0; k < alpha.size(); ++k) s += alpha[k] * lambda[k];
  if (s.get_den() != 1) throw std::invalid_argument("non-integral pairing");
  if (!s.get_num().fits_slong_p()) throw std::overflow_error("pairing too large");
  return s.get_num().get_si();
}

inline std::complex<double> complex_int_pow(std::complex<double> b, long e) {
  bool neg = e < 0;
  unsigned long a = neg ? -(unsigned long)e : (unsigned long)e;
  std::complex<double> p{1.0, 0.0};
  while (a) {
    if (a & 1) p *= b;
    b *= b;
    a >>= 1;
  }
  return neg ? 1.0 / p : p;
}

}  // namespace detail

struct PLambdaParts {
  std::vector<int> plus;   // exponent of alpha_i in the numerator polynomial
  std::vector<int> minus;  // exponent of alpha_i in the denominator polynomial
};

inline PLambdaParts p_lambda_parts(const Configuration& a, const QVector& lambda) {
  PLambdaParts p;
  p.plus.resize(a.n, 0);
  p.minus.resize(a.n, 0);
  for (int i = 0; i < a.n; ++i) {
    long e = detail::pairing_long(a.alphas[i], lambda);
    (e >= 0 ? p.plus : p.minus)[i] = int(e >= 0 ? e : -e);
  }
  return p;
}

struct MPIndex {
  QVector lambda;
  std::vector<long> pairings;  // <alpha_i, lambda>
  long degree = 0;             // <kappa, lambda>
};

inline MPIndex make_mp_index(const Configuration& a, const QVector& lambda) {
  MPIndex ix;
  ix.lambda = lambda;
  for (int i = 0; i < a.n; ++i) {
    ix.pairings.push_back(detail::pairing_long(a.alphas[i], lambda));
    ix.degree += ix.pairings.back();
  }
  return ix;
}

struct MPTerm {
  MPIndex index;
  Rat value;
};

// The intersection number for one lattice index: a JK residue of
// P(alpha) * p_minus * kappa^<kappa,lambda> / (p_plus * prod alpha_i),
// which is zero outright when the degree pairing is negative.
inline Rat mp_number(const SparsePoly& p, const QVector& lambda, const Configuration& a,
                     const Chamber& c, JkMethod method = JkMethod::basic) {
  int deg = 0;
  if (!p.homogeneous(deg) || deg != a.n - a.r)
    throw std::invalid_argument("polynomial must be homogeneous of degree n - r");
  MPIndex ix = make_mp_index(a, lambda);
  if (ix.degree < 0) return 0;

  SparsePoly num = restrict_polynomial(p, a);
  std::vector<DenEntry> den;
  for (int i = 0; i < a.n; ++i) {
    long e = ix.pairings[i];
    if (e < 0)
      num = num * poly_of_form(a.alphas[i]).pow(int(-e));
    den.push_back({a.alphas[i], int(e > 0 ? e + 1 : 1)});
  }
  num = num * poly_of_form(a.kappa).pow(int(ix.degree));
  return jk(a, c, make_ratfun(std::move(num), den), method);
}

struct SeriesResult {
  std::vector<MPTerm> terms;                    // graded-lex order in the basis coefficients
  std::vector<std::complex<double>> z;
  std::vector<std::complex<double>> monomials;  // z^lambda per term
  std::complex<double> partial_sum{0.0, 0.0};
  long bound = 0;
  double tail_estimate = 0.0;
  std::map<long, double> shell_magnitudes;      // sum of |term| per <kappa,lambda> shell
};

inline std::complex<double> z_power(const Configuration& a,
                                    const std::vector<std::complex<double>>& z,
                                    const MPIndex& ix) {
  std::complex<double> m{1.0, 0.0};
  for (int i = 0; i < a.n; ++i) m *= detail::complex_int_pow(z[i], ix.pairings[i]);
  return m;
}

// Generating series over the simplicial cone of a positive basis, truncated at
// <kappa,lambda> <= bound, summed in a fixed deterministic order. The tail is a
// geometric estimate from the magnitudes of the last two nonzero shells.
inline SeriesResult mp_series(const SparsePoly& p, const Configuration& a, const Chamber& c,
                              const std::vector<QVector>& lambda_basis,
                              const std::vector<std::complex<double>>& z, long bound,
                              JkMethod method = JkMethod::basic) {
  if (int(z.size()) != a.n) throw std::invalid_argument("need one coordinate per covector");
  for (const auto& zi : z)
    if (zi == std::complex<double>(0.0, 0.0))
      throw std::invalid_argument("series point has a zero coordinate");
  if (int(lambda_basis.size()) != a.r) throw std::invalid_argument("basis size must equal rank");

  std::vector<long> weights;
  for (const auto& lam : lambda_basis) {
    long w = detail::pairing_long(a.kappa, lam);
    if (w <= 0)
      throw std::invalid_argument(
          "basis vector pairs non-positively with kappa; the degree bound cannot grade the cone");
    weights.push_back(w);
  }

  std::vector<std::vector<long>> ells;
  std::vector<long> cur(a.r, 0);
  auto enumerate = [&](auto&& self, int j, long used) -> void {
    if (j == a.r) {
      ells.push_back(cur);
      return;
    }
    for (long l = 0; used + l * weights[j] <= bound; ++l) {
      cur[j] = l;
      self(self, j + 1, used + l * weights[j]);
    }
    cur[j] = 0;
  };
  enumerate(enumerate, 0, 0);
  std::sort(ells.begin(), ells.end(), [](const auto& x, const auto& y) {
    long sx = 0, sy = 0;
    for (long v : x) sx += v;
    for (long v : y) sy += v;
    return sx != sy ? sx < sy : x < y;
  });

  SeriesResult out;
  out.z = z;
  out.bound = bound;
  for (const auto& l : ells) {
    QVector lambda(a.r, Rat(0));
    for (int j = 0; j < a.r; ++j)
      for (int k = 0; k < a.r; ++k) lambda[k] += Rat(l[j]) * lambda_basis[j][k];
    MPTerm term;
    term.index = make_mp_index(a, lambda);
    term.value = mp_number(p, lambda, a, c, method);
    std::complex<double> mono = z_power(a, z, term.index);
    std::complex<double> val = to_double(term.value) * mono;
    out.partial_sum += val;
    out.shell_magnitudes[term.index.degree] += std::abs(val);
    out.monomials.push_back(mono);
    out.terms.push_back(std::move(term));
  }

  std::vector<std::pair<long, double>> nonzero;
  for (const auto& [shell, mag] : out.shell_magnitudes)
    if (mag > 0.0) nonzero.push_back({shell, mag});
  if (nonzero.size() >= 2) {
    double last = nonzero.back().second;
    // Two per-step ratio estimates: the ratio of the last two nonzero shells
    // (tight for a single geometric direction, degenerate when shells of
    // different directions interleave) and the largest per-shell root over
    // the last few shells (robust for mixed decay). Take the better one.
    double prev = nonzero[nonzero.size() - 2].second;
    double consecutive = last / prev;
    double tail1 = consecutive < 1.0 ? last * consecutive / (1.0 - consecutive) : last / 0.0;
    double root = 0.0;
    for (size_t k = nonzero.size() >= 3 ? nonzero.size() - 3 : 0; k < nonzero.size(); ++k)
      if (nonzero[k].first > 0)
        root = std::max(root, std::pow(nonzero[k].second, 1.0 / double(nonzero[k].first)));
    double tail2 = root < 1.0 && root > 0.0 ? last * root / (1.0 - root) : last / 0.0;
    out.tail_estimate = std::min(tail1, tail2);
  } else if (nonzero.size() == 1 && nonzero.back().first > 0) {
    out.tail_estimate = nonzero.back().second;
  }
  return out;
}

struct ConvergenceReport {
  std::string verdict;  // inside | marginal | outside
  std::vector<double> xi;
  Rat regularity = 0;   // sum-regularity of the rationalized xi, 0 when outside
};

// Places xi(z) = sum_i (-log|z_i|) alpha_i relative to the chamber: inside when
// it lands in the chamber with sum-regularity at least tau_min, marginal when
// in the chamber but closer to a wall, outside otherwise.
inline ConvergenceReport convergence_check(const Configuration& a, const Chamber& c,
                                           const std::vector<std::complex<double>>& z,
                                           double tau_min) {
  if (int(z.size()) != a.n) throw std::invalid_argument("need one coordinate per covector");
  ConvergenceReport rep;
  rep.xi.assign(a.r, 0.0);
  for (int i = 0; i < a.n; ++i) {
    double t = -std::log(std::abs(z[i]));
    for (int k = 0; k < a.r; ++k) rep.xi[k] += t * to_double(a.alphas[i][k]);
  }
  QVector xiq = rationalize(rep.xi);
  try {
    Chamber cc = chamber_of(a, xiq);
    if (cc.bind != c.bind) {
      rep.verdict = "outside";
      return rep;
    }
  } catch (const std::domain_error&) {
    rep.verdict = "outside";
    return rep;
  }
  rep.regularity = sum_regularity(a, xiq);
  rep.verdict = to_double(rep.regularity) >= tau_min ? "inside" : "marginal";
  return rep;
}

}  // namespace torres
