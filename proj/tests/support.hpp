// Shared helpers for the test suites: deterministic random configurations,
// fractions, and regular targets.
#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "torres/bside.hpp"
#include "torres/ratfun.hpp"

namespace testsupport {

using namespace torres;

inline std::string fixture_path(const std::string& name) {
  return std::string(TORRES_FIXTURES) + "/" + name;
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(unsigned long seed) : gen(seed) {}
  long pick(long lo, long hi) {
    return lo + long(gen() % (unsigned long)(hi - lo + 1));
  }
  double unit() { return double(gen() >> 11) * 0x1.0p-53; }
};

// A projective configuration together with a chamber marker deep inside some
// chamber: covectors drawn with small integer entries until kappa admits an
// interior chamber point.
struct RandomConfig {
  Configuration a;
  Chamber c;
  QVector xi0;
};

inline std::optional<RandomConfig> try_random_config(Rng& rng, int r, int n, long amp) {
  std::vector<QVector> alphas;
  for (int i = 0; i < n; ++i) {
    QVector v(r, Rat(0));
    bool nonzero = false;
    for (int k = 0; k < r; ++k) {
      v[k] = Rat(rng.pick(-amp, amp));
      if (v[k] != 0) nonzero = true;
    }
    if (!nonzero) v[rng.pick(0, r - 1)] = 1;
    alphas.push_back(v);
  }
  Configuration a = make_configuration(r, n, alphas);
  try {
    validate(a);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  // A marker near a random positive combination of the covectors.
  for (int attempt = 0; attempt < 12; ++attempt) {
    QVector xi0(r, Rat(0));
    for (int i = 0; i < n; ++i) {
      Rat w = make_rat(rng.pick(1, 7), rng.pick(1, 3));
      for (int k = 0; k < r; ++k) xi0[k] += w * a.alphas[i][k];
    }
    try {
      Chamber c = chamber_of(a, xi0);
      return RandomConfig{a, c, xi0};
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

inline RandomConfig random_config(Rng& rng, int rmax = 3, int nmax = 6, long amp = 3) {
  for (;;) {
    int r = int(rng.pick(1, rmax));
    int n = int(rng.pick(r + 1, nmax));
    if (auto c = try_random_config(rng, r, n, amp)) return *c;
  }
}

// Random rational function of homogeneous degree -r: a random monomial
// numerator over a random denominator of compatible total degree.
inline RatFun random_fraction(Rng& rng, const Configuration& a) {
  for (;;) {
    std::vector<DenEntry> den;
    int extra = int(rng.pick(0, 2));
    int num_deg = extra;
    int den_deg = 0;
    std::vector<int> idx;
    for (int i = 0; i < a.n; ++i) idx.push_back(i);
    for (int i = 0; i < a.n; ++i) std::swap(idx[i], idx[rng.pick(i, a.n - 1)]);
    int factors = int(rng.pick(1, std::min(a.n, a.r + extra + 1)));
    for (int t = 0; t < factors; ++t) {
      int mult = int(rng.pick(1, 2));
      den.push_back({a.alphas[idx[t]], mult});
      den_deg += mult;
    }
    num_deg = den_deg - a.r;
    if (num_deg < 0) continue;
    SparsePoly num(a.r);
    Expo e(a.r, 0);
    for (int d = 0; d < num_deg; ++d) e[rng.pick(0, a.r - 1)]++;
    num.add_term(e, Rat(rng.pick(1, 5)));
    return make_ratfun(num, den);
  }
}

// A sum-regular point in the same chamber as the marker.
inline QVector regular_xi(Rng& rng, const Configuration& a, const std::vector<Flag>& flags,
                          const Chamber& c) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    QVector xi = c.xi0;
    for (int k = 0; k < a.r; ++k)
      xi[k] += make_rat(rng.pick(-100, 100), 100000 + rng.pick(0, 999));
    try {
      flags_for_xi(a, flags, xi, FlagMode::plus);
      flags_for_xi(a, flags, xi, FlagMode::zero);
      if (chamber_of(a, xi).bind != c.bind) continue;
      return xi;
    } catch (const std::exception&) {
    }
  }
  return auto_regular_xi(a, flags, c);
}

}  // namespace testsupport
