// Rational functions with linear-form denominators: partial fractions,
// iterated residues along flags, and the Jeffrey-Kirwan residue computed
// by two independent algorithms.
#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "torres/configuration.hpp"
#include "torres/polynomial.hpp"
#include "torres/rational.hpp"

namespace torres {

// Denominator entry: primitive integer form with positive leading coefficient,
// paired with its multiplicity. Scalars peeled off a form are folded into the
// numerator, so the stored pair is canonical.
using DenEntry = std::pair<QVector, int>;

namespace detail {

// Splits a polynomial by the degree of one variable, keeping the variable
// indexing intact (the chosen exponent is zeroed in the parts).
inline std::map<int, SparsePoly> split_by_var(const SparsePoly& p, int var) {
  std::map<int, SparsePoly> out;
  for (const auto& [e, c] : p.terms) {
    Expo rest = e;
    rest[var] = 0;
    auto [it, fresh] = out.try_emplace(e[var], p.nvars);
    it->second.add_term(rest, c);
  }
  for (auto it = out.begin(); it != out.end();)
    it = it->second.terms.empty() ? out.erase(it) : std::next(it);
  return out;
}

// w = scale * prim with prim primitive, first nonzero entry positive.
inline std::pair<QVector, Rat> primitive_positive(const QVector& w) {
  QVector prim = to_qvector(primitive_direction(w));
  int lead = -1;
  for (int k = 0; k < int(prim.size()); ++k)
    if (prim[k] != 0) {
      lead = k;
      break;
    }
  if (lead < 0) throw std::invalid_argument("zero linear form");
  Rat scale = w[lead] / prim[lead];
  if (rat_sign(prim[lead]) < 0) {
    for (auto& x : prim) x = -x;
    scale = -scale;
  }
  return {std::move(prim), scale};
}

}  // namespace detail

struct RatFun {
  int nvars = 0;
  SparsePoly num;
  std::vector<DenEntry> den;
};

inline RatFun make_ratfun(SparsePoly num, const std::vector<DenEntry>& den) {
  RatFun f;
  f.nvars = num.nvars;
  f.num = std::move(num);
  std::map<QVector, int> merged;
  Rat fold = 1;
  for (const auto& [form, mult] : den) {
    if (int(form.size()) != f.nvars)
      throw std::invalid_argument("denominator form has wrong dimension");
    if (mult < 0) throw std::invalid_argument("negative multiplicity");
    if (mult == 0) continue;
    auto [prim, scale] = detail::primitive_positive(form);
    merged[prim] += mult;
    fold *= rat_pow(scale, -mult);
  }
  f.num = fold * f.num;
  f.den.assign(merged.begin(), merged.end());
  return f;
}

inline RatFun basic_fraction(const Configuration& a, const std::vector<int>& sigma) {
  std::vector<DenEntry> den;
  for (int i : sigma) den.push_back({a.alphas.at(i), 1});
  return make_ratfun(SparsePoly::constant(a.r, 1), den);
}

// Degree of the rational function; requires a homogeneous numerator.
inline int ratfun_degree(const RatFun& f) {
  int d = 0;
  if (!f.num.homogeneous(d))
    throw std::invalid_argument("rational function has an inhomogeneous numerator");
  for (const auto& [form, mult] : f.den) d -= mult;
  return d;
}

template <class T>
inline T eval_ratfun(const RatFun& f, const std::vector<T>& pt) {
  T value = f.num.template eval<T>(pt);
  for (const auto& [form, mult] : f.den) {
    T ell{};
    for (int k = 0; k < f.nvars; ++k) ell += detail::field_cast<T>::from(form[k]) * pt[k];
    for (int t = 0; t < mult; ++t) value /= ell;
  }
  return value;
}

// Restriction of an n-variable polynomial through the covectors: x_i -> alpha_i(u).
inline SparsePoly restrict_polynomial(const SparsePoly& p, const Configuration& a) {
  if (p.nvars != a.n) throw std::invalid_argument("polynomial must have one variable per covector");
  int deg = 0;
  if (!p.homogeneous(deg)) throw std::invalid_argument("mixed degree polynomial");
  std::vector<SparsePoly> images;
  for (int i = 0; i < a.n; ++i) images.push_back(poly_of_form(a.alphas[i]));
  return p.substitute(images);
}

struct BasicDecomposition {
  // Coefficient of the basic fraction 1/prod_{i in sigma} alpha_i, sigma ascending.
  std::vector<std::pair<Rat, std::vector<int>>> basics;
  std::vector<RatFun> degenerate;
};

// Decomposition of a degree-(-r) function into basic fractions plus fractions
// whose denominator support fails to span. Splitting always pivots on the
// lowest index of a minimal dependent subset, which strictly decreases the
// index-weighted denominator degree, so the worklist terminates.
inline BasicDecomposition partial_fractions(const Configuration& a, const RatFun& phi_in) {
  RatFun phi = make_ratfun(phi_in.num, phi_in.den);
  if (phi.nvars != a.r) throw std::invalid_argument("variable count differs from rank");
  BasicDecomposition out;
  if (phi.num.terms.empty()) return out;
  if (ratfun_degree(phi) != -a.r)
    throw std::invalid_argument("partial_fractions requires homogeneous degree -r input");

  std::vector<QVector> prim(a.n);
  std::vector<Rat> scale(a.n);
  for (int i = 0; i < a.n; ++i) {
    auto [p, s] = detail::primitive_positive(a.alphas[i]);
    prim[i] = p;
    scale[i] = s;
  }

  using Key = std::vector<int>;
  auto rep_of = [&](const QVector& form) {
    for (int i = 0; i < a.n; ++i)
      if (prim[i] == form) return i;
    throw std::invalid_argument("denominator form is not proportional to any covector");
  };
  Key start(a.n, 0);
  for (const auto& [form, mult] : phi.den) start[rep_of(form)] += mult;

  auto measure = [](const Key& k) {
    long long m = 0;
    for (int i = 0; i < int(k.size()); ++i) m += (long long)k[i] * (i + 1);
    return m;
  };

  std::map<std::pair<long long, Key>, SparsePoly, std::greater<>> work;
  auto push = [&](Key k, const SparsePoly& num) {
    if (num.terms.empty()) return;
    auto it = work.find({measure(k), k});
    if (it == work.end())
      work.insert({{measure(k), std::move(k)}, num});
    else {
      it->second += num;
      if (it->second.terms.empty()) work.erase(it);
    }
  };
  push(start, phi.num);

  std::map<Key, Rat> basics;
  std::map<Key, SparsePoly> degen;

  while (!work.empty()) {
    auto node = work.extract(work.begin());
    const Key key = node.key().second;
    SparsePoly num = std::move(node.mapped());

    std::vector<int> support;
    for (int i = 0; i < a.n; ++i)
      if (key[i] > 0) support.push_back(i);
    std::vector<QVector> rows;
    for (int i : support) rows.push_back(prim[i]);
    int rk = rows.empty() ? 0 : rank(QMatrix::from_rows(rows));

    if (rk < a.r) {
      auto it = degen.find(key);
      if (it == degen.end())
        degen.emplace(key, std::move(num));
      else
        it->second += num;
      continue;
    }

    if (int(support.size()) == a.r) {
      QMatrix msig = QMatrix::from_rows(rows);
      QMatrix inv = inverse(msig);
      SparsePoly expanded = num.substitute(linear_images(inv));
      for (const auto& [expo, coef] : expanded.terms) {
        std::vector<int> rel(a.r);
        bool basic = true;
        for (int l = 0; l < a.r; ++l) {
          rel[l] = expo[l] - key[support[l]];
          if (rel[l] != -1) basic = false;
        }
        if (basic) {
          Rat c = coef;
          for (int i : support) c *= scale[i];
          basics[Key(support.begin(), support.end())] += c;
        } else {
          SparsePoly piece = SparsePoly::constant(a.r, coef);
          Key dkey(a.n, 0);
          for (int l = 0; l < a.r; ++l) {
            if (rel[l] >= 0)
              piece = piece * poly_of_form(prim[support[l]]).pow(rel[l]);
            else
              dkey[support[l]] = -rel[l];
          }
          auto it = degen.find(dkey);
          if (it == degen.end())
            degen.emplace(std::move(dkey), std::move(piece));
          else
            it->second += piece;
        }
      }
      continue;
    }

    // Dependent support: find the first covector dependent on its predecessors,
    // extract the minimal relation, and trade one power of each later circuit
    // member for one more power of the pivot.
    std::vector<int> indep;
    std::vector<Rat> relation(a.n, Rat(0));
    bool found = false;
    for (int i : support) {
      if (indep.empty()) {
        indep.push_back(i);
        continue;
      }
      std::vector<QVector> cols;
      for (int j : indep) cols.push_back(prim[j]);
      auto sol = solve_rational(QMatrix::from_cols(cols), prim[i]);
      if (sol) {
        relation[i] = 1;
        for (int t = 0; t < int(indep.size()); ++t) relation[indep[t]] = -sol->x[t];
        found = true;
        break;
      }
      indep.push_back(i);
    }
    if (!found) throw std::logic_error("dependent support without a relation");

    int pivot = -1;
    for (int i = 0; i < a.n; ++i)
      if (relation[i] != 0) {
        pivot = i;
        break;
      }
    for (int k = pivot + 1; k < a.n; ++k) {
      if (relation[k] == 0 || key[k] == 0) continue;
      Key next = key;
      next[pivot] += 1;
      next[k] -= 1;
      push(std::move(next), (-relation[k] / relation[pivot]) * num);
    }
  }

  for (auto& [sigma, coef] : basics)
    if (coef != 0) out.basics.push_back({coef, sigma});
  for (auto& [dkey, num] : degen) {
    if (num.terms.empty()) continue;
    std::vector<DenEntry> den;
    for (int i = 0; i < a.n; ++i)
      if (dkey[i] > 0) den.push_back({prim[i], dkey[i]});
    out.degenerate.push_back(make_ratfun(std::move(num), den));
  }
  return out;
}

// Iterated residue along a flag: rewrite in the adapted basis (determinant one,
// so no Jacobian factor) and take the residue stage by stage. At each stage the
// pure forms supply the pole order k and every other form is expanded as a
// binomial series truncated at the v^(k-1) coefficient.
inline Rat iterated_residue(const Flag& f, const RatFun& phi_in) {
  int r = int(f.gamma.size());
  RatFun phi = make_ratfun(phi_in.num, phi_in.den);
  if (phi.nvars != r) throw std::invalid_argument("variable count differs from rank");
  if (phi.num.terms.empty()) return 0;

  QMatrix ginv = inverse(QMatrix::from_rows(f.gamma));

  using Den = std::vector<DenEntry>;
  std::map<Den, SparsePoly> state;
  {
    Den den;
    Rat fold = 1;
    for (const auto& [form, mult] : phi.den) {
      QVector c(r, Rat(0));
      for (int l = 0; l < r; ++l) {
        Rat s = 0;
        for (int k = 0; k < r; ++k) s += form[k] * ginv.at(k, l);
        c[l] = s;
      }
      auto [prim, scale] = detail::primitive_positive(c);
      fold *= rat_pow(scale, -mult);
      den.push_back({std::move(prim), mult});
    }
    std::sort(den.begin(), den.end());
    state[std::move(den)] = fold * phi.num.substitute(linear_images(ginv));
  }

  auto top_index = [&](const QVector& form) {
    for (int k = r - 1; k >= 0; --k)
      if (form[k] != 0) return k;
    return -1;
  };

  for (int j = 0; j < r; ++j) {
    std::map<Den, SparsePoly> next;
    for (const auto& [den, num] : state) {
      int pole = 0;
      struct Series {
        Rat lead;     // coefficient of v_j in the form
        QVector tail; // normalized remainder, top index beyond j
        Rat scale;    // factor peeled while normalizing the tail
        int mult;
      };
      std::vector<Series> rest;
      for (const auto& [form, mult] : den) {
        int top = top_index(form);
        if (top < j) throw std::logic_error("stale denominator form");
        if (top == j) {
          pole += mult;  // normalized pure form is exactly the unit covector
          continue;
        }
        QVector tail = form;
        Rat lead = tail[j];
        tail[j] = 0;
        auto [prim, scale] = detail::primitive_positive(tail);
        rest.push_back({lead, std::move(prim), scale, mult});
      }
      if (pole == 0) continue;

      std::map<int, SparsePoly> parts = detail::split_by_var(num, j);
      Den acc(rest.size());
      auto emit = [&](auto&& self, int idx, int budget, const Rat& coef,
                      const SparsePoly& piece) -> void {
        if (idx == int(rest.size())) {
          if (budget != 0) return;
          Den dkey = acc;
          std::sort(dkey.begin(), dkey.end());
          SparsePoly contrib = coef * piece;
          auto it = next.find(dkey);
          if (it == next.end())
            next.emplace(std::move(dkey), std::move(contrib));
          else
            it->second += contrib;
          return;
        }
        const Series& s = rest[idx];
        int tmax = s.lead == 0 ? 0 : budget;
        Rat lead_pow = 1;
        for (int t = 0; t <= tmax; ++t) {
          Rat b = Rat(binomial((unsigned long)(s.mult + t - 1), (unsigned long)t));
          if (t % 2) b = -b;
          acc[idx] = {s.tail, s.mult + t};
          self(self, idx + 1, budget - t,
               coef * b * lead_pow * rat_pow(s.scale, -(s.mult + t)), piece);
          lead_pow *= s.lead;
        }
      };
      for (const auto& [d, part] : parts) {
        if (d > pole - 1) continue;
        emit(emit, 0, pole - 1 - d, Rat(1), part);
      }
    }
    state = std::move(next);
  }

  Rat total = 0;
  for (const auto& [den, num] : state) {
    if (!den.empty()) throw std::logic_error("denominator survived the last stage");
    for (const auto& [expo, coef] : num.terms) total += coef;
  }
  return total;
}

inline Rat jk_basic(const Configuration& a, const Chamber& c, const RatFun& phi_in) {
  RatFun phi = make_ratfun(phi_in.num, phi_in.den);
  int denom_deg = 0;
  for (const auto& [form, mult] : phi.den) denom_deg += mult;
  std::set<std::vector<int>> bind(c.bind.begin(), c.bind.end());
  Rat total = 0;
  for (const auto& [deg, piece] : phi.num.graded()) {
    if (deg - denom_deg != -a.r) continue;
    RatFun slice;
    slice.nvars = phi.nvars;
    slice.num = piece;
    slice.den = phi.den;
    BasicDecomposition dec = partial_fractions(a, slice);
    for (const auto& [coef, sigma] : dec.basics)
      if (bind.count(sigma)) total += coef / rat_abs(signed_volume(a, sigma));
  }
  return total;
}

inline Rat jk_via_flags(const Configuration& a, const std::vector<Flag>& flags,
                        const QVector& xi, const RatFun& phi) {
  Rat total = 0;
  for (int idx : flags_for_xi(a, flags, xi, FlagMode::plus)) {
    const Flag& f = flags[idx];
    total += Rat(f.nu) * iterated_residue(f, phi);
  }
  return total;
}

inline Rat jk_via_flags(const Configuration& a, const QVector& xi, const RatFun& phi) {
  return jk_via_flags(a, enumerate_flags(a), xi, phi);
}

enum class JkMethod { basic, flags, crosscheck };

inline JkMethod jk_method_of(const std::string& name) {
  if (name == "basic") return JkMethod::basic;
  if (name == "flags") return JkMethod::flags;
  if (name == "crosscheck") return JkMethod::crosscheck;
  throw std::invalid_argument("unknown jk method: " + name);
}

inline Rat jk(const Configuration& a, const Chamber& c, const RatFun& phi,
              JkMethod method = JkMethod::crosscheck) {
  if (method == JkMethod::basic) return jk_basic(a, c, phi);
  std::vector<Flag> flags = enumerate_flags(a);
  QVector xi = auto_regular_xi(a, flags, c);
  Rat via_flags = jk_via_flags(a, flags, xi, phi);
  if (method == JkMethod::flags) return via_flags;
  Rat via_basic = jk_basic(a, c, phi);
  if (via_basic != via_flags)
    throw std::runtime_error("jk crosscheck mismatch: basic " + rat_str(via_basic) +
                             " vs flags " + rat_str(via_flags));
  return via_basic;
}

}  // namespace torres
