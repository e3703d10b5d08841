#pragma once

#include <torres/linalg.hpp>

#include <complex>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace torres {

using Expo = std::vector<int>;

namespace detail {
template <class T>
struct field_cast {
  static T from(const Rat& q) { return T(q); }
};
template <>
struct field_cast<double> {
  static double from(const Rat& q) { return to_double(q); }
};
template <>
struct field_cast<std::complex<double>> {
  static std::complex<double> from(const Rat& q) { return {to_double(q), 0.0}; }
};
}  // namespace detail

struct SparsePoly {
  int nvars = 0;
  std::map<Expo, Rat> terms;  // no zero coefficients stored

  SparsePoly() = default;
  explicit SparsePoly(int nv) : nvars(nv) {}

  static SparsePoly constant(int nv, const Rat& c) {
    SparsePoly p(nv);
    if (c != 0) p.terms[Expo(nv, 0)] = c;
    return p;
  }

  static SparsePoly monomial(int nv, const Expo& e, const Rat& c) {
    SparsePoly p(nv);
    if (c != 0) p.terms[e] = c;
    return p;
  }

  static SparsePoly variable(int nv, int i) {
    Expo e(nv, 0);
    e[i] = 1;
    return monomial(nv, e, Rat(1));
  }

  bool is_zero() const { return terms.empty(); }

  void add_term(const Expo& e, const Rat& c) {
    if (c == 0) return;
    auto it = terms.find(e);
    if (it == terms.end()) {
      terms.emplace(e, c);
    } else {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }

  SparsePoly& operator+=(const SparsePoly& o) {
    for (const auto& [e, c] : o.terms) add_term(e, c);
    return *this;
  }

  SparsePoly& operator-=(const SparsePoly& o) {
    for (const auto& [e, c] : o.terms) add_term(e, -c);
    return *this;
  }

  friend SparsePoly operator+(SparsePoly a, const SparsePoly& b) { return a += b; }
  friend SparsePoly operator-(SparsePoly a, const SparsePoly& b) { return a -= b; }

  friend SparsePoly operator*(const SparsePoly& a, const SparsePoly& b) {
    SparsePoly p(a.nvars);
    for (const auto& [ea, ca] : a.terms)
      for (const auto& [eb, cb] : b.terms) {
        Expo e(ea);
        for (int i = 0; i < p.nvars; ++i) e[i] += eb[i];
        p.add_term(e, ca * cb);
      }
    return p;
  }

  friend SparsePoly operator*(const Rat& c, const SparsePoly& a) {
    SparsePoly p(a.nvars);
    if (c == 0) return p;
    for (const auto& [e, q] : a.terms) p.terms[e] = c * q;
    return p;
  }

  SparsePoly pow(int k) const {
    if (k < 0) throw std::invalid_argument("negative polynomial power");
    SparsePoly r = constant(nvars, Rat(1));
    SparsePoly b = *this;
    while (k > 0) {
      if (k & 1) r = r * b;
      b = b * b;
      k >>= 1;
    }
    return r;
  }

  // Total degree of a monomial map key.
  static int degree_of(const Expo& e) { return std::accumulate(e.begin(), e.end(), 0); }

  // -1 for the zero polynomial.
  int total_degree() const {
    int d = -1;
    for (const auto& [e, c] : terms) d = std::max(d, degree_of(e));
    return d;
  }

  bool homogeneous(int& deg) const {
    deg = total_degree();
    for (const auto& [e, c] : terms)
      if (degree_of(e) != deg) return false;
    return true;
  }

  std::map<int, SparsePoly> graded() const {
    std::map<int, SparsePoly> g;
    for (const auto& [e, c] : terms) {
      auto [it, fresh] = g.try_emplace(degree_of(e), nvars);
      it->second.terms.emplace(e, c);
    }
    return g;
  }

  template <class T>
  T eval(const std::vector<T>& pt) const {
    T acc{};
    for (const auto& [e, c] : terms) {
      T m = detail::field_cast<T>::from(c);
      for (int i = 0; i < nvars; ++i)
        for (int k = 0; k < e[i]; ++k) m *= pt[i];
      acc += m;
    }
    return acc;
  }

  // Substitutes variable i by images[i] (all in the same target ring).
  SparsePoly substitute(const std::vector<SparsePoly>& images) const {
    if (int(images.size()) != nvars) throw std::invalid_argument("substitute arity mismatch");
    int nv = images.empty() ? 0 : images[0].nvars;
    std::vector<std::vector<SparsePoly>> powers(nvars);  // powers[i][k] = images[i]^k
    for (int i = 0; i < nvars; ++i) powers[i].push_back(SparsePoly::constant(nv, Rat(1)));
    SparsePoly out(nv);
    for (const auto& [e, c] : terms) {
      SparsePoly m = SparsePoly::constant(nv, c);
      for (int i = 0; i < nvars; ++i) {
        while (int(powers[i].size()) <= e[i]) powers[i].push_back(powers[i].back() * images[i]);
        if (e[i] > 0) m = m * powers[i][e[i]];
      }
      out += m;
    }
    return out;
  }

  // Views the polynomial as univariate in variable `var`; coefficients live in
  // the remaining variables (index order preserved).
  std::map<int, SparsePoly> collect(int var) const {
    std::map<int, SparsePoly> out;
    for (const auto& [e, c] : terms) {
      Expo rest;
      rest.reserve(nvars - 1);
      for (int i = 0; i < nvars; ++i)
        if (i != var) rest.push_back(e[i]);
      auto [it, fresh] = out.try_emplace(e[var], nvars - 1);
      it->second.add_term(rest, c);
    }
    for (auto it = out.begin(); it != out.end();)
      it = it->second.is_zero() ? out.erase(it) : std::next(it);
    return out;
  }

  bool operator==(const SparsePoly& o) const { return nvars == o.nvars && terms == o.terms; }
};

// Linear form a . u as a polynomial.
inline SparsePoly poly_of_form(const QVector& a) {
  SparsePoly p(int(a.size()));
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    Expo e(a.size(), 0);
    e[i] = 1;
    p.terms.emplace(std::move(e), a[i]);
  }
  return p;
}

// Substitution images for a linear change of coordinates u = M v.
inline std::vector<SparsePoly> linear_images(const QMatrix& m) {
  std::vector<SparsePoly> imgs;
  imgs.reserve(m.rows);
  for (int i = 0; i < m.rows; ++i) imgs.push_back(poly_of_form(m.row(i)));
  return imgs;
}

}  // namespace torres
