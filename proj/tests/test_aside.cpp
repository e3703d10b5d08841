#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "support.hpp"
#include "torres/aside.hpp"

using namespace torres;
using Catch::Approx;

namespace {

Configuration f1() {
  return make_configuration(2, 4,
                            {QVector{Rat(1), Rat(0)}, QVector{Rat(1), Rat(0)},
                             QVector{Rat(0), Rat(1)}, QVector{Rat(1), Rat(1)}});
}

Configuration p2() {
  return make_configuration(1, 3, {QVector{Rat(1)}, QVector{Rat(1)}, QVector{Rat(1)}});
}

Configuration p1p1() {
  return make_configuration(2, 4,
                            {QVector{Rat(1), Rat(0)}, QVector{Rat(1), Rat(0)},
                             QVector{Rat(0), Rat(1)}, QVector{Rat(0), Rat(1)}});
}

Configuration pn(int n) {
  std::vector<QVector> al(n, QVector{Rat(1)});
  return make_configuration(1, n, al);
}

Rat binom(long n, long k) {
  Rat b = 1;
  for (long t = 0; t < k; ++t) b = b * Rat(n - t) / Rat(t + 1);
  return b;
}

Rat ipow(long b, long e) {
  Rat p = 1;
  for (long t = 0; t < e; ++t) p = p * Rat(b);
  return p;
}

SparsePoly monomial(int nvars, const std::vector<int>& e) {
  SparsePoly p(nvars);
  p.add_term(e, Rat(1));
  return p;
}

}  // namespace

TEST_CASE("index data of a lattice point") {
  Configuration a = f1();
  MPIndex ix = make_mp_index(a, {Rat(1), Rat(-1)});
  REQUIRE(ix.pairings == std::vector<long>{1, 1, -1, 0});
  REQUIRE(ix.degree == 1);
  PLambdaParts parts = p_lambda_parts(a, {Rat(1), Rat(-1)});
  REQUIRE(parts.plus == std::vector<int>{1, 1, 0, 0});
  REQUIRE(parts.minus == std::vector<int>{0, 0, 1, 0});
}

TEST_CASE("projective plane intersection numbers are powers of 27") {
  Configuration a = p2();
  Chamber c = chamber_of(a, {Rat(1)});
  SparsePoly p = monomial(3, {1, 1, 0});
  for (long lam = 0; lam <= 3; ++lam)
    REQUIRE(mp_number(p, {Rat(lam)}, a, c) == ipow(27, lam));
  REQUIRE(mp_number(p, {Rat(-1)}, a, c) == 0);
}

TEST_CASE("projective space intersection numbers follow the power law") {
  for (int n = 2; n <= 4; ++n) {
    Configuration a = pn(n);
    Chamber c = chamber_of(a, {Rat(1)});
    std::vector<int> e(n, 0);
    e[0] = n - 1;
    REQUIRE(mp_number(monomial(n, e), {Rat(2)}, a, c) == ipow(n, 2 * n));
  }
}

TEST_CASE("product of lines intersection numbers are central binomials") {
  Configuration a = p1p1();
  Chamber c = chamber_of(a, {Rat(1), Rat(1)});
  SparsePoly p = monomial(4, {1, 0, 1, 0});
  for (long i = 0; i <= 3; ++i)
    for (long j = 0; j <= 3; ++j) {
      Rat expect = ipow(4, i + j) * binom(2 * i + 2 * j, 2 * i);
      REQUIRE(mp_number(p, {Rat(i), Rat(j)}, a, c) == expect);
    }
  REQUIRE(mp_number(p, {Rat(1), Rat(1)}, a, c) == 96);
  REQUIRE(mp_number(p, {Rat(2), Rat(1)}, a, c) == 960);
}

TEST_CASE("intersection numbers vanish outside the dual cone") {
  Configuration a = p1p1();
  Chamber c = chamber_of(a, {Rat(1), Rat(1)});
  SparsePoly p = monomial(4, {1, 0, 1, 0});
  REQUIRE(mp_number(p, {Rat(-1), Rat(0)}, a, c) == 0);
  REQUIRE(mp_number(p, {Rat(3), Rat(-1)}, a, c) == 0);

  Configuration h = f1();
  Chamber hc = chamber_of(h, {Rat(2), Rat(1)});
  SparsePoly hp = monomial(4, {1, 0, 1, 0});
  REQUIRE(mp_number(hp, {Rat(1), Rat(-2)}, h, hc) == 0);
  REQUIRE(mp_number(hp, {Rat(-1), Rat(0)}, h, hc) == 0);
}

TEST_CASE("intersection numbers reject polynomials of the wrong degree") {
  Configuration a = p2();
  Chamber c = chamber_of(a, {Rat(1)});
  REQUIRE_THROWS_AS(mp_number(monomial(3, {1, 1, 1}), {Rat(1)}, a, c), std::invalid_argument);
}

TEST_CASE("geometric series of the projective plane") {
  Configuration a = p2();
  Chamber c = chamber_of(a, {Rat(1)});
  SparsePoly p = monomial(3, {1, 1, 0});
  std::complex<double> zi(0.26456684199469993, 0.0);  // z1 z2 z3 = 1/54
  SeriesResult s = mp_series(p, a, c, {QVector{Rat(1)}}, {zi, zi, zi}, 60);
  REQUIRE(s.terms.size() == 21);
  REQUIRE(s.bound == 60);
  for (long k = 0; k <= 3; ++k) REQUIRE(s.terms[k].value == ipow(27, k));
  double q = std::pow(0.26456684199469993, 3.0);
  REQUIRE(std::abs(s.monomials[1] - std::complex<double>(q, 0.0)) < 1e-16);
  // 27 q = 1/2, so the partial sum is 2 - 2^-20 and the tail matches the
  // dropped remainder.
  double expect = 2.0 - std::ldexp(1.0, -20);
  REQUIRE(std::abs(s.partial_sum - std::complex<double>(expect, 0.0)) < 1e-12);
  REQUIRE(s.tail_estimate == Approx(std::ldexp(1.0, -20)).epsilon(1e-6));
  REQUIRE(s.shell_magnitudes.size() == 21);
  REQUIRE(s.shell_magnitudes.at(60) == Approx(std::ldexp(1.0, -20)).epsilon(1e-9));
}

TEST_CASE("series terms match the closed form for a product of lines") {
  Configuration a = p1p1();
  Chamber c = chamber_of(a, {Rat(1), Rat(1)});
  SparsePoly p = monomial(4, {1, 0, 1, 0});
  std::vector<std::complex<double>> z{{0.1, 0.0}, {0.1, 0.0}, {0.05, 0.0}, {0.05, 0.0}};
  SeriesResult s = mp_series(p, a, c, {QVector{Rat(1), Rat(0)}, QVector{Rat(0), Rat(1)}}, z, 12);
  std::complex<double> q1 = z[0] * z[1], q2 = z[2] * z[3];
  std::complex<double> expect(0.0, 0.0);
  int count = 0;
  for (long i = 0; 2 * i <= 12; ++i)
    for (long j = 0; 2 * i + 2 * j <= 12; ++j) {
      expect += to_double(ipow(4, i + j) * binom(2 * i + 2 * j, 2 * i)) *
                std::pow(q1, double(i)) * std::pow(q2, double(j));
      ++count;
    }
  REQUIRE(int(s.terms.size()) == count);
  REQUIRE(std::abs(s.partial_sum - expect) < 1e-13 * std::abs(expect));
  for (const auto& t : s.terms) {
    Rat oracle = ipow(4, long(to_double(t.index.lambda[0]) + to_double(t.index.lambda[1]))) *
                 binom(t.index.degree, 2 * long(to_double(t.index.lambda[0])));
    REQUIRE(t.value == oracle);
  }
}

TEST_CASE("series rejects degenerate weight data") {
  Configuration a = p1p1();
  Chamber c = chamber_of(a, {Rat(1), Rat(1)});
  SparsePoly p = monomial(4, {1, 0, 1, 0});
  std::vector<std::complex<double>> z(4, std::complex<double>(0.1, 0.0));
  std::vector<std::complex<double>> zero = z;
  zero[2] = 0.0;
  std::vector<QVector> basis{QVector{Rat(1), Rat(0)}, QVector{Rat(0), Rat(1)}};
  REQUIRE_THROWS_AS(mp_series(p, a, c, basis, zero, 8), std::invalid_argument);
  REQUIRE_THROWS_AS(mp_series(p, a, c, {basis[0]}, z, 8), std::invalid_argument);
  std::vector<QVector> negw{QVector{Rat(1), Rat(0)}, QVector{Rat(0), Rat(-1)}};
  REQUIRE_THROWS_AS(mp_series(p, a, c, negw, z, 8), std::invalid_argument);
  std::vector<std::complex<double>> zshort(3, std::complex<double>(0.1, 0.0));
  REQUIRE_THROWS_AS(mp_series(p, a, c, basis, zshort, 8), std::invalid_argument);
}

TEST_CASE("tail estimate stays finite when decay rates interleave") {
  Configuration a = f1();
  Chamber c = chamber_of(a, {Rat(2), Rat(1)});
  SparsePoly p = monomial(4, {1, 0, 1, 0});
  // Weights with very different decay per direction: the slow direction must
  // dominate the estimate instead of a shell-to-shell ratio that exceeds one.
  std::vector<std::complex<double>> z{
      {std::exp(-20.0), 0.0}, {std::exp(-20.0), 0.0}, {std::exp(-5.0), 0.0}, {1.0, 0.0}};
  std::vector<QVector> basis{QVector{Rat(0), Rat(1)}, QVector{Rat(1), Rat(-1)}};
  SeriesResult s = mp_series(p, a, c, basis, z, 20);
  REQUIRE(std::isfinite(s.tail_estimate));
  REQUIRE(s.tail_estimate > 0.0);
  REQUIRE(s.tail_estimate < 1e-3);
}

TEST_CASE("placement of weight points relative to the chamber") {
  Configuration a = p2();
  Chamber c = chamber_of(a, {Rat(1)});
  std::complex<double> zi(0.26456684199469993, 0.0);
  ConvergenceReport in = convergence_check(a, c, {zi, zi, zi}, 0.25);
  REQUIRE(in.verdict == "inside");
  REQUIRE(to_double(in.regularity) == Approx(1.3297).margin(2e-4));
  REQUIRE(in.xi[0] == Approx(3.0 * -std::log(0.26456684199469993)).margin(1e-12));

  std::complex<double> big(1.5, 0.0);
  REQUIRE(convergence_check(a, c, {big, big, big}, 0.25).verdict == "outside");

  Configuration b = p1p1();
  Chamber cb = chamber_of(b, {Rat(1), Rat(1)});
  std::vector<std::complex<double>> wall(4, std::complex<double>(0.01, 0.0));
  ConvergenceReport m = convergence_check(b, cb, wall, 0.25);
  REQUIRE(m.verdict == "marginal");
  REQUIRE(m.regularity == 0);
}
