// Acceptance checks for the library and the command line tool. Each check
// prints one PASS/FAIL line; the exit code is the number of failures.
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "support.hpp"
#include "torres/job.hpp"

using namespace torres;
using testsupport::Rng;

namespace {

constexpr double kTolP2 = 1e-8;
constexpr double kTolProduct = 1e-6;
constexpr double kTolHirzebruch = 1e-6;
constexpr double kTolTorusHessian = 1e-9;
constexpr double kTolResidual = 1e-10;
constexpr double kTolQuartic = 1e-4;

int failures = 0;
std::string detail_msg;

bool expect(bool ok, const std::string& what) {
  if (!ok && detail_msg.empty()) detail_msg = what;
  return ok;
}

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

SparsePoly monomial(int nvars, const std::vector<int>& e) {
  SparsePoly p(nvars);
  p.add_term(e, Rat(1));
  return p;
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

JobConfig load_fixture(const std::string& name) {
  std::ifstream in(testsupport::fixture_path(name));
  return parse_job(Json::parse(in));
}

std::string run_cli(const std::string& args, int* code) {
  std::string cmd = std::string(TORRES_BIN) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  if (!p) {
    *code = -1;
    return out;
  }
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, got);
  int status = pclose(p);
  *code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

// 1. Projective plane: exact geometric coefficients, series vs point sum,
//    both equal to the closed-form value 2 at 27 q = 1/2.
bool criterion_p2() {
  Configuration a = p2();
  Chamber c = chamber_of(a, {Rat(1)});
  SparsePoly p = monomial(3, {1, 1, 0});
  for (long lam = 0; lam <= 10; ++lam)
    if (!expect(mp_number(p, {Rat(lam)}, a, c) == ipow(27, lam), "coefficient 27^lambda"))
      return false;
  std::vector<Cplx> z(3, Cplx(std::pow(54.0, -1.0 / 3.0), 0.0));
  std::vector<QVector> basis{QVector{Rat(1)}};
  SeriesResult s = mp_series(p, a, c, basis, z, 60);
  BSideResult b = toric_residue_sum(p, a, enumerate_flags(a), basis, z);
  if (!expect(b.verified, "point set verified")) return false;
  double budget = kTolP2 + s.tail_estimate;
  return expect(std::abs(s.partial_sum - b.value) <= budget, "series vs point sum") &&
         expect(std::abs(s.partial_sum - Cplx(2.0, 0.0)) <= budget, "series vs closed form") &&
         expect(std::abs(b.value - Cplx(2.0, 0.0)) <= kTolP2, "point sum vs closed form");
}

// 2. Product of lines: exact binomial coefficients and the four-point sum at
//    equal weights 1e-4 on both rulings.
bool criterion_p1p1() {
  Configuration a = p1p1();
  Chamber c = chamber_of(a, {Rat(1), Rat(1)});
  SparsePoly p = monomial(4, {1, 0, 1, 0});
  for (long i = 0; i <= 3; ++i)
    for (long j = 0; j <= 3; ++j) {
      Rat expectv = ipow(4, i + j) * binom(2 * i + 2 * j, 2 * i);
      if (!expect(mp_number(p, {Rat(i), Rat(j)}, a, c) == expectv, "binomial coefficient"))
        return false;
    }
  std::vector<Cplx> z(4, Cplx(0.01, 0.0));
  std::vector<QVector> basis{QVector{Rat(1), Rat(0)}, QVector{Rat(0), Rat(1)}};
  SeriesResult s = mp_series(p, a, c, basis, z, 20);
  BSideResult b = toric_residue_sum(p, a, enumerate_flags(a), basis, z);
  return expect(b.verified && b.found_count == 4, "four point set") &&
         expect(std::abs(s.partial_sum - b.value) <= kTolProduct + s.tail_estimate,
                "series vs point sum");
}

// 3. Hirzebruch surface: the shipped example with seeded phases; root count
//    equals the stage determinant sum and every point satisfies the quartic
//    obtained by eliminating u1.
bool criterion_hirzebruch() {
  JobConfig cfg = load_fixture("f1.json");
  Configuration a = job_configuration(cfg);
  Chamber c = chamber_of(a, cfg.xi0);
  auto flags = enumerate_flags(a);
  auto basis = resolve_lambda(cfg, a, c);
  std::vector<Cplx> z = resolve_z(cfg, a, flags);
  SeriesResult s = mp_series(*cfg.poly, a, c, basis, z, cfg.bounds.series_bound);
  BSideResult b = toric_residue_sum(*cfg.poly, a, flags, basis, z, track_options(cfg));
  if (!expect(std::abs(s.partial_sum - b.value) <= kTolHirzebruch + s.tail_estimate,
              "series vs point sum"))
    return false;

  long dsum = 0;
  QVector xi = rationalize(xi_of_z(a, z));
  for (int idx : flags_for_xi(a, flags, xi, FlagMode::zero))
    dsum += std::labs(long(flags[idx].d.get_si()));
  if (!expect(dsum == 4, "stage determinant sum")) return false;
  if (!expect(b.verified && b.expected_count == 4 && b.found_count == 4, "root count"))
    return false;

  Cplx q1(1.0, 0.0), q2(1.0, 0.0);
  for (int i = 0; i < a.n; ++i) {
    q1 *= detail::complex_int_pow(z[i], detail::pairing_long(a.alphas[i], basis[0]));
    q2 *= detail::complex_int_pow(z[i], detail::pairing_long(a.alphas[i], basis[1]));
  }
  for (const auto& pt : b.points) {
    Cplx v = pt.u[1];
    Cplx lhs = (v * v - q1) * (v * v - q1);
    Cplx rhs = q2 * v * v * v;
    if (!expect(std::abs(lhs - rhs) <= kTolQuartic * std::abs(rhs), "eliminant quartic"))
      return false;
  }
  return true;
}

// 4. The two residue evaluations agree exactly on random data.
bool criterion_flag_equivalence() {
  Rng rng(101);
  int configs = 0;
  while (configs < 50) {
    auto rc = testsupport::random_config(rng);
    auto flags = enumerate_flags(rc.a);
    std::vector<QVector> xis;
    for (int k = 0; k < 3; ++k) xis.push_back(testsupport::regular_xi(rng, rc.a, flags, rc.c));
    for (int k = 0; k < 5; ++k) {
      RatFun phi = testsupport::random_fraction(rng, rc.a);
      Rat base = jk_basic(rc.a, rc.c, phi);
      for (const QVector& xi : xis)
        if (!expect(jk_via_flags(rc.a, flags, xi, phi) == base, "flag sum equals chamber sum"))
          return false;
    }
    ++configs;
  }
  return true;
}

// 5. Signed flag-cone indicators add up to the cone indicator.
bool criterion_cone_indicator() {
  Rng rng(103);
  int done = 0;
  while (done < 100) {
    auto rc = testsupport::random_config(rng);
    const int r = rc.a.r;
    auto bases = basis_index_sets(rc.a);
    const auto& sigma = bases[rng.pick(0, long(bases.size()) - 1)];
    std::vector<QVector> gens;
    for (int i : sigma) gens.push_back(rc.a.alphas[i]);
    int sgn = orientation_sign(gens);

    std::vector<Flag> ordered;
    std::vector<int> parity;
    std::vector<int> pos(r);
    std::iota(pos.begin(), pos.end(), 0);
    do {
      std::vector<QMatrix> stages;
      for (int j = 0; j < r; ++j) {
        QMatrix st(j + 1, r);
        for (int s = 0; s <= j; ++s)
          for (int k = 0; k < r; ++k) st.at(s, k) = gens[pos[s]][k];
        stages.push_back(std::move(st));
      }
      ordered.push_back(make_flag(rc.a, std::move(stages)));
      int inv = 0;
      for (int u = 0; u < r; ++u)
        for (int v = u + 1; v < r; ++v)
          if (pos[u] > pos[v]) ++inv;
      parity.push_back(inv % 2 == 0 ? 1 : -1);
    } while (std::next_permutation(pos.begin(), pos.end()));

    QVector xi(r, Rat(0));
    for (int k = 0; k < r; ++k) xi[k] = make_rat(rng.pick(-40, 40), 1 + rng.pick(0, 5));
    long lhs = 0;
    int rhs;
    try {
      for (int idx : flags_for_xi(rc.a, ordered, xi, FlagMode::plus))
        lhs += parity[idx] * ordered[idx].nu;
      rhs = in_cone(xi, gens) ? sgn : 0;
    } catch (const std::domain_error&) {
      continue;
    }
    if (!expect(lhs == rhs, "indicator identity")) return false;
    ++done;
  }
  return true;
}

// 6. Orthogonality, complementary volumes, and the double dual lattice.
bool criterion_gale() {
  Rng rng(107);
  int done = 0;
  while (done < 50) {
    auto rc = testsupport::random_config(rng);
    GalePair g = gale_dual(rc.a);
    int n = rc.a.n, r = rc.a.r, d = n - r;
    for (int k = 0; k < r; ++k)
      for (int l = 0; l < d; ++l) {
        Rat s = 0;
        for (int i = 0; i < n; ++i) s += g.betas[i][l] * rc.a.alphas[i][k];
        if (!expect(s == 0, "relation rows orthogonal")) return false;
      }
    for (const auto& sigma : basis_index_sets(rc.a)) {
      std::set<int> in(sigma.begin(), sigma.end());
      Rat va = rat_abs(signed_volume(rc.a, sigma));
      Rat vb = 1;
      if (d > 0) {
        std::vector<QVector> rows;
        for (int i = 0; i < n; ++i)
          if (!in.count(i)) rows.push_back(g.betas[i]);
        vb = rat_abs(det(QMatrix::from_rows(rows)));
      }
      if (!expect(va == vb, "complementary volumes")) return false;
    }
    if (d > 0) {
      IMatrix bm(d, n), am(r, n);
      for (int i = 0; i < n; ++i) {
        for (int l = 0; l < d; ++l) bm.at(l, i) = g.betas[i][l].get_num();
        for (int k = 0; k < r; ++k) am.at(k, i) = rc.a.alphas[i][k].get_num();
      }
      IMatrix dd = integer_kernel(bm);
      if (!expect(dd.rows == r, "double dual rank")) return false;
      IMatrix stacked(2 * r, n);
      for (int k = 0; k < r; ++k)
        for (int i = 0; i < n; ++i) {
          stacked.at(k, i) = am.at(k, i);
          stacked.at(r + k, i) = dd.at(k, i);
        }
      if (!expect(smith(am).invariants == smith(stacked).invariants, "double dual lattice"))
        return false;
    }
    ++done;
  }
  return true;
}

// 7. The volume sum times the coordinate product is the dual volume
//    polynomial, exactly; the torus Hessian matches it numerically.
bool criterion_hessian() {
  Rng rng(109);
  int done = 0;
  while (done < 30) {
    auto rc = testsupport::random_config(rng, 3, 7, 3);
    SparsePoly lhs = d_a_numerator(rc.a);
    SparsePoly rhs = hessian_DB(gale_dual(rc.a));
    if (!expect(lhs.terms == rhs.terms, "polynomial identity")) return false;
    ++done;
  }
  int trials = 0;
  while (trials < 20) {
    auto rc = testsupport::random_config(rng);
    GalePair g = gale_dual(rc.a);
    int d = rc.a.n - rc.a.r;
    if (d == 0) continue;
    std::vector<QVector> h;
    for (int k = 0; k < d; ++k) {
      QVector e(d, Rat(0));
      e[k] = 1;
      h.push_back(e);
    }
    std::vector<Cplx> w, z;
    for (int k = 0; k < d; ++k) w.emplace_back(rng.unit() + 0.2, rng.unit() - 0.5);
    for (int i = 0; i < rc.a.n; ++i) z.emplace_back(rng.unit() + 0.1, rng.unit() - 0.5);
    TorusData t = evaluate_torus_data(g, h, w, z);
    Cplx expectv = hessian_DB(g).eval<Cplx>(t.x);
    if (!expect(std::abs(t.hess - expectv) <= kTolTorusHessian * std::max(1.0, std::abs(expectv)),
                "torus Hessian"))
      return false;
    ++trials;
  }
  return true;
}

// 8. Vanishing of the coefficients outside the dual cone and at negative
//    degree, exactly, on every shipped example.
bool criterion_vanishing() {
  Rng rng(113);
  struct Fixture {
    Configuration a;
    QVector xi0;
    SparsePoly p;
  };
  std::vector<Fixture> fixtures;
  fixtures.push_back({p2(), {Rat(1)}, monomial(3, {1, 1, 0})});
  fixtures.push_back({p1p1(), {Rat(1), Rat(1)}, monomial(4, {1, 0, 1, 0})});
  fixtures.push_back({f1(), {Rat(2), Rat(1)}, monomial(4, {1, 0, 1, 0})});
  for (const auto& fx : fixtures) {
    Chamber c = chamber_of(fx.a, fx.xi0);
    DualConeData dual = dual_cone_data(fx.a, c);
    int outside = 0, negative = 0, guard = 0;
    while ((outside < 30 || negative < 30) && ++guard < 100000) {
      QVector lam(fx.a.r, Rat(0));
      for (int k = 0; k < fx.a.r; ++k) lam[k] = Rat(rng.pick(-6, 6));
      long degree = 0;
      for (int i = 0; i < fx.a.n; ++i) degree += detail::pairing_long(fx.a.alphas[i], lam);
      if (outside < 30 && !in_cone(lam, dual.generators)) {
        if (!expect(mp_number(fx.p, lam, fx.a, c) == 0, "vanishing outside the dual cone"))
          return false;
        ++outside;
      }
      if (negative < 30 && degree < 0) {
        if (!expect(mp_number(fx.p, lam, fx.a, c) == 0, "vanishing at negative degree"))
          return false;
        ++negative;
      }
    }
    if (!expect(outside == 30 && negative == 30, "sample count")) return false;
  }
  return true;
}

// 9. Sharper weights move the recovered points closer to the stagewise
//    prediction; residual and count invariants hold at both scales.
bool criterion_decay() {
  Configuration a = f1();
  auto flags = enumerate_flags(a);
  std::vector<QVector> basis{QVector{Rat(0), Rat(1)}, QVector{Rat(1), Rat(-1)}};
  std::vector<double> t{15.0, 15.0, 0.0, 10.0};
  auto spread = [&](double scale, bool* ok) {
    std::vector<Cplx> z;
    for (double ti : t) z.emplace_back(std::exp(-scale * ti), 0.0);
    BSideResult r = critical_points(a, flags, basis, z);
    *ok = r.verified && r.expected_count == 4 && r.found_count == 4;
    for (const auto& pt : r.points) *ok = *ok && pt.residual < kTolResidual;
    auto trops = tropical_solutions(a, flags, rationalize(xi_of_z(a, z)));
    double worst = 0.0;
    for (const auto& pt : r.points) {
      std::vector<double> l = l_map(a, pt.u);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& trop : trops) {
        double diff = 0.0;
        for (int i = 0; i < a.n; ++i) diff = std::max(diff, std::abs(l[i] - trop.ts[i]));
        best = std::min(best, diff);
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  bool ok1 = false, ok2 = false;
  double base = spread(1.0, &ok1);
  double tight = spread(2.0, &ok2);
  return expect(ok1 && ok2, "residuals and counts") &&
         expect(tight < base, "prediction sharpens");
}

// 10. The verifier is deterministic: identical reports in process and across
//     separate runs of the executable.
bool criterion_determinism() {
  JobConfig cfg = load_fixture("f1.json");
  auto [r1, c1] = run_verify(cfg, false);
  auto [r2, c2] = run_verify(cfg, false);
  if (!expect(c1 == 0 && c2 == 0, "verify succeeds")) return false;
  if (!expect(r1.dump() == r2.dump(), "in-process reports identical")) return false;
  int code1 = 0, code2 = 0;
  std::string out1 = run_cli("verify " + testsupport::fixture_path("f1.json"), &code1);
  std::string out2 = run_cli("verify " + testsupport::fixture_path("f1.json"), &code2);
  return expect(code1 == 0 && code2 == 0, "executable runs succeed") &&
         expect(!out1.empty() && out1 == out2, "executable reports identical");
}

void report(int number, const std::string& label, const std::function<bool()>& fn) {
  bool ok = false;
  detail_msg.clear();
  std::string note;
  try {
    ok = fn();
    note = detail_msg;
  } catch (const std::exception& e) {
    ok = false;
    note = e.what();
  }
  if (!ok) ++failures;
  std::printf("%-4s %2d. %s%s%s\n", ok ? "PASS" : "FAIL", number, label.c_str(),
              note.empty() ? "" : " :: ", note.c_str());
  std::fflush(stdout);
}

}  // namespace

int main() {
  report(1, "projective plane identity (exact coefficients, series, point sum)", criterion_p2);
  report(2, "product of lines identity (binomial coefficients, equal weights)", criterion_p1p1);
  report(3, "Hirzebruch identity (seeded phases, root count, quartic)", criterion_hirzebruch);
  report(4, "flag sums equal chamber sums on random data", criterion_flag_equivalence);
  report(5, "cone indicator decomposes over ordered flags", criterion_cone_indicator);
  report(6, "Gale duality suite", criterion_gale);
  report(7, "Hessian identities, exact and on the torus", criterion_hessian);
  report(8, "vanishing outside the dual cone and at negative degree", criterion_vanishing);
  report(9, "tropical prediction sharpens with the weights", criterion_decay);
  report(10, "deterministic verifier reports", criterion_determinism);
  return failures;
}
