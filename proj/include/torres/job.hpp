// Job configs, canonical JSON serialization, and the report builders behind
// the CLI subcommands. Rationals travel as "p/q" strings, complex numbers as
// [re, im] pairs.
#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "torres/bside.hpp"
#include "torres/ratfun.hpp"

namespace torres {

using Json = nlohmann::ordered_json;

struct JobBounds {
  long series_bound = 20;
  double tau_min = 0.25;
  double tol = 1e-6;
  double residual_tol = 1e-10;
  double margin = 1e-8;
  double dedup_tol = 1e-6;
};

struct ZFromXi {
  QVector xi;
  std::optional<std::vector<double>> phases;
};

struct JobConfig {
  std::string name;
  int r = 0;
  int n = 0;
  std::vector<QVector> alphas;
  std::optional<std::vector<QVector>> lambda_basis;
  QVector xi0;
  std::optional<SparsePoly> poly;
  std::optional<std::vector<Cplx>> z;
  std::optional<ZFromXi> z_from_xi;
  JobBounds bounds;
  unsigned long seed = 0;
};

namespace detail {

inline Rat json_rat(const Json& j) {
  if (j.is_string()) return parse_rat(j.get<std::string>());
  if (j.is_number_integer()) return Rat(j.get<long>());
  throw std::invalid_argument("expected an integer or a \"p/q\" string");
}

inline QVector json_qvector(const Json& j, int len, const char* what) {
  if (!j.is_array() || int(j.size()) != len)
    throw std::invalid_argument(std::string(what) + ": expected an array of length " +
                                std::to_string(len));
  QVector v;
  for (const auto& e : j) v.push_back(json_rat(e));
  return v;
}

inline Json rat_json(const Rat& q) { return Json(rat_str(q)); }

// Integral rationals print as plain JSON integers.
inline Json int_json(const Rat& q) {
  if (q.get_den() != 1) return rat_json(q);
  return Json(q.get_num().get_si());
}

inline Json double_json(double d) {
  if (!std::isfinite(d)) return Json(nullptr);
  return Json(d);
}

inline Json complex_json(const Cplx& c) {
  return Json::array({double_json(c.real()), double_json(c.imag())});
}

inline Cplx json_complex(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex values are [re, im]");
  return Cplx(j[0].get<double>(), j[1].get<double>());
}

inline SparsePoly json_poly(const Json& j, int nvars) {
  if (!j.is_array()) throw std::invalid_argument("P: expected a list of terms");
  SparsePoly p(nvars);
  for (const auto& term : j) {
    if (!term.contains("coef") || !term.contains("exps"))
      throw std::invalid_argument("P: each term needs coef and exps");
    Expo e;
    for (const auto& x : term["exps"]) {
      int v = x.get<int>();
      if (v < 0) throw std::invalid_argument("P: exponents must be nonnegative");
      e.push_back(v);
    }
    if (int(e.size()) != nvars) throw std::invalid_argument("P: exps must have one entry per covector");
    p.add_term(e, json_rat(term["coef"]));
  }
  return p;
}

inline Json poly_json(const SparsePoly& p) {
  Json out = Json::array();
  for (const auto& [e, c] : p.terms) {
    Json term;
    term["coef"] = rat_str(c);
    term["exps"] = e;
    out.push_back(term);
  }
  return out;
}

}  // namespace detail

inline JobConfig parse_job(const Json& j) {
  JobConfig cfg;
  cfg.name = j.value("name", std::string("job"));
  if (!j.contains("r") || !j.contains("n") || !j.contains("alphas") || !j.contains("xi0"))
    throw std::invalid_argument("config needs r, n, alphas, xi0");
  cfg.r = j["r"].get<int>();
  cfg.n = j["n"].get<int>();
  if (cfg.r <= 0 || cfg.n <= 0) throw std::invalid_argument("r and n must be positive");
  if (!j["alphas"].is_array() || int(j["alphas"].size()) != cfg.n)
    throw std::invalid_argument("alphas: expected n rows");
  for (const auto& row : j["alphas"])
    cfg.alphas.push_back(detail::json_qvector(row, cfg.r, "alphas"));
  if (j.contains("lambda_basis") && !j["lambda_basis"].is_null()) {
    std::vector<QVector> basis;
    for (const auto& row : j["lambda_basis"])
      basis.push_back(detail::json_qvector(row, cfg.r, "lambda_basis"));
    if (int(basis.size()) != cfg.r) throw std::invalid_argument("lambda_basis: expected r rows");
    cfg.lambda_basis = std::move(basis);
  }
  cfg.xi0 = detail::json_qvector(j["xi0"], cfg.r, "xi0");
  if (j.contains("P") && !j["P"].is_null()) {
    cfg.poly = detail::json_poly(j["P"], cfg.n);
    int deg = 0;
    if (!cfg.poly->homogeneous(deg) || deg != cfg.n - cfg.r)
      throw std::invalid_argument("P must be homogeneous of degree n - r");
  }
  if (j.contains("z") && !j["z"].is_null()) {
    std::vector<Cplx> z;
    for (const auto& e : j["z"]) z.push_back(detail::json_complex(e));
    if (int(z.size()) != cfg.n) throw std::invalid_argument("z: expected n entries");
    cfg.z = std::move(z);
  }
  if (j.contains("z_from_xi") && !j["z_from_xi"].is_null()) {
    ZFromXi zf;
    zf.xi = detail::json_qvector(j["z_from_xi"].at("xi"), cfg.r, "z_from_xi.xi");
    if (j["z_from_xi"].contains("phases") && !j["z_from_xi"]["phases"].is_null()) {
      std::vector<double> ph = j["z_from_xi"]["phases"].get<std::vector<double>>();
      if (int(ph.size()) != cfg.n) throw std::invalid_argument("phases: expected n entries");
      zf.phases = std::move(ph);
    }
    cfg.z_from_xi = std::move(zf);
  }
  if (cfg.z && cfg.z_from_xi) throw std::invalid_argument("give either z or z_from_xi, not both");
  if (j.contains("bounds")) {
    const Json& b = j["bounds"];
    cfg.bounds.series_bound = b.value("series_bound", cfg.bounds.series_bound);
    cfg.bounds.tau_min = b.value("tau_min", cfg.bounds.tau_min);
    cfg.bounds.tol = b.value("tol", cfg.bounds.tol);
    cfg.bounds.residual_tol = b.value("residual_tol", cfg.bounds.residual_tol);
    cfg.bounds.margin = b.value("margin", cfg.bounds.margin);
    cfg.bounds.dedup_tol = b.value("dedup_tol", cfg.bounds.dedup_tol);
  }
  cfg.seed = j.value("seed", 0UL);
  return cfg;
}

inline Json serialize_job(const JobConfig& cfg) {
  Json j;
  j["name"] = cfg.name;
  j["r"] = cfg.r;
  j["n"] = cfg.n;
  j["alphas"] = Json::array();
  for (const auto& row : cfg.alphas) {
    Json r = Json::array();
    for (const Rat& x : row) r.push_back(detail::int_json(x));
    j["alphas"].push_back(r);
  }
  if (cfg.lambda_basis) {
    j["lambda_basis"] = Json::array();
    for (const auto& row : *cfg.lambda_basis) {
      Json r = Json::array();
      for (const Rat& x : row) r.push_back(detail::int_json(x));
      j["lambda_basis"].push_back(r);
    }
  }
  j["xi0"] = Json::array();
  for (const Rat& x : cfg.xi0) j["xi0"].push_back(detail::rat_json(x));
  if (cfg.poly) j["P"] = detail::poly_json(*cfg.poly);
  if (cfg.z) {
    j["z"] = Json::array();
    for (const Cplx& c : *cfg.z) j["z"].push_back(detail::complex_json(c));
  }
  if (cfg.z_from_xi) {
    Json zf;
    zf["xi"] = Json::array();
    for (const Rat& x : cfg.z_from_xi->xi) zf["xi"].push_back(detail::rat_json(x));
    if (cfg.z_from_xi->phases) zf["phases"] = *cfg.z_from_xi->phases;
    j["z_from_xi"] = zf;
  }
  Json b;
  b["series_bound"] = cfg.bounds.series_bound;
  b["tau_min"] = cfg.bounds.tau_min;
  b["tol"] = cfg.bounds.tol;
  b["residual_tol"] = cfg.bounds.residual_tol;
  b["margin"] = cfg.bounds.margin;
  b["dedup_tol"] = cfg.bounds.dedup_tol;
  j["bounds"] = b;
  j["seed"] = cfg.seed;
  return j;
}

inline Configuration job_configuration(const JobConfig& cfg) {
  Configuration a = make_configuration(cfg.r, cfg.n, cfg.alphas);
  validate(a);
  return a;
}

// The moduli come from the stagewise solution of the dominant zero-mode flag
// (minimum-norm solution of sum t_i alpha_i = xi as a fallback); the phases
// come from the config or from the seeded generator.
inline std::vector<Cplx> resolve_z(const JobConfig& cfg, const Configuration& a,
                                   const std::vector<Flag>& flags) {
  if (cfg.z) return *cfg.z;
  if (!cfg.z_from_xi) throw std::invalid_argument("config has neither z nor z_from_xi");
  const QVector& xi = cfg.z_from_xi->xi;
  std::vector<double> t;
  bool have_t = false;
  try {
    auto trops = tropical_solutions(a, flags, xi);
    if (!trops.empty()) {
      t = trops[0].ts;
      have_t = true;
    }
  } catch (const std::domain_error&) {
  }
  if (!have_t) {
    // t = A^T (A A^T)^{-1} xi
    QMatrix am(a.r, a.n);
    for (int i = 0; i < a.n; ++i)
      for (int k = 0; k < a.r; ++k) am.at(k, i) = a.alphas[i][k];
    QMatrix gram(a.r, a.r);
    for (int p = 0; p < a.r; ++p)
      for (int q = 0; q < a.r; ++q) {
        Rat s = 0;
        for (int i = 0; i < a.n; ++i) s += am.at(p, i) * am.at(q, i);
        gram.at(p, q) = s;
      }
    auto sol = solve_rational(gram, xi);
    if (!sol) throw std::invalid_argument("cannot solve for moduli: configuration not spanning");
    for (int i = 0; i < a.n; ++i) {
      Rat ti = 0;
      for (int k = 0; k < a.r; ++k) ti += a.alphas[i][k] * sol->x[k];
      t.push_back(to_double(ti));
    }
  }
  std::vector<double> phases;
  if (cfg.z_from_xi->phases) {
    phases = *cfg.z_from_xi->phases;
  } else {
    std::mt19937_64 rng(cfg.seed);
    const double two_pi = 8.0 * std::atan(1.0);
    for (int i = 0; i < a.n; ++i) phases.push_back(two_pi * (double(rng() >> 11) * 0x1.0p-53));
  }
  std::vector<Cplx> z;
  for (int i = 0; i < a.n; ++i) {
    double m = std::exp(-t[i]);
    z.push_back(Cplx(m * std::cos(phases[i]), m * std::sin(phases[i])));
  }
  return z;
}

// Basis used for series indices and homotopy exponents: the configured one
// (validated) or an automatically chosen positive basis of the dual cone.
inline std::vector<QVector> resolve_lambda(const JobConfig& cfg, const Configuration& a,
                                           const Chamber& c) {
  if (!cfg.lambda_basis) return c_positive_basis(a, c);
  const auto& basis = *cfg.lambda_basis;
  Rat d = det(QMatrix::from_rows(basis));
  if (rat_abs(d) != 1) throw std::invalid_argument("lambda_basis must be unimodular");
  DualConeData dual = dual_cone_data(a, c);
  for (const QVector& lam : basis) {
    Rat pairing = 0;
    for (int k = 0; k < a.r; ++k) pairing += a.kappa[k] * lam[k];
    if (pairing <= 0) throw std::invalid_argument("lambda_basis must pair positively with kappa");
    if (!dual.contains(lam))
      throw std::invalid_argument("lambda_basis must lie in the dual cone of the chamber");
  }
  return basis;
}

inline TrackOptions track_options(const JobConfig& cfg) {
  TrackOptions o;
  o.residual_tol = cfg.bounds.residual_tol;
  o.dedup_tol = cfg.bounds.dedup_tol;
  o.margin = cfg.bounds.margin;
  o.seed = cfg.seed;
  return o;
}

namespace detail {

inline Json flag_json(const Flag& f) {
  Json out;
  out["key"] = f.key;
  out["nu"] = f.nu;
  out["d"] = long(f.d.get_si());
  out["kappas"] = Json::array();
  for (const QVector& k : f.kappas) {
    Json row = Json::array();
    for (const Rat& x : k) row.push_back(int_json(x));
    out["kappas"].push_back(row);
  }
  out["stages"] = f.stage_of;
  return out;
}

inline Json points_json(const std::vector<CriticalPoint>& pts) {
  Json out = Json::array();
  for (const auto& p : pts) {
    Json e;
    e["u"] = Json::array();
    for (const Cplx& c : p.u) e["u"].push_back(complex_json(c));
    e["residual"] = double_json(p.residual);
    e["flag"] = p.flag_key;
    e["steps"] = p.steps;
    if (!p.note.empty()) e["note"] = p.note;
    out.push_back(e);
  }
  return out;
}

}  // namespace detail

inline Json run_inspect(const JobConfig& cfg) {
  Configuration a = job_configuration(cfg);
  Chamber c = chamber_of(a, cfg.xi0);
  GalePair g = gale_dual(a);
  auto flags = enumerate_flags(a);
  DualConeData dual = dual_cone_data(a, c);
  Json out;
  out["name"] = cfg.name;
  out["r"] = a.r;
  out["n"] = a.n;
  out["valid"] = true;
  out["kappa"] = Json::array();
  for (const Rat& x : a.kappa) out["kappa"].push_back(detail::int_json(x));
  out["betas"] = Json::array();
  for (const QVector& b : g.betas) {
    Json row = Json::array();
    for (const Rat& x : b) row.push_back(detail::int_json(x));
    out["betas"].push_back(row);
  }
  out["chamber_bind"] = Json::array();
  for (const auto& sigma : c.bind) out["chamber_bind"].push_back(index_set_str(sigma));
  out["flags"] = Json::array();
  for (const Flag& f : flags) out["flags"].push_back(detail::flag_json(f));
  out["dual_cone"] = Json::array();
  for (const QVector& gen : dual.generators) {
    Json row = Json::array();
    for (const Rat& x : gen) row.push_back(detail::int_json(x));
    out["dual_cone"].push_back(row);
  }
  out["lambda_basis"] = Json::array();
  for (const QVector& lam : resolve_lambda(cfg, a, c)) {
    Json row = Json::array();
    for (const Rat& x : lam) row.push_back(detail::int_json(x));
    out["lambda_basis"].push_back(row);
  }
  return out;
}

inline Json run_jk(const JobConfig& cfg, const std::optional<std::vector<int>>& sigma_1based,
                   const std::optional<Json>& fraction, JkMethod method) {
  Configuration a = job_configuration(cfg);
  Chamber c = chamber_of(a, cfg.xi0);
  RatFun phi;
  if (sigma_1based) {
    std::vector<int> sigma;
    for (int i : *sigma_1based) {
      if (i < 1 || i > a.n) throw std::invalid_argument("sigma indices are 1-based");
      sigma.push_back(i - 1);
    }
    phi = basic_fraction(a, sigma);
  } else if (fraction) {
    SparsePoly num = fraction->contains("num") ? detail::json_poly((*fraction)["num"], a.r)
                                               : SparsePoly::constant(a.r, 1);
    std::vector<DenEntry> den;
    if (fraction->contains("den"))
      for (const auto& e : (*fraction)["den"])
        den.push_back({detail::json_qvector(e.at("form"), a.r, "fraction den form"),
                       e.value("mult", 1)});
    phi = make_ratfun(std::move(num), den);
  } else {
    throw std::invalid_argument("jk needs --sigma or --fraction");
  }
  Json out;
  out["name"] = cfg.name;
  out["method"] = method == JkMethod::basic    ? "basic"
                  : method == JkMethod::flags  ? "flags"
                                               : "crosscheck";
  out["value"] = rat_str(jk(a, c, phi, method));
  return out;
}

inline Json run_mp(const JobConfig& cfg, const std::optional<QVector>& lambda, long bound,
                   JkMethod method) {
  Configuration a = job_configuration(cfg);
  Chamber c = chamber_of(a, cfg.xi0);
  if (!cfg.poly) throw std::invalid_argument("config has no P polynomial");
  Json out;
  out["name"] = cfg.name;
  if (lambda) {
    MPIndex ix = make_mp_index(a, *lambda);
    Rat value = mp_number(*cfg.poly, *lambda, a, c, method);
    out["lambda"] = Json::array();
    for (const Rat& x : *lambda) out["lambda"].push_back(detail::int_json(x));
    out["degree"] = ix.degree;
    out["value"] = rat_str(value);
    return out;
  }
  auto flags = enumerate_flags(a);
  auto lambda_basis = resolve_lambda(cfg, a, c);
  std::vector<Cplx> z = resolve_z(cfg, a, flags);
  SeriesResult s = mp_series(*cfg.poly, a, c, lambda_basis, z, bound, method);
  out["bound"] = s.bound;
  out["z"] = Json::array();
  for (const Cplx& x : s.z) out["z"].push_back(detail::complex_json(x));
  out["terms"] = Json::array();
  for (size_t i = 0; i < s.terms.size(); ++i) {
    const MPTerm& t = s.terms[i];
    Json e;
    e["lambda"] = Json::array();
    for (const Rat& x : t.index.lambda) e["lambda"].push_back(detail::int_json(x));
    e["degree"] = t.index.degree;
    e["value"] = rat_str(t.value);
    e["monomial"] = detail::complex_json(s.monomials[i]);
    out["terms"].push_back(e);
  }
  out["partial_sum"] = detail::complex_json(s.partial_sum);
  out["tail_estimate"] = detail::double_json(s.tail_estimate);
  return out;
}

inline std::pair<Json, int> run_bside(const JobConfig& cfg) {
  Configuration a = job_configuration(cfg);
  Chamber c = chamber_of(a, cfg.xi0);
  auto flags = enumerate_flags(a);
  auto lambda_basis = resolve_lambda(cfg, a, c);
  std::vector<Cplx> z = resolve_z(cfg, a, flags);
  TrackOptions opts = track_options(cfg);
  Json out;
  out["name"] = cfg.name;
  BSideResult res;
  try {
    if (cfg.poly) {
      res = toric_residue_sum(*cfg.poly, a, flags, lambda_basis, z, opts);
      out["value"] = detail::complex_json(res.value);
    } else {
      res = critical_points(a, flags, lambda_basis, z, opts);
    }
  } catch (const std::runtime_error& e) {
    out["verified"] = false;
    out["error"] = e.what();
    return {out, 3};
  }
  out["expected_count"] = res.expected_count;
  out["found_count"] = res.found_count;
  out["verified"] = res.verified;
  out["points"] = detail::points_json(res.points);
  if (!res.dropped.empty()) out["dropped"] = detail::points_json(res.dropped);
  out["diagnostics"] = res.diagnostics;
  return {out, res.verified ? 0 : 3};
}

// Runs both sides and compares: exit 0 pass, 1 mismatch, 2 domain refusal,
// 3 unverified numerics. Pass means |difference| <= tol + tail estimate.
inline std::pair<Json, int> run_verify(const JobConfig& cfg, bool force) {
  Configuration a = job_configuration(cfg);
  Chamber c = chamber_of(a, cfg.xi0);
  auto flags = enumerate_flags(a);
  auto lambda_basis = resolve_lambda(cfg, a, c);
  std::vector<Cplx> z = resolve_z(cfg, a, flags);

  Json out;
  out["name"] = cfg.name;
  Json diagnostics = Json::array();

  ConvergenceReport conv = convergence_check(a, c, z, cfg.bounds.tau_min);
  Json domain;
  domain["verdict"] = conv.verdict;
  domain["xi"] = Json::array();
  for (double x : conv.xi) domain["xi"].push_back(detail::double_json(x));
  domain["regularity"] = detail::double_json(to_double(conv.regularity));
  domain["tau_min"] = cfg.bounds.tau_min;
  out["domain"] = domain;
  out["lambda_basis"] = Json::array();
  for (const QVector& lam : lambda_basis) {
    Json row = Json::array();
    for (const Rat& x : lam) row.push_back(detail::int_json(x));
    out["lambda_basis"].push_back(row);
  }
  if (conv.verdict == "outside" && !force) {
    out["error"] = "z lies outside the verified domain; rerun with --force to proceed";
    out["pass"] = false;
    return {out, 2};
  }
  if (conv.verdict != "inside")
    diagnostics.push_back("domain verdict is " + conv.verdict + "; proceeding");

  if (!cfg.poly) throw std::invalid_argument("config has no P polynomial");
  SeriesResult series =
      mp_series(*cfg.poly, a, c, lambda_basis, z, cfg.bounds.series_bound, JkMethod::basic);
  Json aside;
  aside["bound"] = series.bound;
  aside["term_count"] = series.terms.size();
  aside["terms"] = Json::array();
  for (size_t i = 0; i < series.terms.size(); ++i) {
    Json e;
    e["lambda"] = Json::array();
    for (const Rat& x : series.terms[i].index.lambda)
      e["lambda"].push_back(detail::int_json(x));
    e["value"] = rat_str(series.terms[i].value);
    aside["terms"].push_back(e);
  }
  aside["partial_sum"] = detail::complex_json(series.partial_sum);
  aside["tail_estimate"] = detail::double_json(series.tail_estimate);
  out["a_side"] = aside;

  TrackOptions opts = track_options(cfg);
  Json bside;
  BSideResult res;
  bool b_ok = true;
  try {
    res = toric_residue_sum(*cfg.poly, a, flags, lambda_basis, z, opts);
  } catch (const std::runtime_error& e) {
    b_ok = false;
    bside["error"] = e.what();
  }
  if (b_ok) {
    bside["expected_count"] = res.expected_count;
    bside["found_count"] = res.found_count;
    bside["verified"] = res.verified;
    bside["value"] = detail::complex_json(res.value);
    bside["points"] = detail::points_json(res.points);
    for (const auto& d : res.diagnostics) diagnostics.push_back(d);
  }
  out["b_side"] = bside;
  out["diagnostics"] = diagnostics;

  if (!b_ok || !res.verified) {
    out["pass"] = false;
    return {out, 3};
  }
  if (!std::isfinite(series.tail_estimate)) {
    out["diagnostics"].push_back("series tail estimate is not finite; cannot certify");
    out["pass"] = false;
    return {out, 3};
  }
  double diff = std::abs(series.partial_sum - res.value);
  Json cmp;
  cmp["difference"] = detail::double_json(diff);
  cmp["tolerance"] = cfg.bounds.tol;
  cmp["tail_estimate"] = detail::double_json(series.tail_estimate);
  bool pass = diff <= cfg.bounds.tol + series.tail_estimate;
  cmp["pass"] = pass;
  out["comparison"] = cmp;
  out["pass"] = pass;
  return {out, pass ? 0 : 1};
}

}  // namespace torres
