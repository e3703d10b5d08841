// torres: inspect configurations, evaluate residues exactly, sum the
// intersection-number series, run the critical-point side, and verify that
// the two sides agree.
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "torres/job.hpp"

namespace {

torres::JobConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  torres::Json j = torres::Json::parse(in);
  return torres::parse_job(j);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

torres::QVector parse_rat_list(const std::string& s) {
  torres::QVector out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(torres::parse_rat(item));
  return out;
}

void emit(const torres::Json& report) { std::cout << report.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toric residue calculator and verifier"};
  app.require_subcommand(1);

  std::string config_path;
  std::string lambda_arg, sigma_arg, fraction_arg, method_arg = "crosscheck";
  long bound_arg = -1;
  double tau_min_arg = -1.0, tol_arg = -1.0;
  long seed_arg = -1;
  bool force = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "job config JSON")->required();
    cmd->add_option("--tau-min", tau_min_arg, "domain regularity threshold");
    cmd->add_option("--tol", tol_arg, "comparison tolerance");
    cmd->add_option("--seed", seed_arg, "seed for phases and multistart");
    cmd->add_option("--bound", bound_arg, "series degree bound");
    cmd->add_option("--method", method_arg, "jk evaluation method: basic|flags|crosscheck");
  };

  CLI::App* cmd_inspect = app.add_subcommand("inspect", "report configuration structure");
  add_common(cmd_inspect);
  CLI::App* cmd_jk = app.add_subcommand("jk", "evaluate a Jeffrey-Kirwan residue exactly");
  add_common(cmd_jk);
  cmd_jk->add_option("--sigma", sigma_arg, "basic fraction by 1-based indices, e.g. 1,3");
  cmd_jk->add_option("--fraction", fraction_arg, "rational function as JSON {num, den}");
  CLI::App* cmd_mp = app.add_subcommand("mp", "intersection numbers / generating series");
  add_common(cmd_mp);
  cmd_mp->add_option("--lambda", lambda_arg, "single index, comma-separated rationals");
  CLI::App* cmd_bside = app.add_subcommand("bside", "track critical points and sum residues");
  add_common(cmd_bside);
  CLI::App* cmd_verify = app.add_subcommand("verify", "compare the series against the point sum");
  add_common(cmd_verify);
  cmd_verify->add_flag("--force", force, "proceed even if z is outside the verified domain");

  CLI11_PARSE(app, argc, argv);

  try {
    torres::JobConfig cfg = load_config(config_path);
    if (bound_arg >= 0) cfg.bounds.series_bound = bound_arg;
    if (tau_min_arg >= 0) cfg.bounds.tau_min = tau_min_arg;
    if (tol_arg >= 0) cfg.bounds.tol = tol_arg;
    if (seed_arg >= 0) cfg.seed = static_cast<unsigned long>(seed_arg);
    torres::JkMethod method = torres::jk_method_of(method_arg);

    if (cmd_inspect->parsed()) {
      emit(torres::run_inspect(cfg));
      return 0;
    }
    if (cmd_jk->parsed()) {
      std::optional<std::vector<int>> sigma;
      std::optional<torres::Json> fraction;
      if (!sigma_arg.empty()) sigma = parse_int_list(sigma_arg);
      if (!fraction_arg.empty()) fraction = torres::Json::parse(fraction_arg);
      emit(torres::run_jk(cfg, sigma, fraction, method));
      return 0;
    }
    if (cmd_mp->parsed()) {
      std::optional<torres::QVector> lambda;
      if (!lambda_arg.empty()) lambda = parse_rat_list(lambda_arg);
      emit(torres::run_mp(cfg, lambda, cfg.bounds.series_bound, method));
      return 0;
    }
    if (cmd_bside->parsed()) {
      auto [report, code] = torres::run_bside(cfg);
      emit(report);
      if (code != 0) std::cerr << "bside: point set not verified\n";
      return code;
    }
    if (cmd_verify->parsed()) {
      auto [report, code] = torres::run_verify(cfg, force);
      emit(report);
      if (code == 2) std::cerr << "verify: refused, z outside the verified domain\n";
      if (code == 3) std::cerr << "verify: numeric side could not be certified\n";
      if (code == 1) std::cerr << "verify: sides disagree beyond tolerance\n";
      return code;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
