#include <catch2/catch_amalgamated.hpp>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "support.hpp"
#include "torres/job.hpp"

using torres::Json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string(TORRES_BIN) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  RunResult r;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture(const std::string& name) { return testsupport::fixture_path(name); }

std::string write_temp(const std::string& name, const Json& j) {
  std::filesystem::path p = std::filesystem::temp_directory_path() / name;
  std::ofstream out(p);
  out << j.dump(2) << "\n";
  return p.string();
}

Json base_p2() {
  Json j;
  j["name"] = "tmp";
  j["r"] = 1;
  j["n"] = 3;
  j["alphas"] = Json::array({Json::array({1}), Json::array({1}), Json::array({1})});
  j["xi0"] = Json::array({"1"});
  j["P"] = Json::array({{{"coef", "1"}, {"exps", Json::array({1, 1, 0})}}});
  return j;
}

}  // namespace

TEST_CASE("inspect reports the combinatorial structure") {
  RunResult r = run("inspect " + fixture("f1.json"));
  REQUIRE(r.code == 0);
  Json j = Json::parse(r.out);
  REQUIRE(j["r"] == 2);
  REQUIRE(j["n"] == 4);
  REQUIRE(j["valid"] == true);
  REQUIRE(j["kappa"] == Json::array({3, 2}));
  REQUIRE(j["betas"] == Json::array({Json::array({-1, -1}), Json::array({1, 0}),
                                     Json::array({0, -1}), Json::array({0, 1})}));
  REQUIRE(j["flags"].size() == 3);
  REQUIRE(j["dual_cone"] == Json::array({Json::array({0, 1}), Json::array({1, -1})}));
  REQUIRE(j["lambda_basis"] == Json::array({Json::array({0, 1}), Json::array({1, -1})}));
  REQUIRE(j["chamber_bind"].size() == 4);
  bool has13 = false;
  for (const auto& s : j["chamber_bind"])
    if (s == "{1,3}") has13 = true;
  REQUIRE(has13);
}

TEST_CASE("jk evaluates basic fractions exactly") {
  REQUIRE(Json::parse(run("jk " + fixture("f1.json") + " --sigma 1,3").out)["value"] == "1");
  REQUIRE(Json::parse(run("jk " + fixture("f1.json") + " --sigma 3,4").out)["value"] == "0");
  for (std::string m : {"basic", "flags", "crosscheck"}) {
    RunResult r = run("jk " + fixture("f1.json") + " --sigma 1,4 --method " + m);
    REQUIRE(r.code == 0);
    Json j = Json::parse(r.out);
    REQUIRE(j["method"] == m);
    REQUIRE(j["value"] == "1");
  }
  RunResult fr = run("jk " + fixture("p2.json") +
                     " --fraction '{\"den\":[{\"form\":[\"1\"],\"mult\":1}]}'");
  REQUIRE(fr.code == 0);
  REQUIRE(Json::parse(fr.out)["value"] == "1");
}

TEST_CASE("mp reports single indices and truncated series") {
  RunResult one = run("mp " + fixture("p2.json") + " --lambda 1");
  REQUIRE(one.code == 0);
  Json j1 = Json::parse(one.out);
  REQUIRE(j1["value"] == "27");
  REQUIRE(j1["degree"] == 3);

  RunResult ser = run("mp " + fixture("p2.json") + " --bound 9");
  REQUIRE(ser.code == 0);
  Json js = Json::parse(ser.out);
  REQUIRE(js["bound"] == 9);
  REQUIRE(js["terms"].size() == 4);
  REQUIRE(js["terms"][3]["value"] == "19683");
  REQUIRE(js.contains("partial_sum"));
  REQUIRE(js.contains("tail_estimate"));
}

TEST_CASE("verify passes on the shipped examples") {
  for (std::string name : {"p2.json", "p1p1.json", "f1.json"}) {
    RunResult r = run("verify " + fixture(name));
    INFO(name << "\n" << r.out);
    REQUIRE(r.code == 0);
    Json j = Json::parse(r.out);
    REQUIRE(j["pass"] == true);
    REQUIRE(j["comparison"]["pass"] == true);
    REQUIRE(j["b_side"]["verified"] == true);
  }
}

TEST_CASE("invalid configurations are refused with exit code two") {
  Json bad;
  bad["name"] = "bad";
  bad["r"] = 1;
  bad["n"] = 2;
  bad["alphas"] = Json::array({Json::array({1}), Json::array({-1})});
  bad["xi0"] = Json::array({"1"});
  RunResult r = run("inspect " + write_temp("torres_cli_bad.json", bad), true);
  REQUIRE(r.code == 2);
  REQUIRE(r.out.find("invalid input") != std::string::npos);

  RunResult missing = run("inspect /nonexistent/torres_nope.json", true);
  REQUIRE(missing.code == 2);
}

TEST_CASE("weights outside the verified domain are refused unless forced") {
  Json j = base_p2();
  j["z"] = Json::array({Json::array({1.5, 0.0}), Json::array({1.5, 0.0}), Json::array({1.5, 0.0})});
  std::string path = write_temp("torres_cli_outside.json", j);
  RunResult r = run("verify " + path);
  REQUIRE(r.code == 2);
  Json rep = Json::parse(r.out);
  REQUIRE(rep["domain"]["verdict"] == "outside");
  REQUIRE(rep["pass"] == false);

  RunResult forced = run("verify " + path + " --force");
  REQUIRE(forced.code == 3);
}

TEST_CASE("a degenerate localization is reported, not summed") {
  Json j = base_p2();
  double third = 1.0 / 3.0;
  j["z"] = Json::array(
      {Json::array({third, 0.0}), Json::array({third, 0.0}), Json::array({third, 0.0})});
  std::string path = write_temp("torres_cli_disc.json", j);
  RunResult r = run("verify " + path);
  REQUIRE(r.code == 3);
  Json rep = Json::parse(r.out);
  std::string err = rep["b_side"]["error"].get<std::string>();
  REQUIRE(err.find("nearly vanishes") != std::string::npos);
}

TEST_CASE("reports are byte for byte deterministic") {
  RunResult a = run("verify " + fixture("f1.json"));
  RunResult b = run("verify " + fixture("f1.json"));
  REQUIRE(a.code == 0);
  REQUIRE(a.out == b.out);
  RunResult c = run("bside " + fixture("p1p1.json"));
  RunResult d = run("bside " + fixture("p1p1.json"));
  REQUIRE(c.code == 0);
  REQUIRE(c.out == d.out);
}

TEST_CASE("config serialization round trips") {
  for (std::string name : {"p2.json", "p1p1.json", "f1.json"}) {
    std::ifstream in(fixture(name));
    Json raw = Json::parse(in);
    torres::JobConfig cfg = torres::parse_job(raw);
    Json once = torres::serialize_job(cfg);
    Json twice = torres::serialize_job(torres::parse_job(once));
    REQUIRE(once.dump() == twice.dump());
  }
}
