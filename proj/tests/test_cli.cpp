#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fermisea/commands.hpp"
#include "json.hpp"

using namespace fermisea;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  auto tick = std::chrono::steady_clock::now().time_since_epoch().count();
  fs::path p = fs::temp_directory_path() / ("fermisea-" + tag + "-" + std::to_string(tick));
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json base_config(const std::string& command) {
  return json{{"spec_version", 1}, {"command", command}, {"parameters", json::object()}};
}

json audit_params(const std::string& w2_shape) {
  return json{{"state", {{"kind", "fermi_dirac"}, {"beta", 1.0}, {"mu", 1.0}}},
              {"potential",
               {{"w1", {{"shape", "gaussian"}, {"amplitude", 0.3}, {"sigma", 1.0}}},
                {"w2", {{"shape", w2_shape}, {"amplitude", 0.3}, {"sigma", 1.0}}}}},
              {"d", 3}};
}

}  // namespace

TEST_CASE("run configs parse strictly") {
  json good = base_config("hypothesis-audit");
  RunConfig rc = parse_run_config(good);
  CHECK(rc.command == "hypothesis-audit");
  CHECK(rc.master_seed == 0);
  CHECK(rc.workers == 1);
  CHECK_FALSE(rc.override_audit);

  json j = good;
  j["mystery"] = 1;
  CHECK_THROWS_AS(parse_run_config(j), ParameterError);

  j = good;
  j["spec_version"] = 2;
  CHECK_THROWS_AS(parse_run_config(j), ParameterError);
  j["spec_version"] = "1";
  CHECK_THROWS_AS(parse_run_config(j), ParameterError);

  j = good;
  j.erase("command");
  CHECK_THROWS_AS(parse_run_config(j), ParameterError);
  j["command"] = "frobnicate";
  CHECK_THROWS_AS(parse_run_config(j), ParameterError);

  j = good;
  j["master_seed"] = 123;
  j["workers"] = 3;
  rc = parse_run_config(j);
  CHECK(rc.master_seed == 123);
  CHECK(rc.workers == 3);
}

TEST_CASE("config files load or reject cleanly") {
  fs::path dir = fresh_dir("cfg");
  fs::path good = dir / "good.json";
  std::ofstream(good) << base_config("hypothesis-audit").dump();
  RunConfig rc = load_run_config(good.string());
  CHECK(rc.command == "hypothesis-audit");

  fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK_THROWS_AS(load_run_config(bad.string()), ParameterError);
  CHECK_THROWS_AS(load_run_config((dir / "absent.json").string()), ParameterError);
  fs::remove_all(dir);
}

TEST_CASE("seed streams are reproducible per index and distinct across indices") {
  RngStream a = seed_stream(7, 3), b = seed_stream(7, 3);
  bool same = true;
  for (int i = 0; i < 5; ++i) same = same && a.uniform() == b.uniform();
  CHECK(same);

  RngStream c = seed_stream(7, 3), d = seed_stream(7, 4), e = seed_stream(8, 3);
  bool all_d = true, all_e = true;
  for (int i = 0; i < 5; ++i) {
    double x = c.uniform();
    all_d = all_d && x == d.uniform();
    all_e = all_e && x == e.uniform();
  }
  CHECK_FALSE(all_d);
  CHECK_FALSE(all_e);
}

TEST_CASE("unknown parameter keys are rejected at dispatch") {
  json cfg = base_config("multiplier-scan");
  cfg["parameters"] = {{"stat", 1}};
  RunConfig rc = parse_run_config(cfg);
  rc.output_dir = fresh_dir("rej").string();
  CHECK_THROWS_AS(run(rc), ParameterError);
  fs::remove_all(rc.output_dir);
}

TEST_CASE("multiplier-scan writes a complete, reproducible report") {
  json cfg = base_config("multiplier-scan");
  cfg["parameters"] = {{"state", {{"kind", "fermi_dirac"}, {"beta", 1.0}, {"mu", 1.0}}},
                       {"d", 3},
                       {"tau", {{"min", -2.0}, {"max", 2.0}, {"count", 3}}},
                       {"xi", {{"min", 0.4}, {"max", 1.2}, {"count", 2}}},
                       {"nodes", 24}};
  cfg["master_seed"] = 5;

  RunConfig rc = parse_run_config(cfg);
  rc.output_dir = fresh_dir("scan1").string();
  RunResult r1 = run(rc);
  CHECK(r1.exit_code == 0);
  CHECK(fs::path(r1.artifact_dir).filename().string().rfind("multiplier-scan-", 0) == 0);
  CHECK(fs::exists(fs::path(r1.artifact_dir) / "report.json"));
  CHECK(fs::exists(fs::path(r1.artifact_dir) / "multiplier.csv"));

  json rep = json::parse(slurp(fs::path(r1.artifact_dir) / "report.json"));
  CHECK(rep.at("command") == "multiplier-scan");
  CHECK(rep.at("spec_version") == 1);
  CHECK(rep.at("master_seed") == 5);
  CHECK(rep.at("pass") == true);
  CHECK_FALSE(rep.contains("timestamp"));
  const json& res = rep.at("results");
  for (const char* key : {"tau_grid", "xi_grid", "re", "im", "state", "quadrature"}) CHECK(res.contains(key));
  CHECK(res.at("tau_grid").size() == 3);
  CHECK(res.at("xi_grid").size() == 2);
  CHECK(res.at("re").size() == 3);
  CHECK(res.at("re").at(0).size() == 2);

  RunConfig rc2 = rc;
  rc2.output_dir = fresh_dir("scan2").string();
  RunResult r2 = run(rc2);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(fs::path(r1.artifact_dir) / "report.json") == slurp(fs::path(r2.artifact_dir) / "report.json"));

  fs::remove_all(rc.output_dir);
  fs::remove_all(rc2.output_dir);
}

TEST_CASE("hypothesis-audit distinguishes admissible and inadmissible pairs") {
  json cfg = base_config("hypothesis-audit");
  cfg["parameters"] = audit_params("vanishing_origin");
  RunConfig rc = parse_run_config(cfg);
  rc.output_dir = fresh_dir("aud1").string();
  RunResult good = run(rc);
  CHECK(good.exit_code == 0);
  json rep = json::parse(slurp(fs::path(good.artifact_dir) / "report.json"));
  CHECK(rep.at("pass") == true);
  for (const auto& item : rep.at("results").at("items")) {
    for (const char* key : {"item", "value", "bound", "pass", "margin"}) CHECK(item.contains(key));
    CHECK(item.at("pass") == true);
  }
  CHECK(fs::exists(fs::path(good.artifact_dir) / "audit.csv"));
  fs::remove_all(rc.output_dir);

  cfg["parameters"] = audit_params("gaussian");
  rc = parse_run_config(cfg);
  rc.output_dir = fresh_dir("aud2").string();
  RunResult bad = run(rc);
  CHECK(bad.exit_code == 2);
  rep = json::parse(slurp(fs::path(bad.artifact_dir) / "report.json"));
  CHECK(rep.at("pass") == false);
  int failures = 0;
  for (const auto& item : rep.at("results").at("items"))
    if (item.at("pass") == false) {
      ++failures;
      CHECK(item.at("item") == "w2_low_frequency_sup");
    }
  CHECK(failures == 1);
  fs::remove_all(rc.output_dir);
}

TEST_CASE("solve runs end to end with artifacts and bit-stable reports") {
  json cfg = base_config("solve");
  cfg["parameters"] = {
      {"solver",
       {{"state", {{"kind", "fermi_dirac"}, {"beta", 1.0}, {"mu", 1.0}}},
        {"potential",
         {{"w1", {{"shape", "gaussian"}, {"amplitude", 0.3}, {"sigma", 1.0}}},
          {"w2", {{"shape", "vanishing_origin"}, {"amplitude", 0.3}, {"sigma", 1.0}}}}},
        {"grid", {{"space", {{"d", 3}, {"n", 4}}}, {"horizon", 2.0}, {"nt", 8}}},
        {"M", 4},
        {"N_max", 4}}},
      {"q0", {{"preset", "wave_packets"}, {"rank", 2}, {"target_norm", 0.01}}}};
  cfg["master_seed"] = 11;

  RunConfig rc = parse_run_config(cfg);
  rc.output_dir = fresh_dir("solve1").string();
  RunResult r1 = run(rc);
  CHECK(r1.exit_code == 0);
  for (const char* f : {"report.json", "iterates.csv", "scattering.csv"})
    CHECK(fs::exists(fs::path(r1.artifact_dir) / f));
  CHECK(fs::exists(fs::path(r1.artifact_dir) / "fields" / "phi.bin"));
  CHECK(fs::exists(fs::path(r1.artifact_dir) / "fields" / "phi.json"));

  json rep = json::parse(slurp(fs::path(r1.artifact_dir) / "report.json"));
  CHECK(rep.at("pass") == true);
  const json& res = rep.at("results");
  CHECK(res.at("converged") == true);
  CHECK(res.at("residual").get<double>() < 1e-4);
  CHECK(res.at("q0_norm").get<double>() == doctest::Approx(0.01));
  CHECK(res.at("iterates").size() >= 1);

  RunConfig rc2 = rc;
  rc2.output_dir = fresh_dir("solve2").string();
  RunResult r2 = run(rc2);
  CHECK(slurp(fs::path(r1.artifact_dir) / "report.json") == slurp(fs::path(r2.artifact_dir) / "report.json"));
  CHECK(slurp(fs::path(r1.artifact_dir) / "fields" / "phi.bin") ==
        slurp(fs::path(r2.artifact_dir) / "fields" / "phi.bin"));

  fs::remove_all(rc.output_dir);
  fs::remove_all(rc2.output_dir);
}

TEST_CASE("scatter-check passes on the trivial datum") {
  json cfg = base_config("scatter-check");
  cfg["parameters"] = {
      {"solver",
       {{"state", {{"kind", "fermi_dirac"}, {"beta", 1.0}, {"mu", 1.0}}},
        {"potential",
         {{"w1", {{"shape", "gaussian"}, {"amplitude", 0.3}, {"sigma", 1.0}}},
          {"w2", {{"shape", "vanishing_origin"}, {"amplitude", 0.3}, {"sigma", 1.0}}}}},
        {"grid", {{"space", {{"d", 3}, {"n", 4}}}, {"horizon", 2.0}, {"nt", 8}}}}},
      {"q0", {{"preset", "zero"}}}};
  RunConfig rc = parse_run_config(cfg);
  rc.output_dir = fresh_dir("scat").string();
  RunResult r = run(rc);
  CHECK(r.exit_code == 0);
  json rep = json::parse(slurp(fs::path(r.artifact_dir) / "report.json"));
  CHECK(rep.at("pass") == true);
  fs::remove_all(rc.output_dir);
}
