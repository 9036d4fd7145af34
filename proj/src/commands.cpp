#include "fermisea/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "fermisea/dynamics.hpp"
#include "fermisea/linear_response.hpp"
#include "fermisea/solver.hpp"
#include "fermisea/strichartz.hpp"

namespace fermisea {

namespace fs = std::filesystem;
using nlohmann::json;

RngStream seed_stream(std::uint64_t master_seed, std::uint64_t task_index) {
  return RngStream(master_seed, task_index);
}

RunConfig parse_run_config(const json& j) {
  reject_unknown_keys(j, {"spec_version", "command", "parameters", "master_seed", "output_dir", "workers"},
                      "config");
  if (!j.contains("spec_version") || !j["spec_version"].is_number_integer() || j["spec_version"].get<int>() != 1)
    throw ParameterError("config: \"spec_version\" must be the integer 1");
  RunConfig rc;
  if (!j.contains("command") || !j["command"].is_string()) throw ParameterError("config: missing \"command\"");
  rc.command = j["command"].get<std::string>();
  static const std::set<std::string> known = {"multiplier-scan", "invertibility-check", "hypothesis-audit",
                                             "strichartz-scan", "optimality-probe", "wave-series",
                                             "solve",           "scatter-check"};
  if (!known.count(rc.command)) throw ParameterError("config: unknown command \"" + rc.command + "\"");
  rc.parameters = j.value("parameters", json::object());
  if (!rc.parameters.is_object()) throw ParameterError("config: \"parameters\" must be an object");
  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_unsigned() && !j["master_seed"].is_number_integer())
      throw ParameterError("config: \"master_seed\" must be an integer");
    rc.master_seed = j["master_seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ParameterError("config: \"output_dir\" must be a string");
    rc.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("workers")) {
    if (!j["workers"].is_number_integer()) throw ParameterError("config: \"workers\" must be an integer");
    rc.workers = j["workers"].get<int>();
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  return parse_run_config(j);
}

namespace {

std::vector<double> parse_axis(const json& j, const std::string& where, bool log_spaced = false) {
  reject_unknown_keys(j, {"min", "max", "count"}, where);
  if (!j.contains("min") || !j.contains("max") || !j.contains("count"))
    throw ParameterError(where + ": need \"min\", \"max\", \"count\"");
  double lo = j["min"].get<double>(), hi = j["max"].get<double>();
  int count = j["count"].get<int>();
  if (count < 1) throw ParameterError(where + ": \"count\" must be >= 1");
  std::vector<double> out;
  if (count == 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    double s = double(i) / (count - 1);
    out.push_back(log_spaced ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s);
  }
  return out;
}

double adaptive_t_cut(double xi_abs) { return std::clamp(9.5 / std::max(xi_abs, 1e-12), 2.0, 50.0); }

void write_report(const std::string& dir, const RunConfig& rc, JsonNode config_echo, JsonNode results,
                  bool pass) {
  JsonNode top = JsonNode::object();
  top.set("command", JsonNode::str(rc.command));
  top.set("spec_version", JsonNode::integer(1));
  top.set("master_seed", JsonNode::integer(std::int64_t(rc.master_seed)));
  top.set("audit_override", JsonNode::boolean(rc.override_audit));
  top.set("config_echo", std::move(config_echo));
  top.set("results", std::move(results));
  top.set("pass", JsonNode::boolean(pass));
  write_text_file((fs::path(dir) / "report.json").string(), top.dump());
}

JsonNode scattering_echo(const ScatteringTable& t) {
  JsonNode arr = JsonNode::array();
  for (std::size_t i = 0; i < t.s.size(); ++i) {
    JsonNode row = JsonNode::object();
    row.set("t1", JsonNode::num(t.t1[i]));
    row.set("t2", JsonNode::num(t.t2[i]));
    row.set("s", JsonNode::num(t.s[i]));
    arr.push(std::move(row));
  }
  return arr;
}

// ---- multiplier-scan ----------------------------------------------------

int cmd_multiplier_scan(const RunConfig& rc, std::string* dir_out) {
  const json& p = rc.parameters;
  reject_unknown_keys(p, {"state", "d", "tau", "xi", "nodes", "compare_timedomain", "tolerance"},
                      "parameters");
  if (!p.contains("state") || !p.contains("d") || !p.contains("tau") || !p.contains("xi"))
    throw ParameterError("multiplier-scan: need \"state\", \"d\", \"tau\", \"xi\"");
  ReferenceState st = parse_state(p["state"], "parameters.state");
  int d = p["d"].get<int>();
  std::vector<double> taus = parse_axis(p["tau"], "parameters.tau");
  std::vector<double> xis = parse_axis(p["xi"], "parameters.xi");
  int nodes = p.value("nodes", 64);
  bool compare = p.value("compare_timedomain", false);
  double tol = p.value("tolerance", 1e-3);

  std::string dir = make_artifact_dir(rc.output_dir, rc.command);
  *dir_out = dir;

  JsonNode echo = JsonNode::object();
  echo.set("state", state_echo(st));
  echo.set("d", JsonNode::integer(d));
  echo.set("nodes", JsonNode::integer(nodes));
  echo.set("compare_timedomain", JsonNode::boolean(compare));
  echo.set("tolerance", JsonNode::num(tol));

  JsonNode results = JsonNode::object();
  bool pass = true;
  try {
    MultiplierTable table = multiplier_table(st, d, taus, xis, nodes);
    double scale = 0.0;
    for (const auto& row : table.values)
      for (cplx v : row) scale = std::max(scale, std::abs(v));

    CsvWriter csv((fs::path(dir) / "multiplier.csv").string(),
                  compare ? std::vector<std::string>{"tau", "xi_abs", "re_spectral", "im_spectral",
                                                     "re_timedomain", "im_timedomain", "rel_dev"}
                          : std::vector<std::string>{"tau", "xi_abs", "re_spectral", "im_spectral"});
    double max_rel = 0.0;
    for (std::size_t a = 0; a < taus.size(); ++a)
      for (std::size_t b = 0; b < xis.size(); ++b) {
        cplx sp = table.values[a][b];
        csv.field(taus[a]);
        csv.field(xis[b]);
        csv.field(sp.real());
        csv.field(sp.imag());
        if (compare) {
          cplx td = multiplier_timedomain(st, d, taus[a], xis[b], adaptive_t_cut(xis[b]));
          double rel = std::abs(sp - td) / std::max(std::abs(sp), 1e-3 * scale);
          max_rel = std::max(max_rel, rel);
          csv.field(td.real());
          csv.field(td.imag());
          csv.field(rel);
        }
        csv.end_row();
      }
    JsonNode tg = JsonNode::array(), xg = JsonNode::array();
    for (double t : table.tau_grid) tg.push(JsonNode::num(t));
    for (double x : table.xi_grid) xg.push(JsonNode::num(x));
    JsonNode re = JsonNode::array(), im = JsonNode::array();
    for (const auto& row : table.values) {
      JsonNode rr = JsonNode::array(), ri = JsonNode::array();
      for (cplx v : row) {
        rr.push(JsonNode::num(v.real()));
        ri.push(JsonNode::num(v.imag()));
      }
      re.push(std::move(rr));
      im.push(std::move(ri));
    }
    results.set("tau_grid", std::move(tg));
    results.set("xi_grid", std::move(xg));
    results.set("re", std::move(re));
    results.set("im", std::move(im));
    results.set("state", JsonNode::str(table.state_label));
    results.set("quadrature", JsonNode::str(table.quadrature_note));
    results.set("points", JsonNode::integer(std::int64_t(taus.size() * xis.size())));
    results.set("scale", JsonNode::num(scale));
    if (compare) {
      results.set("max_rel_dev", JsonNode::num(max_rel));
      pass = max_rel < tol;
    }
  } catch (const std::runtime_error& e) {
    results.set("error", JsonNode::str(e.what()));
    pass = false;
  }
  write_report(dir, rc, std::move(echo), std::move(results), pass);
  return pass ? 0 : 2;
}

// ---- invertibility-check ------------------------------------------------

int cmd_invertibility_check(const RunConfig& rc, std::string* dir_out) {
  const json& p = rc.parameters;
  reject_unknown_keys(p, {"state", "potential", "d", "tau", "xi", "delta"}, "parameters");
  if (!p.contains("state") || !p.contains("potential") || !p.contains("d") || !p.contains("tau") ||
      !p.contains("xi"))
    throw ParameterError("invertibility-check: need \"state\", \"potential\", \"d\", \"tau\", \"xi\"");
  ReferenceState st = parse_state(p["state"], "parameters.state");
  Potential pot = parse_potential(p["potential"], "parameters.potential");
  int d = p["d"].get<int>();
  std::vector<double> taus = parse_axis(p["tau"], "parameters.tau");
  std::vector<double> xis = parse_axis(p["xi"], "parameters.xi");
  double delta = p.value("delta", 0.1);

  std::string dir = make_artifact_dir(rc.output_dir, rc.command);
  *dir_out = dir;

  JsonNode echo = JsonNode::object();
  echo.set("state", state_echo(st));
  echo.set("potential", potential_echo(pot));
  echo.set("d", JsonNode::integer(d));
  echo.set("delta", JsonNode::num(delta));

  JsonNode results = JsonNode::object();
  bool pass = true;
  try {
    InvertibilityReport rep = invertibility_scan(st, pot, d, taus, xis, delta);
    MultiplierTable table = multiplier_table(st, d, taus, xis, 32);
    CsvWriter csv((fs::path(dir) / "margins.csv").string(), {"tau", "xi_abs", "margin"});
    for (std::size_t a = 0; a < taus.size(); ++a)
      for (std::size_t b = 0; b < xis.size(); ++b) {
        csv.field(taus[a]);
        csv.field(xis[b]);
        csv.field(std::abs(1.0 + pot.symbol(xis[b]) * table.values[a][b]));
        csv.end_row();
      }
    results.set("min_abs", JsonNode::num(rep.min_abs));
    results.set("tau_at_min", JsonNode::num(rep.tau_at_min));
    results.set("xi_at_min", JsonNode::num(rep.xi_at_min));
    results.set("static_row_min", JsonNode::num(rep.static_row_min));
    results.set("small_xi_deviation", JsonNode::num(rep.small_xi_deviation));
    results.set("offaxis_max_im", JsonNode::num(rep.offaxis_max_im));
    results.set("origin_epsilon", JsonNode::num(rep.origin_epsilon));
    results.set("origin_condition_pass", JsonNode::boolean(rep.origin_condition_pass));
    pass = rep.pass;
  } catch (const std::runtime_error& e) {
    results.set("error", JsonNode::str(e.what()));
    pass = false;
  }
  write_report(dir, rc, std::move(echo), std::move(results), pass);
  return pass ? 0 : 2;
}

// ---- hypothesis-audit ---------------------------------------------------

int cmd_hypothesis_audit(const RunConfig& rc, std::string* dir_out) {
  const json& p = rc.parameters;
  reject_unknown_keys(p, {"state", "potential", "weights", "d"}, "parameters");
  if (!p.contains("state") || !p.contains("potential") || !p.contains("d"))
    throw ParameterError("hypothesis-audit: need \"state\", \"potential\", \"d\"");
  ReferenceState st = parse_state(p["state"], "parameters.state");
  Potential pot = parse_potential(p["potential"], "parameters.potential");
  SobolevWeights w = p.contains("weights") ? parse_weights(p["weights"], "parameters.weights") : SobolevWeights{};
  int d = p["d"].get<int>();

  std::string dir = make_artifact_dir(rc.output_dir, rc.command);
  *dir_out = dir;

  JsonNode echo = JsonNode::object();
  echo.set("state", state_echo(st));
  echo.set("potential", potential_echo(pot));
  echo.set("weights", weights_echo(w));
  echo.set("d", JsonNode::integer(d));

  JsonNode results = JsonNode::object();
  bool pass = true;
  try {
    AuditReport rep = hypothesis_audit(st, pot, w, d);
    CsvWriter csv((fs::path(dir) / "audit.csv").string(), {"item", "value", "bound", "pass", "margin"});
    JsonNode items = JsonNode::array();
    for (const AuditItem& it : rep.items) {
      csv.field(it.item);
      csv.field(it.value);
      csv.field(it.bound);
      csv.field(std::string(it.pass ? "true" : "false"));
      csv.field(it.margin);
      csv.end_row();
      JsonNode row = JsonNode::object();
      row.set("item", JsonNode::str(it.item));
      row.set("value", JsonNode::num(it.value));
      row.set("bound", JsonNode::num(it.bound));
      row.set("pass", JsonNode::boolean(it.pass));
      row.set("margin", JsonNode::num(it.margin));
      items.push(std::move(row));
    }
    results.set("alpha0", JsonNode::num(rep.alpha0));
    results.set("items", std::move(items));
    results.set("all_pass", JsonNode::boolean(rep.all_pass));
    pass = rep.all_pass;
  } catch (const std::runtime_error& e) {
    results.set("error", JsonNode::str(e.what()));
    pass = false;
  }
  write_report(dir, rc, std::move(echo), std::move(results), pass);
  return pass ? 0 : 2;
}

// ---- strichartz-scan ----------------------------------------------------

int cmd_strichartz_scan(const RunConfig& rc, std::string* dir_out) {
  const json& p = rc.parameters;
  reject_unknown_keys(p, {"d", "alpha_tilde", "triples", "xi_min", "xi_max", "points_per_decade", "tau_samples"},
                      "parameters");
  int d = p.value("d", 3);
  double at = p.value("alpha_tilde", 0.5);
  double xi_min = p.value("xi_min", 1.0);
  double xi_max = p.value("xi_max", 1000.0);
  int ppd = p.value("points_per_decade", 6);
  int tau_samples = p.value("tau_samples", 33);

  struct Triple {
    double a1, a2, a0;
    bool expect_growth;
  };
  std::vector<Triple> triples;
  if (p.contains("triples")) {
    if (!p["triples"].is_array()) throw ParameterError("strichartz-scan: \"triples\" must be an array");
    for (const auto& t : p["triples"]) {
      reject_unknown_keys(t, {"alpha1", "alpha2", "alpha0", "expect_growth"}, "parameters.triples[]");
      triples.push_back(
          {t.at("alpha1").get<double>(), t.at("alpha2").get<double>(), t.at("alpha0").get<double>(),
           t.value("expect_growth", false)});
    }
  } else {
    // the three regularity branches at d=3, alpha_tilde=1/2, plus one
    // deliberately out-of-regime probe that must show growth; the third-branch
    // witness sits at alpha0 = min with transverse margin 2a1-(d-1) = 2 so the
    // profile flattens inside the scanned window
    triples = {{0.6, 0.6, 0.2, false}, {1.0, 1.0, 0.91, false}, {1.5, 1.5, 1.5, false}, {0.6, 0.6, 0.5, true}};
  }

  std::string dir = make_artifact_dir(rc.output_dir, rc.command);
  *dir_out = dir;

  JsonNode echo = JsonNode::object();
  echo.set("d", JsonNode::integer(d));
  echo.set("alpha_tilde", JsonNode::num(at));
  echo.set("xi_min", JsonNode::num(xi_min));
  echo.set("xi_max", JsonNode::num(xi_max));
  echo.set("points_per_decade", JsonNode::integer(ppd));
  echo.set("tau_samples", JsonNode::integer(tau_samples));

  JsonNode results = JsonNode::object();
  bool pass = true;
  try {
    int decades = std::max(1, int(std::ceil(std::log10(xi_max / xi_min))));
    std::vector<double> xi_grid;
    for (int i = 0; i <= decades * ppd; ++i)
      xi_grid.push_back(xi_min * std::pow(10.0, double(i) / ppd));
    std::vector<double> tau_grid;
    for (int i = 0; i < tau_samples; ++i) tau_grid.push_back(double(i) / (tau_samples - 1));

    CsvWriter csv((fs::path(dir) / "profiles.csv").string(),
                  {"triple", "alpha1", "alpha2", "alpha0", "xi_abs", "value"});
    JsonNode arr = JsonNode::array();
    for (std::size_t ti = 0; ti < triples.size(); ++ti) {
      StrichartzParams sp;
      sp.d = d;
      sp.alpha_tilde = at;
      sp.alpha1 = triples[ti].a1;
      sp.alpha2 = triples[ti].a2;
      sp.alpha0 = triples[ti].a0;
      UniformBoundReport rep = uniform_bound_scan(sp, tau_grid, xi_grid);
      for (std::size_t i = 0; i < rep.profile_xi.size(); ++i) {
        csv.field(std::int64_t(ti));
        csv.field(sp.alpha1);
        csv.field(sp.alpha2);
        csv.field(sp.alpha0);
        csv.field(rep.profile_xi[i]);
        csv.field(rep.profile_value[i]);
        csv.end_row();
      }
      bool ok = triples[ti].expect_growth ? rep.tail_slope >= 0.5 : std::abs(rep.tail_slope) <= 0.05;
      pass = pass && ok;
      JsonNode row = JsonNode::object();
      row.set("alpha1", JsonNode::num(sp.alpha1));
      row.set("alpha2", JsonNode::num(sp.alpha2));
      row.set("alpha0", JsonNode::num(sp.alpha0));
      row.set("expect_growth", JsonNode::boolean(triples[ti].expect_growth));
      row.set("sup", JsonNode::num(rep.sup));
      row.set("tail_slope", JsonNode::num(rep.tail_slope));
      row.set("pass", JsonNode::boolean(ok));
      arr.push(std::move(row));
    }
    results.set("triples", std::move(arr));
  } catch (const std::runtime_error& e) {
    results.set("error", JsonNode::str(e.what()));
    pass = false;
  }
  write_report(dir, rc, std::move(echo), std::move(results), pass);
  return pass ? 0 : 2;
}

// ---- optimality-probe ---------------------------------------------------

int cmd_optimality_probe(const RunConfig& rc, std::string* dir_out) {
  const json& p = rc.parameters;
  reject_unknown_keys(p, {"family", "d", "alpha_tilde", "alpha0", "alpha1", "alpha2", "n_list"}, "parameters");
  std::string family = p.value("family", "low_frequency");
  int d = p.value("d", 3);
  std::vector<int> n_list;
  if (p.contains("n_list")) {
    for (const auto& n : p["n_list"]) n_list.push_back(n.get<int>());
  } else {
    n_list = {8, 16, 32, 64};
  }

  std::string dir = make_artifact_dir(rc.output_dir, rc.command);
  *dir_out = dir;

  JsonNode echo = JsonNode::object();
  echo.set("family", JsonNode::str(family));
  echo.set("d", JsonNode::integer(d));

  JsonNode results = JsonNode::object();
  bool pass = true;
  try {
    SlopeReport rep;
    if (family == "low_frequency") {
      double at = p.value("alpha_tilde", 0.4);
      echo.set("alpha_tilde", JsonNode::num(at));
      rep = probe_lowfreq(at, n_list, d);
    } else if (family == "high_frequency") {
      StrichartzParams sp;
      sp.d = d;
      sp.alpha_tilde = p.value("alpha_tilde", 0.5);
      sp.alpha0 = p.value("alpha0", 1.1);
      sp.alpha1 = p.value("alpha1", 1.1);
      sp.alpha2 = p.value("alpha2", 1.1);
      echo.set("alpha_tilde", JsonNode::num(sp.alpha_tilde));
      echo.set("alpha0", JsonNode::num(sp.alpha0));
      echo.set("alpha1", JsonNode::num(sp.alpha1));
      echo.set("alpha2", JsonNode::num(sp.alpha2));
      rep = probe_highfreq(sp, n_list);
    } else {
      throw ParameterError("optimality-probe: unknown family \"" + family + "\"");
    }
    CsvWriter csv((fs::path(dir) / "family.csv").string(), {"n", "value"});
    for (std::size_t i = 0; i < rep.ns.size(); ++i) {
      csv.field(rep.ns[i]);
      csv.field(rep.values[i]);
      csv.end_row();
    }
    results.set("slope", JsonNode::num(rep.slope));
    results.set("predicted", JsonNode::num(rep.predicted));
    results.set("r2", JsonNode::num(rep.r2));
    results.set("log_correction", JsonNode::boolean(rep.log_correction));
    results.set("low_confidence", JsonNode::boolean(rep.low_confidence));
    pass = rep.pass;
    results.set("pass", JsonNode::boolean(pass));
  } catch (const std::runtime_error& e) {
    results.set("error", JsonNode::str(e.what()));
    pass = false;
  }
  write_report(dir, rc, std::move(echo), std::move(results), pass);
  return pass ? 0 : 2;
}

// ---- wave-series --------------------------------------------------------

int cmd_wave_series(const RunConfig& rc, std::string* dir_out) {
  const json& p = rc.parameters;
  reject_unknown_keys(p, {"grid", "ensemble", "target_norm", "n_max", "eps", "modes"}, "parameters");
  if (!p.contains("grid")) throw ParameterError("wave-series: need \"grid\"");
  SpaceTimeGrid grid = parse_st_grid(p["grid"], "parameters.grid");
  int ensemble = p.value("ensemble", 4);
  double target = p.value("target_norm", 0.1);
  int n_max = p.value("n_max", 6);
  double eps = p.value("eps", 0.1);
  int modes = p.value("modes", 3);
  if (ensemble < 1) throw ParameterError("wave-series: \"ensemble\" must be >= 1");

  std::string dir = make_artifact_dir(rc.output_dir, rc.command);
  *dir_out = dir;

  JsonNode echo = JsonNode::object();
  echo.set("grid", st_grid_echo(grid));
  echo.set("ensemble", JsonNode::integer(ensemble));
  echo.set("target_norm", JsonNode::num(target));
  echo.set("n_max", JsonNode::integer(n_max));
  echo.set("eps", JsonNode::num(eps));
  echo.set("modes", JsonNode::integer(modes));

  JsonNode results = JsonNode::object();
  bool pass = true;
  try {
    std::vector<WaveSeriesReport> reps(ensemble);
    parallel_for(std::size_t(ensemble), rc.workers, [&](std::size_t i) {
      RngStream rng = seed_stream(rc.master_seed, i);
      PotentialTrajectory V = random_potential(grid, rng, modes, target);
      reps[i] = factorial_decay_report(V, n_max, eps);
    });
    CsvWriter csv((fs::path(dir) / "decay.csv").string(), {"member", "n", "norm", "bound", "ratio"});
    double max_ratio = 0.0;
    for (int i = 0; i < ensemble; ++i) {
      for (std::size_t k = 0; k < reps[i].n.size(); ++k) {
        csv.field(std::int64_t(i));
        csv.field(std::int64_t(reps[i].n[k]));
        csv.field(reps[i].norms[k]);
        csv.field(reps[i].bounds[k]);
        csv.field(reps[i].ratios[k]);
        csv.end_row();
        max_ratio = std::max(max_ratio, reps[i].ratios[k]);
      }
      pass = pass && reps[i].pass;
    }
    results.set("members", JsonNode::integer(ensemble));
    results.set("max_ratio", JsonNode::num(max_ratio));
    results.set("all_pass", JsonNode::boolean(pass));
  } catch (const std::runtime_error& e) {
    results.set("error", JsonNode::str(e.what()));
    pass = false;
  }
  write_report(dir, rc, std::move(echo), std::move(results), pass);
  return pass ? 0 : 2;
}

// ---- solve / scatter-check ----------------------------------------------

SolverConfig parse_solver_config(const json& j, const std::string& where, bool override_audit) {
  reject_unknown_keys(j,
                      {"state", "potential", "weights", "grid", "M", "N_max", "tol", "max_iter",
                       "smallness_threshold", "b_route"},
                      where);
  if (!j.contains("state") || !j.contains("potential") || !j.contains("grid"))
    throw ParameterError(where + ": need \"state\", \"potential\", \"grid\"");
  SolverConfig cfg;
  cfg.state = parse_state(j["state"], where + ".state");
  cfg.potential = parse_potential(j["potential"], where + ".potential");
  if (j.contains("weights")) cfg.weights = parse_weights(j["weights"], where + ".weights");
  cfg.grid = parse_st_grid(j["grid"], where + ".grid");
  cfg.M = j.value("M", cfg.M);
  cfg.N_max = j.value("N_max", cfg.N_max);
  cfg.tol = j.value("tol", cfg.tol);
  cfg.max_iter = j.value("max_iter", cfg.max_iter);
  cfg.smallness_threshold = j.value("smallness_threshold", cfg.smallness_threshold);
  if (j.contains("b_route")) {
    std::string r = j["b_route"].get<std::string>();
    if (r == "series")
      cfg.b_route = BRoute::Series;
    else if (r == "splitting")
      cfg.b_route = BRoute::Splitting;
    else
      throw ParameterError(where + ": unknown b_route \"" + r + "\"");
  }
  cfg.audit_override = override_audit;
  return cfg;
}

DensityMatrix parse_q0(const json& j, const std::string& where, const SolverConfig& cfg,
                       std::uint64_t master_seed) {
  reject_unknown_keys(j, {"preset", "rank", "alpha", "target_norm"}, where);
  std::string preset = j.value("preset", "zero");
  if (preset == "zero") return DensityMatrix(cfg.grid.space);
  if (preset == "wave_packets") {
    int rank = j.value("rank", 4);
    double alpha = j.value("alpha", cfg.weights.alpha);
    double target = j.value("target_norm", 0.01);
    RngStream rng = seed_stream(master_seed, 0);
    return wave_packet_perturbation(cfg.grid.space, rng, rank, alpha, target);
  }
  throw ParameterError(where + ": unknown preset \"" + preset + "\"");
}

JsonNode solver_echo(const SolverConfig& cfg) {
  JsonNode n = JsonNode::object();
  n.set("state", state_echo(cfg.state));
  n.set("potential", potential_echo(cfg.potential));
  n.set("weights", weights_echo(cfg.weights));
  n.set("grid", st_grid_echo(cfg.grid));
  n.set("M", JsonNode::integer(cfg.M));
  n.set("N_max", JsonNode::integer(cfg.N_max));
  n.set("tol", JsonNode::num(cfg.tol));
  n.set("max_iter", JsonNode::integer(cfg.max_iter));
  n.set("smallness_threshold", JsonNode::num(cfg.smallness_threshold));
  n.set("b_route", JsonNode::str(cfg.b_route == BRoute::Series ? "series" : "splitting"));
  n.set("audit_override", JsonNode::boolean(cfg.audit_override));
  return n;
}

JsonNode record_results(const SolutionRecord& rec) {
  JsonNode results = JsonNode::object();
  JsonNode iters = JsonNode::array();
  for (const IterateStat& it : rec.iterates) {
    JsonNode row = JsonNode::object();
    row.set("k", JsonNode::integer(it.k));
    row.set("delta", JsonNode::num(it.delta));
    row.set("ratio", JsonNode::num(it.ratio));
    iters.push(std::move(row));
  }
  results.set("iterates", std::move(iters));
  results.set("converged", JsonNode::boolean(rec.converged));
  results.set("residual", JsonNode::num(rec.residual));
  results.set("global_bound", JsonNode::num(rec.global_bound));
  results.set("scattering", scattering_echo(rec.scattering));
  results.set("scattering_decreasing", JsonNode::boolean(rec.scattering.decreasing));
  results.set("measured_r", JsonNode::num(rec.measured_r));
  results.set("q0_norm", JsonNode::num(rec.q0_norm));
  results.set("imag_residual", JsonNode::num(rec.imag_residual));
  results.set("smallness_warning", JsonNode::boolean(rec.smallness_warning));
  results.set("truncation_warning", JsonNode::boolean(rec.truncation_warning));
  results.set("audit_pass", JsonNode::boolean(rec.audit_pass));
  return results;
}

int cmd_solve(const RunConfig& rc, std::string* dir_out, bool scattering_only) {
  const json& p = rc.parameters;
  reject_unknown_keys(p, {"solver", "q0", "postsolve"}, "parameters");
  if (!p.contains("solver")) throw ParameterError(rc.command + ": need \"solver\"");
  SolverConfig cfg = parse_solver_config(p["solver"], "parameters.solver", rc.override_audit);
  DensityMatrix q0 = parse_q0(p.value("q0", json{{"preset", "zero"}}), "parameters.q0", cfg, rc.master_seed);
  bool do_postsolve = p.value("postsolve", false);

  std::string dir = make_artifact_dir(rc.output_dir, rc.command);
  *dir_out = dir;

  JsonNode echo = JsonNode::object();
  echo.set("solver", solver_echo(cfg));
  echo.set("q0_preset", JsonNode::str(p.contains("q0") ? p["q0"].value("preset", "zero") : "zero"));

  JsonNode results = JsonNode::object();
  bool pass = true;
  try {
    SolutionRecord rec = picard_solve(q0, cfg);
    results = record_results(rec);

    {
      CsvWriter csv((fs::path(dir) / "iterates.csv").string(), {"k", "delta", "ratio"});
      for (const IterateStat& it : rec.iterates) {
        csv.field(std::int64_t(it.k));
        csv.field(it.delta);
        csv.field(it.ratio);
        csv.end_row();
      }
    }
    {
      CsvWriter csv((fs::path(dir) / "scattering.csv").string(), {"t1", "t2", "s"});
      for (std::size_t i = 0; i < rec.scattering.s.size(); ++i) {
        csv.field(rec.scattering.t1[i]);
        csv.field(rec.scattering.t2[i]);
        csv.field(rec.scattering.s[i]);
        csv.end_row();
      }
    }
    write_field_binary(dir, "phi", rec.phi);

    if (scattering_only) {
      bool zero_table = true;
      for (double s : rec.scattering.s) zero_table = zero_table && s == 0.0;
      pass = rec.converged && (rec.scattering.decreasing || zero_table);
    } else {
      pass = rec.converged && rec.residual < 1e-4;
      if (do_postsolve) {
        PostsolveReport post = postsolve_verify(rec, cfg);
        JsonNode pn = JsonNode::object();
        pn.set("residual", JsonNode::num(post.residual));
        pn.set("global_bound", JsonNode::num(post.global_bound));
        pn.set("extended_bound", JsonNode::num(post.extended_bound));
        pn.set("plateau_ratio", JsonNode::num(post.plateau_ratio));
        pn.set("chain_rhs", JsonNode::num(post.chain_rhs));
        pn.set("chain_ok", JsonNode::boolean(post.chain_ok));
        pn.set("b_route_gap", JsonNode::num(post.b_route_gap));
        pn.set("truncation_budget", JsonNode::num(post.truncation_budget));
        pn.set("verdict", JsonNode::boolean(post.verdict));
        results.set("postsolve", std::move(pn));
        pass = pass && post.chain_ok;
      }
    }
  } catch (const std::runtime_error& e) {
    results.set("error", JsonNode::str(e.what()));
    pass = false;
  }
  write_report(dir, rc, std::move(echo), std::move(results), pass);
  return pass ? 0 : 2;
}

}  // namespace

RunResult run(const RunConfig& rc) {
  RunResult res;
  if (rc.command == "multiplier-scan")
    res.exit_code = cmd_multiplier_scan(rc, &res.artifact_dir);
  else if (rc.command == "invertibility-check")
    res.exit_code = cmd_invertibility_check(rc, &res.artifact_dir);
  else if (rc.command == "hypothesis-audit")
    res.exit_code = cmd_hypothesis_audit(rc, &res.artifact_dir);
  else if (rc.command == "strichartz-scan")
    res.exit_code = cmd_strichartz_scan(rc, &res.artifact_dir);
  else if (rc.command == "optimality-probe")
    res.exit_code = cmd_optimality_probe(rc, &res.artifact_dir);
  else if (rc.command == "wave-series")
    res.exit_code = cmd_wave_series(rc, &res.artifact_dir);
  else if (rc.command == "solve")
    res.exit_code = cmd_solve(rc, &res.artifact_dir, false);
  else if (rc.command == "scatter-check")
    res.exit_code = cmd_solve(rc, &res.artifact_dir, true);
  else
    throw ParameterError("unknown command \"" + rc.command + "\"");
  return res;
}

}  // namespace fermisea
