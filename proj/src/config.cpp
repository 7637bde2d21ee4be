#include "kvh/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kvh {
namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::config_error, "config error at " + path + ": " + what);
}

void require_keys(const json& obj, const std::string& path, const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) config_fail(path + "." + key, "unknown key");
  }
}

const json& need(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) config_fail(path + "." + key, "missing required field");
  return *it;
}

double need_number(const json& obj, const std::string& path, const char* key) {
  const json& v = need(obj, path, key);
  if (!v.is_number()) config_fail(path + "." + key, "expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) config_fail(path + "." + key, "expected a number");
  return it->get<double>();
}

long long integer_or(const json& obj, const std::string& path, const char* key, long long fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) config_fail(path + "." + key, "expected an integer");
  return it->get<long long>();
}

std::string need_string(const json& obj, const std::string& path, const char* key) {
  const json& v = need(obj, path, key);
  if (!v.is_string()) config_fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_array(const json& v, const std::string& path, std::size_t want = 0) {
  if (!v.is_array()) config_fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) config_fail(path, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  if (want != 0 && out.size() != want)
    config_fail(path, "expected " + std::to_string(want) + " entries, got " + std::to_string(out.size()));
  return out;
}

HamiltonianModel parse_model(Scenario scenario, const json& obj, const std::string& path) {
  switch (scenario) {
    case Scenario::harmonic: {
      require_keys(obj, path, {"k"});
      return HamiltonianModel::harmonic(need_number(obj, path, "k"));
    }
    case Scenario::anharmonic: {
      require_keys(obj, path, {"a", "b"});
      return HamiltonianModel::anharmonic(need_number(obj, path, "a"), need_number(obj, path, "b"));
    }
    case Scenario::kepler: {
      require_keys(obj, path, {"mu", "lambda", "r_min"});
      return HamiltonianModel::kepler_reduced(need_number(obj, path, "mu"), need_number(obj, path, "lambda"),
                                              number_or(obj, path, "r_min", 1e-3));
    }
  }
  config_fail(path, "unreachable scenario");
}

}  // namespace

PhaseGrid RunConfig::make_grid() const {
  return PhaseGrid(n, grid.lower, grid.upper, grid.points);
}

RunConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config_error, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail(ErrorCode::config_error, "config error at $: expected a JSON object");
  const std::string R = "$";
  require_keys(root, R,
               {"scenario", "model", "n", "hbar", "formalism", "representation", "grid", "sampler",
                "initial_state", "dt", "steps", "diagnostics_every", "cfl_safety", "decay_tolerance",
                "checkpoints", "snapshots", "output_dir", "checks", "tolerances"});

  RunConfig cfg;
  const std::string scen = need_string(root, R, "scenario");
  if (scen == "harmonic")
    cfg.scenario = Scenario::harmonic;
  else if (scen == "anharmonic")
    cfg.scenario = Scenario::anharmonic;
  else if (scen == "kepler")
    cfg.scenario = Scenario::kepler;
  else
    config_fail("$.scenario", "must be one of harmonic, anharmonic, kepler");

  cfg.n = static_cast<int>(integer_or(root, R, "n", 1));
  if (cfg.n < 1 || cfg.n > 3) config_fail("$.n", "must be 1, 2 or 3");
  cfg.hbar = number_or(root, R, "hbar", 1.0);
  if (!(cfg.hbar > 0)) config_fail("$.hbar", "must be > 0");

  cfg.model = parse_model(cfg.scenario, need(root, R, "model"), "$.model");

  const std::string form = root.contains("formalism") ? need_string(root, R, "formalism") : "kvh";
  if (form == "kvn")
    cfg.formalism = Formalism::kvn;
  else if (form == "kvh")
    cfg.formalism = Formalism::kvh;
  else
    config_fail("$.formalism", "must be kvn or kvh");

  const std::string rep = root.contains("representation") ? need_string(root, R, "representation") : "grid";
  if (rep == "grid")
    cfg.representation = Representation::grid;
  else if (rep == "characteristics")
    cfg.representation = Representation::characteristics;
  else
    config_fail("$.representation", "must be grid or characteristics");

  // initial state
  {
    const json& st = need(root, R, "initial_state");
    const std::string P = "$.initial_state";
    require_keys(st, P, {"kind", "center_q", "center_p", "sigma", "phase_wavevector"});
    const std::string kind = need_string(st, P, "kind");
    if (kind != "gaussian") config_fail(P + ".kind", "only gaussian initial states are catalogued");
    const auto cq = number_array(need(st, P, "center_q"), P + ".center_q", cfg.n);
    const auto cp = number_array(need(st, P, "center_p"), P + ".center_p", cfg.n);
    cfg.initial_state.center = make_point(cfg.n, cq, cp);
    cfg.initial_state.sigma = need_number(st, P, "sigma");
    if (!(cfg.initial_state.sigma > 0)) config_fail(P + ".sigma", "must be > 0");
    if (st.contains("phase_wavevector")) {
      const auto k = number_array(st["phase_wavevector"], P + ".phase_wavevector", 2 * cfg.n);
      for (int a = 0; a < 2 * cfg.n; ++a) cfg.initial_state.phase_wavevector[a] = k[a];
    }
  }

  if (cfg.representation == Representation::grid) {
    if (cfg.n > 2)
      config_fail("$.representation", "grid representation requires n <= 2 (grids are infeasible at n = 3)");
    const json& gr = need(root, R, "grid");
    const std::string P = "$.grid";
    require_keys(gr, P, {"bounds", "points"});
    const json& bounds = need(gr, P, "bounds");
    if (!bounds.is_array() || bounds.size() != static_cast<std::size_t>(2 * cfg.n))
      config_fail(P + ".bounds", "expected 2n [lo, hi] pairs (q axes then p axes)");
    for (std::size_t a = 0; a < bounds.size(); ++a) {
      const auto pair = number_array(bounds[a], P + ".bounds[" + std::to_string(a) + "]", 2);
      cfg.grid.lower.push_back(pair[0]);
      cfg.grid.upper.push_back(pair[1]);
      if (!(pair[0] < pair[1]))
        config_fail(P + ".bounds[" + std::to_string(a) + "]", "lower bound must be below upper bound");
    }
    const json& pts = need(gr, P, "points");
    if (!pts.is_array() || pts.size() != static_cast<std::size_t>(2 * cfg.n))
      config_fail(P + ".points", "expected 2n point counts");
    for (std::size_t a = 0; a < pts.size(); ++a) {
      if (!pts[a].is_number_integer()) config_fail(P + ".points", "expected integers");
      const int c = pts[a].get<int>();
      if (c < 8) config_fail(P + ".points[" + std::to_string(a) + "]", "grids need at least 8 points per axis");
      cfg.grid.points.push_back(c);
    }
    if (cfg.scenario == Scenario::kepler) {
      // the q box must stay clear of the excluded ball |q| < r_min
      double dist2 = 0;
      for (int a = 0; a < cfg.n; ++a) {
        const double lo = cfg.grid.lower[a], hi = cfg.grid.upper[a];
        double d = 0;
        if (lo > 0)
          d = lo;
        else if (hi < 0)
          d = -hi;
        dist2 += d * d;
      }
      if (std::sqrt(dist2) < cfg.model.r_min())
        config_fail("$.grid.bounds", "kepler grids must exclude the singular region |q| < r_min");
    }
    cfg.dt = need_number(root, R, "dt");
    cfg.steps = integer_or(root, R, "steps", 0);
    if (cfg.steps < 1) config_fail("$.steps", "must be a positive integer");
    cfg.diagnostics_every = integer_or(root, R, "diagnostics_every", 1);
    if (cfg.diagnostics_every < 1) config_fail("$.diagnostics_every", "must be a positive integer");
    if (root.contains("snapshots"))
      cfg.snapshots = number_array(root["snapshots"], "$.snapshots");
    if (root.contains("checkpoints")) config_fail("$.checkpoints", "only valid for representation = characteristics");
  } else {
    if (root.contains("grid")) config_fail("$.grid", "only valid for representation = grid");
    if (root.contains("snapshots")) config_fail("$.snapshots", "only valid for representation = grid");
    const json& sm = need(root, R, "sampler");
    const std::string P = "$.sampler";
    require_keys(sm, P, {"sample_count", "seed", "fd_step_rel"});
    cfg.sampler.sample_count = integer_or(sm, P, "sample_count", 1 << 16);
    if (cfg.sampler.sample_count < 16) config_fail(P + ".sample_count", "must be at least 16");
    const long long seed = integer_or(sm, P, "seed", 0);
    cfg.sampler.seed = static_cast<std::uint64_t>(seed);
    cfg.sampler.fd_step_rel = number_or(sm, P, "fd_step_rel", 1e-4);
    if (!(cfg.sampler.fd_step_rel > 0)) config_fail(P + ".fd_step_rel", "must be > 0");
    cfg.dt = need_number(root, R, "dt");
    const json& cps = need(root, R, "checkpoints");
    cfg.checkpoints = number_array(cps, "$.checkpoints");
    if (cfg.checkpoints.empty()) config_fail("$.checkpoints", "need at least one checkpoint");
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
      if (cfg.checkpoints[i] < 0) config_fail("$.checkpoints", "times must be >= 0");
      if (i > 0 && !(cfg.checkpoints[i] > cfg.checkpoints[i - 1]))
        config_fail("$.checkpoints", "times must be strictly increasing");
    }
  }
  if (!(cfg.dt > 0)) config_fail("$.dt", "must be > 0");
  cfg.cfl_safety = number_or(root, R, "cfl_safety", 0.5);
  if (!(cfg.cfl_safety > 0) || cfg.cfl_safety > 1) config_fail("$.cfl_safety", "must lie in (0, 1]");
  cfg.decay_tolerance = number_or(root, R, "decay_tolerance", 1e-10);
  if (!(cfg.decay_tolerance > 0)) config_fail("$.decay_tolerance", "must be > 0");

  if (root.contains("output_dir")) cfg.output_dir = need_string(root, R, "output_dir");
  if (root.contains("checks")) {
    const json& cs = root["checks"];
    if (!cs.is_array()) config_fail("$.checks", "expected an array of check names");
    for (const auto& c : cs) {
      if (!c.is_string()) config_fail("$.checks", "expected strings");
      cfg.checks.push_back(c.get<std::string>());
    }
  }
  if (root.contains("tolerances")) {
    const json& ts = root["tolerances"];
    if (!ts.is_object()) config_fail("$.tolerances", "expected an object of name -> tolerance");
    for (const auto& [key, value] : ts.items()) {
      if (!value.is_number()) config_fail("$.tolerances." + key, "expected a number");
      cfg.tolerance_overrides[key] = value.get<double>();
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::harmonic: return "harmonic";
    case Scenario::anharmonic: return "anharmonic";
    case Scenario::kepler: return "kepler";
  }
  return "?";
}

const char* formalism_name(Formalism f) { return f == Formalism::kvh ? "kvh" : "kvn"; }

const char* representation_name(Representation r) {
  return r == Representation::grid ? "grid" : "characteristics";
}

}  // namespace kvh
