#include "ptctk/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace ptctk {

namespace {

using json = nlohmann::ordered_json;

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + " must be a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Params params_from(const json& j, const std::string& where) {
  require_object(j, where);
  Params out;
  for (const auto& [key, value] : j.items()) {
    const std::string path = where + "." + key;
    out[key] = value.is_array() ? numbers(value, path)
                                : std::vector<double>{number(value, path)};
  }
  return out;
}

json params_to_json(const Params& params) {
  json out = json::object();
  for (const auto& [key, values] : params) {
    out[key] = values.size() == 1 ? json(values.front()) : json(values);
  }
  return out;
}

/// {"name": "...", "params": {...}} or a bare name.
std::pair<std::string, Params> named_entry(const json& j,
                                           const std::string& where) {
  if (j.is_string()) return {j.get<std::string>(), {}};
  require_object(j, where);
  reject_unknown_keys(j, where, {"name", "params"});
  const json* name = find(j, "name");
  if (!name) throw ConfigError(where + ".name is required");
  Params params;
  if (const json* p = find(j, "params")) params = params_from(*p, where + ".params");
  return {text(*name, where + ".name"), params};
}

EnvelopeSpec envelope_from(const json& j, const std::string& where) {
  require_object(j, where);
  reject_unknown_keys(j, where, {"kind", "value", "rate"});
  EnvelopeSpec e;
  if (const json* k = find(j, "kind")) e.kind = text(*k, where + ".kind");
  if (const json* v = find(j, "value")) e.value = number(*v, where + ".value");
  if (const json* r = find(j, "rate")) e.rate = number(*r, where + ".rate");
  return e;
}

void parse_sim(const json& j, SimOptions& sim) {
  require_object(j, "sim");
  reject_unknown_keys(j, "sim",
                      {"rel_tol", "abs_tol", "epsilon_stop", "max_step",
                       "initial_step", "horizon_multiplier", "grid_points",
                       "max_steps"});
  auto set = [&](const char* key, double& field) {
    if (const json* v = find(j, key)) field = number(*v, std::string("sim.") + key);
  };
  auto set_count = [&](const char* key, std::size_t& field) {
    if (const json* v = find(j, key)) {
      const double d = number(*v, std::string("sim.") + key);
      if (!(d >= 0.0) || d != std::floor(d)) {
        throw ConfigError(std::string("sim.") + key +
                          " must be a non-negative integer");
      }
      field = static_cast<std::size_t>(d);
    }
  };
  set("rel_tol", sim.rel_tol);
  set("abs_tol", sim.abs_tol);
  set("epsilon_stop", sim.epsilon_stop);
  set("max_step", sim.max_step);
  set("initial_step", sim.initial_step);
  set("horizon_multiplier", sim.horizon_multiplier);
  set_count("grid_points", sim.grid_points);
  set_count("max_steps", sim.max_steps);
}

void parse_constraints(const json& j, ScenarioConfig& c) {
  require_object(j, "constraints");
  reject_unknown_keys(j, "constraints",
                      {"state", "input", "overshoot", "overshoot_tol",
                       "terminal_error", "attractivity"});
  if (const json* s = find(j, "state")) {
    require_object(*s, "constraints.state");
    reject_unknown_keys(*s, "constraints.state", {"zeta", "sigma", "tol"});
    StateConstraintConfig sc;
    if (const json* z = find(*s, "zeta")) {
      sc.zeta = envelope_from(*z, "constraints.state.zeta");
    }
    if (const json* v = find(*s, "sigma")) sc.sigma = number(*v, "constraints.state.sigma");
    if (const json* v = find(*s, "tol")) sc.tol = number(*v, "constraints.state.tol");
    c.state_constraint = sc;
  }
  if (const json* in = find(j, "input")) {
    require_object(*in, "constraints.input");
    reject_unknown_keys(*in, "constraints.input", {"upsilon", "tol"});
    InputConstraintConfig ic;
    if (const json* u = find(*in, "upsilon")) {
      ic.upsilon = envelope_from(*u, "constraints.input.upsilon");
    }
    if (const json* v = find(*in, "tol")) ic.tol = number(*v, "constraints.input.tol");
    c.input_constraint = ic;
  }
  if (const json* v = find(j, "overshoot")) c.overshoot = number(*v, "constraints.overshoot");
  if (const json* v = find(j, "overshoot_tol")) {
    c.overshoot_tol = number(*v, "constraints.overshoot_tol");
  }
  if (const json* v = find(j, "terminal_error")) {
    c.terminal_error = number(*v, "constraints.terminal_error");
  }
  if (const json* a = find(j, "attractivity")) {
    require_object(*a, "constraints.attractivity");
    reject_unknown_keys(*a, "constraints.attractivity", {"varsigma"});
    const json* v = find(*a, "varsigma");
    if (!v) throw ConfigError("constraints.attractivity.varsigma is required");
    c.attractivity_varsigma = number(*v, "constraints.attractivity.varsigma");
  }
}

ScenarioConfig parse_document(const json& doc) {
  require_object(doc, "config");
  reject_unknown_keys(doc, "config",
                      {"$schema", "name", "order", "mode", "map", "controller",
                       "disturbance", "gain", "x0", "t0", "tau_list",
                       "constraints", "sim"});
  ScenarioConfig c;
  auto required = [&](const char* key) -> const json& {
    const json* v = find(doc, key);
    if (!v) throw ConfigError(std::string("missing required key '") + key + "'");
    return *v;
  };

  c.name = text(required("name"), "name");
  const double order = number(required("order"), "order");
  if (order != std::floor(order)) throw ConfigError("order must be an integer");
  c.order = static_cast<int>(order);
  if (const json* m = find(doc, "mode")) c.mode = parse_mode(text(*m, "mode"));

  const json& map = required("map");
  require_object(map, "map");
  reject_unknown_keys(map, "map", {"family", "terms"});
  const json* family = find(map, "family");
  if (!family) throw ConfigError("map.family is required");
  c.map_family = text(*family, "map.family");
  const json* terms = find(map, "terms");
  if (!terms || !terms->is_array()) {
    throw ConfigError("map.terms must be an array of [a, b] pairs");
  }
  for (std::size_t i = 0; i < terms->size(); ++i) {
    const auto pair = numbers((*terms)[i], "map.terms[" + std::to_string(i) + "]");
    if (pair.size() != 2) {
      throw ConfigError("map.terms[" + std::to_string(i) + "] must have 2 entries");
    }
    c.map_terms.emplace_back(pair[0], pair[1]);
  }

  if (c.mode != Mode::validate_maps || find(doc, "controller")) {
    std::tie(c.controller, c.controller_params) =
        named_entry(required("controller"), "controller");
  }

  if (const json* d = find(doc, "disturbance")) {
    if (d->is_string()) {
      c.disturbance = d->get<std::string>();
    } else {
      require_object(*d, "disturbance");
      reject_unknown_keys(*d, "disturbance", {"name", "params", "sweeps", "seed"});
      const json* name = find(*d, "name");
      if (!name) throw ConfigError("disturbance.name is required");
      c.disturbance = text(*name, "disturbance.name");
      if (const json* p = find(*d, "params")) {
        c.disturbance_params = params_from(*p, "disturbance.params");
      }
      if (const json* s = find(*d, "sweeps")) {
        const double sweeps = number(*s, "disturbance.sweeps");
        if (sweeps != std::floor(sweeps) || sweeps < 1 || sweeps > 1e6) {
          throw ConfigError("disturbance.sweeps must be an integer in [1, 1e6]");
        }
        c.sweeps = static_cast<int>(sweeps);
      }
      if (const json* s = find(*d, "seed")) {
        if (!s->is_number_unsigned()) {
          throw ConfigError("disturbance.seed must be a non-negative integer");
        }
        c.seed = s->get<std::uint64_t>();
      }
    }
  }

  if (const json* g = find(doc, "gain")) {
    std::tie(c.gain, c.gain_params) = named_entry(*g, "gain");
  }

  c.x0 = numbers(required("x0"), "x0");
  if (const json* t0 = find(doc, "t0")) c.t0 = number(*t0, "t0");
  c.tau_list = numbers(required("tau_list"), "tau_list");
  if (const json* con = find(doc, "constraints")) parse_constraints(*con, c);
  if (const json* sim = find(doc, "sim")) parse_sim(*sim, c.sim);

  validate_config(c);
  return c;
}

void check_envelope(const EnvelopeSpec& e, const std::string& where,
                    bool allow_unbounded) {
  const bool known = e.kind == "constant" || e.kind == "linear_decay" ||
                     e.kind == "exponential" ||
                     (allow_unbounded && e.kind == "unbounded");
  if (!known) throw ConfigError(where + ": unknown envelope kind '" + e.kind + "'");
  if (!(e.value >= 0.0) || !std::isfinite(e.value)) {
    throw ConfigError(where + ".value must be finite and >= 0");
  }
  if (!(e.rate >= 0.0) || !std::isfinite(e.rate)) {
    throw ConfigError(where + ".rate must be finite and >= 0");
  }
}

bool safe_name(const std::string& name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
           ch == '-' || ch == '.';
  });
}

struct Built {
  std::shared_ptr<const TimeMapPair> map;
  SystemSpec sys;
  InfiniteTimeController ctrl;
  Vector x0;
  Vector xi0;
};

Built build_item(const ScenarioConfig& c, double tau, const Params& dist_params) {
  const auto& reg = Registry::instance();
  Built b;
  b.map = std::make_shared<const TimeMapPair>(
      reg.map(c.map_family).build({c.map_terms, tau}, c.order + 1));
  b.x0 = Eigen::Map<const Vector>(c.x0.data(), static_cast<Eigen::Index>(c.x0.size()));
  b.xi0 = initial_condition_map(b.x0, *b.map);
  if (c.mode == Mode::validate_maps && c.controller.empty()) return b;
  const BuildContext ctx{c.order, c.t0, tau, b.xi0};
  b.sys.n = c.order;
  b.sys.t0 = c.t0;
  b.sys.f = reg.disturbance(c.disturbance).build(dist_params, ctx);
  b.sys.g = reg.gain(c.gain).build(c.gain_params, ctx);
  b.ctrl = reg.controller(c.controller).build(c.controller_params, ctx);
  return b;
}

struct Check {
  std::string name;
  bool passed;
  double value;
  double threshold;
};

json checks_json(const std::vector<Check>& checks) {
  json out = json::object();
  for (const auto& ch : checks) {
    out[ch.name] = {{"passed", ch.passed},
                    {"value", ch.value},
                    {"threshold", ch.threshold}};
  }
  return out;
}

json metrics_json(const TrajectoryMetrics& m) {
  return {{"terminal_error", m.terminal_error},
          {"max_norm", m.max_norm},
          {"overshoot", m.overshoot},
          {"constraint_violations", m.constraint_violations}};
}

json trajectory_stats(const Trajectory& t) {
  std::size_t flagged = 0;
  for (auto f : t.flags) flagged += f != kFlagNone;
  return {{"samples", t.size()},
          {"accepted_steps", t.accepted_steps},
          {"rejected_steps", t.rejected_steps},
          {"end_time", t.end_time()},
          {"flagged_samples", flagged}};
}

/// Checks that read the prescribed-time trajectory.
void prescribed_checks(const ScenarioConfig& c, const Built& b, double tau,
                       const Trajectory& traj, std::vector<Check>& checks) {
  const auto& m = traj.metrics;
  const double x0_norm = b.x0.norm();
  if (c.overshoot) {
    const double bound = *c.overshoot * x0_norm + c.overshoot_tol;
    checks.push_back({"overshoot", m.max_norm <= bound, m.max_norm, bound});
  }
  if (c.terminal_error) {
    checks.push_back({"terminal_error", m.terminal_error <= *c.terminal_error,
                      m.terminal_error, *c.terminal_error});
  }
  if (c.state_constraint) {
    const auto& sc = *c.state_constraint;
    const StateConstraint pred(sc.zeta.build(tau), sc.sigma, b.map, c.t0, x0_norm);
    std::size_t violations = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      violations += pred.prescribed_margin(traj.times[i], traj.states[i]) < -sc.tol;
    }
    checks.push_back({"state_constraint", violations == 0,
                      static_cast<double>(violations), 0.0});
  }
  if (c.input_constraint) {
    const auto& ic = *c.input_constraint;
    const InputConstraint pred(ic.upsilon.build(tau), b.sys, b.ctrl, b.map);
    std::size_t violations = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      violations += pred.prescribed_margin(traj.times[i], traj.inputs[i]) < -ic.tol;
    }
    checks.push_back({"input_constraint", violations == 0,
                      static_cast<double>(violations), 0.0});
  }
}

/// Checks that read the associated (infinite-time) trajectory.
void associated_checks(const ScenarioConfig& c, const Built& b, double tau,
                       const Trajectory& traj, std::vector<Check>& checks) {
  if (c.state_constraint) {
    const auto& sc = *c.state_constraint;
    const StateConstraint pred(sc.zeta.build(tau), sc.sigma, b.map, c.t0,
                               b.x0.norm());
    std::size_t violations = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      violations += pred.associated_margin(traj.times[i], traj.states[i]) < -sc.tol;
    }
    checks.push_back({"associated_state_constraint", violations == 0,
                      static_cast<double>(violations), 0.0});
  }
  if (c.input_constraint) {
    const auto& ic = *c.input_constraint;
    const InputConstraint pred(ic.upsilon.build(tau), b.sys, b.ctrl, b.map);
    std::size_t violations = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      violations += pred.associated_margin(traj.times[i], traj.states[i]) < -ic.tol;
    }
    checks.push_back({"associated_input_constraint", violations == 0,
                      static_cast<double>(violations), 0.0});
  }
  if (c.attractivity_varsigma) {
    const bool ok =
        attractivity_check(traj, *b.map, c.t0, *c.attractivity_varsigma);
    const auto& last = traj.states.back();
    const double mapped =
        map_state(last, *b.map, MapSide::mu, traj.end_time(), c.t0).norm();
    checks.push_back({"attractivity", ok, mapped, *c.attractivity_varsigma});
  }
}

struct Item {
  double tau;
  int sweep;
  Params params;
};

struct ItemResult {
  json summary;
  std::vector<std::string> csv_paths;
  bool passed = true;
  bool runtime_error = false;
};

std::string item_stem(const ScenarioConfig& c, const Item& item) {
  return c.name + "_" + tau_label(item.tau) + "_" + std::to_string(item.sweep);
}

ItemResult run_item(const ScenarioConfig& c, const Item& item,
                    const std::filesystem::path& dir) {
  ItemResult r;
  json& s = r.summary;
  s["tau"] = item.tau;
  s["sweep"] = item.sweep;
  s["disturbance_params"] = params_to_json(item.params);

  std::vector<Check> checks;
  const std::string stem = item_stem(c, item);
  auto write = [&](const Trajectory& traj, const std::string& suffix) {
    const std::string file = stem + suffix + ".csv";
    const auto path = (dir / file).string();
    write_csv(traj, path);
    r.csv_paths.push_back(path);
    return file;
  };

  try {
    const Built b = build_item(c, item.tau, item.params);
    switch (c.mode) {
      case Mode::validate_maps: {
        const auto grid = uniform_grid(*b.map, std::max<std::size_t>(c.sim.grid_points, 2));
        const auto report = validate_class(*b.map, grid);
        json failures = json::array();
        for (const auto& f : report.failures) {
          failures.push_back({{"check", f.check}, {"t", f.t}, {"value", f.value}});
        }
        s["points_checked"] = report.points_checked;
        s["failures"] = failures;
        checks.push_back({"class_membership", report.ok(),
                          static_cast<double>(report.failures.size()), 0.0});
        break;
      }
      case Mode::prescribed: {
        const PrescribedTimeController pi(b.sys, b.ctrl, b.map);
        const auto traj = run_prescribed(b.sys, pi, b.x0, c.sim);
        s["csv"] = write(traj, "");
        s["metrics"] = metrics_json(traj.metrics);
        s["trajectory"] = trajectory_stats(traj);
        prescribed_checks(c, b, item.tau, traj, checks);
        break;
      }
      case Mode::associated: {
        const AssociatedSystem assoc(b.sys, b.ctrl, b.map);
        const auto traj = run_associated(assoc, b.xi0, c.sim);
        s["csv"] = write(traj, "");
        s["metrics"] = metrics_json(traj.metrics);
        s["trajectory"] = trajectory_stats(traj);
        associated_checks(c, b, item.tau, traj, checks);
        break;
      }
      case Mode::equivalence: {
        const auto rep = verify_equivalence(b.sys, b.ctrl, *b.map, b.x0, c.sim);
        s["csv"] = write(rep.prescribed, "");
        s["associated_csv"] = write(rep.associated, "_associated");
        s["metrics"] = metrics_json(rep.prescribed.metrics);
        s["trajectory"] = trajectory_stats(rep.prescribed);
        s["associated_trajectory"] = trajectory_stats(rep.associated);
        s["equivalence"] = {{"max_error", rep.max_error},
                            {"threshold", rep.threshold},
                            {"max_state_norm", rep.max_state_norm},
                            {"worst_time", rep.worst_time},
                            {"grid_points", rep.grid_points}};
        checks.push_back({"equivalence", rep.passed, rep.max_error, rep.threshold});
        prescribed_checks(c, b, item.tau, rep.prescribed, checks);
        associated_checks(c, b, item.tau, rep.associated, checks);
        break;
      }
    }
  } catch (const IntegrationError& e) {
    r.runtime_error = true;
    s["error"] = std::string(e.what()) + " (t = " + std::to_string(e.time()) + ")";
  } catch (const std::exception& e) {
    r.runtime_error = true;
    s["error"] = e.what();
  }

  for (const auto& ch : checks) r.passed = r.passed && ch.passed;
  r.passed = r.passed && !r.runtime_error;
  s["checks"] = checks_json(checks);
  s["status"] = r.runtime_error ? "error" : (r.passed ? "pass" : "fail");
  return r;
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::prescribed: return "prescribed";
    case Mode::associated: return "associated";
    case Mode::equivalence: return "equivalence";
    case Mode::validate_maps: return "validate_maps";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::prescribed, Mode::associated, Mode::equivalence,
                 Mode::validate_maps}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown mode '" + name +
                    "' (expected prescribed, associated, equivalence or "
                    "validate_maps)");
}

Envelope EnvelopeSpec::build(double tau) const {
  const double v = value;
  const double k = rate;
  if (kind == "constant") return [v](double) { return v; };
  if (kind == "linear_decay") {
    return [v, tau](double dt) { return v * std::max(0.0, 1.0 - dt / tau); };
  }
  if (kind == "exponential") return [v, k](double dt) { return v * std::exp(-k * dt); };
  if (kind == "unbounded") {
    return [](double) { return std::numeric_limits<double>::infinity(); };
  }
  throw ConfigError("unknown envelope kind '" + kind + "'");
}

std::string tau_label(double tau) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", tau);
  return buf;
}

void validate_config(const ScenarioConfig& c) {
  if (!safe_name(c.name)) {
    throw ConfigError("name must be non-empty and use only [A-Za-z0-9_.-]");
  }
  if (c.order < 1 || c.order > kMaxBellOrder - 1) {
    throw ConfigError("order must lie in [1, " + std::to_string(kMaxBellOrder - 1) + "]");
  }
  if (c.tau_list.empty()) throw ConfigError("tau_list must not be empty");
  for (double tau : c.tau_list) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw ConfigError("tau_list entries must be finite and > 0");
    }
  }
  if (static_cast<int>(c.x0.size()) != c.order) {
    throw ConfigError("x0 has " + std::to_string(c.x0.size()) +
                      " entries but order is " + std::to_string(c.order));
  }
  for (double v : c.x0) {
    if (!std::isfinite(v)) throw ConfigError("x0 entries must be finite");
  }
  if (!std::isfinite(c.t0)) throw ConfigError("t0 must be finite");
  if (c.map_terms.empty()) throw ConfigError("map.terms must not be empty");
  if (c.sweeps < 1) throw ConfigError("disturbance.sweeps must be >= 1");
  if (c.mode != Mode::validate_maps && c.controller.empty()) {
    throw ConfigError("controller is required");
  }
  try {
    c.sim.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("sim: ") + e.what());
  }
  if (c.state_constraint) {
    check_envelope(c.state_constraint->zeta, "constraints.state.zeta", false);
    if (!(c.state_constraint->sigma >= 1.0)) {
      throw ConfigError("constraints.state.sigma must be >= 1");
    }
  }
  if (c.input_constraint) {
    check_envelope(c.input_constraint->upsilon, "constraints.input.upsilon", true);
  }
  if (c.overshoot && !(*c.overshoot > 0.0)) {
    throw ConfigError("constraints.overshoot must be > 0");
  }
  if (c.terminal_error && !(*c.terminal_error > 0.0)) {
    throw ConfigError("constraints.terminal_error must be > 0");
  }
  if (c.attractivity_varsigma && !(*c.attractivity_varsigma >= 0.0)) {
    throw ConfigError("constraints.attractivity.varsigma must be >= 0");
  }

  for (double tau : c.tau_list) {
    try {
      const Params nominal = c.disturbance_params;
      build_item(c, tau, nominal);
      if (c.mode != Mode::validate_maps || !c.controller.empty()) {
        std::mt19937_64 probe(0);
        Registry::instance().disturbance(c.disturbance).sample(nominal, probe);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("tau = " + tau_label(tau) + ": " + e.what());
    }
  }
}

ScenarioConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_document(doc);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Params sweep_parameters(const ScenarioConfig& c, int sweep) {
  if (sweep == 0) return c.disturbance_params;
  std::seed_seq seq{static_cast<std::uint32_t>(c.seed),
                    static_cast<std::uint32_t>(c.seed >> 32),
                    static_cast<std::uint32_t>(sweep)};
  std::mt19937_64 rng(seq);
  return Registry::instance().disturbance(c.disturbance).sample(
      c.disturbance_params, rng);
}

ScenarioOutcome run_scenario(ScenarioConfig c, const RunOptions& options,
                             std::ostream& log) {
  ScenarioOutcome outcome;
  if (options.seed) c.seed = *options.seed;
  if (options.mode) {
    c.mode = *options.mode;
    validate_config(c);
  }
  if (options.jobs < 1) throw ConfigError("jobs must be >= 1");

  const std::filesystem::path dir(options.output_dir);
  std::filesystem::create_directories(dir);

  std::vector<Item> items;
  for (double tau : c.tau_list) {
    for (int sweep = 0; sweep < c.sweeps; ++sweep) {
      items.push_back({tau, sweep, sweep_parameters(c, sweep)});
    }
  }

  std::vector<ItemResult> results(items.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      results[i] = run_item(c, items[i], dir);
      std::lock_guard lock(log_mutex);
      log << "[" << (i + 1) << "/" << items.size() << "] tau="
          << tau_label(items[i].tau) << " sweep=" << items[i].sweep << " "
          << results[i].summary["status"].get<std::string>();
      if (results[i].summary.contains("error")) {
        log << ": " << results[i].summary["error"].get<std::string>();
      }
      log << "\n";
    }
  };
  const int threads =
      std::min<int>(options.jobs, static_cast<int>(std::max<std::size_t>(1, items.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  bool all_passed = true;
  bool runtime_error = false;
  json item_docs = json::array();
  for (auto& r : results) {
    all_passed = all_passed && r.passed;
    runtime_error = runtime_error || r.runtime_error;
    item_docs.push_back(std::move(r.summary));
    for (auto& p : r.csv_paths) outcome.csv_paths.push_back(std::move(p));
  }
  outcome.exit_code =
      runtime_error ? kExitRuntimeError : (all_passed ? kExitPass : kExitCheckFailed);

  json summary = {{"name", c.name},
                  {"mode", to_string(c.mode)},
                  {"order", c.order},
                  {"map", {{"family", c.map_family}, {"terms", c.map_terms}}},
                  {"controller", c.controller},
                  {"disturbance", c.disturbance},
                  {"gain", c.gain},
                  {"seed", c.seed},
                  {"sweeps", c.sweeps},
                  {"tau_list", c.tau_list},
                  {"passed", all_passed},
                  {"exit_code", outcome.exit_code},
                  {"items", std::move(item_docs)}};
  outcome.summary_json = summary.dump(2) + "\n";
  outcome.summary_path = (dir / (c.name + "_summary.json")).string();
  std::ofstream out(outcome.summary_path);
  if (!out) {
    throw std::runtime_error("cannot write '" + outcome.summary_path + "'");
  }
  out << outcome.summary_json;
  return outcome;
}

}  // namespace ptctk
