#include "ptbec_cli/config.hpp"

#include "ptbec/csv.hpp"
#include "ptbec/errors.hpp"
#include "ptbec/fock.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ptbec::cli {
namespace {

enum class Type { Real, Integer, Text, RealList };

struct KeyDef {
  const char* name;
  Type type;
  Value fallback;
  bool optional = false;  ///< no default; only U (alternative to g) uses this
};

struct ScenarioDef {
  Scenario id;
  const char* name;
  const char* summary;
  std::vector<KeyDef> keys;
};

const std::vector<ScenarioDef>& table() {
  using V = std::vector<double>;
  static const std::vector<ScenarioDef> defs = {
      {Scenario::Fig1NonOsciSweep,
       "fig1-nonosci-sweep",
       "non-oscillatory and PT-symmetric angle branches versus gamma (U = 0)",
       {{"J", Type::Real, 1.0},
        {"N0", Type::Integer, 100L},
        {"gamma_min", Type::Real, 0.0},
        {"gamma_max", Type::Real, 2.1},
        {"gamma_steps", Type::Integer, 211L}}},
      {Scenario::Fig2BlochTrajectories,
       "fig2-bloch-trajectories",
       "reduced Bloch trajectories of the U = 0 closed form and the mean-field ground state",
       {{"J", Type::Real, 1.0},
        {"N0", Type::Integer, 100L},
        {"gamma", Type::Real, 1.5},
        {"trajectories", Type::Integer, 6L},
        {"t_final", Type::Real, 100.0},
        {"sample_dt", Type::Real, 0.1},
        {"tolerance", Type::Real, 1e-10},
        {"rel_tol", Type::Real, 1e-10}}},
      {Scenario::Fig3SteadyDistributions,
       "fig3-steady-distributions",
       "site and total number distributions of the master-equation steady state",
       {{"J", Type::Real, 1.0},
        {"N0", Type::Integer, 5L},
        {"g", Type::Real, 0.5},
        {"U", Type::Real, 0.0, true},
        {"gamma", Type::Real, 0.5},
        {"cutoff", Type::Integer, 24L},
        {"tolerance", Type::Real, 1e-10},
        {"truncation_ceiling", Type::Real, 1e-2},
        {"preconditioner", Type::Text, std::string("ilut")},
        {"restart", Type::Integer, 200L},
        {"max_iterations", Type::Integer, 20000L}}},
      {Scenario::Fig4BbrSteadyComponents,
       "fig4-bbr-steady-components",
       "moment-hierarchy steady-state components versus gamma for several g",
       {{"J", Type::Real, 1.0},
        {"N0", Type::Integer, 100L},
        {"mode", Type::Text, std::string("fixed-u")},
        {"g_values", Type::RealList, V{0.1, 0.5, 1.0}},
        {"gamma_min", Type::Real, 0.02},
        {"gamma_max", Type::Real, 2.1},
        {"gamma_steps", Type::Integer, 105L},
        {"tolerance", Type::Real, 1e-10},
        {"boundary_resolution", Type::Real, 1e-4}}},
      {Scenario::Fig5PurityMaps,
       "fig5-purity-maps",
       "steady-state purity and existence over a gamma x g grid",
       {{"J", Type::Real, 1.0},
        {"N0", Type::Integer, 100L},
        {"mode", Type::Text, std::string("fixed-u")},
        {"g_min", Type::Real, 0.0},
        {"g_max", Type::Real, 1.0},
        {"g_steps", Type::Integer, 11L},
        {"gamma_min", Type::Real, 0.05},
        {"gamma_max", Type::Real, 2.1},
        {"gamma_steps", Type::Integer, 42L},
        {"tolerance", Type::Real, 1e-10},
        {"boundary_resolution", Type::Real, 1e-4}}},
      {Scenario::CustomPropagate,
       "custom-propagate",
       "time evolution of a pure condensate with the master equation or the moment hierarchy",
       {{"J", Type::Real, 1.0},
        {"N0", Type::Integer, 5L},
        {"g", Type::Real, 0.0},
        {"U", Type::Real, 0.0, true},
        {"gamma", Type::Real, 0.5},
        {"engine", Type::Text, std::string("master")},
        {"mode", Type::Text, std::string("fixed-u")},
        {"cutoff", Type::Integer, 30L},
        {"theta", Type::Real, std::numbers::pi / 2.0},
        {"phi", Type::Real, 0.0},
        {"t_final", Type::Real, 5.0},
        {"sample_dt", Type::Real, 0.1},
        {"tolerance", Type::Real, 1e-10},
        {"rel_tol", Type::Real, 1e-8},
        {"truncation_ceiling", Type::Real, 1e-6}}},
      {Scenario::CustomSteady,
       "custom-steady",
       "master-equation steady state for arbitrary parameters",
       {{"J", Type::Real, 1.0},
        {"N0", Type::Integer, 2L},
        {"g", Type::Real, 0.0},
        {"U", Type::Real, 0.0, true},
        {"gamma", Type::Real, 0.5},
        {"cutoff", Type::Integer, 24L},
        {"tolerance", Type::Real, 1e-10},
        {"truncation_ceiling", Type::Real, 1e-6},
        {"preconditioner", Type::Text, std::string("ilut")},
        {"restart", Type::Integer, 200L},
        {"max_iterations", Type::Integer, 20000L}}},
  };
  return defs;
}

const ScenarioDef& def_of(Scenario s) {
  for (const auto& d : table()) {
    if (d.id == s) return d;
  }
  throw std::logic_error("scenario missing from the key table");
}

const KeyDef* key_of(const ScenarioDef& d, std::string_view name) {
  for (const auto& k : d.keys) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string at_line(int line, const std::string& msg) {
  return line > 0 ? "line " + std::to_string(line) + ": " + msg : msg;
}

double parse_real(std::string_view s, const std::string& key, int line) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(at_line(line, "'" + key + "' expects a finite number, got '" + std::string(s) + "'"), line);
  }
  return v;
}

long parse_integer(std::string_view s, const std::string& key, int line) {
  long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError(at_line(line, "'" + key + "' expects an integer, got '" + std::string(s) + "'"), line);
  }
  return v;
}

Value parse_value(const KeyDef& k, std::string_view raw, int line) {
  switch (k.type) {
    case Type::Real: return parse_real(raw, k.name, line);
    case Type::Integer: return parse_integer(raw, k.name, line);
    case Type::Text: return std::string(raw);
    case Type::RealList: {
      std::vector<double> out;
      std::string_view rest = raw;
      while (true) {
        const auto comma = rest.find(',');
        const std::string_view item = trim(rest.substr(0, comma));
        if (item.empty()) throw ConfigError(at_line(line, "'" + std::string(k.name) + "' has an empty list item"), line);
        out.push_back(parse_real(item, k.name, line));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
      return out;
    }
  }
  return {};
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line) : std::invalid_argument(message), line_(line) {}

const std::vector<Scenario>& all_scenarios() {
  static const std::vector<Scenario> all = [] {
    std::vector<Scenario> v;
    for (const auto& d : table()) v.push_back(d.id);
    return v;
  }();
  return all;
}

std::string_view scenario_name(Scenario s) { return def_of(s).name; }
std::string_view scenario_summary(Scenario s) { return def_of(s).summary; }

std::optional<Scenario> scenario_from_name(std::string_view name) {
  for (const auto& d : table()) {
    if (name == d.name) return d.id;
  }
  return std::nullopt;
}

std::string format_value(const Value& v) {
  struct {
    std::string operator()(double x) const { return format_number(x); }
    std::string operator()(long x) const { return std::to_string(x); }
    std::string operator()(const std::string& x) const { return x; }
    std::string operator()(const std::vector<double>& xs) const {
      std::string out;
      for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + format_number(xs[i]);
      return out;
    }
  } visitor;
  return std::visit(visitor, v);
}

double ScenarioConfig::real(const std::string& key) const { return std::get<double>(entries_.at(key).value); }
int ScenarioConfig::integer(const std::string& key) const {
  return static_cast<int>(std::get<long>(entries_.at(key).value));
}
const std::string& ScenarioConfig::text(const std::string& key) const {
  return std::get<std::string>(entries_.at(key).value);
}
const std::vector<double>& ScenarioConfig::list(const std::string& key) const {
  return std::get<std::vector<double>>(entries_.at(key).value);
}
bool ScenarioConfig::user_set(const std::string& key) const {
  const auto it = entries_.find(key);
  return it != entries_.end() && it->second.line > 0;
}

double ScenarioConfig::interaction_U() const {
  if (has("U")) return real("U");
  const int N0 = integer("N0");
  const double g = real("g");
  return g == 0.0 ? 0.0 : g / (N0 - 1.0);
}

double ScenarioConfig::interaction_g() const {
  if (has("U")) return real("U") * (integer("N0") - 1.0);
  return real("g");
}

std::vector<std::pair<std::string, std::string>> ScenarioConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("scenario", std::string(scenario_name(scenario_)));
  for (const auto& key : order_) {
    if (key == "U") {
      out.emplace_back("U", format_number(interaction_U()));
      continue;
    }
    if (key == "g") {
      out.emplace_back("g", format_number(interaction_g()));
      continue;
    }
    out.emplace_back(key, format_value(entries_.at(key).value));
  }
  return out;
}

void ScenarioConfig::override_tolerance(double tol) {
  if (!has("tolerance")) {
    throw ConfigError("--tolerance is not used by scenario " + std::string(scenario_name(scenario_)), 0);
  }
  if (!(tol > 0.0) || !std::isfinite(tol)) throw ConfigError("--tolerance must be a positive finite number", 0);
  entries_["tolerance"] = Entry{tol, 0};
}

void ScenarioConfig::validate() const {
  auto line_of = [&](const std::string& key) {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  };
  auto fail = [&](const std::string& key, const std::string& msg) {
    throw ConfigError(at_line(line_of(key), key + ": " + msg), line_of(key));
  };
  auto positive = [&](const std::string& key) {
    if (has(key) && !(real(key) > 0.0)) fail(key, "must be > 0");
  };
  auto at_least = [&](const std::string& key, int lo) {
    if (has(key) && integer(key) < lo) fail(key, "must be >= " + std::to_string(lo));
  };
  auto one_of = [&](const std::string& key, std::initializer_list<const char*> allowed) {
    if (!has(key)) return;
    std::string names;
    for (const char* a : allowed) {
      if (text(key) == a) return;
      names += std::string(names.empty() ? "" : ", ") + a;
    }
    fail(key, "must be one of {" + names + "}, got '" + text(key) + "'");
  };

  positive("J");
  at_least("N0", 1);
  if (has("gamma") && !(real("gamma") >= 0.0)) fail("gamma", "must be >= 0");
  if ((scenario_ == Scenario::Fig3SteadyDistributions || scenario_ == Scenario::CustomSteady) &&
      !(real("gamma") > 0.0)) {
    fail("gamma", "the steady state is only defined for gamma > 0");
  }
  if (has("g") && has("U")) {
    const int l = std::max(line_of("g"), line_of("U"));
    throw ConfigError(at_line(l, "set either U or g, not both"), l);
  }
  if ((has("g") && real("g") != 0.0) && integer("N0") < 2) fail("N0", "g = U (N0 - 1) needs N0 >= 2");

  for (const std::string prefix : {"gamma", "g"}) {
    const std::string lo = prefix + "_min", hi = prefix + "_max", n = prefix + "_steps";
    if (!has(lo)) continue;
    at_least(n, 1);
    if (real(hi) < real(lo)) {
      fail(hi, "range reversed (" + format_number(real(hi)) + " < " + lo + " = " + format_number(real(lo)) + ")");
    }
    if (integer(n) > 1 && !(real(hi) > real(lo))) fail(hi, "needs " + hi + " > " + lo + " for more than one step");
  }
  if (has("g_min") && real("g_min") < 0.0) fail("g_min", "must be >= 0");
  if (has("g_values")) {
    if (list("g_values").empty()) fail("g_values", "must not be empty");
    for (double g : list("g_values")) {
      if (g < 0.0) fail("g_values", "entries must be >= 0");
    }
  }
  if (has("cutoff")) {
    try {
      TwoModeBasis basis(integer("cutoff"));
    } catch (const ptbec::InvalidArgument& e) {
      fail("cutoff", e.what());
    }
  }
  for (const char* k : {"tolerance", "rel_tol", "t_final", "sample_dt", "boundary_resolution", "truncation_ceiling"}) {
    positive(k);
  }
  if (has("truncation_ceiling") && real("truncation_ceiling") > 1.0) fail("truncation_ceiling", "must be <= 1");
  at_least("trajectories", 1);
  at_least("restart", 1);
  at_least("max_iterations", 1);
  one_of("mode", {"fixed-u", "constant-g"});
  one_of("engine", {"master", "bbr"});
  one_of("preconditioner", {"none", "jacobi", "ilut"});
  if (scenario_ == Scenario::CustomPropagate && text("engine") == "master" && integer("N0") > integer("cutoff")) {
    fail("cutoff", "must be >= N0 to hold the initial condensate");
  }
  if (has("theta") && !(real("theta") >= 0.0 && real("theta") <= std::numbers::pi)) fail("theta", "must lie in [0, pi]");
}

ScenarioConfig default_config(Scenario s) {
  ScenarioConfig c;
  c.scenario_ = s;
  for (const KeyDef& k : def_of(s).keys) {
    c.order_.push_back(k.name);
    if (!k.optional) c.entries_[k.name] = Entry{k.fallback, 0};
  }
  c.validate();
  return c;
}

ScenarioConfig parse_config(std::string_view text, std::optional<Scenario> expected) {
  struct Raw {
    std::string value;
    int line;
  };
  std::map<std::string, Raw> raw;
  std::optional<std::pair<std::string, int>> scenario_key;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(at_line(line_no, "expected 'key = value', got '" + std::string(line) + "'"), line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(at_line(line_no, "missing key before '='"), line_no);
    if (value.empty()) throw ConfigError(at_line(line_no, "missing value for '" + key + "'"), line_no);
    if (key == "scenario") {
      if (scenario_key) throw ConfigError(at_line(line_no, "duplicate key 'scenario'"), line_no);
      scenario_key = {value, line_no};
      continue;
    }
    if (!raw.emplace(key, Raw{value, line_no}).second) {
      throw ConfigError(at_line(line_no, "duplicate key '" + key + "' (first set on line " +
                                             std::to_string(raw.at(key).line) + ")"),
                        line_no);
    }
  }

  Scenario s;
  if (scenario_key) {
    const auto named = scenario_from_name(scenario_key->first);
    if (!named) {
      throw ConfigError(at_line(scenario_key->second, "unknown scenario '" + scenario_key->first + "'"),
                        scenario_key->second);
    }
    if (expected && *expected != *named) {
      throw ConfigError(at_line(scenario_key->second, "config is for scenario '" + scenario_key->first +
                                                          "' but '" + std::string(scenario_name(*expected)) +
                                                          "' was requested"),
                        scenario_key->second);
    }
    s = *named;
  } else if (expected) {
    s = *expected;
  } else {
    throw ConfigError("no scenario given: set 'scenario = <name>' or pick a subcommand", 0);
  }

  ScenarioConfig c;
  c.scenario_ = s;
  const ScenarioDef& d = def_of(s);
  for (const KeyDef& k : d.keys) c.order_.push_back(k.name);
  for (const auto& [key, r] : raw) {
    if (!key_of(d, key)) {
      throw ConfigError(at_line(r.line, "unknown key '" + key + "' for scenario " + d.name), r.line);
    }
  }
  const bool u_set = raw.count("U") != 0;
  for (const KeyDef& k : d.keys) {
    const auto it = raw.find(k.name);
    if (it != raw.end()) {
      c.entries_[k.name] = Entry{parse_value(k, it->second.value, it->second.line), it->second.line};
    } else if (!k.optional && !(u_set && std::string_view(k.name) == "g")) {
      c.entries_[k.name] = Entry{k.fallback, 0};
    }
  }
  c.validate();
  return c;
}

}  // namespace ptbec::cli
